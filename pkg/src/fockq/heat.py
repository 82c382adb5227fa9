"""
Integration against the Gaussian measures ``mu_t``: the heat transform, the
mean oscillation and ``BMO*^t`` seminorm built from it, ball variances and the
Hardy-Littlewood maximal function.
"""

from dataclasses import dataclass
import logging
import math
from typing import NamedTuple

import numpy as np

from . import symbols as sym
from ._exact import expand, heat_at, numeric_heat
from .errors import QuadratureConvergenceError
from .quadrature import SamplingGrid, disk_rule, gauss_hermite, polar_rule
from .utils import pairwise_variance, weighted_variance

# negative mean oscillations above -MO_CLIP * scale are round-off
MO_CLIP = 1e-12

# e^{-1/2} |B(a, sqrt(t))|^2 / (4 pi t)^2 in one complex dimension
LOWER_BOUND_CONSTANT = math.exp(-0.5) / 16.0

HARDY_LITTLEWOOD_TERMS = 60
HARDY_LITTLEWOOD_CONSTANT = math.fsum(
    k * math.exp(-(k - 1)) for k in range(1, HARDY_LITTLEWOOD_TERMS + 1)
)

_HEAT_METHODS = ("auto", "quadrature", "hermite")


def _check_t(t, name="t"):
    if not (np.isfinite(t) and t > 0):
        raise ValueError(f"{name} must be positive, got {t}")


def _hermite_heat(f, t, w, order):
    # Re Z and Im Z are independent N(0, 2t)
    rule = gauss_hermite(order)
    x = 2.0 * math.sqrt(t) * rule.nodes
    offsets = (x[:, None] + 1j * x[None, :]).ravel()
    weights = (rule.weights[:, None] * rule.weights[None, :]).ravel() / np.pi
    return sym.evaluate(f, w.ravel()[:, None] - offsets[None, :]) @ weights


def heat_transform(f, t, w, rule=None, method="auto", tol=None):
    """
    The heat transform ``E[f(w - Z)]`` with ``Z ~ mu_t``.

    Parameters
    ----------
    f: Symbol
    t: float
        The weight; must be positive
    w: complex or array_like of complex
        Evaluation point(s)
    rule: PolarRule, optional
        Polar rule used for terms without a closed form (and for every term
        when ``method == "quadrature"``). Defaults to ``polar_rule()``.
    method: {"auto", "quadrature", "hermite"}
        ``"auto"`` integrates polynomial, step, plane-wave and quadratic-phase
        terms in closed form and the rest numerically. ``"quadrature"``
        applies the polar rule to the whole symbol. ``"hermite"`` uses a
        tensor Gauss-Hermite rule of order 48 in ``(Re z, Im z)``.
    tol: float, optional
        When given, numerically integrated parts are recomputed with a
        doubled rule and a ``QuadratureConvergenceError`` is raised if they
        move by more than ``tol``.

    Returns
    -------
    complex or ndarray
        A python complex for scalar ``w``, otherwise an array shaped like
        ``w``.
    """
    _check_t(t)
    if method not in _HEAT_METHODS:
        raise ValueError(f"Unknown heat transform method: {method!r}")
    rule = polar_rule() if rule is None else rule
    arr = np.asarray(w, dtype=np.complex128)
    pts = np.atleast_1d(arr)

    if method == "auto":
        out = heat_at(expand(f), t, pts, rule, tol)
    elif method == "quadrature":
        out = numeric_heat(f, t, pts, rule, tol)
    else:
        out = _hermite_heat(f, t, pts, 48)
        if tol is not None:
            refined = _hermite_heat(f, t, pts, 96)
            err = float(np.max(np.abs(refined - out)))
            if err > tol * max(1.0, float(np.max(np.abs(refined)))):
                raise QuadratureConvergenceError(
                    f"Gauss-Hermite heat transform of {f} did not converge "
                    f"at t={t} (doubling the order changed it by {err:.3e})",
                    estimate=out,
                    refined=refined,
                )

    if arr.ndim == 0:
        return complex(out.ravel()[0])
    return np.asarray(out).reshape(arr.shape)


@dataclass(frozen=True, eq=False)
class HeatField:
    """Values of the heat transform at weight ``t`` on a set of points."""

    t: float
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _check_t(self.t)
        grid = np.asarray(self.grid, dtype=np.complex128).ravel()
        values = np.asarray(self.values, dtype=np.complex128).ravel()
        if grid.shape != values.shape:
            raise ValueError("grid and values must have the same length")
        elif not np.all(np.isfinite(values)):
            raise ValueError("heat transform values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def sup(self):
        return float(np.max(np.abs(self.values), initial=0.0))


def _grid_points(grid, t):
    if isinstance(grid, SamplingGrid):
        return grid.points(t)
    return np.asarray(grid, dtype=np.complex128).ravel()


def heat_field(f, t, grid, rule=None, method="auto"):
    """Evaluate the heat transform of ``f`` on a SamplingGrid or a point array."""
    pts = _grid_points(grid, t)
    return HeatField(t, pts, heat_transform(f, t, pts, rule=rule, method=method))


def heat_deviation(f, t, grid, rule=None):
    """Grid maximum of ``|f~^(t) - f|``."""
    pts = _grid_points(grid, t)
    diff = heat_transform(f, t, pts, rule=rule) - sym.evaluate(f, pts)
    return float(np.max(np.abs(diff)))


def heat_semigroup_check(f, s, t, w, order=32, n_angles=48):
    """
    Compare the heat transform at weight ``s`` of ``f~^(t)`` with ``f~^(s+t)``.

    The outer integral uses a polar rule of ``order`` Laguerre nodes and
    ``n_angles`` angles; the inner field ``f~^(t)`` is computed by polar
    quadrature of ``f`` at every outer node.

    Returns
    -------
    lhs, rhs: complex
    """
    _check_t(s, "s")
    _check_t(t)
    outer = polar_rule(order, n_angles)
    inner_pts = complex(w) - outer.nodes(s).ravel()
    inner = heat_transform(f, t, inner_pts, rule=outer, method="quadrature")
    lhs = complex(inner @ outer.weights().ravel())
    rhs = heat_transform(f, s + t, complex(w))
    return lhs, rhs


def _clip_mo(mo, scale):
    floor = -MO_CLIP * np.maximum(1.0, np.abs(scale))
    if np.any(mo < floor):
        worst = float(np.min(mo))
        raise QuadratureConvergenceError(
            f"mean oscillation came out negative ({worst:.3e}); the quadrature "
            "is not resolving the symbol",
            estimate=worst,
        )
    return np.maximum(mo, 0.0)


def mean_oscillation(f, t, w, rule=None, method="auto"):
    """
    ``MO^t(f)(w) = (|f|^2)~(w) - |f~(w)|^2``.

    Both transforms use the same rule. Round-off negatives are clipped to 0.
    Returns a float for scalar ``w``, otherwise an array.
    """
    f = sym.as_symbol(f)
    sq = heat_transform(sym.Product(f, sym.Conjugate(f)), t, w, rule, method)
    mean = heat_transform(f, t, w, rule, method)
    sq = np.real(sq)
    mo = _clip_mo(np.asarray(sq - np.abs(mean) ** 2), sq)
    if np.ndim(w) == 0:
        return float(mo)
    return mo


def mean_square_deviation(f, t, w, c=None, rule=None):
    """
    ``int |f(w - z) - c|^2 dmu_t(z)`` by direct polar quadrature.

    With ``c = f~^(t)(w)`` (the default) this is the mean oscillation; any
    other constant gives a larger value.
    """
    _check_t(t)
    rule = polar_rule() if rule is None else rule
    w = complex(w)
    if c is None:
        c = heat_transform(f, t, w, rule)
    vals = sym.evaluate(f, w - rule.nodes(t))
    return float(np.sum(rule.weights() * np.abs(vals - c) ** 2))


@dataclass(frozen=True, eq=False)
class OscillationReport:
    """Heat transform and mean oscillation of a symbol over a sampling grid."""

    t: float
    grid: np.ndarray
    heat: np.ndarray
    mo: np.ndarray

    def __post_init__(self):
        mo = np.asarray(self.mo, dtype=np.float64)
        if np.any(mo < 0):
            raise ValueError("mean oscillation values must be non-negative")
        object.__setattr__(self, "mo", mo)

    @property
    def bmo_estimate(self):
        return float(np.sqrt(np.max(self.mo, initial=0.0)))


def oscillation_report(f, t, grid=None, rule=None):
    """
    Evaluate the heat transform and ``MO^t(f)`` on a sampling grid.

    For radial ``f`` both depend on ``|w|`` only, and the grid is reduced to a
    single angle.
    """
    grid = SamplingGrid() if grid is None else grid
    if sym.is_radial(f) and grid.n_angles > 1:
        logging.debug(f"{f} is radial; sampling a single angle per radius")
        grid = grid.radial_only()
    pts = grid.points(t)
    f = sym.as_symbol(f)
    sq = np.real(heat_transform(sym.Product(f, sym.Conjugate(f)), t, pts, rule))
    heat = heat_transform(f, t, pts, rule)
    mo = _clip_mo(sq - np.abs(heat) ** 2, sq)
    return OscillationReport(t, pts, heat, mo)


def bmo_seminorm(f, t, grid=None, rule=None):
    """
    Grid lower bound for ``||f||_{BMO*^t} = sup_w sqrt(MO^t(f)(w))``.

    Parameters
    ----------
    f: Symbol
    t: float
    grid: SamplingGrid, optional
        Defaults to ``SamplingGrid()``
    """
    return oscillation_report(f, t, grid, rule).bmo_estimate


def variance_on_ball(f, center, radius, samples=4096, rtol=1e-8, returned=False):
    """
    Variance of ``f`` over the disk ``B(center, radius)``.

    The variance is computed twice on the same deterministic disk rule: as the
    mean of ``|f - f_E|^2`` and as the pairwise double integral
    ``(2 |E|^2)^-1 int int |f(z) - f(w)|^2``. A ``RuntimeError`` is raised if
    they disagree by more than ``rtol``.

    Returns
    -------
    variance: float
        Or ``(variance, pairwise)`` when ``returned`` is True
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    pts, wts = disk_rule(samples)
    vals = sym.evaluate(f, complex(center) + radius * pts)
    direct = float(weighted_variance(vals, wts))
    pairwise = float(pairwise_variance(vals, wts))
    if not np.isclose(direct, pairwise, rtol=rtol, atol=1e-15):
        raise RuntimeError(
            f"ball variance formulas disagree: {direct!r} vs {pairwise!r}"
        )
    if returned:
        return direct, pairwise
    return direct


def variance_profile(f, center, radii, samples=4096):
    """``variance_on_ball`` over a sequence of radii (typically shrinking)."""
    return np.array([variance_on_ball(f, center, r, samples) for r in radii])


class MOLowerBound(NamedTuple):
    mo: float
    floor: float


def mo_lower_bound_check(f, a, t, samples=4096):
    """
    Both sides of ``MO^t(f)(a) >= C Var_{B(a, sqrt(t))}(f)`` with
    ``C = LOWER_BOUND_CONSTANT``.
    """
    _check_t(t)
    mo = mean_oscillation(f, t, complex(a))
    floor = LOWER_BOUND_CONSTANT * variance_on_ball(f, a, math.sqrt(t), samples)
    return MOLowerBound(mo, floor)


def maximal_function(f, w, radii, samples=4096):
    """
    Largest disk average of ``|f(w - .)|`` over ``radii``.

    This is a lower bound of the Hardy-Littlewood maximal function at ``w``.
    """
    radii = np.asarray(radii, dtype=np.float64).ravel()
    if radii.size == 0:
        raise ValueError("radii must not be empty")
    elif not np.all(radii > 0):
        raise ValueError("radii must be positive")
    pts, wts = disk_rule(samples)
    w = complex(w)
    best = 0.0
    for r in radii:
        best = max(best, float(np.abs(sym.evaluate(f, w - r * pts)) @ wts))
    return best


def hardy_littlewood_radii(t):
    """Radii ``sqrt(4 k t)`` for the shells of the maximal function bound."""
    _check_t(t)
    k = np.arange(1, HARDY_LITTLEWOOD_TERMS + 1)
    return np.sqrt(4.0 * k * t)


def hardy_littlewood_check(f, t, w, samples=4096):
    """Returns ``(|f~^(t)(w)|, C f*(w))``."""
    heat = abs(heat_transform(f, t, complex(w)))
    fstar = maximal_function(f, w, hardy_littlewood_radii(t), samples)
    return heat, HARDY_LITTLEWOOD_CONSTANT * fstar
