"""
Quadrature rules for the Gaussian measures mu_t and the deterministic sampling
grids used wherever a supremum over the plane is estimated.

Under the substitution ``u = |z|**2 / (4t)`` the measure
``dmu_t = (4 pi t)**-1 exp(-|z|**2 / 4t) dv`` becomes
``(2 pi)**-1 exp(-u) du dtheta``, so a polar rule is a Gauss-Laguerre rule in
``u`` paired with an equispaced (trapezoid) rule in ``theta``.
"""

from dataclasses import dataclass
import functools
import math
from typing import Literal, NamedTuple, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    model_validator,
)

_RULE_KINDS = ("laguerre", "hermite", "angular", "legendre")

# numpy's Laguerre weights underflow/overflow past this order
MAX_LAGUERRE_ORDER = 160


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Nodes and positive weights of a 1D rule.

    ``kind`` tells what the weights integrate against:

    - ``"laguerre"``: ``int_0^inf g(u) exp(-u) du``
    - ``"hermite"``: ``int g(x) exp(-x**2) dx``
    - ``"angular"``: ``(2 pi)**-1 int_0^{2 pi} g(theta) dtheta``
    - ``"legendre"``: plain ``int g(x) dx`` over the rule's interval
    """

    kind: str
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.kind not in _RULE_KINDS:
            raise ValueError(f"Unknown rule kind: {self.kind!r}")
        nodes = np.array(self.nodes, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1D arrays of the same length")
        elif not np.all(weights > 0):
            raise ValueError("quadrature weights must be positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "order", int(self.order))

    def integrate(self, vals):
        """Apply the rule along the last axis of ``vals``."""
        return np.asarray(vals) @ self.weights


@functools.lru_cache(maxsize=None)
def gauss_laguerre(order):
    """
    Gauss-Laguerre rule for ``int_0^inf g(u) exp(-u) du``.

    The rule is checked against ``int u**k exp(-u) du = k!`` for
    ``k <= min(2 * order - 1, 20)`` (relative tolerance 1e-12).
    """
    order = int(order)
    if not (1 <= order <= MAX_LAGUERRE_ORDER):
        raise ValueError(
            f"Laguerre order must lie in [1, {MAX_LAGUERRE_ORDER}], got {order}"
        )
    nodes, weights = np.polynomial.laguerre.laggauss(order)
    # nodes far in the tail can carry weights that underflow; they contribute
    # nothing
    keep = weights > 0
    rule = QuadratureRule("laguerre", order, nodes[keep], weights[keep])

    for k in range(min(2 * order - 1, 20) + 1):
        approx = rule.integrate(rule.nodes**k)
        exact = float(math.factorial(k))
        if abs(approx - exact) > 1e-12 * exact:
            raise RuntimeError(
                f"Laguerre rule of order {order} integrates u^{k} to {approx!r} "
                f"instead of {exact!r}"
            )
    return rule


@functools.lru_cache(maxsize=None)
def gauss_hermite(order):
    """Gauss-Hermite rule for ``int g(x) exp(-x**2) dx``."""
    nodes, weights = np.polynomial.hermite.hermgauss(int(order))
    return QuadratureRule("hermite", order, nodes, weights)


def gauss_legendre(order, a=-1.0, b=1.0):
    """Gauss-Legendre rule on ``[a, b]``."""
    knots, weights = np.polynomial.legendre.leggauss(int(order))
    nodes = 0.5 * (b - a) * knots + 0.5 * (b + a)
    return QuadratureRule("legendre", order, nodes, 0.5 * (b - a) * weights)


@functools.lru_cache(maxsize=None)
def angular_rule(n):
    """
    Trapezoid rule on the circle (normalized to total weight 1).

    Exact for trigonometric polynomials of degree ``< n``.
    """
    n = int(n)
    if n < 1:
        raise ValueError("the angular rule needs at least one point")
    return QuadratureRule(
        "angular", n, 2.0 * np.pi * np.arange(n) / n, np.full(n, 1.0 / n)
    )


@functools.lru_cache(maxsize=None)
def gamma_window_rule(k_max, nodes_per_panel=8, panel_width=0.5):
    """
    Rule in ``u`` for integrands carrying the Gamma densities
    ``u**k exp(-u) / k!`` with ``k <= k_max``.

    Gauss-Laguerre nodes run out before the bulk of these densities once ``k``
    exceeds roughly half the order. Instead we substitute ``u = s**2`` (which
    gives every density a width of order 1 in ``s``) and apply composite
    Gauss-Legendre panels of width ``panel_width`` in ``s``. The returned
    weights include the Jacobian ``2 s``; they integrate ``g(u) du``.
    """
    k_max = int(k_max)
    u_max = k_max + 12.0 * math.sqrt(k_max + 1.0) + 48.0
    s_max = math.sqrt(u_max)
    n_panels = max(1, math.ceil(s_max / panel_width))
    knots, weights = np.polynomial.legendre.leggauss(int(nodes_per_panel))
    edges = np.linspace(0.0, s_max, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * knots[None, :]).ravel()
    ws = (half[:, None] * weights[None, :]).ravel()
    return QuadratureRule("legendre", n_panels * int(nodes_per_panel), s**2, 2.0 * s * ws)


class PolarRule(NamedTuple):
    """A radial Laguerre rule in ``u`` paired with an angular rule."""

    radial: QuadratureRule
    angular: QuadratureRule

    def nodes(self, t):
        """Complex nodes ``sqrt(4 t u) e^{i theta}`` with shape (n_u, n_theta)."""
        r = np.sqrt(4.0 * t * self.radial.nodes)
        return r[:, None] * np.exp(1j * self.angular.nodes)[None, :]

    def weights(self):
        return self.radial.weights[:, None] * self.angular.weights[None, :]

    def doubled(self):
        order = min(2 * self.radial.order, MAX_LAGUERRE_ORDER)
        return PolarRule(gauss_laguerre(order), angular_rule(2 * self.angular.order))


@functools.lru_cache(maxsize=None)
def polar_rule(order=64, n_angles=128):
    """The default polar rule: Laguerre of ``order`` times ``n_angles`` angles."""
    return PolarRule(gauss_laguerre(order), angular_rule(n_angles))


class SamplingGrid(BaseModel):
    """
    Deterministic polar grid used in place of a supremum over the plane.

    Radii are equispaced on ``[r_min, r_max]`` and angles on ``[0, 2 pi)``;
    a zero radius contributes a single point. When ``units == "heat"`` the
    radii are measured in multiples of ``2 sqrt(t)`` so the grid follows the
    scaling between weights.
    """

    model_config = ConfigDict(frozen=True)

    r_min: NonNegativeFloat = 0.0
    r_max: PositiveFloat = 4.0
    n_radii: PositiveInt = 64
    n_angles: PositiveInt = 32
    units: Literal["absolute", "heat"] = "absolute"

    @model_validator(mode="after")
    def _check_range(self):
        if self.r_min > self.r_max:
            raise ValueError("r_min must not exceed r_max")
        return self

    @classmethod
    def parse(cls, text, units="absolute"):
        """Parse ``"r0:r1:nr,na"`` (e.g. ``"0:4:64,32"``)."""
        try:
            radial, n_angles = text.split(",")
            r0, r1, n_radii = radial.split(":")
            return cls(
                r_min=float(r0),
                r_max=float(r1),
                n_radii=int(n_radii),
                n_angles=int(n_angles),
                units=units,
            )
        except ValueError as err:
            raise ValueError(f"invalid grid {text!r}: expected r0:r1:nr,na") from err

    def to_string(self):
        return f"{self.r_min!r}:{self.r_max!r}:{self.n_radii},{self.n_angles}"

    def radii(self, t=None):
        radii = np.linspace(self.r_min, self.r_max, self.n_radii)
        if self.units == "heat":
            if t is None:
                raise ValueError("a grid in heat units needs the weight t")
            radii = radii * (2.0 * math.sqrt(t))
        return radii

    def points(self, t=None):
        radii = self.radii(t)
        angles = 2.0 * np.pi * np.arange(self.n_angles) / self.n_angles
        pts = []
        for r in radii:
            if r == 0.0:
                pts.append(np.zeros(1, dtype=np.complex128))
            else:
                pts.append(r * np.exp(1j * angles))
        return np.concatenate(pts)

    def radial_only(self):
        return self.model_copy(update={"n_angles": 1})


def disk_rule(samples):
    """
    Normalized area rule on the unit disk.

    Gauss-Legendre in ``s = r**2`` times the angular trapezoid rule; returns
    ``(points, weights)`` with weights summing to 1. Polynomials in ``x, y`` of
    low degree are integrated exactly.
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be a positive integer")
    n_s = max(2, round(math.sqrt(samples / 4.0)))
    n_a = max(4, math.ceil(samples / n_s))
    s_rule = gauss_legendre(n_s, 0.0, 1.0)
    a_rule = angular_rule(n_a)
    pts = (np.sqrt(s_rule.nodes)[:, None] * np.exp(1j * a_rule.nodes)[None, :]).ravel()
    wts = (s_rule.weights[:, None] * a_rule.weights[None, :]).ravel()
    return pts, wts
