"""
The symbol algebra: functions f: C -> C described by immutable expression
trees.

Every node knows how to evaluate itself on numpy arrays of complex points, how
to print itself in the canonical form understood by
:func:`fockq.grammar.parse_symbol`, which angular Fourier modes it can contain
and (when possible) a bound on its modulus.
"""

from dataclasses import dataclass, field
import math
from numbers import Number
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import SymbolEvaluationError


def _fmt_real(x):
    return repr(float(x))


def _fmt_complex(c):
    c = complex(c)
    sign = "-" if math.copysign(1.0, c.imag) < 0 else "+"
    return f"{c.real!r}{sign}{abs(c.imag)!r}i"


class Symbol:
    """
    Base class of every symbol node.

    Nodes support ``+``, ``-``, ``*`` (with each other and with plain
    numbers) and can be called on scalars or arrays of complex points.
    """

    __slots__ = ()

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other):
        return Sum(self, as_symbol(other))

    def __radd__(self, other):
        return Sum(as_symbol(other), self)

    def __sub__(self, other):
        return Sum(self, Product(Constant(-1.0), as_symbol(other)))

    def __rsub__(self, other):
        return Sum(as_symbol(other), Product(Constant(-1.0), self))

    def __mul__(self, other):
        return Product(self, as_symbol(other))

    def __rmul__(self, other):
        return Product(as_symbol(other), self)

    def __neg__(self):
        return Product(Constant(-1.0), self)

    def conj(self):
        return Conjugate(self)

    def __str__(self):
        return self.to_expr()

    # the following are overridden by every node
    def to_expr(self):
        raise NotImplementedError()

    def _eval(self, z):
        raise NotImplementedError()

    def _frequencies(self):
        raise NotImplementedError()

    def _bound(self):
        raise NotImplementedError()


@dataclass(frozen=True)
class Constant(Symbol):
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))

    def to_expr(self):
        return f"const({_fmt_complex(self.c)})"

    def _eval(self, z):
        return np.full(z.shape, self.c, dtype=np.complex128)

    def _frequencies(self):
        return frozenset([0])

    def _bound(self):
        return abs(self.c)


@dataclass(frozen=True)
class CoordZ(Symbol):
    def to_expr(self):
        return "z"

    def _eval(self, z):
        return z.copy()

    def _frequencies(self):
        return frozenset([1])

    def _bound(self):
        return None


@dataclass(frozen=True)
class CoordZbar(Symbol):
    def to_expr(self):
        return "zbar"

    def _eval(self, z):
        return np.conj(z)

    def _frequencies(self):
        return frozenset([-1])

    def _bound(self):
        return None


@dataclass(frozen=True)
class RadialPiecewise(Symbol):
    """
    A function of ``|z|`` that is constant on shells.

    ``values[0]`` applies on ``[0, breaks[0])``, ``values[i + 1]`` on
    ``[breaks[i], breaks[i + 1])`` and ``values[-1]`` on ``[breaks[-1], inf)``.
    The point ``z = 0`` itself takes ``value_at_zero``.

    Parameters
    ----------
    breaks: tuple of float
        Strictly increasing, nonnegative radii
    values: tuple of complex
        One more entry than ``breaks``
    value_at_zero: complex
        Value at the origin
    origin: str, optional
        Expression that produced this symbol (e.g. ``"radial_dyadic(24)"``).
        Only used for printing; ignored by comparisons.
    """

    breaks: Tuple[float, ...]
    values: Tuple[complex, ...]
    value_at_zero: complex = 0j
    origin: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breaks)
        values = tuple(complex(v) for v in self.values)
        if len(breaks) == 0:
            raise ValueError("a RadialPiecewise needs at least one break")
        elif len(values) != len(breaks) + 1:
            raise ValueError(
                f"expected {len(breaks) + 1} shell values for {len(breaks)} breaks, "
                f"got {len(values)}"
            )
        elif not all(np.isfinite(breaks)) or breaks[0] < 0:
            raise ValueError("breaks must be finite and nonnegative")
        elif np.any(np.diff(breaks) <= 0.0):
            raise ValueError("breaks must be strictly increasing")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "value_at_zero", complex(self.value_at_zero))

    def to_expr(self):
        if self.origin is not None:
            return self.origin
        breaks = ", ".join(_fmt_real(b) for b in self.breaks)
        values = ", ".join(_fmt_complex(v) for v in self.values)
        return f"radial([{breaks}], [{values}], {_fmt_complex(self.value_at_zero)})"

    def _eval(self, z):
        r = np.abs(z)
        idx = np.searchsorted(np.asarray(self.breaks), r, side="right")
        out = np.asarray(self.values, dtype=np.complex128)[idx]
        return np.where(r == 0.0, self.value_at_zero, out)

    def _frequencies(self):
        return frozenset([0])

    def _bound(self):
        return max(abs(v) for v in self.values + (self.value_at_zero,))


@dataclass(frozen=True)
class QuadraticPhase(Symbol):
    """``exp(i * alpha * |z|**2)``"""

    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))

    def to_expr(self):
        return f"phase({_fmt_real(self.alpha)})"

    def _eval(self, z):
        return np.exp(1j * self.alpha * (z.real**2 + z.imag**2))

    def _frequencies(self):
        return frozenset([0])

    def _bound(self):
        return 1.0


@dataclass(frozen=True)
class PlaneWave(Symbol):
    """``exp(i * Re(z * conj(xi)))``"""

    xi: complex

    def __post_init__(self):
        object.__setattr__(self, "xi", complex(self.xi))

    def to_expr(self):
        return f"planewave({_fmt_complex(self.xi)})"

    def _eval(self, z):
        return np.exp(1j * np.real(z * np.conj(self.xi)))

    def _frequencies(self):
        return frozenset([0]) if self.xi == 0 else None

    def _bound(self):
        return 1.0


@dataclass(frozen=True)
class RadialSampled(Symbol):
    """
    ``g(|z|)`` for a user supplied, vectorized callable ``g``.

    ``bound`` is trusted as given; pass ``None`` when no bound is known.
    """

    g: Callable
    bound: Optional[float] = None
    label: str = "g"

    def to_expr(self):
        return f"sampled({self.label})"

    def _eval(self, z):
        r = np.abs(z)
        try:
            out = np.asarray(self.g(r), dtype=np.complex128)
        except Exception as err:
            raise SymbolEvaluationError(
                f"the radial profile {self.label!r} failed to evaluate"
            ) from err
        return np.broadcast_to(out, r.shape)

    def _frequencies(self):
        return frozenset([0])

    def _bound(self):
        return None if self.bound is None else float(self.bound)


@dataclass(frozen=True)
class Sum(Symbol):
    l: Symbol
    r: Symbol

    def to_expr(self):
        return f"({self.l.to_expr()} + {self.r.to_expr()})"

    def _eval(self, z):
        return self.l._eval(z) + self.r._eval(z)

    def _frequencies(self):
        a, b = self.l._frequencies(), self.r._frequencies()
        if a is None or b is None:
            return None
        return a | b

    def _bound(self):
        a, b = self.l._bound(), self.r._bound()
        if a is None or b is None:
            return None
        return a + b


@dataclass(frozen=True)
class Product(Symbol):
    l: Symbol
    r: Symbol

    def to_expr(self):
        return f"({self.l.to_expr()} * {self.r.to_expr()})"

    def _eval(self, z):
        return self.l._eval(z) * self.r._eval(z)

    def _frequencies(self):
        a, b = self.l._frequencies(), self.r._frequencies()
        if a is None or b is None:
            return None
        return frozenset(m + n for m in a for n in b)

    def _bound(self):
        a, b = self.l._bound(), self.r._bound()
        if a is None or b is None:
            return None
        return a * b


@dataclass(frozen=True)
class Conjugate(Symbol):
    s: Symbol

    def to_expr(self):
        return f"conj({self.s.to_expr()})"

    def _eval(self, z):
        return np.conj(self.s._eval(z))

    def _frequencies(self):
        a = self.s._frequencies()
        return None if a is None else frozenset(-m for m in a)

    def _bound(self):
        return self.s._bound()


@dataclass(frozen=True)
class Scaled(Symbol):
    """``z -> s(z * factor)``"""

    s: Symbol
    factor: float

    def __post_init__(self):
        factor = float(self.factor)
        if not (np.isfinite(factor) and factor > 0):
            raise ValueError(f"scale factor must be positive, got {self.factor}")
        object.__setattr__(self, "factor", factor)

    def to_expr(self):
        return f"scale({self.s.to_expr()}, {_fmt_real(self.factor)})"

    def _eval(self, z):
        return self.s._eval(z * self.factor)

    def _frequencies(self):
        return self.s._frequencies()

    def _bound(self):
        return self.s._bound()


@dataclass(frozen=True)
class Translated(Symbol):
    """``z -> s(w - z)``"""

    s: Symbol
    w: complex

    def __post_init__(self):
        object.__setattr__(self, "w", complex(self.w))

    def to_expr(self):
        return f"translate({self.s.to_expr()}, {_fmt_complex(self.w)})"

    def _eval(self, z):
        return self.s._eval(self.w - z)

    def _frequencies(self):
        if self.w != 0:
            return None
        # f(-z) only flips the sign of odd modes
        return self.s._frequencies()

    def _bound(self):
        return self.s._bound()


Z = CoordZ()
ZBAR = CoordZbar()


def as_symbol(obj):
    if isinstance(obj, Symbol):
        return obj
    elif isinstance(obj, Number):
        return Constant(obj)
    raise TypeError(f"can't interpret {obj!r} as a Symbol")


def evaluate(f, z):
    """
    Evaluate ``f`` at ``z``.

    ``z`` may be a scalar or an array. A python complex is returned for scalar
    input, otherwise an array with the shape of ``z``.
    """
    arr = np.asarray(z, dtype=np.complex128)
    out = f._eval(arr)
    if arr.ndim == 0:
        return complex(out)
    return np.asarray(out, dtype=np.complex128)


def scale(f, s):
    """
    Returns the symbol ``z -> f(s * z)``.

    Parameters
    ----------
    f: Symbol
    s: float
        Must be positive
    """
    s = float(s)
    if not (np.isfinite(s) and s > 0):
        raise ValueError(f"the scale factor must be positive, got {s}")
    if isinstance(f, Constant):
        return f
    elif isinstance(f, Scaled):
        return Scaled(f.s, f.factor * s)
    return Scaled(f, s)


def translate(f, w):
    """Returns ``f o tau_w``, i.e. the symbol ``z -> f(w - z)``."""
    return Translated(f, w)


def frequencies(f):
    """
    The angular Fourier modes ``m`` (``f(r e^{i theta})`` containing
    ``e^{i m theta}``) that ``f`` can contain, or ``None`` when unknown.
    """
    return f._frequencies()


def is_radial(f):
    """
    True when ``f(z)`` depends on ``|z|`` only.

    This holds exactly when the only possible angular mode is 0, so products
    such as ``z * zbar`` count as radial.
    """
    return frequencies(f) == frozenset([0])


def sup_bound(f):
    """A certified bound on ``sup |f|``, or ``None`` when none is known."""
    return f._bound()


def is_bounded(f):
    return sup_bound(f) is not None


_EXACT_SUP_NODES = (Constant, RadialPiecewise, QuadraticPhase, PlaneWave)


def _exact_sup(f):
    # sup |f| is unchanged by conjugation, scaling and translation
    while isinstance(f, (Conjugate, Scaled, Translated)):
        f = f.s
    if isinstance(f, Constant):
        return abs(f.c)
    elif isinstance(f, RadialPiecewise):
        return max(abs(v) for v in f.values)
    elif isinstance(f, (QuadraticPhase, PlaneWave)):
        return 1.0
    return None


def sup_norm_estimate(f, grid=None, t=None):
    """
    Estimate ``||f||_inf``.

    The value is exact for constants, radial step functions, quadratic phases
    and plane waves (and for conjugates, scalings and translations of these).
    Otherwise it is the maximum of ``|f|`` over the points of ``grid``, a
    lower bound of the true supremum.

    Parameters
    ----------
    f: Symbol
    grid: SamplingGrid, optional
        Required unless the value is exact
    t: float, optional
        Only needed when the grid is measured in heat units
    """
    exact = _exact_sup(f)
    if exact is not None:
        return float(exact)
    elif grid is None:
        raise ValueError(f"a sampling grid is needed to estimate sup|f| for {f}")
    return float(np.max(np.abs(evaluate(f, grid.points(t)))))


def _disk_samples(center, radius, samples):
    # equispaced radii strictly inside the disk, times equispaced angles
    n_r = max(1, math.ceil(math.sqrt(samples / 4.0)))
    n_a = max(1, math.ceil(samples / n_r))
    radii = radius * np.arange(1, n_r + 1) / (n_r + 0.25)
    angles = 2.0 * np.pi * np.arange(n_a) / n_a
    return center + (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()


def oscillation_at(f, z, radius=1.0, samples=10000):
    """
    Lower bound for ``sup{|f(z) - f(w)| : |z - w| < radius}``.

    The supremum is taken over a deterministic polar grid with roughly
    ``samples`` points in the open disk, so it converges from below as
    ``samples`` grows.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    elif samples < 1:
        raise ValueError("samples must be a positive integer")
    fz = evaluate(f, complex(z))
    vals = evaluate(f, _disk_samples(complex(z), radius, samples))
    return float(np.max(np.abs(vals - fz)))


def vo_profile(f, distances, radius=1.0, samples=2500, angle=0.0):
    """
    ``oscillation_at`` along the ray ``R e^{i angle}`` for every ``R`` in
    ``distances``.

    For symbols with vanishing oscillation at infinity the profile tends to
    0 as ``R`` grows.
    """
    direction = complex(math.cos(angle), math.sin(angle))
    return np.array(
        [oscillation_at(f, R * direction, radius, samples) for R in distances]
    )


def radial_dyadic(J):
    """
    The dyadic sign pattern ``f(z) = (-1)**j`` on ``2**j <= |z| < 2**(j+1)``.

    Shells ``j = -J, ..., J`` are represented; the innermost shell value is
    extended down to the origin, the outermost one out to infinity, and
    ``f(0) = 0``. On the covered range ``f(z / 2) = -f(z)``.
    """
    J = int(J)
    if J < 1:
        raise ValueError(f"J must be a positive integer, got {J}")
    js = np.arange(-J, J + 1)
    breaks = tuple(math.ldexp(1.0, int(j)) for j in js)
    shell_vals = [1.0 if (j % 2 == 0) else -1.0 for j in js]
    values = (shell_vals[0],) + tuple(shell_vals)
    return RadialPiecewise(breaks, values, 0.0, origin=f"radial_dyadic({J})")


def disk_indicator(radius=1.0):
    """Indicator function of the closed-open disk ``|z| < radius``."""
    radius = float(radius)
    return RadialPiecewise((radius,), (1.0, 0.0), 1.0, origin=f"disk({radius!r})")


def real_part(f):
    """``Re f`` expressed as ``(f + conj(f)) / 2`` (with ``Re z`` built from z and zbar)."""
    other = ZBAR if isinstance(f, CoordZ) else Conjugate(f)
    return Product(Constant(0.5), Sum(f, other))
