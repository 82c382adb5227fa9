"""
Decomposition of a symbol into terms whose Gaussian integrals are known in
closed form.

A symbol expands into a sum of

- monomials ``c z^a zbar^b``,
- radial step functions,
- plane waves ``c exp(i Re(z conj(xi)))``,
- quadratic phases ``c exp(i alpha |z|^2)``,
- and a remainder of generic terms ``c g(z)`` that are integrated
  numerically.

Each family is closed under the operations it needs (products within a
family, conjugation, scaling, translation where possible); anything else falls
into the generic remainder.
"""

from dataclasses import dataclass, field
import math
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import comb, gammainc, gammaln
from scipy.stats import ncx2

from . import symbols as sym
from .errors import QuadratureConvergenceError
from .quadrature import angular_rule, gamma_window_rule

# half-width, in units of the Rayleigh scale, of the band where the
# noncentral chi^2 cdf is evaluated; P(Rayleigh > 40) = exp(-800)
_CDF_WINDOW = 40.0


@dataclass(frozen=True)
class StepTerm:
    """``values[i]`` on the i-th shell cut out by ``breaks`` (see RadialPiecewise)."""

    breaks: Tuple[float, ...]
    values: Tuple[complex, ...]

    def times(self, c):
        return StepTerm(self.breaks, tuple(c * v for v in self.values))

    def to_symbol(self):
        return sym.RadialPiecewise(self.breaks, self.values, self.values[0])


def _merge_steps(a, b):
    breaks = tuple(sorted(set(a.breaks) | set(b.breaks)))
    # evaluate both on a representative radius of every merged shell
    edges = (0.0,) + breaks
    reps = [0.5 * (lo + hi) for lo, hi in zip(edges[:-1], edges[1:])]
    reps.append(2.0 * breaks[-1] + 1.0)
    reps = np.array(reps)
    va = np.asarray(a.values)[np.searchsorted(a.breaks, reps, side="right")]
    vb = np.asarray(b.values)[np.searchsorted(b.breaks, reps, side="right")]
    return StepTerm(breaks, tuple(complex(v) for v in va * vb))


@dataclass
class Expansion:
    poly: Dict[Tuple[int, int], complex] = field(default_factory=dict)
    steps: List[StepTerm] = field(default_factory=list)
    waves: Dict[complex, complex] = field(default_factory=dict)
    phases: Dict[float, complex] = field(default_factory=dict)
    generic: List[Tuple[complex, sym.Symbol]] = field(default_factory=list)

    def add_poly(self, ab, c):
        if c != 0:
            self.poly[ab] = self.poly.get(ab, 0j) + c

    def add_wave(self, xi, c):
        if xi == 0:
            self.add_poly((0, 0), c)
        elif c != 0:
            self.waves[xi] = self.waves.get(xi, 0j) + c

    def add_phase(self, alpha, c):
        if alpha == 0:
            self.add_poly((0, 0), c)
        elif c != 0:
            self.phases[alpha] = self.phases.get(alpha, 0j) + c

    def terms(self):
        for ab, c in self.poly.items():
            yield ("poly", ab, c)
        for step in self.steps:
            yield ("step", step, 1.0)
        for xi, c in self.waves.items():
            yield ("wave", xi, c)
        for alpha, c in self.phases.items():
            yield ("phase", alpha, c)
        for c, g in self.generic:
            yield ("generic", g, c)

    def add_term(self, kind, data, c):
        if kind == "poly":
            self.add_poly(data, c)
        elif kind == "step":
            self.steps.append(data if c == 1.0 else data.times(c))
        elif kind == "wave":
            self.add_wave(data, c)
        elif kind == "phase":
            self.add_phase(data, c)
        elif c != 0:
            self.generic.append((c, data))

    @property
    def has_generic(self):
        return len(self.generic) > 0


def _monomial_symbol(a, b):
    factors = [sym.Z] * a + [sym.ZBAR] * b
    if len(factors) == 0:
        return sym.Constant(1.0)
    out = factors[0]
    for f in factors[1:]:
        out = sym.Product(out, f)
    return out


def _unit_symbol(kind, data):
    if kind == "poly":
        return _monomial_symbol(*data)
    elif kind == "step":
        return data.to_symbol()
    elif kind == "wave":
        return sym.PlaneWave(data)
    elif kind == "phase":
        return sym.QuadraticPhase(data)
    return data


def _term_product(ta, tb, out):
    (ka, da, ca), (kb, db, cb) = ta, tb
    if ka == "poly" and da == (0, 0):
        out.add_term(kb, db, ca * cb)
    elif kb == "poly" and db == (0, 0):
        out.add_term(ka, da, ca * cb)
    elif ka == kb == "poly":
        out.add_poly((da[0] + db[0], da[1] + db[1]), ca * cb)
    elif ka == kb == "step":
        out.add_term("step", _merge_steps(da, db), ca * cb)
    elif ka == kb == "wave":
        out.add_wave(da + db, ca * cb)
    elif ka == kb == "phase":
        out.add_phase(da + db, ca * cb)
    else:
        g = sym.Product(_unit_symbol(ka, da), _unit_symbol(kb, db))
        out.add_term("generic", g, ca * cb)


def _conjugate(e):
    out = Expansion()
    for (a, b), c in e.poly.items():
        out.add_poly((b, a), np.conj(c))
    out.steps = [StepTerm(s.breaks, tuple(np.conj(v) for v in s.values)) for s in e.steps]
    for xi, c in e.waves.items():
        out.add_wave(-xi, np.conj(c))
    for alpha, c in e.phases.items():
        out.add_phase(-alpha, np.conj(c))
    out.generic = [(np.conj(c), sym.Conjugate(g)) for c, g in e.generic]
    return out


def _scaled(e, s):
    out = Expansion()
    for (a, b), c in e.poly.items():
        out.add_poly((a, b), c * s ** (a + b))
    out.steps = [StepTerm(tuple(b / s for b in st.breaks), st.values) for st in e.steps]
    for xi, c in e.waves.items():
        out.add_wave(xi * s, c)
    for alpha, c in e.phases.items():
        out.add_phase(alpha * s * s, c)
    out.generic = [(c, sym.Scaled(g, s)) for c, g in e.generic]
    return out


def _translated(e, w):
    out = Expansion()
    wbar = np.conj(w)
    for (a, b), c in e.poly.items():
        # (w - z)^a (wbar - zbar)^b, expanded binomially
        for i in range(a + 1):
            ci = comb(a, i, exact=True) * w ** (a - i) * (-1) ** i
            for j in range(b + 1):
                cj = comb(b, j, exact=True) * wbar ** (b - j) * (-1) ** j
                out.add_poly((i, j), c * ci * cj)
    for xi, c in e.waves.items():
        out.add_wave(-xi, c * np.exp(1j * np.real(w * np.conj(xi))))
    if w == 0:
        # radial terms are even
        out.steps = list(e.steps)
        for alpha, c in e.phases.items():
            out.add_phase(alpha, c)
    else:
        for st in e.steps:
            out.add_term("generic", sym.Translated(st.to_symbol(), w), 1.0)
        for alpha, c in e.phases.items():
            out.add_term("generic", sym.Translated(sym.QuadraticPhase(alpha), w), c)
    out.generic = [(c, sym.Translated(g, w)) for c, g in e.generic]
    return out


def expand(f):
    """Decompose the symbol ``f`` into an :class:`Expansion`."""
    out = Expansion()
    if isinstance(f, sym.Constant):
        out.add_poly((0, 0), f.c)
    elif isinstance(f, sym.CoordZ):
        out.add_poly((1, 0), 1.0)
    elif isinstance(f, sym.CoordZbar):
        out.add_poly((0, 1), 1.0)
    elif isinstance(f, sym.RadialPiecewise):
        out.steps.append(StepTerm(f.breaks, f.values))
    elif isinstance(f, sym.QuadraticPhase):
        out.add_phase(f.alpha, 1.0)
    elif isinstance(f, sym.PlaneWave):
        out.add_wave(f.xi, 1.0)
    elif isinstance(f, sym.Sum):
        for part in (expand(f.l), expand(f.r)):
            for term in part.terms():
                out.add_term(*term)
    elif isinstance(f, sym.Product):
        right = list(expand(f.r).terms())
        for ta in expand(f.l).terms():
            for tb in right:
                _term_product(ta, tb, out)
    elif isinstance(f, sym.Conjugate):
        out = _conjugate(expand(f.s))
    elif isinstance(f, sym.Scaled):
        out = _scaled(expand(f.s), f.factor)
    elif isinstance(f, sym.Translated):
        out = _translated(expand(f.s), f.w)
    else:
        out.add_term("generic", f, 1.0)
    return out


# --------------------------------------------------------------------------
# heat transform: E[f(w - Z)] for Z ~ mu_t
# --------------------------------------------------------------------------


def _step_heat(step, t, w):
    # P(|w - Z| < b) for every break; |w - Z|^2 / (2t) is noncentral chi^2
    # with 2 degrees of freedom and noncentrality |w|^2 / (2t)
    b2 = np.square(np.asarray(step.breaks))
    w2 = np.abs(w) ** 2
    cdf = np.empty(w.shape + b2.shape, dtype=np.float64)
    at_origin = w2 == 0.0
    cdf[at_origin] = -np.expm1(-b2 / (4.0 * t))[None, :]
    if not at_origin.all():
        nc = (w2[~at_origin] / (2.0 * t))[:, None]
        x = b2[None, :] / (2.0 * t)
        # sqrt of the chi^2 variable sits within a few units of sqrt(nc); far
        # outside that window the cdf is 0 or 1 to double precision and the
        # boost backend overflows
        gap = np.sqrt(x) - np.sqrt(nc)
        off = np.where(gap > _CDF_WINDOW, 1.0, 0.0)
        near = np.abs(gap) <= _CDF_WINDOW
        x, nc = np.broadcast_arrays(x, nc)
        off[near] = ncx2.cdf(x[near], 2, nc[near])
        cdf[~at_origin] = off
    zeros = np.zeros(w.shape + (1,))
    probs = np.diff(np.concatenate([zeros, cdf, zeros + 1.0], axis=-1), axis=-1)
    return probs @ np.asarray(step.values, dtype=np.complex128)


def _polar_sum(g, t, w, rule, chunk_size=256):
    nodes = rule.nodes(t).ravel()
    weights = rule.weights().ravel()
    out = np.empty(w.shape, dtype=np.complex128)
    flat_w, flat_out = w.ravel(), out.reshape(-1)
    for start in range(0, flat_w.size, chunk_size):
        stop = min(start + chunk_size, flat_w.size)
        pts = flat_w[start:stop, None] - nodes[None, :]
        flat_out[start:stop] = sym.evaluate(g, pts) @ weights
    return out


def numeric_heat(g, t, w, rule, tol=None):
    """
    Heat transform of ``g`` at the points ``w`` by direct polar quadrature.

    When ``tol`` is given the result is recomputed with the doubled rule and
    a :class:`QuadratureConvergenceError` is raised if the two differ by more
    than ``tol`` (relative to ``max(1, |refined|)``).
    """
    w = np.asarray(w, dtype=np.complex128)
    val = _polar_sum(g, t, w, rule)
    if tol is not None:
        refined = _polar_sum(g, t, w, rule.doubled())
        err = np.max(np.abs(refined - val), initial=0.0)
        scale = max(1.0, float(np.max(np.abs(refined), initial=0.0)))
        if err > tol * scale:
            raise QuadratureConvergenceError(
                f"heat transform of {g} did not converge at t={t} "
                f"(doubling the order changed it by {err:.3e})",
                estimate=val,
                refined=refined,
            )
    return val


def _generic_heat(g, t, w, rule, tol):
    # the law of Z is symmetric, so translations and scalings can be pushed
    # into the evaluation point and the weight
    if isinstance(g, sym.Translated):
        return heat_at(expand(g.s), t, g.w - w, rule, tol)
    elif isinstance(g, sym.Scaled):
        return heat_at(expand(g.s), t * g.factor**2, w * g.factor, rule, tol)
    elif isinstance(g, sym.Conjugate):
        return np.conj(heat_at(expand(g.s), t, w, rule, tol))
    return numeric_heat(g, t, w, rule, tol)


def heat_at(e, t, w, rule, tol=None):
    """Heat transform of the expansion ``e`` at the array of points ``w``."""
    w = np.asarray(w, dtype=np.complex128)
    out = np.zeros(w.shape, dtype=np.complex128)
    if len(e.poly) > 0:
        wbar = np.conj(w)
        for (a, b), c in e.poly.items():
            for i in range(min(a, b) + 1):
                coef = comb(a, i, exact=True) * comb(b, i, exact=True)
                coef *= math.factorial(i) * (4.0 * t) ** i
                out += c * coef * w ** (a - i) * wbar ** (b - i)
    for step in e.steps:
        out += _step_heat(step, t, w)
    for xi, c in e.waves.items():
        out += c * np.exp(-t * abs(xi) ** 2) * np.exp(1j * np.real(w * np.conj(xi)))
    for alpha, c in e.phases.items():
        denom = 1.0 - 4j * t * alpha
        out += c * np.exp(1j * alpha * np.abs(w) ** 2 / denom) / denom
    for c, g in e.generic:
        out += c * _generic_heat(g, t, w, rule, tol)
    return out


# --------------------------------------------------------------------------
# moments <f e_j, e_k> in the monomial basis e_k = z^k / sqrt((4t)^k k!)
# --------------------------------------------------------------------------


def _log_psi(k, u):
    # log of sqrt(u^k e^{-u} / k!)
    k = np.asarray(k, dtype=np.float64)
    return 0.5 * (k * np.log(u) - u - gammaln(k + 1.0))


def _step_diagonal(step, t, ks):
    u = np.square(np.asarray(step.breaks)) / (4.0 * t)
    cdf = gammainc(np.asarray(ks, dtype=np.float64)[:, None] + 1.0, u[None, :])
    zeros = np.zeros((cdf.shape[0], 1))
    probs = np.diff(np.concatenate([zeros, cdf, zeros + 1.0], axis=1), axis=1)
    return probs @ np.asarray(step.values, dtype=np.complex128)


def _radial_generic_diagonal(g, t, ks):
    ks = np.asarray(ks)
    rule = gamma_window_rule(int(ks.max()))
    u = rule.nodes
    vals = sym.evaluate(g, np.sqrt(4.0 * t * u).astype(np.complex128))
    dens = np.exp(2.0 * _log_psi(ks[:, None], u[None, :]))
    return dens @ (rule.weights * vals)


def diagonal_at(e, t, ks):
    """
    Diagonal moments ``<f e_k, e_k>`` for the integer array ``ks``.

    Only terms that can contribute to the diagonal of a radial symbol are
    used (wave terms never occur in radial symbols).
    """
    ks = np.asarray(ks, dtype=np.int64)
    out = np.zeros(ks.shape, dtype=np.complex128)
    if ks.size == 0:
        return out
    kf = ks.astype(np.float64)
    for (a, b), c in e.poly.items():
        if a == b:
            out += c * np.exp(a * math.log(4.0 * t) + gammaln(kf + a + 1) - gammaln(kf + 1))
    for step in e.steps:
        out += _step_diagonal(step, t, ks)
    for alpha, c in e.phases.items():
        out += c * np.exp(-(kf + 1.0) * np.log(1.0 - 4j * t * alpha))
    for c, g in e.generic:
        out += c * _radial_generic_diagonal(g, t, ks)
    return out


def displacement_block(A, rows, cols):
    """
    Leading ``rows x cols`` block of the displacement matrix with entries
    ``<D(A) e_n, e_m>``.

    The first row is ``exp(-|A|^2/2) (-conj(A))^n / sqrt(n!)`` and further
    rows follow from ``D[m+1, n] = (sqrt(n) D[m, n-1] + A D[m, n]) / sqrt(m+1)``.
    """
    D = np.zeros((rows, cols), dtype=np.complex128)
    D[0, 0] = np.exp(-0.5 * abs(A) ** 2)
    for n in range(1, cols):
        D[0, n] = D[0, n - 1] * (-np.conj(A)) / math.sqrt(n)
    sqrt_n = np.sqrt(np.arange(cols, dtype=np.float64))
    for m in range(rows - 1):
        nxt = A * D[m]
        nxt[1:] += sqrt_n[1:] * D[m, :-1]
        D[m + 1] = nxt / math.sqrt(m + 1)
    return D


def _generic_block(g, t, rows, cols, n_angles):
    freqs = sym.frequencies(g)
    size = max(rows, cols)
    if freqs == frozenset([0]):
        idx = np.arange(min(rows, cols))
        out = np.zeros((rows, cols), dtype=np.complex128)
        out[idx, idx] = _radial_generic_diagonal(g, t, idx)
        return out
    if freqs is None:
        offsets = range(-(cols - 1), rows)
        n_a = max(n_angles, 4 * size)
    else:
        offsets = sorted(m for m in freqs if -(cols - 1) <= m < rows)
        n_a = max(n_angles, 2 * max(abs(m) for m in freqs) + 2)

    rule = gamma_window_rule(size - 1)
    u = rule.nodes
    a_rule = angular_rule(n_a)
    pts = np.sqrt(4.0 * t * u)[:, None] * np.exp(1j * a_rule.nodes)[None, :]
    # coefficient of e^{i m theta} lives at index m (mod n_a)
    coefs = np.fft.fft(sym.evaluate(g, pts), axis=1) / n_a
    psi = np.exp(_log_psi(np.arange(size)[None, :], u[:, None]))

    out = np.zeros((rows, cols), dtype=np.complex128)
    for d in offsets:
        j0, j1 = max(0, -d), min(cols, rows - d)
        if j1 <= j0:
            continue
        wg = rule.weights * coefs[:, d % n_a]
        js = np.arange(j0, j1)
        out[js + d, js] = np.einsum("q,qj,qj->j", wg, psi[:, js + d], psi[:, js])
    return out


def moment_block(e, t, rows, cols, n_angles=128):
    """The ``rows x cols`` matrix with entries ``<f e_j, e_k>`` (row k, column j)."""
    out = np.zeros((rows, cols), dtype=np.complex128)
    log4t = math.log(4.0 * t)
    for (a, b), c in e.poly.items():
        d = a - b
        j = np.arange(max(0, -d), min(cols, rows - d))
        if j.size == 0:
            continue
        jf = j.astype(np.float64)
        logv = 0.5 * (a + b) * log4t + gammaln(jf + a + 1)
        logv -= 0.5 * (gammaln(jf + 1) + gammaln(jf + d + 1))
        out[j + d, j] += c * np.exp(logv)

    n_diag = min(rows, cols)
    diag_idx = np.arange(n_diag)
    for step in e.steps:
        out[diag_idx, diag_idx] += _step_diagonal(step, t, diag_idx)
    for alpha, c in e.phases.items():
        out[diag_idx, diag_idx] += c * np.exp(-(diag_idx + 1.0) * np.log(1.0 - 4j * t * alpha))
    for xi, c in e.waves.items():
        A = 1j * np.conj(xi) * math.sqrt(t)
        out += c * math.exp(-0.5 * t * abs(xi) ** 2) * displacement_block(A, rows, cols)
    for c, g in e.generic:
        out += c * _generic_block(g, t, rows, cols, n_angles)
    return out
