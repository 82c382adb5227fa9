"""
Truncated matrices of Toeplitz and Hankel operators on the Fock space
``H^2_t`` in the orthonormal monomial basis ``e_k = z^k / sqrt((4t)^k k!)``.

Matrix entries are always ``<f e_j, e_k>`` at row ``k`` and column ``j``. The
orthogonal projection onto ``H^2_t`` is never formed: wherever it appears it
is replaced by a sum over basis moments ``m < M`` (the moment-tail
dimension).
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy.linalg import eigvalsh
from scipy.special import gammainc, gammaln
from scipy.stats import poisson

from . import symbols as sym
from ._exact import diagonal_at, expand, moment_block
from .errors import QuadratureConvergenceError, TruncationError
from .heat import mean_oscillation
from .quadrature import gauss_laguerre

# coherent states are truncated once their Poisson tail drops below this
COHERENT_TAIL_TOL = 1e-12
DEFAULT_PROBE_WIDTH = 16


def default_tail_dim(N):
    return 2 * int(N) + 32


def _check_t(t):
    if not (np.isfinite(t) and t > 0):
        raise ValueError(f"t must be positive, got {t}")


@dataclass(frozen=True)
class FockBasis:
    """
    The first ``dim`` monomial basis functions of ``H^2_t``.

    Their normalization is verified at construction with a Gauss-Laguerre
    rule for ``k < min(dim, 30)``.
    """

    t: float
    dim: int

    def __post_init__(self):
        _check_t(self.t)
        if int(self.dim) < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        rule = gauss_laguerre(64)
        ks = np.arange(min(self.dim, 30), dtype=np.float64)
        log_u = np.log(rule.nodes)
        norms = np.exp(ks[:, None] * log_u[None, :] - gammaln(ks + 1.0)[:, None])
        norms = norms @ rule.weights
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise RuntimeError("the monomial basis failed its normalization check")

    def __call__(self, k, z):
        """Evaluate ``e_k`` at ``z``."""
        if not 0 <= k < self.dim:
            raise IndexError(f"basis index {k} is out of range for dim={self.dim}")
        z = np.asarray(z, dtype=np.complex128)
        log_norm = 0.5 * (k * math.log(4.0 * self.t) + gammaln(k + 1.0))
        return z**k * math.exp(-log_norm)

    def coherent(self, w):
        return coherent_coefficients(w, self.t, self.dim)


def coherent_tail(w, t, N):
    """Norm-squared of the coherent state ``k_w`` outside ``span(e_0..e_{N-1})``."""
    lam = abs(complex(w)) ** 2 / (4.0 * t)
    if lam == 0.0:
        return 0.0
    return float(gammainc(N, lam))


def coherent_coefficients(w, t, N, tail_tol=COHERENT_TAIL_TOL):
    """
    Coefficients ``c_k = exp(-|w|^2 / 8t) conj(w)^k / sqrt((4t)^k k!)`` of the
    normalized reproducing kernel ``k_w`` for ``k < N``.

    Raises
    ------
    TruncationError
        If the discarded part of ``k_w`` has norm-squared ``>= tail_tol``.
        The error carries the smallest adequate ``N``.
    """
    _check_t(t)
    w = complex(w)
    lam = abs(w) ** 2 / (4.0 * t)
    tail = coherent_tail(w, t, N)
    if tail >= tail_tol:
        needed = int(poisson.isf(tail_tol, lam)) + 1
        raise TruncationError(
            f"a basis of dimension {N} misses {tail:.3e} of the coherent state "
            f"at w={w}; at least {needed} basis functions are needed",
            indicator=tail,
            suggested_dim=needed,
        )
    out = np.zeros(N, dtype=np.complex128)
    if w == 0:
        out[0] = 1.0
        return out
    k = np.arange(N, dtype=np.float64)
    log_mag = -0.5 * lam + 0.5 * (k * math.log(lam) - gammaln(k + 1.0))
    return np.exp(log_mag - 1j * k * np.angle(w))


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """
    The ``N x N`` section of an operator at weight ``t``.

    ``M`` records the moment-tail dimension used for any intermediate
    projection.
    """

    t: float
    N: int
    M: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.shape != (self.N, self.N):
            raise ValueError(
                f"entries have shape {entries.shape}, expected ({self.N}, {self.N})"
            )
        elif self.M < self.N:
            raise ValueError("the moment-tail dimension M must be at least N")
        elif not np.all(np.isfinite(entries)):
            raise ValueError("operator entries must be finite")
        object.__setattr__(self, "entries", entries)

    def diagonal(self):
        return np.diagonal(self.entries).copy()

    def is_hermitian(self, atol=1e-10):
        return bool(np.allclose(self.entries, self.entries.conj().T, rtol=0.0, atol=atol))

    def max_difference(self, other):
        return float(np.max(np.abs(self.entries - other.entries)))


def moment_matrix(f, t, rows, cols, n_angles=128, tol=None):
    """
    The ``rows x cols`` moment matrix with entries ``<f e_j, e_k>_t``.

    Parameters
    ----------
    f: Symbol
    t: float
    rows, cols: int
    n_angles: int
        Minimum number of angles used for terms integrated numerically
    tol: float, optional
        When the symbol has numerically integrated terms, recompute them with
        twice the angles and raise ``QuadratureConvergenceError`` if any entry
        moves by more than ``tol``.
    """
    _check_t(t)
    e = expand(sym.as_symbol(f))
    out = moment_block(e, t, rows, cols, n_angles)
    if tol is not None and e.has_generic:
        refined = moment_block(e, t, rows, cols, 2 * n_angles)
        err = float(np.max(np.abs(refined - out), initial=0.0))
        if err > tol:
            raise QuadratureConvergenceError(
                f"moments of {f} changed by {err:.3e} when the angular rule "
                "was doubled",
                estimate=out,
                refined=refined,
            )
    return out


def toeplitz_diagonal(f, t, N):
    """
    Eigenvalues ``s_0 .. s_{N-1}`` of ``T_f`` for a radial symbol ``f``.

    ``s_k = (1/k!) int_0^inf f(sqrt(4tu)) u^k exp(-u) du``; step functions use
    differences of regularized incomplete gamma functions.
    """
    _check_t(t)
    if not sym.is_radial(f):
        raise ValueError(f"{f} is not radial")
    return diagonal_at(expand(f), t, np.arange(int(N)))


def toeplitz_matrix(f, t, N, M=None):
    """``T_f^(t)`` truncated to the first ``N`` basis functions."""
    f = sym.as_symbol(f)
    M = int(N) if M is None else int(M)
    if sym.is_radial(f):
        entries = np.diag(toeplitz_diagonal(f, t, N))
    else:
        entries = moment_matrix(f, t, N, N)
    return TruncatedOperator(t, int(N), M, entries)


def hankel_gram(
    f,
    g,
    t,
    N,
    M=None,
    path="toeplitz",
    probe_width=DEFAULT_PROBE_WIDTH,
    tail_tol=None,
    returned=False,
):
    """
    The ``N x N`` matrix ``T_fg - T_f P_M T_g = (H_{conj f})^* H_g`` with the
    intermediate projection truncated at ``M``.

    Parameters
    ----------
    f, g: Symbol
    t: float
    N: int
    M: int, optional
        Moment-tail dimension; defaults to ``2 N + 32``
    path: {"toeplitz", "hankel"}
        ``"toeplitz"`` uses the moments of ``f`` directly, ``"hankel"``
        builds them as adjoints of the moments of ``conj(f)``. The two are
        independent code paths to the same matrix.
    probe_width: int
        Size of the band ``[M, M + probe_width)`` used to measure how much of
        ``g e_j`` escapes the first ``M`` basis functions
    tail_tol: float, optional
        Raise ``TruncationError`` when the tail indicator exceeds it
    returned: bool
        If True, return ``(gram, tail_indicator)``
    """
    _check_t(t)
    N = int(N)
    M = default_tail_dim(N) if M is None else int(M)
    if M < N:
        raise ValueError(f"M={M} must be at least N={N}")
    f, g = sym.as_symbol(f), sym.as_symbol(g)

    tfg = moment_matrix(sym.Product(f, g), t, N, N)
    tg = moment_matrix(g, t, M + probe_width, N)
    if path == "toeplitz":
        tf = moment_matrix(f, t, N, M)
    elif path == "hankel":
        tf = moment_matrix(sym.Conjugate(f), t, M, N).conj().T
    else:
        raise ValueError(f"Unknown path: {path!r}")

    gram = tfg - tf @ tg[:M]
    tail = float(np.max(np.sum(np.abs(tg[M:]) ** 2, axis=0), initial=0.0))
    logging.debug(f"hankel_gram N={N} M={M}: tail indicator {tail:.3e}")
    if tail_tol is not None and tail > tail_tol:
        raise TruncationError(
            f"the moments of {g} leak {tail:.3e} past M={M} (tolerance "
            f"{tail_tol:.1e})",
            indicator=tail,
            suggested_dim=2 * M,
        )
    if returned:
        return gram, tail
    return gram


def hankel_section_norm(g, t, N, M=None):
    """
    ``||H_g P_N||``, the norm of the Hankel operator on ``span(e_0..e_{N-1})``.

    It is the square root of the top eigenvalue of
    ``T_{|g|^2} - B^H B`` with ``B`` the ``M x N`` moment matrix of ``g``.
    For radial ``g`` both terms are diagonal.
    """
    N = int(N)
    M = default_tail_dim(N) if M is None else int(M)
    g = sym.as_symbol(g)
    sq = sym.Product(sym.Conjugate(g), g)
    if sym.is_radial(g):
        vals = toeplitz_diagonal(sq, t, N).real - np.abs(toeplitz_diagonal(g, t, N)) ** 2
        return math.sqrt(max(float(np.max(vals)), 0.0))
    gram = moment_matrix(sq, t, N, N)
    b = moment_matrix(g, t, M, N)
    gram = gram - b.conj().T @ b
    gram = 0.5 * (gram + gram.conj().T)
    top = eigvalsh(gram, subset_by_index=[N - 1, N - 1])[0]
    return math.sqrt(max(top, 0.0))


def hankel_panel(f, t, states, M=None):
    """
    Estimates of ``||H_f h||`` for every coefficient vector in ``states``.

    All states must have the same length ``N``; the moment matrices are built
    once. See :func:`hankel_norm_on_state`.
    """
    states = np.atleast_2d(np.asarray(states, dtype=np.complex128))
    N = states.shape[1]
    M = default_tail_dim(N) if M is None else int(M)
    f = sym.as_symbol(f)
    sq_sym = sym.Product(sym.Conjugate(f), f)
    if sym.is_radial(f):
        sq_diag = toeplitz_diagonal(sq_sym, t, N).real
        b_diag = toeplitz_diagonal(f, t, N)
        totals = np.abs(states) ** 2 @ sq_diag
        captured = np.sum(np.abs(states * b_diag[None, :]) ** 2, axis=1)
    else:
        sq = moment_matrix(sq_sym, t, N, N)
        b = moment_matrix(f, t, M, N)
        totals = np.real(np.einsum("ij,jk,ik->i", states.conj(), sq, states))
        captured = np.sum(np.abs(states @ b.T) ** 2, axis=1)
    radicands = totals - captured
    worst = int(np.argmin(radicands))
    if radicands[worst] < -1e-10:
        raise QuadratureConvergenceError(
            f"||f h||^2 = {totals[worst]!r} is smaller than its projection "
            f"{captured[worst]!r}",
            estimate=float(radicands[worst]),
        )
    return np.sqrt(np.maximum(radicands, 0.0))


def hankel_norm_on_state(f, t, coeffs, M=None):
    """
    Upper estimate of ``||H_f h||`` for ``h = sum_k c_k e_k``.

    Computes ``sqrt(||f h||^2 - sum_{m<M} |<f h, e_m>|^2)``; the value
    decreases to the true norm as ``M`` grows.
    """
    return float(hankel_panel(f, t, np.asarray(coeffs).ravel(), M)[0])


def scaling_covariance_check(f, t, N):
    """
    Returns ``(T_f^(t), T^(1/4)_{f(2 sqrt(t) .)})`` truncated to ``N``.

    The scaling isometry maps ``e_k^(t)`` to ``e_k^(1/4)``, so both matrices
    should agree entrywise.
    """
    _check_t(t)
    lhs = toeplitz_matrix(f, t, N)
    rhs = toeplitz_matrix(sym.scale(f, 2.0 * math.sqrt(t)), 0.25, N)
    return lhs, rhs


def mo_vs_hankel_check(f, t, w, M=None, N=64):
    """
    Returns ``(MO^t(f)(w), ||H_f k_w||^2 + ||H_{conj f} k_w||^2)``.

    The second value bounds the first from above; truncating the projection
    at ``M`` only enlarges it.
    """
    f = sym.as_symbol(f)
    coeffs = coherent_coefficients(w, t, N)
    mo = mean_oscillation(f, t, complex(w))
    bound = (
        hankel_norm_on_state(f, t, coeffs, M) ** 2
        + hankel_norm_on_state(sym.Conjugate(f), t, coeffs, M) ** 2
    )
    return mo, bound


def berezin_transform(op, w):
    """``<T k_w, k_w>`` for a TruncatedOperator ``T``."""
    c = coherent_coefficients(w, op.t, op.N)
    return complex(np.vdot(c, op.entries @ c))


def commutator_diagonal(t, N, f=None, g=None):
    """
    Diagonal of ``T_f T_g - T_g T_f`` from ``N x N`` sections; defaults to
    ``[T_zbar, T_z]``.

    Entries near ``k = N - 1`` see the truncation.
    """
    f = sym.ZBAR if f is None else f
    g = sym.Z if g is None else g
    tf = moment_matrix(f, t, N, N)
    tg = moment_matrix(g, t, N, N)
    return np.diagonal(tf @ tg - tg @ tf).copy()
