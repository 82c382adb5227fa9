"""
Operator norms of truncated matrices and semi-commutator norms
``||T_f T_g - T_fg||``.
"""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import eigvalsh, svdvals

from . import symbols as sym
from ._exact import diagonal_at, expand
from .errors import PowerIterationError
from .fock_matrix import DEFAULT_PROBE_WIDTH, hankel_gram, toeplitz_diagonal

# largest dimension accepted by the dense SVD path
MAX_SVD_DIM = 512


def _is_diagonal(A):
    if A.shape[0] != A.shape[1]:
        return False
    return np.count_nonzero(A - np.diag(np.diagonal(A))) == 0


def _power_iteration(A, x, tol, max_iter):
    prev = None
    for _ in range(max_iter):
        Ax = A @ x
        est = float(np.vdot(Ax, Ax).real)
        y = A.conj().T @ Ax
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            return 0.0
        x = y / norm_y
        if prev is not None and abs(est - prev) <= tol * est:
            return math.sqrt(est)
        prev = est
    raise PowerIterationError(
        f"power iteration did not converge in {max_iter} iterations",
        previous=None if prev is None else math.sqrt(prev),
        last=math.sqrt(est),
    )


def _dense_top_singular_value(A):
    # top eigenvalue of the smaller Hermitian Gram product
    if A.shape[0] >= A.shape[1]:
        gram = A.conj().T @ A
    else:
        gram = A @ A.conj().T
    last = gram.shape[0] - 1
    top = eigvalsh(gram, subset_by_index=[last, last])[0]
    return math.sqrt(max(float(top), 0.0))


def operator_norm(A, method="power", tol=1e-12, max_iter=10_000, fallback=True):
    """
    Largest singular value of the matrix ``A``.

    Parameters
    ----------
    A: array_like
        2D matrix with finite entries
    method: {"power", "svd"}
        ``"power"`` runs power iteration on ``A^H A`` from the normalized
        all-ones vector until the estimate of ``||A||^2`` changes by less
        than ``tol`` (relative). ``"svd"`` uses a dense SVD and is limited to
        matrices no larger than ``MAX_SVD_DIM``.
    tol: float
    max_iter: int
    fallback: bool
        When power iteration stalls (clustered top singular values make it
        creep without meeting ``tol``), take the top eigenvalue of ``A^H A``
        from a dense Hermitian eigensolver instead. When ``False`` a
        :class:`PowerIterationError` is raised.

    Notes
    -----
    Diagonal matrices short-circuit to ``max |A_kk|``.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError("A must be a 2D matrix")
    elif not np.all(np.isfinite(A)):
        raise ValueError("A has non-finite entries")
    elif A.size == 0:
        return 0.0

    if _is_diagonal(A):
        return float(np.max(np.abs(np.diagonal(A))))
    elif method == "svd":
        if max(A.shape) > MAX_SVD_DIM:
            raise ValueError(
                f"the svd path is limited to {MAX_SVD_DIM}x{MAX_SVD_DIM} matrices"
            )
        return float(svdvals(A)[0])
    elif method != "power":
        raise ValueError(f"Unknown method: {method!r}")

    n = A.shape[1]
    x = np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)
    try:
        out = _power_iteration(A, x, tol, max_iter)
        if out == 0.0 and np.any(A != 0):
            # the all-ones vector lies in the null space; restart from a fixed
            # pseudo-random vector
            logging.debug("power iteration restarted from a random vector")
            x = np.random.RandomState(seed=0).standard_normal(n).astype(np.complex128)
            out = _power_iteration(A, x / np.linalg.norm(x), tol, max_iter)
    except PowerIterationError as err:
        if not fallback:
            raise
        logging.info(f"{err}; using the dense eigensolver on a {A.shape} matrix")
        return _dense_top_singular_value(A)
    return out


class SemiCommutator(NamedTuple):
    norm: float
    path: str
    tail_indicator: float
    monotone: Optional[bool]
    extended_sup: Optional[float]


def _diagonal_defect(ef, eg, efg, t, ks):
    return diagonal_at(ef, t, ks) * diagonal_at(eg, t, ks) - diagonal_at(efg, t, ks)


def semi_commutator_norm(
    f,
    g,
    t,
    N,
    M=None,
    probe_width=DEFAULT_PROBE_WIDTH,
    tail_tol=None,
    method="power",
    gram_path="toeplitz",
    power_tol=1e-12,
    max_iter=10_000,
    extend=20,
    returned=False,
):
    """
    ``||T_f T_g - T_fg||`` on the first ``N`` basis functions.

    When both symbols are radial all three operators are diagonal and the
    norm is ``max_{k<N} |s_k(f) s_k(g) - s_k(fg)|``. If that sequence is
    monotone in ``k`` it is also evaluated at ``k = N 2^p`` for
    ``p = 1..extend`` to approximate its supremum over all ``k``
    (``extended_sup``). Otherwise the norm is the operator norm of
    :func:`hankel_gram`.

    Returns
    -------
    norm: float
        Or a ``SemiCommutator`` record when ``returned`` is True
    """
    f, g = sym.as_symbol(f), sym.as_symbol(g)
    N = int(N)
    if sym.is_radial(f) and sym.is_radial(g):
        fg = sym.Product(f, g)
        diag = toeplitz_diagonal(f, t, N) * toeplitz_diagonal(g, t, N)
        defect = np.abs(diag - toeplitz_diagonal(fg, t, N))
        norm = float(np.max(defect))
        steps = np.diff(defect)
        monotone = bool(np.all(steps >= -1e-15) or np.all(steps <= 1e-15))
        extended = None
        ef, eg, efg = expand(f), expand(g), expand(fg)
        if monotone and not (ef.has_generic or eg.has_generic or efg.has_generic):
            ks = N * 2 ** np.arange(1, extend + 1, dtype=np.int64)
            far = np.abs(_diagonal_defect(ef, eg, efg, t, ks))
            extended = max(norm, float(np.max(far)))
        rslt = SemiCommutator(norm, "diagonal", 0.0, monotone, extended)
    else:
        gram, tail = hankel_gram(
            f,
            g,
            t,
            N,
            M,
            path=gram_path,
            probe_width=probe_width,
            tail_tol=tail_tol,
            returned=True,
        )
        norm = operator_norm(gram, method=method, tol=power_tol, max_iter=max_iter)
        rslt = SemiCommutator(norm, "gram", tail, None, None)
    if returned:
        return rslt
    return rslt.norm
