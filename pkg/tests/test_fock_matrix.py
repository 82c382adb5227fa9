import math

import numpy as np
import pytest
from scipy.special import gammainc

from fockq import symbols as sym
from fockq.errors import TruncationError
from fockq.fock_matrix import (
    FockBasis,
    TruncatedOperator,
    berezin_transform,
    coherent_coefficients,
    coherent_tail,
    commutator_diagonal,
    hankel_gram,
    hankel_norm_on_state,
    hankel_panel,
    hankel_section_norm,
    moment_matrix,
    mo_vs_hankel_check,
    scaling_covariance_check,
    toeplitz_diagonal,
    toeplitz_matrix,
)
from fockq.heat import heat_transform
from fockq.spectral import operator_norm


def assert_all_close(ref, actual, rtol=0.0, atol=0.0, what="values"):
    __tracebackhide__ = True
    ref, actual = np.asarray(ref), np.asarray(actual)
    if ref.shape != actual.shape:
        pytest.fail(f"the {what} have shape {actual.shape}, expected {ref.shape}")
    np.testing.assert_allclose(
        actual, ref, rtol=rtol, atol=atol, err_msg=f"the {what} aren't equal"
    )


# a brute-force python version of moment_matrix: polar Gauss-Laguerre
# quadrature of f e_j conj(e_k) against mu_t
def _moment_matrix_python(f, t, n, order=120, n_angles=256):
    nodes, weights = np.polynomial.laguerre.laggauss(order)
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    z = np.sqrt(4 * t * nodes)[:, None] * np.exp(1j * theta)[None, :]
    wts = weights[:, None] * np.full(n_angles, 1.0 / n_angles)[None, :]
    fz = sym.evaluate(f, z)
    out = np.empty((n, n), dtype=np.complex128)
    e = [z**k / math.sqrt((4 * t) ** k * math.factorial(k)) for k in range(n)]
    for k in range(n):
        for j in range(n):
            out[k, j] = np.sum(wts * fz * e[j] * np.conj(e[k]))
    return out


def _dyadic_diagonal_python(J, t, N):
    # s_k = sum over shells of (-1)^j P(Gamma(k+1) in shell), with the
    # innermost value extended to the origin and the outermost to infinity
    ks = np.arange(N)[:, None] + 1.0
    js = np.arange(-J, J + 1)
    cdf = gammainc(ks, (2.0 ** js[None, :]) ** 2 / (4 * t))
    probs = np.diff(np.concatenate([np.zeros((N, 1)), cdf, np.ones((N, 1))], axis=1))
    vals = np.array([(-1.0) ** js[0]] + [(-1.0) ** j for j in js])
    return probs @ vals


@pytest.mark.parametrize("t", [1.0, 0.25, 0.01])
def test_basis_normalization(t):
    basis = FockBasis(t, 40)
    nodes, weights = np.polynomial.laguerre.laggauss(80)
    z = np.sqrt(4 * t * nodes)
    for k in range(0, 30, 7):
        norm = np.sum(weights * np.abs(basis(k, z)) ** 2)
        assert abs(norm - 1.0) < 1e-10
    with pytest.raises(IndexError):
        basis(40, 0.0)


def test_coherent_states():
    t, w = 0.25, 1.0 - 0.5j
    c = coherent_coefficients(w, t, 64)
    assert np.vdot(c, c).real == pytest.approx(1.0, abs=1e-12)
    # sum_k c_k e_k(z) = exp(conj(w) z / 4t - |w|^2 / 8t)
    basis = FockBasis(t, 64)
    z = 0.3 + 0.2j
    val = sum(c[k] * basis(k, z) for k in range(64))
    ref = np.exp(np.conj(w) * z / (4 * t) - abs(w) ** 2 / (8 * t))
    assert val == pytest.approx(ref, rel=1e-12)

    origin = coherent_coefficients(0.0, t, 8)
    assert_all_close(np.eye(8)[0], origin)


def test_coherent_truncation_error():
    t, w = 0.05, 3.0
    with pytest.raises(TruncationError) as excinfo:
        coherent_coefficients(w, t, 32)
    needed = excinfo.value.suggested_dim
    assert excinfo.value.indicator == pytest.approx(coherent_tail(w, t, 32))
    # the hint is sufficient
    assert coherent_tail(w, t, needed) < 1e-12
    coherent_coefficients(w, t, needed)


@pytest.mark.parametrize(
    "f",
    [
        sym.PlaneWave(1.0),
        sym.PlaneWave(0.5 - 1j),
        sym.Z * sym.ZBAR * sym.ZBAR,
        sym.real_part(sym.Z),
        sym.Z * sym.PlaneWave(1j),
    ],
)
def test_moment_matrix_against_brute_force(f):
    t, n = 0.5, 6
    ref = _moment_matrix_python(f, t, n)
    assert_all_close(ref, moment_matrix(f, t, n, n), atol=1e-9, what="moments")


@pytest.mark.parametrize("t", [0.5, 0.05])
@pytest.mark.parametrize(
    "f",
    [
        sym.Z * sym.ZBAR,
        sym.disk_indicator(1.0),
        sym.QuadraticPhase(-1.0),
        sym.radial_dyadic(24),
        sym.RadialSampled(lambda r: 1.0 / (1.0 + r**2), bound=1.0, label="lorentz"),
    ],
)
def test_moment_diagonal_matches_toeplitz_diagonal(f, t):
    N = 24
    diag = toeplitz_diagonal(f, t, N)
    assert_all_close(np.diagonal(moment_matrix(f, t, N, N)), diag, atol=1e-9)
    op = toeplitz_matrix(f, t, N)
    assert op.is_hermitian() == bool(np.all(np.abs(diag.imag) < 1e-12))
    assert_all_close(diag, op.diagonal())


def test_toeplitz_diagonal_closed_forms():
    t, N = 0.1, 50
    ks = np.arange(N)
    assert_all_close(4 * t * (ks + 1.0), toeplitz_diagonal(sym.Z * sym.ZBAR, t, N), rtol=1e-13)
    assert_all_close(
        gammainc(ks + 1.0, 1.0 / (4 * t)),
        toeplitz_diagonal(sym.disk_indicator(1.0), t, N),
        atol=1e-14,
    )
    assert_all_close(
        (1 - 4j * t) ** -(ks + 1.0),
        toeplitz_diagonal(sym.QuadraticPhase(1.0), t, N),
        rtol=1e-12,
    )
    assert_all_close(
        _dyadic_diagonal_python(24, t, N),
        toeplitz_diagonal(sym.radial_dyadic(24), t, N),
        atol=1e-14,
    )
    with pytest.raises(ValueError):
        toeplitz_diagonal(sym.Z, t, N)


def test_truncated_operator_validation():
    with pytest.raises(ValueError):
        TruncatedOperator(0.5, 3, 3, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        TruncatedOperator(0.5, 3, 2, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        TruncatedOperator(0.5, 1, 1, np.array([[np.inf]]))


@pytest.mark.parametrize(
    "f, g",
    [
        (sym.Z, sym.ZBAR),
        (sym.PlaneWave(1.0), sym.PlaneWave(1j)),
        (sym.real_part(sym.Z), sym.QuadraticPhase(1.0)),
        (sym.PlaneWave(1.0), sym.radial_dyadic(24)),
    ],
)
def test_hankel_gram_paths_agree(f, g):
    t, N = 0.25, 32
    a = hankel_gram(f, g, t, N, path="toeplitz")
    b = hankel_gram(f, g, t, N, path="hankel")
    assert_all_close(a, b, atol=1e-9, what="gram matrices")
    with pytest.raises(ValueError):
        hankel_gram(f, g, t, N, path="direct")
    with pytest.raises(ValueError):
        hankel_gram(f, g, t, N, M=N - 1)


def test_hankel_gram_is_semi_commutator():
    # T_fg - T_f T_g for f = z, g = zbar is 4t on the diagonal
    t, N = 0.3, 16
    gram, tail = hankel_gram(sym.Z, sym.ZBAR, t, N, returned=True)
    assert_all_close(np.full(N, 4 * t), np.diagonal(gram).real, atol=1e-12)
    assert tail == 0.0


def test_hankel_gram_tail_error():
    # plane waves leak past a tiny M
    with pytest.raises(TruncationError):
        hankel_gram(sym.PlaneWave(3.0), sym.PlaneWave(3.0), 1.0, 4, M=4, tail_tol=1e-12)


def test_hankel_section_norm():
    t, N = 0.25, 16
    # ||H_zbar e_k||^2 = <|z|^2 e_k, e_k> - |<zbar e_k, e_{k-1}>|^2 = 4t
    assert hankel_section_norm(sym.ZBAR, t, N) == pytest.approx(math.sqrt(4 * t), rel=1e-12)
    # analytic symbols have vanishing Hankel operators
    assert hankel_section_norm(sym.Z, t, N) == pytest.approx(0.0, abs=1e-6)
    # radial fast path: sqrt(max_k 1 - |s_k|^2) for a unimodular phase
    ks = np.arange(N)
    ref = math.sqrt(np.max(1 - np.abs((1 - 4j * t) ** -(ks + 1.0)) ** 2))
    assert hankel_section_norm(sym.QuadraticPhase(1.0), t, N) == pytest.approx(ref, rel=1e-12)


def test_hankel_panel():
    t, N = 0.25, 48
    states = np.eye(N)[:4]
    panel = hankel_panel(sym.ZBAR, t, states)
    assert_all_close(np.full(4, math.sqrt(4 * t)), panel, rtol=1e-10)

    c = coherent_coefficients(0.5j, t, N)
    single = hankel_norm_on_state(sym.QuadraticPhase(1.0), t, c)
    both = hankel_panel(sym.QuadraticPhase(1.0), t, np.array([c, c]))
    assert_all_close([single, single], both, rtol=1e-12)


@pytest.mark.parametrize("t", [0.5, 1.0 / 16, 1.0 / 64])
@pytest.mark.parametrize(
    "f", [sym.QuadraticPhase(1.0), sym.radial_dyadic(24), sym.PlaneWave(1.0)]
)
def test_scaling_covariance(f, t):
    lhs, rhs = scaling_covariance_check(f, t, 64)
    assert lhs.max_difference(rhs) <= 1e-8


@pytest.mark.parametrize("t", [0.25, 0.05])
@pytest.mark.parametrize("w", [0.0, 1.0, 2.0j])
@pytest.mark.parametrize(
    "f", [sym.real_part(sym.Z), sym.PlaneWave(1.0), sym.radial_dyadic(24)]
)
def test_mo_vs_hankel(f, w, t):
    mo, bound = mo_vs_hankel_check(f, t, w)
    assert mo <= bound + 1e-6


def test_berezin_transform_matches_heat():
    t, N = 0.25, 96
    for f in (sym.Z * sym.ZBAR, sym.PlaneWave(1.0), sym.disk_indicator(1.0)):
        op = toeplitz_matrix(f, t, N)
        for w in (0.0, 0.5 + 0.25j):
            assert berezin_transform(op, w) == pytest.approx(
                heat_transform(f, t, w), abs=1e-10
            )


def test_commutator_diagonal():
    t, N = 0.2, 12
    diag = commutator_diagonal(t, N)
    # [T_zbar, T_z] = 4t away from the truncation edge
    assert_all_close(np.full(N - 1, 4 * t), diag[:-1].real, atol=1e-12)
    assert diag[-1].real == pytest.approx(-4 * t * (N - 1), rel=1e-12)


def test_moment_matrix_shapes():
    out = moment_matrix(sym.PlaneWave(1.0), 0.5, 7, 3)
    assert out.shape == (7, 3)
    big = moment_matrix(sym.PlaneWave(1.0), 0.5, 7, 7)
    assert_all_close(big[:, :3], out, atol=1e-14)
    # large indices stay finite
    assert np.all(np.isfinite(moment_matrix(sym.Z * sym.ZBAR, 0.01, 600, 600)))


@pytest.mark.parametrize(
    "f",
    [
        sym.real_part(sym.Z),
        0.5 * (sym.PlaneWave(1.0) + sym.PlaneWave(-1.0)),
        sym.real_part(sym.PlaneWave(1.0 - 2.0j)),
        sym.Z * sym.ZBAR + sym.real_part(sym.Z * sym.Z),
    ],
)
def test_real_symbols_give_hermitian_matrices(f):
    op = toeplitz_matrix(f, 0.25, 24)
    assert op.is_hermitian(atol=1e-10)
    assert not toeplitz_matrix(sym.PlaneWave(1.0), 0.25, 24).is_hermitian()


@pytest.mark.parametrize(
    "f",
    [
        sym.PlaneWave(1.0 + 1.0j),
        sym.Conjugate(sym.PlaneWave(2.0j)),
        0.5 * (sym.PlaneWave(1.0) + sym.PlaneWave(-1.0j)),
        sym.QuadraticPhase(1.0),
        sym.radial_dyadic(24),
    ],
)
@pytest.mark.parametrize("t", [0.5, 0.05])
def test_toeplitz_matrix_is_a_contraction(f, t):
    norm = operator_norm(toeplitz_matrix(f, t, 48).entries)
    assert norm <= sym.sup_bound(f) + 1e-8
