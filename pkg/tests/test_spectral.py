import math

import numpy as np
import pytest
from scipy.special import gammainc

from fockq import symbols as sym
from fockq.errors import PowerIterationError
from fockq.fock_matrix import hankel_gram
from fockq.spectral import MAX_SVD_DIM, operator_norm, semi_commutator_norm


def _random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def _example_a_dim(t):
    # smallest N with (1 + 16t^2)^-N <= 1e-6
    return math.ceil(math.log(1e6) / math.log1p(16 * t * t)) + 1


def _dyadic_defect_python(J, t, N):
    # 1 - s_k^2 for the dyadic sign pattern, s_k summed shell by shell
    ks = np.arange(N)[:, None] + 1.0
    js = np.arange(-J, J + 1)
    cdf = gammainc(ks, (2.0 ** js[None, :]) ** 2 / (4 * t))
    probs = np.diff(np.concatenate([np.zeros((N, 1)), cdf, np.ones((N, 1))], axis=1))
    vals = np.array([(-1.0) ** js[0]] + [(-1.0) ** j for j in js])
    s = probs @ vals
    return 1.0 - s**2


def test_power_matches_svd():
    rng = np.random.RandomState(156)
    for _ in range(50):
        A = _random_matrix(rng, 8)
        power = operator_norm(A, method="power")
        svd = operator_norm(A, method="svd")
        assert power == pytest.approx(svd, rel=1e-9)

    # rectangular
    A = rng.standard_normal((5, 9))
    assert operator_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-8)


def test_operator_norm_special_cases():
    assert operator_norm(np.diag([1.0, -3.0, 2j])) == 3.0
    assert operator_norm(np.zeros((4, 4))) == 0.0
    assert operator_norm(np.zeros((0, 0))) == 0.0

    # the all-ones start vector lies in the null space
    A = np.array([[1.0, -1.0], [1.0, -1.0]])
    assert operator_norm(A) == pytest.approx(2.0, rel=1e-10)

    with pytest.raises(ValueError):
        operator_norm(np.ones(3))
    with pytest.raises(ValueError):
        operator_norm(np.array([[1.0, np.nan], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        operator_norm(np.ones((2, 2)), method="lanczos")
    with pytest.raises(ValueError):
        operator_norm(np.ones((MAX_SVD_DIM + 1, 2)), method="svd")


def test_power_iteration_error():
    A = _random_matrix(np.random.RandomState(3), 8)
    with pytest.raises(PowerIterationError) as excinfo:
        operator_norm(A, max_iter=2, fallback=False)
    assert excinfo.value.previous is not None
    assert excinfo.value.last > 0
    # by default a stalled iteration is finished by the dense eigensolver
    assert operator_norm(A, max_iter=2) == pytest.approx(np.linalg.norm(A, 2), rel=1e-12)
    wide = _random_matrix(np.random.RandomState(4), 8)[:3]
    assert operator_norm(wide, max_iter=2) == pytest.approx(
        np.linalg.norm(wide, 2), rel=1e-12
    )


def test_clustered_singular_values():
    # the top three singular values of this Gram matrix agree to 8 digits,
    # so plain power iteration creeps without meeting its tolerance
    f = sym.PlaneWave(1.0)
    gram = hankel_gram(f, f, 1.0, 64, 160)
    expected = float(np.linalg.svd(gram, compute_uv=False)[0])
    assert operator_norm(gram) == pytest.approx(expected, rel=1e-10)
    assert semi_commutator_norm(f, f, 1.0, 64, 160) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("t", [0.5, 0.1, 0.02])
def test_example_a_quadratic_phases(t):
    N = _example_a_dim(t)
    detail = semi_commutator_norm(
        sym.QuadraticPhase(1.0), sym.QuadraticPhase(-1.0), t, N, returned=True
    )
    assert detail.path == "diagonal"
    assert 1.0 - 1e-6 <= detail.norm <= 1.0 + 1e-9
    assert detail.norm == pytest.approx(1.0 - (1.0 + 16 * t * t) ** -N, abs=1e-12)
    assert detail.monotone
    assert detail.norm <= detail.extended_sup <= 1.0 + 1e-12


@pytest.mark.parametrize("t", [0.5, 0.1, 0.02])
def test_quadratic_phase_norm_grows_with_section(t):
    f, g = sym.QuadraticPhase(1.0), sym.QuadraticPhase(-1.0)
    norms = [semi_commutator_norm(f, g, t, N) for N in (4, 8, 16, 32, 64, 128)]
    assert np.all(np.diff(norms) >= 0.0)
    assert norms[-1] <= 1.0 + 1e-12


@pytest.mark.parametrize("t", [1.0, 0.25, 0.0625])
def test_example_c_coordinates(t):
    detail = semi_commutator_norm(sym.Z, sym.ZBAR, t, 32, returned=True)
    assert detail.path == "gram"
    assert detail.norm == pytest.approx(4 * t, abs=1e-9)
    assert detail.tail_indicator == 0.0


def test_example_b_dyadic_pattern():
    f = sym.radial_dyadic(24)
    N = 512
    norms = [semi_commutator_norm(f, f, 4.0 ** (-ell - 1), N) for ell in range(1, 5)]
    for a in norms:
        for b in norms:
            assert a / b == pytest.approx(1.0, abs=0.02)

    ref = float(np.max(_dyadic_defect_python(24, 0.25, N)))
    assert semi_commutator_norm(f, f, 0.25, N) == pytest.approx(ref, abs=1e-12)
    assert min(norms) >= 0.05


def test_diagonal_and_gram_paths_agree():
    t, N = 1.0 / 16, 64
    for f, g in [
        (sym.radial_dyadic(24), sym.radial_dyadic(24)),
        (sym.QuadraticPhase(1.0), sym.disk_indicator(1.0)),
    ]:
        diagonal = semi_commutator_norm(f, g, t, N)
        gram = operator_norm(hankel_gram(f, g, t, N))
        assert diagonal == pytest.approx(gram, abs=1e-9)


def test_svd_and_power_agree_on_gram_path():
    t, N = 0.25, 24
    f, g = sym.PlaneWave(1.0), sym.PlaneWave(-1.0)
    power = semi_commutator_norm(f, g, t, N, method="power")
    svd = semi_commutator_norm(f, g, t, N, method="svd")
    assert power == pytest.approx(svd, rel=1e-8)
