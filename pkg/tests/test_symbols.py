import math

import numpy as np
import pytest

from fockq import symbols as sym
from fockq.errors import SymbolEvaluationError
from fockq.quadrature import SamplingGrid


def _points(n=40, seed=3):
    rng = np.random.RandomState(seed)
    return rng.uniform(-5, 5, size=n) + 1j * rng.uniform(-5, 5, size=n)


def test_evaluate_basic_nodes():
    z = _points()
    np.testing.assert_array_equal(sym.evaluate(sym.Z, z), z)
    np.testing.assert_array_equal(sym.evaluate(sym.ZBAR, z), np.conj(z))
    np.testing.assert_allclose(
        sym.evaluate(sym.QuadraticPhase(0.7), z), np.exp(0.7j * np.abs(z) ** 2)
    )
    xi = 1.5 - 0.5j
    np.testing.assert_allclose(
        sym.evaluate(sym.PlaneWave(xi), z), np.exp(1j * np.real(z * np.conj(xi)))
    )

    # scalar input gives a python complex
    assert isinstance(sym.evaluate(sym.Z, 1 + 2j), complex)


def test_operators_and_composition():
    z = _points()
    f = sym.Z * sym.ZBAR - 2.0 + sym.Conjugate(sym.QuadraticPhase(1.0))
    ref = np.abs(z) ** 2 - 2.0 + np.exp(-1j * np.abs(z) ** 2)
    np.testing.assert_allclose(f(z), ref, rtol=1e-14, atol=1e-14)

    scaled = sym.scale(sym.QuadraticPhase(1.0), 0.5)
    np.testing.assert_allclose(scaled(z), np.exp(0.25j * np.abs(z) ** 2))
    # nested scalings collapse into one
    assert sym.scale(scaled, 4.0) == sym.Scaled(sym.QuadraticPhase(1.0), 2.0)

    w = 1.0 - 1.0j
    np.testing.assert_allclose(sym.translate(sym.Z, w)(z), w - z)
    np.testing.assert_allclose((-sym.Z)(z), -z)

    with pytest.raises(ValueError):
        sym.scale(sym.Z, 0.0)
    with pytest.raises(TypeError):
        sym.as_symbol("z")


@pytest.mark.parametrize(
    "f, radial",
    [
        (sym.Z * sym.ZBAR, True),
        (sym.Z, False),
        (sym.QuadraticPhase(2.0), True),
        (sym.PlaneWave(1.0), False),
        (sym.PlaneWave(0.0), True),
        (sym.radial_dyadic(4) * sym.QuadraticPhase(-1.0), True),
        (sym.Translated(sym.disk_indicator(1.0), 0.5), False),
        (sym.Translated(sym.disk_indicator(1.0), 0.0), True),
        (sym.real_part(sym.Z), False),
    ],
)
def test_is_radial(f, radial):
    assert sym.is_radial(f) == radial


def test_frequencies():
    assert sym.frequencies(sym.Z * sym.Z * sym.ZBAR) == frozenset([1])
    assert sym.frequencies(sym.real_part(sym.Z)) == frozenset([1, -1])
    assert sym.frequencies(sym.PlaneWave(1j)) is None


def test_radial_dyadic_pattern():
    J = 6
    f = sym.radial_dyadic(J)
    radii = np.array([2.0 ** (j + 0.5) for j in range(-J, J)])
    vals = f(radii)
    ref = np.array([(-1.0) ** j for j in range(-J, J)])
    np.testing.assert_array_equal(vals, ref)
    # f(z / 2) = -f(z) on the covered range
    z = radii[1:] * np.exp(0.3j)
    np.testing.assert_array_equal(f(z / 2), -f(z))
    assert f(0.0) == 0.0
    assert f.to_expr() == "radial_dyadic(6)"
    with pytest.raises(ValueError):
        sym.radial_dyadic(0)


def test_radial_piecewise_validation():
    with pytest.raises(ValueError):
        sym.RadialPiecewise((1.0, 0.5), (0, 1, 2))
    with pytest.raises(ValueError):
        sym.RadialPiecewise((1.0,), (0, 1, 2))
    with pytest.raises(ValueError):
        sym.RadialPiecewise((-1.0,), (0, 1))


def test_sampled_errors_are_wrapped():
    def bad(r):
        raise ZeroDivisionError()

    f = sym.RadialSampled(bad, label="bad")
    with pytest.raises(SymbolEvaluationError):
        f(np.ones(3))
    assert not sym.is_bounded(f)
    assert sym.is_radial(f)


def test_sup_norm_estimate():
    assert sym.sup_norm_estimate(sym.QuadraticPhase(3.0)) == 1.0
    assert sym.sup_norm_estimate(sym.Constant(-2.5)) == 2.5
    assert sym.sup_norm_estimate(sym.scale(sym.disk_indicator(2.0), 3.0)) == 1.0

    grid = SamplingGrid(r_max=3.0, n_radii=4, n_angles=8)
    # only a grid lower bound for anything else
    assert sym.sup_norm_estimate(sym.Z, grid) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        sym.sup_norm_estimate(sym.Z)

    assert sym.is_bounded(sym.PlaneWave(1.0) * sym.radial_dyadic(3))
    assert not sym.is_bounded(sym.Z * sym.QuadraticPhase(1.0))


def test_oscillation_at():
    # |exp(ix) - 1| <= 2 sin(1/2) for |x| < 1, approached from below
    osc = sym.oscillation_at(sym.PlaneWave(1.0), 0.0)
    assert osc <= 2 * math.sin(0.5) + 1e-15
    assert osc > 2 * math.sin(0.5) - 1e-2

    assert sym.oscillation_at(sym.Constant(3.0), 1j) == 0.0
    with pytest.raises(ValueError):
        sym.oscillation_at(sym.Z, 0.0, radius=0.0)


def test_vo_profile():
    # the disk indicator is constant far away from its edge
    profile = sym.vo_profile(sym.disk_indicator(1.0), [0.5, 1.2, 10.0, 100.0])
    np.testing.assert_array_equal(profile[2:], 0.0)
    assert profile[0] == 1.0

    # a plane wave oscillates the same way everywhere
    profile = sym.vo_profile(sym.PlaneWave(1.0), [1.0, 10.0, 100.0], angle=0.25)
    np.testing.assert_allclose(profile, profile[0], rtol=0.0, atol=2e-3)


def test_oscillation_decays_for_slow_phase():
    # exp(i sqrt|z|) oscillates less and less far from the origin
    f = sym.RadialSampled(lambda r: np.exp(1j * np.sqrt(r)), bound=1.0, label="sqrt")
    osc = [sym.oscillation_at(f, R) for R in (10.0, 100.0, 1000.0)]
    assert osc[0] > osc[1] > osc[2] > 0.0
    assert osc[2] < 0.02


@pytest.mark.parametrize("z", [0.0, 3.0 - 1.0j, -40.0j])
def test_oscillation_of_real_part(z):
    # sup |Re(z - w)| over the open unit disk is 1 and never attained
    osc = sym.oscillation_at(sym.real_part(sym.Z), z, samples=10_000)
    assert 0.99 <= osc < 1.0


def test_sup_norm_estimate_of_sum():
    f = sym.Sum(sym.Constant(1.0), sym.QuadraticPhase(1.0))
    grid = SamplingGrid(r_max=math.sqrt(2 * math.pi), n_radii=64, n_angles=1)
    assert sym.sup_norm_estimate(f, grid) == pytest.approx(2.0, abs=1e-3)
    assert sym.sup_norm_estimate(sym.radial_dyadic(24)) == 1.0


def test_radial_dyadic_self_similarity():
    f = sym.radial_dyadic(24)
    assert f(3.0) == -1.0
    assert f(0.3) == 1.0

    rng = np.random.RandomState(42)
    radii = 10.0 ** rng.uniform(-4, 4, 10_000)
    z = radii * np.exp(2j * np.pi * rng.uniform(size=radii.size))
    np.testing.assert_array_equal(f(z / 2), -f(z))


_SMOOTH_LEAVES = [
    sym.Z,
    sym.ZBAR,
    sym.Constant(0.5 - 1j),
    sym.QuadraticPhase(0.3),
    sym.PlaneWave(1.0 - 0.5j),
]


def _random_tree(rng, depth):
    if depth == 0 or rng.uniform() < 0.3:
        return _SMOOTH_LEAVES[rng.randint(len(_SMOOTH_LEAVES))]
    kind = rng.randint(5)
    if kind == 0:
        return sym.Sum(_random_tree(rng, depth - 1), _random_tree(rng, depth - 1))
    elif kind == 1:
        return sym.Product(_random_tree(rng, depth - 1), _random_tree(rng, depth - 1))
    elif kind == 2:
        return sym.Conjugate(_random_tree(rng, depth - 1))
    elif kind == 3:
        return sym.Scaled(_random_tree(rng, depth - 1), rng.uniform(0.5, 2.0))
    w = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    return sym.Translated(_random_tree(rng, depth - 1), w)


def test_evaluation_identities_on_random_trees():
    rng = np.random.RandomState(2024)
    z = _points(n=25, seed=9) / 2.5
    for _ in range(30):
        f = _random_tree(rng, 4)
        s = rng.uniform(0.25, 3.0)
        w = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        np.testing.assert_allclose(sym.scale(f, s)(z), f(s * z), rtol=1e-10, atol=1e-10)
        np.testing.assert_array_equal(sym.translate(f, w)(z), f(w - z))
        np.testing.assert_array_equal(sym.Conjugate(f)(z), np.conj(f(z)))
        if sym.is_radial(f):
            np.testing.assert_allclose(f(z), f(np.abs(z)), rtol=1e-10, atol=1e-10)
