"""
Named, self-checking computations reproducing the standard examples of
semi-commutator behavior, plus diagnostics of the heat transform and of the
scaling covariance.

Every scenario records its checks; :func:`run_scenario` writes a JSON report
and raises :class:`ScenarioAssertionError` when any check fails.
"""

import math
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import symbols as sym
from .config import RunConfig, SweepConfig
from .errors import ScenarioAssertionError
from .fock_matrix import scaling_covariance_check
from .heat import (
    heat_deviation,
    mo_lower_bound_check,
    variance_profile,
)
from .quadrature import SamplingGrid
from .reports import atomic_write, dumps_json, sweep_payload
from .sweep import norm_limit_sweep, t_sweep


class _Checks:
    def __init__(self, scenario):
        self.scenario = scenario
        self.records = []

    def _record(self, check, passed, observed, expected, tolerance):
        self.records.append(
            {
                "scenario": self.scenario,
                "check": check,
                "observed": observed,
                "expected": expected,
                "tolerance": tolerance,
                "passed": bool(passed),
            }
        )

    def close(self, check, observed, expected, tol):
        observed, expected = float(observed), float(expected)
        self._record(check, abs(observed - expected) <= tol, observed, expected, tol)

    def at_least(self, check, observed, floor, tol=0.0):
        observed = float(observed)
        self._record(check, observed >= floor - tol, observed, f">= {floor!r}", tol)

    def holds(self, check, condition, observed=None):
        self._record(check, condition, observed, True, None)

    @property
    def failures(self):
        return [r for r in self.records if not r["passed"]]


def _ts(cfg, default):
    if cfg is not None and cfg.t_list is not None:
        return cfg.t_list
    return tuple(default)


def _sweep_config(cfg, **defaults):
    kw = dict(defaults)
    if cfg is not None:
        for key in ("basis_dim", "tail_dim", "quad_order", "tail_tol"):
            val = getattr(cfg, key)
            if val is not None:
                kw[key] = val
        kw["vanish_threshold"] = cfg.vanish_threshold
        kw["floor_threshold"] = cfg.floor_threshold
    return SweepConfig(**kw)


def _example_a(cfg, checks):
    # the diagonal defect 1 - (1 + 16t^2)^-(k+1) needs this many levels to
    # come within 1e-6 of 1
    ts = _ts(cfg, (0.5, 0.1, 0.02))
    n_needed = max(math.ceil(math.log(1e6) / math.log1p(16 * t * t)) + 1 for t in ts)
    config = _sweep_config(cfg, basis_dim=min(n_needed, 4096), panel_states=0)
    f, g = sym.QuadraticPhase(1.0), sym.QuadraticPhase(-1.0)
    report = t_sweep(f, g, ts, config, SamplingGrid(n_radii=16).radial_only())
    for p in report.points:
        checks.close(f"semi_comm_norm(t={p.t!r})", p.semi_comm_norm, 1.0, 1e-6)
    checks.holds("verdict", report.verdict == "non_vanishing", report.verdict)
    return report


def _example_b(cfg, checks):
    ts = _ts(cfg, tuple(4.0 ** (-ell - 1) for ell in range(1, 5)))
    config = _sweep_config(cfg, basis_dim=512)
    f = sym.radial_dyadic(24)
    grid = SamplingGrid(r_max=4.0, n_radii=64, n_angles=1, units="heat")
    report = t_sweep(f, f, ts, config, grid)
    norms = np.array([p.semi_comm_norm for p in report.points])
    checks.at_least("min semi_comm_norm", norms.min(), config.floor_threshold)
    checks.close("semi_comm_norm spread", norms.max() / norms.min(), 1.0, 0.02)
    bmo = np.array([p.bmo_f for p in report.points])
    checks.close("bmo spread", bmo.max() - bmo.min(), 0.0, 1e-6)
    checks.holds("verdict", report.verdict == "non_vanishing", report.verdict)
    return report


def _example_c(cfg, checks):
    ts = _ts(cfg, (1.0, 0.25, 0.0625, 0.01))
    report = t_sweep(sym.Z, sym.ZBAR, ts, _sweep_config(cfg, panel_states=4))
    for p in report.points:
        checks.close(f"semi_comm_norm(t={p.t!r})", p.semi_comm_norm, 4 * p.t, 1e-9)
    return report


def _buc_decay(cfg, checks):
    ts = _ts(cfg, (1.0, 0.3, 0.1, 0.03, 0.01))
    f = sym.PlaneWave(1.0)
    grid = SamplingGrid(r_max=4.0, n_radii=8, n_angles=16)
    report = t_sweep(f, f, ts, _sweep_config(cfg, panel_states=4), grid)
    norms = [p.semi_comm_norm for p in report.points]
    checks.holds(
        "semi_comm_norm decreasing",
        all(b < a for a, b in zip(norms[:-1], norms[1:])),
        norms,
    )
    for p in report.points:
        expected = math.sqrt(-math.expm1(-2.0 * p.t))
        checks.close(f"bmo(t={p.t!r})", p.bmo_f, expected, 1e-6)
        checks.close(
            f"heat deviation(t={p.t!r})",
            heat_deviation(f, p.t, grid),
            -math.expm1(-p.t),
            1e-6,
        )
    return report


def _vmo_diagnostic(cfg, checks):
    radii = [2.0 ** -k for k in range(9)]
    dyadic = sym.radial_dyadic(24)
    wave = sym.PlaneWave(1.0)
    dyadic_var = variance_profile(dyadic, 0.0, radii)
    wave_var = variance_profile(wave, 0.0, radii)
    checks.at_least("radial_dyadic ball variance", dyadic_var.min(), 0.1)
    checks.holds(
        "planewave ball variance decreasing",
        bool(np.all(np.diff(wave_var) < 0)),
        wave_var,
    )
    checks.close("planewave ball variance at smallest radius", wave_var[-1], 0.0, 1e-4)

    distances = [1.0, 4.0, 16.0, 64.0]
    dyadic_vo = sym.vo_profile(dyadic, distances)
    checks.at_least("radial_dyadic oscillation at infinity", dyadic_vo.min(), 1.0)

    for t in _ts(cfg, (0.25,)):
        mo, floor = mo_lower_bound_check(dyadic, 0.0, t)
        checks.at_least(f"mean oscillation lower bound(t={t!r})", mo, floor, 1e-8)
    return {
        "radii": radii,
        "radial_dyadic_variance": dyadic_var,
        "planewave_variance": wave_var,
        "distances": distances,
        "radial_dyadic_oscillation": dyadic_vo,
    }


def _norm_limit_step(cfg, checks):
    ts = _ts(cfg, (0.5, 0.2, 0.1, 0.05))
    f = sym.disk_indicator(1.0)
    report = norm_limit_sweep(f, ts, SamplingGrid(r_max=2.0, n_radii=17, n_angles=1))
    for p in report.points:
        checks.close(f"lower(t={p.t!r})", p.lower, -math.expm1(-0.25 / p.t), 1e-8)
        checks.close(f"upper(t={p.t!r})", p.upper, 1.0, 0.0)
    if min(ts) <= 0.05:
        checks.at_least("lower at smallest t", report.points[-1].lower, 0.99)
    checks.holds("lower nondecreasing", report.monotone)
    return report


def _covariance_audit(cfg, checks):
    ts = _ts(cfg, (0.5, 1.0 / 16, 1.0 / 64))
    N = 64 if (cfg is None or cfg.basis_dim is None) else cfg.basis_dim
    symbols = (sym.QuadraticPhase(1.0), sym.radial_dyadic(24), sym.PlaneWave(1.0))
    diffs = {}
    for f in symbols:
        for t in ts:
            lhs, rhs = scaling_covariance_check(f, t, N)
            diff = lhs.max_difference(rhs)
            diffs[f"{f.to_expr()} @ t={t!r}"] = diff
            checks.close(f"covariance {f.to_expr()} t={t!r}", diff, 0.0, 1e-8)
    return {"N": N, "max_difference": diffs}


class Scenario(NamedTuple):
    name: str
    description: str
    func: Callable


class ScenarioRegistry:
    def __init__(self, itr):
        self._sdict = dict((scenario.name, scenario) for scenario in itr)

    def get_scenario(self, name):
        try:
            return self._sdict[name]
        except KeyError:
            raise ValueError(f"Unknown scenario: {name}") from None

    def names(self):
        return sorted(self._sdict)


_SCENARIO_REGISTRY = ScenarioRegistry(
    [
        Scenario("example_a", "quadratic phases exp(+-i|z|^2)", _example_a),
        Scenario("example_b", "dyadic sign pattern at t = 4^-(l+1)", _example_b),
        Scenario("example_c", "coordinates z and zbar", _example_c),
        Scenario("buc_decay", "plane wave exp(i Re z)", _buc_decay),
        Scenario("vmo_diagnostic", "ball variances and oscillation", _vmo_diagnostic),
        Scenario("norm_limit_step", "indicator of the unit disk", _norm_limit_step),
        Scenario("covariance_audit", "scaling covariance of matrices", _covariance_audit),
    ]
)


def scenario_names():
    return _SCENARIO_REGISTRY.names()


def get_scenario(name):
    return _SCENARIO_REGISTRY.get_scenario(name)


class ScenarioOutcome(NamedTuple):
    name: str
    records: list
    payload: str
    path: Optional[str]

    @property
    def passed(self):
        return all(r["passed"] for r in self.records)


def run_scenario(name, overrides=None, out=None):
    """
    Run the named scenario and write its JSON report to ``out`` (if given).

    Parameters
    ----------
    name: str
    overrides: RunConfig, optional
        ``t_list``, ``basis_dim``, ``tail_dim``, ``quad_order``, the tail
        tolerance and the verdict thresholds replace the scenario defaults
    out: str, optional

    Raises
    ------
    ValueError
        For an unknown scenario
    ScenarioAssertionError
        When a check fails (after the report is written); its ``record``
        lists every failed check
    """
    scenario = get_scenario(name)
    if overrides is not None and not isinstance(overrides, RunConfig):
        raise TypeError("overrides must be a RunConfig")
    checks = _Checks(name)
    rslt = scenario.func(overrides, checks)

    header = {
        "scenario": name,
        "description": scenario.description,
        "status": "failed" if checks.failures else "passed",
        "checks": checks.records,
    }
    if overrides is not None:
        header["config"] = overrides.model_dump()
    if hasattr(rslt, "points") and hasattr(rslt, "verdict"):
        body = {"sweep": sweep_payload(rslt)}
    elif hasattr(rslt, "points"):
        body = {
            "points": [
                {"t": p.t, "lower": p.lower, "upper": p.upper, "gap": p.gap}
                for p in rslt.points
            ],
            "monotone": rslt.monotone,
        }
    else:
        body = {"results": rslt}
    payload = dumps_json({**header, **body})

    if out is not None:
        atomic_write(out, payload)
    outcome = ScenarioOutcome(name, checks.records, payload, out)
    if not outcome.passed:
        raise ScenarioAssertionError(
            {
                **checks.failures[0],
                "failures": checks.failures,
                "report": out,
            }
        )
    return outcome
