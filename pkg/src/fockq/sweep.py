"""
Semiclassical sweeps over decreasing weights ``t``.
"""

from dataclasses import dataclass
import logging
from typing import Optional, Tuple

import numpy as np

from . import symbols as sym
from .config import SweepConfig
from .fock_matrix import toeplitz_matrix
from .heat import heat_field
from .quadrature import SamplingGrid
from .spectral import operator_norm
from .worker import SweepPoint, SweepWorker, _PoolCallback, _prep_pool

VERDICTS = ("vanishing", "non_vanishing", "inconclusive")


def _check_t_list(t_list):
    ts = [float(t) for t in t_list]
    if len(ts) == 0:
        raise ValueError("t_list must not be empty")
    elif not all(np.isfinite(t) and t > 0 for t in ts):
        raise ValueError("every t must be positive")
    elif len(set(ts)) != len(ts):
        raise ValueError("t_list has repeated values")
    return sorted(ts, reverse=True)


def _strictly_decreasing(vals):
    return all(b < a for a, b in zip(vals[:-1], vals[1:]))


def sweep_verdict(points, vanish_threshold=0.05, floor_threshold=0.05, bounded=True):
    """
    Classify a sweep (points ordered by decreasing ``t``).

    ``"vanishing"`` needs the last norm below ``vanish_threshold`` and a
    strict decrease over the last three unflagged points;
    ``"non_vanishing"`` needs every norm at or above ``floor_threshold``.
    For unbounded symbols finite-section norms can't separate truncation
    growth from unboundedness: ``"non_vanishing"`` is never reported and
    ``"vanishing"`` also needs the Hankel bound products to decrease.
    """
    good = [p for p in points if not p.flagged]
    if len(good) == 0:
        return "inconclusive"
    norms = [p.semi_comm_norm for p in good]
    tail = good[-3:]
    vanishing = (
        len(good) >= 3
        and norms[-1] < vanish_threshold
        and _strictly_decreasing([p.semi_comm_norm for p in tail])
    )
    if vanishing and not bounded:
        vanishing = _strictly_decreasing(
            [p.hankel_f_bound * p.hankel_g_bound for p in tail]
        )
    if vanishing:
        return "vanishing"
    elif bounded and all(n >= floor_threshold for n in norms):
        return "non_vanishing"
    return "inconclusive"


@dataclass(frozen=True)
class SweepReport:
    f_expr: str
    g_expr: str
    points: Tuple[SweepPoint, ...]
    verdict: str
    config: SweepConfig
    grid: SamplingGrid

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"Unknown verdict: {self.verdict!r}")
        ts = [p.t for p in self.points]
        if ts != sorted(ts, reverse=True):
            raise ValueError("sweep points must be ordered by decreasing t")


def t_sweep(f, g, t_list, config=None, grid=None, pool=None, threads=None):
    """
    Evaluate the semi-commutator norm and its diagnostics at every ``t``.

    Parameters
    ----------
    f, g: Symbol
    t_list: sequence of float
        Positive weights (processed in decreasing order)
    config: SweepConfig, optional
    grid: SamplingGrid, optional
        Grid used for the BMO estimate, the heat supremum and the coherent
        states of the Hankel panel
    pool: `multiprocessing.pool.Pool`-like object, optional
        Must provide a ``map(func, iterable, callback=None)`` method. When
        omitted a schwimmbad pool is created (see ``_prep_pool``).
    threads: int, optional
        Worker count for the pool created here

    Returns
    -------
    SweepReport
    """
    f, g = sym.as_symbol(f), sym.as_symbol(g)
    ts = _check_t_list(t_list)
    config = SweepConfig() if config is None else config
    grid = SamplingGrid() if grid is None else grid

    worker = SweepWorker(f, g, config, grid)
    pool, n_workers, owned = _prep_pool(pool, threads)
    logging.info(f"sweeping {len(ts)} values of t with {n_workers} worker(s)")
    callback = _PoolCallback(len(ts))
    try:
        points = list(pool.map(worker, ts, callback=callback))
    finally:
        if owned:
            pool.close()
    logging.info(f"cumulative perf-sec - {callback.cumulative_perf.summarize_timing_sec()}")

    points = tuple(sorted(points, key=lambda p: -p.t))
    bounded = sym.is_bounded(f) and sym.is_bounded(g)
    verdict = sweep_verdict(
        points, config.vanish_threshold, config.floor_threshold, bounded=bounded
    )
    return SweepReport(f.to_expr(), g.to_expr(), points, verdict, config, grid)


@dataclass(frozen=True)
class NormLimitPoint:
    t: float
    lower: float
    section_norm: Optional[float]
    upper: float

    @property
    def gap(self):
        return self.upper - self.lower


@dataclass(frozen=True)
class NormLimitReport:
    f_expr: str
    points: Tuple[NormLimitPoint, ...]
    monotone: bool
    grid: SamplingGrid


def norm_limit_sweep(f, t_list, grid=None, section_dim=None, tol=1e-8):
    """
    Sandwich ``sup_grid |f~^(t)| <= ||T_f^(t)|| <= ||f||_inf`` over ``t_list``.

    The lower bound should not decrease as ``t`` decreases; ``monotone``
    records whether this held (within ``tol``) and a warning is logged when
    it did not. With ``section_dim`` the operator norm of the truncated
    Toeplitz matrix is reported as well.
    """
    f = sym.as_symbol(f)
    if not sym.is_bounded(f):
        raise ValueError(f"{f} is not known to be bounded")
    grid = SamplingGrid() if grid is None else grid
    ts = _check_t_list(t_list)
    points = []
    for t in ts:
        lower = heat_field(f, t, grid).sup()
        section = None
        if section_dim is not None:
            section = operator_norm(toeplitz_matrix(f, t, section_dim).entries)
        upper = sym.sup_norm_estimate(f, grid, t)
        points.append(NormLimitPoint(t, lower, section, upper))

    lowers = [p.lower for p in points]
    monotone = all(b >= a - tol for a, b in zip(lowers[:-1], lowers[1:]))
    if not monotone:
        logging.warning(f"the heat supremum of {f} decreased as t decreased")
    return NormLimitReport(f.to_expr(), tuple(points), monotone, grid)
