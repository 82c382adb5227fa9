import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import schwimmbad

from . import symbols as sym
from ._perf import PerfRegions
from .config import SweepConfig
from .fock_matrix import coherent_coefficients, hankel_panel, hankel_section_norm
from .errors import TruncationError
from .heat import heat_field, oscillation_report
from .quadrature import SamplingGrid, polar_rule
from .spectral import semi_commutator_norm

_PERF_REGION_NAMES = ("all", "semi-comm", "hankel", "bmo", "heat")

THREADS_ENV_VAR = "FOCKQ_THREADS"


@dataclass(frozen=True)
class SweepPoint:
    """
    Everything measured at one weight ``t`` of a sweep.

    ``flagged`` is set when the tail indicator exceeds the configured
    tolerance or when the point failed (``error`` then holds the reason and
    the numeric fields are NaN).
    """

    t: float
    semi_comm_norm: float
    hankel_f_bound: float
    hankel_g_bound: float
    bmo_f: float
    heat_sup: float
    N_used: int
    M_used: int
    tail_indicator: float
    hankel_panel: float = float("nan")
    bmo_ratio: float = float("nan")
    path: str = ""
    extended_sup: Optional[float] = None
    flagged: bool = False
    error: Optional[str] = None
    timing: Dict[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.error is None:
            norms = (
                self.semi_comm_norm,
                self.hankel_f_bound,
                self.hankel_g_bound,
                self.bmo_f,
                self.heat_sup,
            )
            if any(not (v >= 0) for v in norms):
                raise ValueError(f"negative or NaN norm at t={self.t}: {norms}")

    @classmethod
    def failed(cls, t, N, M, error):
        nan = float("nan")
        return cls(t, nan, nan, nan, nan, nan, N, M, nan, flagged=True, error=error)


def _panel_states(t, N, grid, n_states):
    # basis states spread over the section, then coherent states at grid
    # points whose truncation is certified
    states = []
    for k in np.unique(np.linspace(0, N - 1, n_states).astype(int)):
        e = np.zeros(N, dtype=np.complex128)
        e[k] = 1.0
        states.append(e)
    for w in grid.points(t):
        if len(states) >= 2 * n_states:
            break
        try:
            states.append(coherent_coefficients(w, t, N))
        except TruncationError:
            continue
    return np.array(states)


class SweepWorker:
    """
    Computes the :class:`SweepPoint` for a single weight ``t``.

    Calling the worker never raises for numerical failures: the exception is
    logged and recorded in a flagged point so that the sweep can continue.
    """

    def __init__(self, f, g, config=None, grid=None):
        self.f = sym.as_symbol(f)
        self.g = sym.as_symbol(g)
        self.config = SweepConfig() if config is None else config
        self.grid = SamplingGrid() if grid is None else grid

    def process_t(self, t):
        perf = PerfRegions(_PERF_REGION_NAMES)
        cfg = self.config
        f, g = self.f, self.g
        N, M = cfg.dims_for(t)
        rule = polar_rule(cfg.quad_order, cfg.n_angles)

        with perf.region("all"):
            with perf.region("semi-comm"):
                detail = semi_commutator_norm(
                    f,
                    g,
                    t,
                    N,
                    M,
                    probe_width=cfg.probe_width,
                    method=cfg.norm_method,
                    power_tol=cfg.power_tol,
                    max_iter=cfg.power_max_iter,
                    returned=True,
                )
            with perf.region("hankel"):
                f_bound = hankel_section_norm(sym.Conjugate(f), t, N, M)
                g_bound = hankel_section_norm(g, t, N, M)
                panel = float("nan")
                if cfg.panel_states > 0:
                    states = _panel_states(t, N, self.grid, cfg.panel_states)
                    panel = float(np.max(hankel_panel(f, t, states, M)))
            with perf.region("bmo"):
                bmo_f = oscillation_report(f, t, self.grid, rule).bmo_estimate
            with perf.region("heat"):
                heat_sup = heat_field(f, t, self.grid, rule).sup()

        ratio = panel / bmo_f if bmo_f > 0 else float("nan")
        flagged = detail.tail_indicator > cfg.tail_tol
        if flagged:
            logging.warning(
                f"t={t}: tail indicator {detail.tail_indicator:.3e} exceeds "
                f"{cfg.tail_tol:.1e} (N={N}, M={M})"
            )
        return SweepPoint(
            t=t,
            semi_comm_norm=detail.norm,
            hankel_f_bound=f_bound,
            hankel_g_bound=g_bound,
            bmo_f=bmo_f,
            heat_sup=heat_sup,
            N_used=N,
            M_used=M,
            tail_indicator=detail.tail_indicator,
            hankel_panel=panel,
            bmo_ratio=ratio,
            path=detail.path,
            extended_sup=detail.extended_sup,
            flagged=flagged,
            timing=perf.times_sec(),
        )

    def __call__(self, t):
        try:
            return self.process_t(t)
        except Exception as e:
            logging.warning(f"sweep point t={t} failed: {type(e).__name__}: {e}")
            N, M = self.config.dims_for(t)
            return SweepPoint.failed(t, N, M, f"{type(e).__name__}: {e}")


class _PoolCallback:
    def __init__(self, total_count):
        self.total_count = total_count
        self.cumulative_count = 0
        self.cumulative_perf = PerfRegions(_PERF_REGION_NAMES)

    def __call__(self, point):
        self.cumulative_count += 1
        perf = PerfRegions(_PERF_REGION_NAMES)
        if point.timing:
            perf.times = {k: int(v * 1e9) for k, v in point.timing.items()}
        self.cumulative_perf = self.cumulative_perf + perf
        status = "FLAGGED" if point.flagged else "ok"
        logging.info(
            f"sweep point #{self.cumulative_count} of {self.total_count} "
            f"(t={point.t!r}, N={point.N_used}, {status}) - "
            f"perf-sec - {perf.summarize_timing_sec()}"
        )


def _prep_pool(pool=None, threads=None):
    """
    Returns ``(pool, n_workers, owned)``.

    Without an explicit pool, the worker count comes from ``threads`` or the
    ``FOCKQ_THREADS`` environment variable (default 1, a serial pool).
    ``owned`` tells the caller to close the pool when done.
    """
    if pool is not None:
        return pool, getattr(pool, "size", 1), False
    if threads is None:
        raw = os.environ.get(THREADS_ENV_VAR, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    if threads > 1:
        return schwimmbad.MultiPool(processes=threads), threads, True
    return schwimmbad.SerialPool(), 1, True
