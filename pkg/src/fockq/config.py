"""
Validated configuration: the per-sweep numerical policy (``SweepConfig``) and
the effective command-line configuration (``RunConfig``), plus the reader for
flat ``key = value`` configuration files.
"""

import math
from typing import Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)

from .quadrature import MAX_LAGUERRE_ORDER, SamplingGrid

MAX_BASIS_DIM = 4096

COMMANDS = ("sweep", "norm-limit", "heat", "bmo", "scenario")


def _validate_t_list(val):
    if isinstance(val, str):
        val = [s for s in val.replace(" ", "").split(",") if s != ""]
    try:
        out = tuple(float(v) for v in val)
    except (TypeError, ValueError):
        raise ValueError("must be a comma separated list of numbers") from None
    if len(out) == 0:
        raise ValueError("must have at least one entry")
    elif not all(math.isfinite(v) and v > 0 for v in out):
        raise ValueError("every t must be positive")
    elif any(b >= a for a, b in zip(out[:-1], out[1:])):
        raise ValueError("t values must be strictly decreasing")
    return out


class SweepConfig(BaseModel):
    """
    Numerical policy of a semiclassical sweep.

    Unless ``basis_dim`` pins it, the basis dimension at weight ``t`` is
    ``min(basis_dim_cap, max(min_basis_dim, ceil(basis_scale / t)))``; the
    moment-tail dimension defaults to ``2 N + 32``.
    """

    model_config = ConfigDict(frozen=True)

    basis_dim: Optional[PositiveInt] = None
    tail_dim: Optional[PositiveInt] = None
    min_basis_dim: PositiveInt = 64
    basis_dim_cap: PositiveInt = MAX_BASIS_DIM
    basis_scale: PositiveFloat = 8.0
    probe_width: PositiveInt = 16
    tail_tol: PositiveFloat = 1e-8
    vanish_threshold: PositiveFloat = 0.05
    floor_threshold: PositiveFloat = 0.05
    power_tol: PositiveFloat = 1e-12
    power_max_iter: PositiveInt = 10_000
    norm_method: Literal["power", "svd"] = "power"
    quad_order: PositiveInt = 64
    n_angles: PositiveInt = 128
    panel_states: NonNegativeInt = 8

    @field_validator("basis_dim", "basis_dim_cap")
    @classmethod
    def _check_dim(cls, val):
        if val is not None and val > MAX_BASIS_DIM:
            raise ValueError(f"must not exceed {MAX_BASIS_DIM}")
        return val

    @field_validator("quad_order")
    @classmethod
    def _check_order(cls, val):
        if val > MAX_LAGUERRE_ORDER:
            raise ValueError(f"must not exceed {MAX_LAGUERRE_ORDER}")
        return val

    @model_validator(mode="after")
    def _check_dims(self):
        if (
            self.tail_dim is not None
            and self.basis_dim is not None
            and self.tail_dim < self.basis_dim
        ):
            raise ValueError("tail_dim must be at least basis_dim")
        return self

    def dims_for(self, t):
        """Returns ``(N, M)`` at weight ``t``."""
        if self.basis_dim is not None:
            N = self.basis_dim
        else:
            N = max(self.min_basis_dim, math.ceil(self.basis_scale / t))
            N = min(N, self.basis_dim_cap)
        M = self.tail_dim if self.tail_dim is not None else 2 * N + 32
        return N, max(M, N)


class RunConfig(BaseModel):
    """The effective configuration of one command-line invocation."""

    model_config = ConfigDict(frozen=True)

    command: Literal["sweep", "norm-limit", "heat", "bmo", "scenario"]
    f_expr: Optional[str] = None
    g_expr: Optional[str] = None
    t_list: Optional[Tuple[float, ...]] = None
    basis_dim: Optional[PositiveInt] = None
    tail_dim: Optional[PositiveInt] = None
    quad_order: PositiveInt = 64
    grid: str = "0:4:64,32"
    grid_units: Literal["absolute", "heat"] = "absolute"
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    vanish_threshold: PositiveFloat = 0.05
    floor_threshold: PositiveFloat = 0.05
    tail_tol: PositiveFloat = 1e-8
    threads: Optional[PositiveInt] = None
    scenario: Optional[str] = None

    @field_validator("t_list", mode="before")
    @classmethod
    def _parse_t_list(cls, val):
        if val is None:
            return None
        return _validate_t_list(val)

    @field_validator("basis_dim")
    @classmethod
    def _check_basis_dim(cls, val):
        if val is not None and val > MAX_BASIS_DIM:
            raise ValueError(f"must not exceed {MAX_BASIS_DIM}")
        return val

    @field_validator("quad_order")
    @classmethod
    def _check_order(cls, val):
        if val > MAX_LAGUERRE_ORDER:
            raise ValueError(f"must not exceed {MAX_LAGUERRE_ORDER}")
        return val

    @field_validator("grid")
    @classmethod
    def _check_grid(cls, val):
        SamplingGrid.parse(val)
        return val

    @model_validator(mode="after")
    def _check_dims(self):
        if (
            self.tail_dim is not None
            and self.basis_dim is not None
            and self.tail_dim < self.basis_dim
        ):
            raise ValueError("tail_dim must be at least basis_dim")
        return self

    def sampling_grid(self):
        return SamplingGrid.parse(self.grid, units=self.grid_units)

    def sweep_config(self):
        return SweepConfig(
            basis_dim=self.basis_dim,
            tail_dim=self.tail_dim,
            quad_order=self.quad_order,
            tail_tol=self.tail_tol,
            vanish_threshold=self.vanish_threshold,
            floor_threshold=self.floor_threshold,
        )


def read_config_file(path):
    """
    Read a flat configuration file.

    Every non-blank line holds ``key = value``; ``#`` starts a comment. Keys
    may be spelled with dashes or underscores. Unknown keys are rejected.
    """
    known = set(RunConfig.model_fields)
    out = {}
    with open(path, "r") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if line == "":
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if sep == "" or key == "":
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            elif key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            elif key in out:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value.strip()
    return out
