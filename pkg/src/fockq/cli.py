"""
Command-line front end.

Subcommands::

    fockq sweep --f EXPR --g EXPR --t 0.5,0.1,0.02 [--basis-dim N] [--tail-dim M]
    fockq norm-limit --f EXPR --t 0.5,0.2,0.1
    fockq heat --f EXPR --t T [--grid r0:r1:nr,na]
    fockq bmo --f EXPR --t-list 1,0.1,0.01
    fockq scenario NAME [overrides]

Symbol expressions use the grammar documented in :mod:`fockq.grammar`.
Values from ``--config FILE`` (flat ``key = value`` lines) are overridden by
flags given on the command line. Reports go to ``--out`` (written
atomically) or to stdout.

Exit status: 0 on success, 1 when a scenario check fails, 2 for invalid
input (bad expression, bad configuration, unknown scenario).
"""

import argparse
import logging
import sys

from . import __version__
from .config import RunConfig, read_config_file
from .errors import FockqError, ScenarioAssertionError
from .grammar import parse_symbol
from .heat import bmo_seminorm, oscillation_report
from .reports import (
    atomic_write,
    bmo_to_csv,
    bmo_to_json,
    dumps_json,
    norm_limit_to_csv,
    norm_limit_to_json,
    oscillation_to_csv,
    oscillation_to_json,
    sweep_to_csv,
    sweep_to_json,
)
from .scenarios import run_scenario, scenario_names
from .sweep import norm_limit_sweep, t_sweep


def _add_run_options(p):
    p.add_argument("--config", metavar="FILE", help="flat key = value configuration file")
    p.add_argument("--basis-dim", dest="basis_dim", type=int, help="Fock section size N")
    p.add_argument("--tail-dim", dest="tail_dim", type=int, help="moment-tail size M")
    p.add_argument("--quad-order", dest="quad_order", type=int, help="Laguerre order")
    p.add_argument("--grid", help="sampling grid 'r0:r1:nr,na'")
    p.add_argument(
        "--grid-units", dest="grid_units", choices=["absolute", "heat"], default=None
    )
    p.add_argument("--vanish-threshold", dest="vanish_threshold", type=float)
    p.add_argument("--floor-threshold", dest="floor_threshold", type=float)
    p.add_argument("--tail-tol", dest="tail_tol", type=float)
    p.add_argument("--threads", type=int, help="worker count (overrides FOCKQ_THREADS)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=None)


def _add_t_options(p, required):
    group = p.add_mutually_exclusive_group(required=required)
    group.add_argument("--t", dest="t_list", help="comma separated weights")
    group.add_argument("--t-list", dest="t_list", help="alias of --t")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fockq",
        description="Toeplitz quantization on Fock spaces: sweeps, heat "
        "transforms and reproducible scenarios.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="log at DEBUG level"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("sweep", help="semi-commutator norms over decreasing t")
    p.add_argument("--f", dest="f_expr", required=True)
    p.add_argument("--g", dest="g_expr", required=True)
    _add_t_options(p, required=False)
    _add_run_options(p)

    p = sub.add_parser("norm-limit", help="heat supremum vs sup norm over decreasing t")
    p.add_argument("--f", dest="f_expr", required=True)
    _add_t_options(p, required=False)
    _add_run_options(p)

    p = sub.add_parser("heat", help="heat transform and mean oscillation on a grid")
    p.add_argument("--f", dest="f_expr", required=True)
    _add_t_options(p, required=False)
    _add_run_options(p)

    p = sub.add_parser("bmo", help="BMO seminorm estimates over decreasing t")
    p.add_argument("--f", dest="f_expr", required=True)
    _add_t_options(p, required=False)
    _add_run_options(p)

    p = sub.add_parser(
        "scenario",
        help="run a named, self-checking scenario",
        description="Available scenarios: " + ", ".join(scenario_names()),
    )
    p.add_argument("scenario", metavar="name")
    _add_t_options(p, required=False)
    _add_run_options(p)
    return parser


_PASSTHROUGH = (
    "f_expr",
    "g_expr",
    "t_list",
    "basis_dim",
    "tail_dim",
    "quad_order",
    "grid",
    "grid_units",
    "vanish_threshold",
    "floor_threshold",
    "tail_tol",
    "threads",
    "out",
    "format",
    "scenario",
)


def effective_config(args):
    """Merge the configuration file (if any) with the command-line flags."""
    values = {}
    if args.config is not None:
        values.update(read_config_file(args.config))
    for key in _PASSTHROUGH:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    values["command"] = args.command
    return RunConfig(**values)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)
        logging.info(f"wrote {out}")


def _require_t(cfg):
    if cfg.t_list is None:
        raise ValueError(f"the {cfg.command} command needs --t")
    return cfg.t_list


def _run_sweep(cfg):
    if cfg.g_expr is None:
        raise ValueError("the sweep command needs --g")
    f, g = parse_symbol(cfg.f_expr), parse_symbol(cfg.g_expr)
    report = t_sweep(
        f,
        g,
        _require_t(cfg),
        cfg.sweep_config(),
        cfg.sampling_grid(),
        threads=cfg.threads,
    )
    if cfg.format == "json":
        return sweep_to_json(report, cfg)
    return sweep_to_csv(report)


def _run_norm_limit(cfg):
    f = parse_symbol(cfg.f_expr)
    report = norm_limit_sweep(
        f, _require_t(cfg), cfg.sampling_grid(), section_dim=cfg.basis_dim
    )
    if cfg.format == "json":
        return norm_limit_to_json(report, cfg)
    return norm_limit_to_csv(report)


def _run_heat(cfg):
    ts = _require_t(cfg)
    if len(ts) != 1:
        raise ValueError("the heat command takes a single value of t")
    f = parse_symbol(cfg.f_expr)
    report = oscillation_report(f, ts[0], cfg.sampling_grid())
    if cfg.format == "json":
        return oscillation_to_json(report, cfg, f.to_expr())
    return oscillation_to_csv(report)


def _run_bmo(cfg):
    ts = _require_t(cfg)
    f = parse_symbol(cfg.f_expr)
    grid = cfg.sampling_grid()
    values = [bmo_seminorm(f, t, grid) for t in ts]
    if cfg.format == "json":
        return bmo_to_json(ts, values, cfg, f.to_expr())
    return bmo_to_csv(ts, values)


_COMMANDS = {
    "sweep": _run_sweep,
    "norm-limit": _run_norm_limit,
    "heat": _run_heat,
    "bmo": _run_bmo,
}


def _run_scenario(cfg, parser):
    if cfg.scenario not in scenario_names():
        parser.print_usage(sys.stderr)
        print(
            f"fockq: error: Unknown scenario: {cfg.scenario} "
            f"(choose from {', '.join(scenario_names())})",
            file=sys.stderr,
        )
        return 2
    out = cfg.out if cfg.out is not None else f"{cfg.scenario}.json"
    try:
        run_scenario(cfg.scenario, cfg, out)
    except ScenarioAssertionError as err:
        logging.error(str(err))
        sys.stderr.write(dumps_json(err.record))
        return 1
    logging.info(f"scenario {cfg.scenario} passed; report in {out}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s:%(name)s: %(message)s",
    )

    try:
        cfg = effective_config(args)
        if cfg.command == "scenario":
            return _run_scenario(cfg, parser)
        _emit(_COMMANDS[cfg.command](cfg), cfg.out)
    except (ValueError, TypeError) as err:
        # covers SymbolSyntaxError and pydantic's ValidationError
        print(f"fockq: error: {err}", file=sys.stderr)
        return 2
    except FockqError as err:
        print(f"fockq: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    return 0
