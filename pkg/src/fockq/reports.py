"""
Serialization of sweep, heat and operator reports.

CSV output uses a fixed 17-significant-digit format so that identical runs
give byte-identical files; JSON output uses python's shortest round-trip
float representation. Every file is written atomically.
"""

import dataclasses
import json
import math
import os
import tempfile

import numpy as np
import pandas as pd

CSV_FLOAT_FORMAT = "%.16e"

SWEEP_COLUMNS = (
    "t",
    "semi_comm_norm",
    "hankel_f_bound",
    "hankel_g_bound",
    "bmo_f",
    "heat_sup",
    "N_used",
    "M_used",
    "tail_indicator",
    "hankel_panel",
    "bmo_ratio",
    "path",
    "extended_sup",
    "flagged",
    "error",
)


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    path = os.fspath(path)
    dirname = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=dirname, prefix=".fockq-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _jsonable(val):
    if isinstance(val, dict):
        return {str(k): _jsonable(v) for k, v in val.items()}
    elif isinstance(val, (list, tuple)):
        return [_jsonable(v) for v in val]
    elif isinstance(val, (np.bool_, bool)):
        return bool(val)
    elif isinstance(val, (np.integer, int)):
        return int(val)
    elif isinstance(val, (np.floating, float)):
        val = float(val)
        # NaN and infinities are not valid JSON
        return val if math.isfinite(val) else None
    elif isinstance(val, (complex, np.complexfloating)):
        return [_jsonable(val.real), _jsonable(val.imag)]
    elif isinstance(val, np.ndarray):
        return _jsonable(val.tolist())
    return val


def dumps_json(payload):
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def sweep_frame(report):
    rows = []
    for p in report.points:
        row = dataclasses.asdict(p)
        row.pop("timing")
        rows.append(row)
    return pd.DataFrame(rows, columns=list(SWEEP_COLUMNS))


def sweep_to_csv(report):
    return sweep_frame(report).to_csv(
        index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )


def sweep_payload(report, run_config=None):
    payload = {
        "f": report.f_expr,
        "g": report.g_expr,
        "verdict": report.verdict,
        "sweep_config": report.config.model_dump(),
        "grid": report.grid.model_dump(),
        "points": [dataclasses.asdict(p) for p in report.points],
    }
    if run_config is not None:
        payload["config"] = run_config.model_dump()
    return payload


def sweep_to_json(report, run_config=None):
    return dumps_json(sweep_payload(report, run_config))


def norm_limit_frame(report):
    rows = [
        {
            "t": p.t,
            "lower": p.lower,
            "section_norm": np.nan if p.section_norm is None else p.section_norm,
            "upper": p.upper,
            "gap": p.gap,
        }
        for p in report.points
    ]
    return pd.DataFrame(rows, columns=["t", "lower", "section_norm", "upper", "gap"])


def norm_limit_to_csv(report):
    return norm_limit_frame(report).to_csv(
        index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )


def norm_limit_to_json(report, run_config=None):
    payload = {
        "f": report.f_expr,
        "monotone": report.monotone,
        "grid": report.grid.model_dump(),
        "points": [
            {
                "t": p.t,
                "lower": p.lower,
                "section_norm": p.section_norm,
                "upper": p.upper,
                "gap": p.gap,
            }
            for p in report.points
        ],
    }
    if run_config is not None:
        payload["config"] = run_config.model_dump()
    return dumps_json(payload)


def oscillation_frame(report):
    return pd.DataFrame(
        {
            "re_w": report.grid.real,
            "im_w": report.grid.imag,
            "re_heat": report.heat.real,
            "im_heat": report.heat.imag,
            "mo": report.mo,
        }
    )


def oscillation_to_csv(report):
    return oscillation_frame(report).to_csv(
        index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )


def oscillation_to_json(report, run_config=None, f_expr=None):
    payload = {
        "t": report.t,
        "bmo_estimate": report.bmo_estimate,
        "rows": oscillation_frame(report).to_dict(orient="records"),
    }
    if f_expr is not None:
        payload["f"] = f_expr
    if run_config is not None:
        payload["config"] = run_config.model_dump()
    return dumps_json(payload)


def operator_to_csv(op):
    """``TruncatedOperator`` as ``(row, col, re, im)`` rows after a ``t, N, M`` header."""
    rows, cols = np.indices(op.entries.shape)
    frame = pd.DataFrame(
        {
            "row": rows.ravel(),
            "col": cols.ravel(),
            "re": op.entries.real.ravel(),
            "im": op.entries.imag.ravel(),
        }
    )
    header = f"# t={op.t!r} N={op.N} M={op.M}\n"
    return header + frame.to_csv(
        index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )


def read_operator_csv(path):
    """Inverse of :func:`operator_to_csv`; returns ``(t, N, M, entries)``."""
    with open(path, "r") as f:
        header = f.readline()
    if not header.startswith("# "):
        raise ValueError(f"{path} lacks the 't=.. N=.. M=..' header line")
    meta = dict(item.split("=", 1) for item in header[2:].split())
    t, N, M = float(meta["t"]), int(meta["N"]), int(meta["M"])
    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    entries = np.zeros((N, N), dtype=np.complex128)
    entries[frame["row"].to_numpy(), frame["col"].to_numpy()] = (
        frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    )
    return t, N, M, entries


def bmo_frame(ts, values):
    return pd.DataFrame({"t": list(ts), "bmo": list(values)}, columns=["t", "bmo"])


def bmo_to_csv(ts, values):
    return bmo_frame(ts, values).to_csv(
        index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )


def bmo_to_json(ts, values, run_config=None, f_expr=None):
    payload = {"points": bmo_frame(ts, values).to_dict(orient="records")}
    if f_expr is not None:
        payload["f"] = f_expr
    if run_config is not None:
        payload["config"] = run_config.model_dump()
    return dumps_json(payload)
