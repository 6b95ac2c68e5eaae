"""End-to-end pipeline: decompose the channel once, then evaluate the three
power-allocation cases on a budget grid.

Case "gaussian"      - Gaussian-input optimum of the subchannel problem.
Case "finite_no_pc"  - the Gaussian-optimal powers evaluated under the
                       finite-alphabet rate (no power control).
Case "finite_pc"     - the allocation re-solved with per-subchannel caps at
                       each subchannel's finite-alphabet optimum, evaluated
                       under the finite-alphabet rate.

Grid points are independent pure computations; they may be evaluated by a
bounded thread pool and are always gathered in grid order.
"""

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .allocator import AllocationProblem, solve_gaussian
from .config import ExperimentConfig
from .errors import InputError
from .finite_alphabet import subchannel_caps, sum_secrecy_finite
from .gsvd import extract_subchannels, gsvd_decompose, reconstruction_report
from .model import worst_eavesdropper


@dataclass
class SweepRecord:
    """Rates and allocations at one budget point.  Fields for disabled
    cases are None.  elapsed_s is diagnostic only and never emitted."""

    p0: float
    rs_gaussian: float = None
    rs_finite_no_pc: float = None
    rs_finite_pc: float = None
    q_gaussian: list = None
    q_finite_pc: list = None
    elapsed_s: float = 0.0


def prepare_pipeline(cfg: ExperimentConfig):
    """Run the reduction chain once: worst eavesdropper, decomposition,
    subchannel extraction, and (if needed) the finite-alphabet caps.

    Returns (subchannels, caps, meta) where caps is None unless the
    finite_pc case is enabled.
    """
    inst = cfg.channel_instance(float(cfg.p0_grid[-1]))
    eq = worst_eavesdropper(inst)
    factors = gsvd_decompose(inst.H, eq.Z, cfg.rank_tol)
    sub = extract_subchannels(factors, cfg.n0)
    caps = None
    if "finite_pc" in cfg.cases and sub.l > 0:
        caps = subchannel_caps(sub, cfg.constellation, cfg.quad, cfg.delta)
    meta = {
        "worst_eavesdropper": {"j0": eq.j0, "gain2": eq.gain2},
        "decomposition": reconstruction_report(factors, inst.H, eq.Z),
        "subchannels": {
            "l": sub.l,
            "a": sub.a.tolist(),
            "b": sub.b.tolist(),
            "c": sub.c.tolist(),
        },
        "caps": None if caps is None else [None if np.isinf(v) else float(v) for v in caps],
    }
    return sub, caps, meta


def _eval_point(cfg, sub, caps, p0):
    t0 = time.perf_counter()
    rec = SweepRecord(p0=float(p0))
    need_gaussian = "gaussian" in cfg.cases or "finite_no_pc" in cfg.cases
    if need_gaussian:
        res_g = solve_gaussian(AllocationProblem(subchannels=sub, p0=p0))
        if "gaussian" in cfg.cases:
            rec.rs_gaussian = float(res_g.objective_gaussian)
            rec.q_gaussian = [float(v) for v in res_g.q]
        if "finite_no_pc" in cfg.cases:
            rec.rs_finite_no_pc = float(
                sum_secrecy_finite(sub, cfg.constellation, res_g.q, cfg.quad)
            )
            if rec.q_gaussian is None:
                rec.q_gaussian = [float(v) for v in res_g.q]
    if "finite_pc" in cfg.cases:
        res_f = solve_gaussian(AllocationProblem(subchannels=sub, p0=p0, caps=caps))
        rec.rs_finite_pc = float(
            sum_secrecy_finite(sub, cfg.constellation, res_f.q, cfg.quad)
        )
        rec.q_finite_pc = [float(v) for v in res_f.q]
    rec.elapsed_s = time.perf_counter() - t0
    return rec


def run_cases(cfg: ExperimentConfig, threads: int = 1):
    """Evaluate the enabled cases at every grid point.

    Returns (records, meta); meta carries the decomposition report, the
    subchannel coefficients, the caps and the case-2 decay summary.
    """
    threads = int(threads)
    if threads < 1:
        raise InputError(f"threads must be >= 1, got {threads}")
    sub, caps, meta = prepare_pipeline(cfg)
    grid = [float(p) for p in cfg.p0_grid]
    if threads == 1 or len(grid) == 1:
        records = [_eval_point(cfg, sub, caps, p0) for p0 in grid]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda p0: _eval_point(cfg, sub, caps, p0), grid))

    if "finite_no_pc" in cfg.cases:
        rates = [r.rs_finite_no_pc for r in records]
        peak = int(np.argmax(rates))
        meta["case2_summary"] = {
            "peak_p0": records[peak].p0,
            "peak_rate": rates[peak],
            "terminal_p0": records[-1].p0,
            "terminal_rate": rates[-1],
        }
    return records, meta


def _fmt(x) -> str:
    return "" if x is None else f"{x:.12g}"


def _q_width(records, attr):
    widths = {len(getattr(r, attr)) for r in records if getattr(r, attr) is not None}
    if not widths:
        return 0
    if len(widths) > 1:
        raise InputError(f"inconsistent {attr} lengths across records: {sorted(widths)}")
    return widths.pop()


def records_to_csv(records) -> str:
    """Render records as CSV text: P0, the three rates, then the q columns,
    all floats printed with 12 significant digits.  Deterministic
    byte-for-byte for identical records."""
    lg = _q_width(records, "q_gaussian")
    lf = _q_width(records, "q_finite_pc")
    header = ["P0", "rs_gaussian", "rs_finite_no_pc", "rs_finite_pc"]
    header += [f"q_gaussian_{i + 1}" for i in range(lg)]
    header += [f"q_finite_pc_{i + 1}" for i in range(lf)]
    lines = [",".join(header)]
    for r in records:
        row = [_fmt(r.p0), _fmt(r.rs_gaussian), _fmt(r.rs_finite_no_pc), _fmt(r.rs_finite_pc)]
        row += [_fmt(v) for v in (r.q_gaussian or [])] + [""] * (lg - len(r.q_gaussian or []))
        row += [_fmt(v) for v in (r.q_finite_pc or [])] + [""] * (lf - len(r.q_finite_pc or []))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def emit_csv(records, path):
    """Write records_to_csv output to a file."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))


def _record_dict(r: SweepRecord) -> dict:
    return {
        "P0": r.p0,
        "rs_gaussian": r.rs_gaussian,
        "rs_finite_no_pc": r.rs_finite_no_pc,
        "rs_finite_pc": r.rs_finite_pc,
        "q_gaussian": r.q_gaussian,
        "q_finite_pc": r.q_finite_pc,
    }


def records_to_json(records, config_echo=None, meta=None) -> str:
    """Render records as a JSON document with the config echoed back and the
    tool version.  Floats keep full precision (shortest round-trip repr), so
    a re-read reproduces the records bit-exactly."""
    doc = {
        "tool": {"name": "secalloc", "version": __version__},
        "config": config_echo,
        "meta": meta,
        "records": [_record_dict(r) for r in records],
    }
    return json.dumps(doc, indent=2) + "\n"


def emit_json(records, path, config_echo=None, meta=None):
    """Write records_to_json output to a file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(records_to_json(records, config_echo=config_echo, meta=meta))


def load_records(path):
    """Re-read records emitted by emit_json."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    out = []
    for d in doc["records"]:
        out.append(
            SweepRecord(
                p0=d["P0"],
                rs_gaussian=d["rs_gaussian"],
                rs_finite_no_pc=d["rs_finite_no_pc"],
                rs_finite_pc=d["rs_finite_pc"],
                q_gaussian=d["q_gaussian"],
                q_finite_pc=d["q_finite_pc"],
            )
        )
    return out
