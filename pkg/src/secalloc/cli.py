"""Command-line interface.

Subcommands: solve, sweep, mi-table, mmse-table, popt, gsvd-check,
jensen-check.  Exit codes: 0 success, 2 config or usage error, 3 numerical
failure.  Failures print a machine-readable error JSON to stderr.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .allocator import AllocationProblem, solve_gaussian
from .config import load_config
from .errors import ConfigError, SecallocError
from .finite_alphabet import (
    QuadratureSpec,
    ScalarWiretap,
    builtin_constellation,
    find_popt,
    mmse,
    mutual_information,
)
from .gsvd import gsvd_decompose, reconstruction_report, extract_subchannels
from .harness import prepare_pipeline, run_cases, records_to_csv, records_to_json, _eval_point
from .model import jensen_gap_montecarlo, worst_eavesdropper

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _write_table(rows, header, out, fmt):
    """Emit (x, y) style rows as CSV or JSON to a path or stdout."""
    if fmt == "json":
        doc = {"tool": {"name": "secalloc", "version": __version__},
               "columns": header,
               "rows": [list(r) for r in rows]}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(f"{v:.12g}" for v in r) for r in rows]
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_records(records, meta, cfg, out, fmt):
    if fmt == "json":
        text = records_to_json(records, config_echo=cfg.raw, meta=meta)
    else:
        text = records_to_csv(records)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args):
    cfg = load_config(args.config)
    if args.p0 is not None:
        p0 = float(args.p0)
    elif cfg.p0_fixed is not None:
        p0 = cfg.p0_fixed
    elif cfg.p0_grid.size == 1:
        p0 = float(cfg.p0_grid[0])
    else:
        raise ConfigError("solve needs --p0, channel.P0, or a single-point P0_grid")
    if p0 <= 0:
        raise ConfigError(f"P0 must be positive, got {p0}")
    sub, caps, meta = prepare_pipeline(cfg)
    rec = _eval_point(cfg, sub, caps, p0)
    _emit_records([rec], meta, cfg, args.out, args.format)
    return EXIT_OK


def _cmd_sweep(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.quad.seed = int(args.seed)
    records, meta = run_cases(cfg, threads=args.threads)
    _emit_records(records, meta, cfg, args.out, args.format)
    return EXIT_OK


def _table_quad(args):
    return QuadratureSpec(nodes=args.nodes) if args.nodes else QuadratureSpec()


def _cmd_mi_table(args):
    c = builtin_constellation(args.constellation)
    rho = np.asarray(args.rho, dtype=float)
    vals = mutual_information(c, rho, _table_quad(args))
    _write_table(list(zip(rho.tolist(), np.atleast_1d(vals).tolist())),
                 ["rho", "mi_bits"], args.out, args.format)
    return EXIT_OK


def _cmd_mmse_table(args):
    c = builtin_constellation(args.constellation)
    rho = np.asarray(args.rho, dtype=float)
    vals = mmse(c, rho, _table_quad(args))
    _write_table(list(zip(rho.tolist(), np.atleast_1d(vals).tolist())),
                 ["rho", "mmse"], args.out, args.format)
    return EXIT_OK


def _cmd_popt(args):
    c = builtin_constellation(args.constellation)
    p = find_popt(c, ScalarWiretap(h2=args.h2, z2=args.z2), _table_quad(args), delta=args.delta)
    if args.format == "json":
        payload = {"constellation": c.name, "h2": args.h2, "z2": args.z2,
                   "p_opt": None if np.isinf(p) else p, "finite": bool(np.isfinite(p))}
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = ("inf" if np.isinf(p) else f"{p:.12g}") + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_gsvd_check(args):
    cfg = load_config(args.config)
    inst = cfg.channel_instance(float(cfg.p0_grid[-1]))
    eq = worst_eavesdropper(inst)
    f = gsvd_decompose(inst.H, eq.Z, cfg.rank_tol)
    report = reconstruction_report(f, inst.H, eq.Z)
    report["l"] = extract_subchannels(f, cfg.n0).l
    worst = max(report["res_h"], report["res_z"], report["norm_defect"], report["unitary_defect"])
    report["ok"] = bool(worst <= args.threshold)
    sys.stdout.write(json.dumps(report, indent=2) + "\n")
    return EXIT_OK if report["ok"] else EXIT_NUMERICAL


def _cmd_jensen_check(args):
    cfg = load_config(args.config)
    p0 = float(cfg.p0_grid[-1])
    inst = cfg.channel_instance(p0)
    eq = worst_eavesdropper(inst)
    sub = extract_subchannels(gsvd_decompose(inst.H, eq.Z, cfg.rank_tol), cfg.n0)
    res = solve_gaussian(AllocationProblem(subchannels=sub, p0=p0))
    n_samples = args.samples if args.samples else cfg.quad.mc_samples
    seed = args.seed if args.seed is not None else cfg.quad.seed
    mc_mean, mc_stderr, bound = jensen_gap_montecarlo(inst, eq, res.Q, n_samples, seed)
    holds = bool(mc_mean <= bound + 3.0 * mc_stderr)
    payload = {"P0": p0, "n_samples": int(n_samples), "seed": int(seed),
               "mc_mean": mc_mean, "mc_stderr": mc_stderr, "bound": bound, "holds": holds}
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK if holds else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secalloc",
        description="Secrecy-rate-optimal power allocation for MIMO wiretap "
                    "channels with statistical eavesdropper CSI.",
    )
    parser.add_argument("--version", action="version", version=f"secalloc {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    def add_io(p, default_fmt="csv"):
        p.add_argument("--out", metavar="PATH", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=default_fmt)

    p = subs.add_parser("solve", help="solve the allocation at a single budget")
    p.add_argument("--config", required=True)
    p.add_argument("--p0", type=float, default=None, help="budget override")
    add_io(p, "json")
    p.set_defaults(func=_cmd_solve)

    p = subs.add_parser("sweep", help="evaluate the enabled cases over the budget grid")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    add_io(p, "csv")
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("mi-table", help="mutual information at the given SNRs")
    p.add_argument("--constellation", required=True)
    p.add_argument("--rho", type=float, nargs="+", required=True)
    p.add_argument("--nodes", type=int, default=None)
    add_io(p)
    p.set_defaults(func=_cmd_mi_table)

    p = subs.add_parser("mmse-table", help="MMSE at the given SNRs")
    p.add_argument("--constellation", required=True)
    p.add_argument("--rho", type=float, nargs="+", required=True)
    p.add_argument("--nodes", type=int, default=None)
    add_io(p)
    p.set_defaults(func=_cmd_mmse_table)

    p = subs.add_parser("popt", help="secrecy-rate-maximizing power of a scalar wiretap channel")
    p.add_argument("--constellation", required=True)
    p.add_argument("--h2", type=float, required=True)
    p.add_argument("--z2", type=float, required=True)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--nodes", type=int, default=None)
    add_io(p)
    p.set_defaults(func=_cmd_popt)

    p = subs.add_parser("gsvd-check", help="decomposition residuals on the config channel")
    p.add_argument("--config", required=True)
    p.add_argument("--threshold", type=float, default=1e-8)
    p.set_defaults(func=_cmd_gsvd_check)

    p = subs.add_parser("jensen-check", help="Monte-Carlo eavesdropper rate vs the bound")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_jensen_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        sys.stderr.write(json.dumps({"error": {"type": "config", "message": str(e)}}) + "\n")
        return EXIT_CONFIG
    except (SecallocError, OSError, np.linalg.LinAlgError) as e:
        sys.stderr.write(
            json.dumps({"error": {"type": type(e).__name__, "message": str(e)}}) + "\n"
        )
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
