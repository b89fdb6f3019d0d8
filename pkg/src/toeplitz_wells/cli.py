"""``toeplitz-wells`` command line.

Each subcommand runs one experiment kind from a JSON config and writes
``report.json`` (deterministic), ``metadata.json`` (timestamps, host) and flat
CSV tables into the output directory.  The exit status is 0 when every
verdict passes, 1 when a verdict fails and 2 on configuration or runtime
errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    SweepReport,
    Verdict,
    run_algebra_sweep,
    run_bochner_sweep,
    run_decay_sweep,
    run_degenerate_sweep,
    run_landau_levels,
    run_localization_sweep,
    run_toeplitz_sweep,
)
from .config import KINDS, ConfigError, ExperimentConfig, parse_config
from .modelwell import QuadraticWell, multiwell_spectrum, well_spectrum_truncated

OUT_ENV = "TOEPLITZ_WELLS_OUT"

# which (module, operation) produced each CSV
PROVENANCE = {
    "model_spectrum.csv": "modelwell.multiwell_spectrum",
    "eigenvalues.csv": "torus.low_spectrum",
    "bochner_residuals.csv": "asymptotics.run_bochner_sweep",
    "toeplitz_spectrum.csv": "toeplitz.toeplitz_low_spectrum",
    "defects.csv": "toeplitz.product_defect",
    "localization.csv": "toeplitz.localization_report",
    "degenerate.csv": "toeplitz.degenerate_well_report",
    "kernel_decay.csv": "toeplitz.offdiag_decay",
}


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_rows(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in r.items()})


# ---------------------------------------------------------------------------
# experiment runners: each returns (list of SweepReport, {csv name: (columns, rows)})


def _model_spectrum(cfg: ExperimentConfig):
    wells = []
    for i, w in enumerate(cfg.wells):
        n = len(w.a)
        wells.append(QuadraticWell(n, tuple(w.a), np.array(w.Q), w.shift, w.label or f"well{i}"))
    exact = multiwell_spectrum(wells, cfg.levels)
    rep = SweepReport("model-spectrum")
    rep.records = exact.to_rows()
    trunc_vals = np.sort(np.concatenate([well_spectrum_truncated(w, None, cfg.levels).values for w in wells]))[: cfg.levels]
    dev = float(np.max(np.abs(trunc_vals - exact.values)))
    rep.extra.update(D=exact.D, A=exact.A, truncated=trunc_vals.tolist())
    rep.verdicts["exact_vs_truncated"] = Verdict(dev <= 1e-8, dev, 1e-8)
    tables = {"model_spectrum.csv": (["index", "value", "well_label", "exactness"], rep.records)}
    return [rep], tables


def _landau(cfg, field, th, jobs):
    rep = run_landau_levels(field, cfg.p, cfg.grid.override, cfg.grid.order, cfg.seed, th, jobs)
    rows = [dict(r, residual=None) for r in rep.records]
    cols = ["p", "grid_n", "j", "lambda_bochner", "lambda_renormalized", "residual"]
    return [rep], {"eigenvalues.csv": (cols, rows)}


def _bochner(cfg, field, th, jobs):
    rep = run_bochner_sweep(field, cfg.p, cfg.levels, cfg.grid.override, cfg.grid.order, cfg.seed,
                            cfg.grid.refine, True, th, jobs)
    eig_rows = [{"p": r["p"], "grid_n": r["grid_n"], "j": r["j"], "lambda_bochner": r["lambda_bochner"],
                 "lambda_renormalized": None, "residual": r["eig_residual"]} for r in rep.records]
    tables = {
        "eigenvalues.csv": (["p", "grid_n", "j", "lambda_bochner", "lambda_renormalized", "residual"], eig_rows),
        "bochner_residuals.csv": (["p", "grid_n", "j", "lambda_bochner", "model_mu", "residual",
                                   "discretization_error", "d_p", "gap_edge"], rep.records),
    }
    return [rep], tables


_TOEPLITZ_COLS = ["p", "m", "lambda", "p_times_lambda", "model_mu", "gap_to_model"]


def _toeplitz(cfg, field, th, jobs):
    rep = run_toeplitz_sweep(field, cfg.h.build(), cfg.p, cfg.levels, cfg.grid.override, cfg.grid.order,
                             cfg.seed, th)
    return [rep], {"toeplitz_spectrum.csv": (_TOEPLITZ_COLS, rep.records)}


def _toeplitz_spectrum(cfg, field, th, jobs):
    reports, tables = _toeplitz(cfg, field, th, jobs)
    reports[0].experiment = "toeplitz-spectrum"
    return reports, tables


def _algebra(cfg, field, th, jobs):
    rep = run_algebra_sweep(field, cfg.f.build(), cfg.g.build(), cfg.p, cfg.grid.override, cfg.grid.order,
                            cfg.seed, th)
    return [rep], {"defects.csv": (["p", "norm_fg", "norm_comm", "chosen_sign"], rep.records)}


def _localization(cfg, field, th, jobs):
    loc = cfg.localization
    h = cfg.h.build()
    reports = []
    tables = {}
    if loc.degenerate_k is None or loc.degenerate_k == 1:
        rep = run_localization_sweep(field, h, cfg.p, loc.deltas, loc.alphas, loc.moment_orders, loc.check_delta,
                                     cfg.grid.override, cfg.grid.order, cfg.seed, th)
        reports.append(rep)
        rows = []
        for r in rep.records:
            for d in sorted(set(loc.deltas) | {loc.check_delta}):
                rows.append({"p": r["p"], "delta": d, "mass_outside": r[f"mass_outside[{d}]"]})
            for k in loc.moment_orders:
                rows.append({"p": r["p"], "k": k, "moment": r[f"moment[{k}]"]})
            for a in loc.alphas:
                rows.append({"p": r["p"], "alpha": a, "exp_integral": r[f"exp_integral[{a}]"]})
        tables["localization.csv"] = (["p", "delta", "mass_outside", "k", "moment", "alpha", "exp_integral"], rows)
    if loc.degenerate_k is not None:
        rep = run_degenerate_sweep(field, h, loc.degenerate_k, cfg.p, loc.c_list, cfg.grid.override,
                                   cfg.grid.order, cfg.seed, th)
        reports.append(rep)
        tables["degenerate.csv"] = (list(rep.records[0]) if rep.records else ["p"], rep.records)
    if loc.kernel_decay:
        rep = run_decay_sweep(field, cfg.p, loc.decay_pairs, cfg.grid.override, cfg.grid.order, cfg.seed, th)
        reports.append(rep)
        tables["kernel_decay.csv"] = (["p", "grid_n", "rate", "intercept", "gaussian_rate", "trace", "d_p"],
                                      rep.records)
    return reports, tables


RUNNERS = {
    "landau-levels": _landau,
    "bochner-sweep": _bochner,
    "toeplitz-spectrum": _toeplitz_spectrum,
    "toeplitz-sweep": _toeplitz,
    "algebra-defects": _algebra,
    "localization": _localization,
}


def run(cfg: ExperimentConfig, out_dir: Path, jobs: int = 1, quiet: bool = False) -> int:
    """Run one experiment, write its artifacts and return the exit status."""
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    meta = {
        "started": datetime.now(timezone.utc).isoformat(),
        "argv": sys.argv,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "host": platform.node(),
        "package_version": __version__,
        "jobs": jobs,
    }
    report = {"config": cfg.canonical(), "package_version": __version__, "kind": cfg.kind}
    status = 0
    try:
        if cfg.kind == "model-spectrum":
            reports, tables = _model_spectrum(cfg)
        else:
            field = cfg.field.build()
            reports, tables = RUNNERS[cfg.kind](cfg, field, cfg.thresholds_obj(), jobs)
        for name, (cols, rows) in tables.items():
            _write_rows(out_dir / name, cols, rows)
        report["status"] = "ok"
        report["reports"] = [r.to_dict() for r in reports]
        report["provenance"] = {name: PROVENANCE[name] for name in tables}
        passed = all(r.passed for r in reports)
        report["passed"] = passed
        status = 0 if passed else 1
        if not quiet:
            for r in reports:
                print(f"[{r.experiment}]")
                if cfg.kind == "model-spectrum":
                    print("  mu: " + ", ".join(f"{rec['value']:.10g}" for rec in r.records))
                for line in r.summary_lines():
                    print("  " + line)
            print("overall:", "PASS" if passed else "FAIL")
    except Exception as exc:  # keep partial artifacts and mark the failure
        report["status"] = "error"
        report["error"] = f"{type(exc).__name__}: {exc}"
        status = 2
        print(f"error: {report['error']}", file=sys.stderr)
    meta["finished"] = datetime.now(timezone.utc).isoformat()
    meta["elapsed_seconds"] = time.time() - started
    (out_dir / "report.json").write_text(json.dumps(_clean(report), indent=2, sort_keys=True) + "\n")
    (out_dir / "metadata.json").write_text(json.dumps(_clean(meta), indent=2, sort_keys=True) + "\n")
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toeplitz-wells", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run the {kind} experiment")
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./out)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument("--grid-override", type=int, help="force grid points per side")
        sp.add_argument("--quiet", action="store_true", help="suppress the verdict summary")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, args.command)
        if args.grid_override is not None:
            cfg = cfg.model_copy(update={"grid": cfg.grid.model_copy(update={"override": args.grid_override})})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return 2
    out = args.out or os.environ.get(OUT_ENV) or cfg.output or "out"
    return run(cfg, Path(out), args.jobs, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
