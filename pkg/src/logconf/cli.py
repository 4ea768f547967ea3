"""Command-line runner: ``logconf {verify,steady,sweep,transient,wake}``.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 internal error.  Solver non-convergence is written to the CSV as a
row status and does not change the exit code.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Sequence

import numpy as np

from .config import KINDS, ExperimentConfig, parse_config
from .constitutive import extension_flow, shear_flow
from .errors import BlowUp, ConfigError, InsufficientHistory, NoInteriorExtremum, StepFailure
from .matfun import EXP, apply_scalar
from .solvers import convergence_order, newton_solve, rk4_integrate
from .tensor import VOIGT_LABELS, to_voigt
from .verify import run_suites
from .wake import extremal_check, wake_integrate

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3


def steady_header(dim: int) -> List[str]:
    labels = VOIGT_LABELS[dim]
    return (
        ["wi"]
        + [f"psi_{l}" for l in labels]
        + [f"sigma_{l}" for l in labels]
        + ["newton_iters", "final_residual", "order_estimate", "status"]
    )


HEADERS = {
    "transient": ["t", "cross_form_error", "min_eig_sigma", "status"],
    "wake": ["x", "psi_xx", "sigma_xx", "ux", "dux", "status"],
    "verify": ["suite", "cases", "max_error", "tolerance", "status"],
}


def header_for(kind: str, dim: int) -> List[str]:
    return steady_header(dim) if kind in ("steady", "sweep") else HEADERS[kind]


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _kinematics(cfg: ExperimentConfig, rate: float):
    make = shear_flow if cfg.flow.type == "shear" else extension_flow
    return make(rate, cfg.dim)


def _status(report) -> str:
    if report.converged:
        return "converged"
    if report.reason.startswith("singular"):
        return "singular_jacobian"
    if "blow-up" in report.reason:
        return "blow_up"
    return "no_convergence"


def _steady_row(wi, report, dim):
    m = dim * (dim + 1) // 2
    if report.converged:
        psi = to_voigt(report.solution)
        sigma = to_voigt(apply_scalar(report.solution, EXP))
    else:
        psi = sigma = [math.nan] * m
    try:
        order = convergence_order(report.residual_history)
    except InsufficientHistory:
        order = math.nan
    return [wi, *psi, *sigma, report.iterations, report.final_residual, order, _status(report)]


def run_steady(cfg: ExperimentConfig):
    lam = cfg.model.lam
    rate = cfg.flow.rate
    rep = newton_solve(np.zeros((cfg.dim, cfg.dim)), _kinematics(cfg, rate), cfg.model, cfg.tolerances.newton)
    return [_steady_row(lam * rate, rep, cfg.dim)], [f"{_status(rep)} at Wi={lam * rate:g}"]


def run_sweep(cfg: ExperimentConfig):
    """Warm-started chain: each point starts from the last converged state."""
    guess = np.zeros((cfg.dim, cfg.dim))
    rows, failed = [], []
    for wi in cfg.wi_list:
        rep = newton_solve(guess, _kinematics(cfg, wi / cfg.model.lam), cfg.model, cfg.tolerances.newton)
        rows.append(_steady_row(wi, rep, cfg.dim))
        if rep.converged:
            guess = rep.solution
        else:
            failed.append(wi)
    msg = f"{len(rows) - len(failed)}/{len(rows)} points converged"
    if failed:
        msg += f"; first failure at Wi={failed[0]:g}"
    return rows, [msg]


def run_transient(cfg: ExperimentConfig):
    tr = cfg.transient
    kin = _kinematics(cfg, cfg.flow.rate)
    start = np.zeros((cfg.dim, cfg.dim))
    try:
        psi = rk4_integrate("psi", start, kin, cfg.model, tr.t_end, tr.dt)
        sig = rk4_integrate("sigma", np.eye(cfg.dim), kin, cfg.model, tr.t_end, tr.dt)
    except StepFailure as exc:
        t = exc.time if exc.time is not None else math.nan
        return [[t, math.nan, math.nan, "step_failure"]], [str(exc)]
    rows = []
    worst = 0.0
    for k in range(0, psi.times.size, tr.output_every):
        err = float(np.abs(apply_scalar(psi.path[k], EXP) - sig.path[k]).max())
        worst = max(worst, err)
        rows.append([psi.times[k], err, float(np.linalg.eigvalsh(sig.path[k]).min()), "ok"])
    return rows, [f"max cross-form error {worst:.3e} over {len(rows)} samples"]


def run_wake(cfg: ExperimentConfig):
    ws = cfg.wake
    status_last = "ok"
    notes = []
    try:
        sol = wake_integrate(ws.profile, cfg.model, ws.psi0, ws.dx)
    except BlowUp as exc:
        sol, status_last = exc.partial, "blow_up"
        notes.append(str(exc))
    except StepFailure as exc:
        return [[exc.time, math.nan, math.nan, math.nan, math.nan, "step_failure"]], [str(exc)]
    n = sol.xs.size
    rows = [
        [sol.xs[i], sol.psi_xx[i], math.exp(min(sol.psi_xx[i], 700.0)), sol.ux[i], sol.dux[i],
         status_last if i == n - 1 else "ok"]
        for i in range(n)
    ]
    if status_last == "ok":
        try:
            notes.append(f"extremal identity residual {extremal_check(sol, cfg.model):.3e}")
        except NoInteriorExtremum as exc:
            notes.append(f"extremal check skipped: {exc}")
    return rows, notes


def run_verify(cfg: ExperimentConfig):
    results = run_suites(cfg.seed, cfg.tolerances.verify_cases)
    rows = [[r.suite, r.cases, r.max_error, r.tolerance, "pass" if r.passed else "fail"] for r in results]
    failed = [r.suite for r in results if not r.passed]
    notes = [f"{r.suite}: {'PASS' if r.passed else 'FAIL'} (max error {r.max_error:.3e})" for r in results]
    return rows, notes, not failed


def run_experiment(cfg: ExperimentConfig):
    """Run ``cfg`` and write its CSV; returns (exit code, notes)."""
    ok = True
    if cfg.kind == "verify":
        rows, notes, ok = run_verify(cfg)
    else:
        runner = {"steady": run_steady, "sweep": run_sweep, "transient": run_transient, "wake": run_wake}
        rows, notes = runner[cfg.kind](cfg)
    write_csv(cfg.output_path, header_for(cfg.kind, cfg.dim), rows)
    notes.append(f"wrote {len(rows)} rows to {cfg.output_path}")
    return (EXIT_OK if ok else EXIT_VERIFY_FAILED), notes


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logconf", description="Log-conformation kernels and reduced-model experiments.")
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", type=Path, help="TOML experiment file")
        p.add_argument("--out", help="output CSV path (overrides output_path)")
        p.add_argument("--seed", type=int, help="seed for randomized suites (overrides seed)")
        p.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, args.kind)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg = replace(cfg, seed=args.seed)
        if args.out:
            cfg = replace(cfg, output_path=args.out)
    except (ConfigError, OSError, UnicodeDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, notes = run_experiment(cfg)
    except Exception as exc:  # anything here is a bug or an I/O failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if not args.quiet:
        for line in notes:
            print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
