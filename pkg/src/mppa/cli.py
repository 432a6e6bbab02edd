"""Command-line front end: experiment runs, single bound evaluations,
oracle suites and the acceptance battery.

All tables are UTF-8 CSV with LF line endings and a mandatory header row;
reals carry 17 significant digits.  Identical config and seed give
byte-identical files.  Exit codes: 0 for success (BUDGET_EXCEEDED values
and BOUND_INCOMPUTABLE verdicts are successes), 1 for a failed property,
2 for usage or config errors.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Optional

from . import bounds
from .config import ConfigError, ExperimentConfig, parse_config, parse_fspec, \
    render_fspec
from .countfn import BoundValue, BudgetExceededError, evaluate
from .iteration import (asymptotic_residuals, boundedness_check,
                        empirical_metastability, empirical_window_index,
                        gap_decrease_check, recurrence_check,
                        resolvent_drift_check, run, trace_csv_lines,
                        wbound_check)
from .operators import IDENTITY_TOL, check_resolvent_identity
from .oracle import DEFAULT_TRIALS, run_suite
from .schedules import (derive_constants, mu, nu, validate_anchors,
                        validate_moduli)

SLACK = 1e-9
BOUND_NAMES = ("zeta", "sigma", "theta", "R", "nu", "mu", "xi", "psi",
               "Psi", "Theta", "phi", "proj", "proj3")
_NEEDS_F = frozenset(("theta", "xi", "psi", "Psi", "Theta", "phi",
                      "proj", "proj3"))
LEMMAS = tuple(DEFAULT_TRIALS)


def _write_table(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_config(path_text: str):
    path = Path(path_text)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return path, None
    try:
        return path, parse_config(text)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return path, None


# --- bound -----------------------------------------------------------------------


def cmd_bound(args) -> int:
    _, cfg = _load_config(args.config)
    if cfg is None:
        return 2
    name = args.name
    if name not in BOUND_NAMES:
        print(f"unknown bound name: {name!r} (choose from "
              f"{', '.join(BOUND_NAMES)})", file=sys.stderr)
        return 2
    f = None
    f_spec = ""
    if name in _NEEDS_F:
        if args.fspec is None:
            print(f"bound {name} needs --fspec", file=sys.stderr)
            return 2
        try:
            f = parse_fspec(args.fspec)
        except ValueError as exc:
            print(f"bad fspec: {exc}", file=sys.stderr)
            return 2
        f_spec = render_fspec(f)

    moduli = cfg.moduli
    ctx = derive_constants(moduli)
    constant_c = cfg.constant_c
    budget = cfg.budget()
    k, n, t = args.k, args.n, args.t
    try:
        if name == "zeta":
            bv = bounds.zeta(k, n, moduli.c, moduli.Cmaj, budget)
        elif name == "sigma":
            d = ctx.D if args.d is None else args.d
            bv = bounds.sigma(k, n, moduli.Ldiv, d, budget)
        elif name == "theta":
            bv = bounds.theta(k, n, t, ctx.N, f, budget)
        elif name == "R":
            bv = bounds.r_const(moduli.a, k, t, budget)
        elif name == "nu":
            bv = nu(moduli, k, constant_c, budget)
        elif name == "mu":
            bv = mu(moduli, k, budget)
        elif name == "xi":
            bv = bounds.xi(k, f, moduli, ctx=ctx, constant_c=constant_c,
                           budget=budget)
        elif name == "psi":
            bv = bounds.psi(k, f, moduli, ctx=ctx, constant_c=constant_c,
                            budget=budget)
        elif name == "Psi":
            bv = bounds.psi_cap(k, f, moduli, ctx=ctx, constant_c=constant_c,
                                budget=budget)
        elif name == "Theta":
            psi_fn = bounds.psi_functional(moduli, ctx, constant_c)
            bv = bounds.theta_cap(k, f, moduli.Ldiv, psi_fn, ctx.G, ctx.D,
                                  budget)
        elif name == "phi":
            bv = bounds.phi(k, f, moduli, ctx=ctx, constant_c=constant_c,
                            budget=budget)
        elif name == "proj":
            bv = bounds.proj_bound(k, f, ctx.N, budget)
        else:
            bv = bounds.proj3_bound(k, f, ctx.N, budget)
    except ValueError as exc:
        print(f"bound error: {exc}", file=sys.stderr)
        return 2

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["name", "k", "f_spec", "value"])
    writer.writerow([name, str(k), f_spec, bv.render()])
    return 0


# --- oracle ----------------------------------------------------------------------


def cmd_oracle(args) -> int:
    lemmas = [args.lemma] if args.lemma else list(LEMMAS)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["lemma", "trials", "passes", "status"])
    failed = False
    for lemma in lemmas:
        if args.trials == 0:
            print(f"notice: 0 trials requested for {lemma}, vacuous PASS",
                  file=sys.stderr)
            writer.writerow([lemma, "0", "0", "PASS"])
            continue
        result = run_suite(lemma, seed=args.seed, trials=args.trials)
        writer.writerow([result.lemma, str(result.trials),
                         str(result.passes),
                         "PASS" if result.ok else "FAIL"])
        if not result.ok:
            failed = True
            print(f"first counterexample ({lemma}): {result.first_failure}",
                  file=sys.stderr)
    return 1 if failed else 0


# --- run -------------------------------------------------------------------------


def _verdict(emp: Optional[int], bv: BoundValue, f, last: int,
             budget) -> str:
    """CONSISTENT when a witness sits at or below an Exact bound; VIOLATION
    only when the whole window of every candidate below the bound was
    observable and none worked."""
    if not bv.is_exact:
        return "BOUND_INCOMPUTABLE"
    if emp is not None and emp <= bv.value:
        return "CONSISTENT"
    fb = evaluate(f, bv.value, budget)
    if fb.is_exact and bv.value + fb.value <= last:
        return "VIOLATION"
    return "NO_WITNESS_IN_HORIZON"


def _residual_rows(trace, cfg: ExperimentConfig, ctx, budget) -> list:
    rows = []
    curves = asymptotic_residuals(trace)
    for k in cfg.run.ks:
        for spec in cfg.run.fspecs:
            f = parse_fspec(spec)
            triple = bounds.res_bounds(k, f, cfg.moduli,
                                       constant_c=cfg.constant_c,
                                       budget=budget)
            for name, bv in zip(("dz", "res_Jn", "res_J"), triple):
                values = curves[name]
                try:
                    emp = empirical_window_index(values, k, f, budget)
                except BudgetExceededError:
                    emp = None
                verdict = _verdict(emp, bv, f, values.shape[0] - 1, budget)
                rows.append([name, str(k), spec,
                             "" if emp is None else str(emp),
                             bv.render(), verdict])
    return rows


def _metastability_rows(trace, cfg: ExperimentConfig, ctx, budget) -> list:
    rows = []
    for k in cfg.run.ks:
        for spec in cfg.run.fspecs:
            f = parse_fspec(spec)
            bv = bounds.phi(k, f, cfg.moduli, ctx=ctx,
                            constant_c=cfg.constant_c, budget=budget)
            try:
                emp = empirical_metastability(trace.z, k, f, budget)
            except BudgetExceededError:
                emp = None
            verdict = _verdict(emp, bv, f, trace.horizon, budget)
            rows.append([str(k), spec, "" if emp is None else str(emp),
                         bv.render(), verdict])
    return rows


def _check_rows(trace, cfg: ExperimentConfig, ctx, schedule, budget) -> list:
    moduli = cfg.moduli
    rows = []

    problems = validate_anchors(moduli, schedule, trace.u, trace.z[0],
                                trace.s, budget)
    rows.append(["anchors", "; ".join(problems) if problems else "ok",
                 "FAIL" if problems else "PASS"])

    worst = boundedness_check(trace, ctx.N0)
    rows.append(["boundedness", f"max |z_n - s| - N0 = {worst:.17g}",
                 "PASS" if worst <= SLACK else "FAIL"])

    if trace.horizon >= 1:
        worst = wbound_check(trace, moduli.a, ctx.N0)
        rows.append(["wbound", f"max |w_n - s| - 2aN0 = {worst:.17g}",
                     "PASS" if worst <= SLACK else "FAIL"])

        worst = recurrence_check(trace, trace.s, ctx.M1)
        rows.append(["recurrence", f"max violation = {worst:.17g}",
                     "PASS" if worst <= 1e-8 else "FAIL"])

        worst = resolvent_drift_check(trace, moduli.c, ctx.N0)
        rows.append(["resolvent_drift", f"max violation = {worst:.17g}",
                     "PASS" if worst <= 1e-8 else "FAIL"])

        worst = 0.0
        for i in (0, trace.horizon // 2, trace.horizon):
            worst = max(worst, check_resolvent_identity(
                trace.op, float(trace.cs[i]), 1.0 / moduli.c, trace.z[i]))
        rows.append(["resolvent_identity", f"max residual = {worst:.17g}",
                     "PASS" if worst <= IDENTITY_TOL else "FAIL"])
    else:
        for name in ("wbound", "recurrence", "resolvent_drift",
                     "resolvent_identity"):
            rows.append([name, "vacuous (no steps)", "PASS"])

    if trace.horizon >= 2:
        nu_values = {}
        for k in range(6):
            bv = nu(moduli, k, cfg.constant_c, budget)
            if bv.is_exact:
                nu_values[k] = bv.value
        found = gap_decrease_check(trace, nu_values)
        rows.append(["gap_decrease",
                     found[0] if found else "k <= 5, ok",
                     "FAIL" if found else "PASS"])
    else:
        rows.append(["gap_decrease", "vacuous (no steps)", "PASS"])
    return rows


def cmd_run(args) -> int:
    path, cfg = _load_config(args.config)
    if cfg is None:
        return 2
    out = Path(args.out) if args.out else path.parent / (path.stem + "_out")
    out.mkdir(parents=True, exist_ok=True)

    budget = cfg.budget()
    moduli = cfg.moduli
    ctx = derive_constants(moduli)
    schedule = cfg.iteration.build()
    horizon = cfg.run.horizon

    if horizon >= 1:
        k_cap = max(cfg.run.ks, default=0) + 16
        report = validate_moduli(schedule, moduli, horizon, budget=budget,
                                 k_cap=k_cap)
        if not report.ok:
            for v in report.violations:
                print(f"moduli violation: {v}", file=sys.stderr)
            return 2

    op = cfg.problem.build()
    trace = run(op, schedule, cfg.iteration.u, cfg.iteration.z0, horizon,
                c=moduli.c, s=cfg.problem.s, target=cfg.problem.target)

    with open(out / "trace.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(trace_csv_lines(trace)) + "\n")

    if horizon >= 1:
        meta_rows = _metastability_rows(trace, cfg, ctx, budget)
        res_rows = _residual_rows(trace, cfg, ctx, budget)
    else:
        print("notice: horizon 0, property tables are header-only",
              file=sys.stderr)
        meta_rows, res_rows = [], []
    _write_table(out / "metastability.csv",
                 ["k", "f_spec", "empirical", "bound", "verdict"], meta_rows)
    _write_table(out / "asymptotic.csv",
                 ["quantity", "k", "f_spec", "empirical", "bound", "verdict"],
                 res_rows)

    check_rows = _check_rows(trace, cfg, ctx, schedule, budget)
    _write_table(out / "checks.csv", ["check", "detail", "status"],
                 check_rows)

    bad_checks = [r[0] for r in check_rows if r[2] == "FAIL"]
    violations = [r for r in meta_rows + res_rows if r[-1] == "VIOLATION"]
    for name in bad_checks:
        print(f"check failed: {name}", file=sys.stderr)
    for row in violations:
        print(f"bound violated: {','.join(row)}", file=sys.stderr)
    return 1 if bad_checks or violations else 0


# --- verify ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .acceptance import run_all

    path = Path(args.config)
    if not path.is_file():
        print(f"cannot read config: {path}", file=sys.stderr)
        return 2
    results = run_all(path)
    failed = False
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name}: {res.detail}")
        failed = failed or not res.passed
    return 1 if failed else 0


# --- entry -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mppa",
        description="Proximal point iteration with certified quantitative "
                    "bounds.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run an experiment config, write "
                                        "trace and property tables")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None,
                       help="output directory (default: <config stem>_out)")
    p_run.set_defaults(fn=cmd_run)

    p_bound = subs.add_parser("bound", help="evaluate one named bound")
    p_bound.add_argument("config")
    p_bound.add_argument("name")
    p_bound.add_argument("--k", type=int, default=0)
    p_bound.add_argument("--n", type=int, default=0)
    p_bound.add_argument("--t", type=int, default=1)
    p_bound.add_argument("--d", type=int, default=None,
                         help="override the derived constant D (sigma only)")
    p_bound.add_argument("--fspec", default=None)
    p_bound.set_defaults(fn=cmd_bound)

    p_oracle = subs.add_parser("oracle", help="run brute-force lemma suites")
    p_oracle.add_argument("--lemma", choices=LEMMAS, default=None)
    p_oracle.add_argument("--seed", type=int, default=7)
    p_oracle.add_argument("--trials", type=int, default=None)
    p_oracle.set_defaults(fn=cmd_oracle)

    p_verify = subs.add_parser("verify", help="run the acceptance battery")
    p_verify.add_argument("config")
    p_verify.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
