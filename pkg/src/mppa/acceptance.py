"""The acceptance battery: seven desk-scale criteria covering the two
reference experiments, the diagnostic inequalities, the oracle suites, the
two-evaluator equivalence battery, hand-computed pin values and the
monotonicity properties of the bound calculus.

Each criterion returns a CriterionResult; run_all executes them in order
and never raises, so a harness can report every line even when one blows
up.  The experiment criteria consume a parsed config for the quadratic
problem (the repo ships one under configs/); the projection experiment is
pinned inline so the battery does not depend on file layout.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bounds
from .config import ExperimentConfig, parse_config, parse_fspec
from .countfn import (Affine, BoundValue, Budget, Const, CountFn, Identity,
                      Table, evaluate, majorize, strongly_majorizes)
from .iteration import (Trace, empirical_metastability,
                        empirical_window_index, gap_decrease_check,
                        recurrence_check, resolvent_drift_check, run)
from .oracle import run_suite
from .refeval import RefResult, ref_bound
from .schedules import Moduli, derive_constants, mu, nu, validate_moduli

BOUND_TOL = 1e-9
INEQ_TOL = 1e-8


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str


# The projection experiment, pinned inline (mirrors configs/experiment_b.cfg).
EXPERIMENT_B_TEXT = """\
[problem]
kind = ball_projection
center = 0,0
radius = 1
s = 1,0
target = 1,0

[iteration]
u = 2,0
z0 = 0,0
lam = harmonic 3
gamma = const 0.5
c = const 1
error = zero

[moduli]
a = 2
c = 1
Cmaj = const 1
ell = id
L = expceil 4
Gamma = const 0
E = const 0
N1 = 2
N2 = 1
N3 = 2

[run]
horizon = 2000
ks = 0,1,2,3
fs = const 0; id
"""


def _run_config(cfg: ExperimentConfig) -> Trace:
    op = cfg.problem.build()
    return run(op, cfg.iteration.build(), cfg.iteration.u, cfg.iteration.z0,
               cfg.run.horizon, c=cfg.moduli.c, s=cfg.problem.s,
               target=cfg.problem.target)


# --- criterion 1: strong convergence on the quadratic problem ---------------------


def criterion_experiment_a(cfg: ExperimentConfig,
                           trace: Optional[Trace] = None) -> CriterionResult:
    budget = cfg.budget()
    report = validate_moduli(cfg.iteration.build(), cfg.moduli,
                             cfg.run.horizon, budget=budget,
                             k_cap=max(cfg.run.ks, default=0) + 16)
    if not report.ok:
        return CriterionResult("experiment_a", False,
                               f"moduli violations: {report.violations}")
    if trace is None:
        trace = _run_config(cfg)
    ctx = derive_constants(cfg.moduli)

    worst = float(np.max(trace.dist_s)) - ctx.N0
    if worst > BOUND_TOL:
        return CriterionResult("experiment_a", False,
                               f"|z_n - s| exceeds N0 by {worst:.3g}")
    if trace.horizon < 10000:
        return CriterionResult(
            "experiment_a", False,
            f"horizon {trace.horizon} < 10^4, trend check impossible")
    if not trace.dist_s[10000] < trace.dist_s[100]:
        return CriterionResult(
            "experiment_a", False,
            f"no progress: d(10^4)={trace.dist_s[10000]:.3g} >= "
            f"d(10^2)={trace.dist_s[100]:.3g}")

    combos = incomputable = 0
    for k in range(10):
        for spec in ("const 0", "const 10", "id"):
            f = parse_fspec(spec)
            emp = empirical_metastability(trace.z, k, f, budget)
            if emp is None:
                return CriterionResult(
                    "experiment_a", False,
                    f"no metastability witness for k={k}, f={spec}")
            bv = bounds.phi(k, f, cfg.moduli, ctx=ctx,
                            constant_c=cfg.constant_c, budget=budget)
            if bv.is_exact and emp > bv.value:
                return CriterionResult(
                    "experiment_a", False,
                    f"VIOLATION at k={k}, f={spec}: {emp} > {bv.value}")
            combos += 1
            incomputable += 0 if bv.is_exact else 1
    return CriterionResult(
        "experiment_a", True,
        f"bounded by N0 (slack {-worst:.3g}), trend ok, {combos} "
        f"metastability combos ({incomputable} bounds over budget, "
        f"0 violations)")


# --- criterion 2: the projection experiment ---------------------------------------


def criterion_experiment_b(trace: Optional[Trace] = None) -> CriterionResult:
    cfg = parse_config(EXPERIMENT_B_TEXT)
    op = cfg.problem.build()

    rng = random.Random(0)
    worst = 0.0
    for _ in range(100):
        x = np.array([rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)])
        base = op.resolvent(0.1, x)
        for c in (1.0, 10.0):
            worst = max(worst, float(np.linalg.norm(op.resolvent(c, x) - base)))
    if worst > 1e-10:
        return CriterionResult(
            "experiment_b", False,
            f"resolvent depends on c: max deviation {worst:.3g}")

    if trace is None:
        trace = _run_config(cfg)
    hits = np.nonzero(trace.dist_target <= 0.1)[0]
    if hits.size == 0:
        return CriterionResult(
            "experiment_b", False,
            f"never within 0.1 of (1,0); min distance "
            f"{float(np.min(trace.dist_target)):.3g}")
    return CriterionResult(
        "experiment_b", True,
        f"resolvent c-independent (max dev {worst:.3g}), |z_n - (1,0)| <= "
        f"0.1 first at n={int(hits[0])}")


# --- criterion 3: diagnostic inequalities ------------------------------------------


def criterion_diagnostics(cfg_a: ExperimentConfig,
                          trace_a: Optional[Trace] = None,
                          trace_b: Optional[Trace] = None) -> CriterionResult:
    cfg_b = parse_config(EXPERIMENT_B_TEXT)
    if trace_a is None:
        trace_a = _run_config(cfg_a)
    if trace_b is None:
        trace_b = _run_config(cfg_b)

    details = []
    for label, cfg, trace in (("A", cfg_a, trace_a), ("B", cfg_b, trace_b)):
        ctx = derive_constants(cfg.moduli)
        rec = recurrence_check(trace, trace.s, ctx.M1)
        if rec > INEQ_TOL:
            return CriterionResult(
                "diagnostics", False,
                f"recurrence violated on {label} by {rec:.3g}")
        drift = resolvent_drift_check(trace, cfg.moduli.c, ctx.N0)
        if drift > INEQ_TOL:
            return CriterionResult(
                "diagnostics", False,
                f"resolvent drift (ineqJc) violated on {label} by {drift:.3g}")
        nu_values = {}
        for k in range(6):
            bv = nu(cfg.moduli, k, constant_c=True, budget=cfg.budget())
            if bv.is_exact:
                nu_values[k] = bv.value
        found = gap_decrease_check(trace, nu_values)
        if found:
            return CriterionResult(
                "diagnostics", False,
                f"wdiff violation on {label}: {found[0]}")
        details.append(f"{label}: rec {rec:.2g}, drift {drift:.2g}, "
                       f"wdiff ok k<=5")
    return CriterionResult("diagnostics", True, "; ".join(details))


# --- criterion 4: asymptotic regularity --------------------------------------------


def criterion_asymptotic(cfg: ExperimentConfig,
                         trace: Optional[Trace] = None) -> CriterionResult:
    if trace is None:
        trace = _run_config(cfg)
    budget = cfg.budget()
    curves = {"dz": trace.dz, "res_Jn": trace.res_jn, "res_J": trace.res_j}
    exact_checked = 0
    for k in range(10):
        tau = 1.0 / (k + 1)
        f0 = parse_fspec("const 0")
        triple = dict(zip(("dz", "res_Jn", "res_J"),
                          bounds.res_bounds(k, f0, cfg.moduli,
                                            constant_c=cfg.constant_c,
                                            budget=budget)))
        for name, values in curves.items():
            below = np.nonzero(values <= tau)[0]
            if below.size == 0:
                return CriterionResult(
                    "asymptotic_regularity", False,
                    f"{name} never reaches 1/{k + 1} within the horizon")
            bv = triple[name]
            if bv.is_exact:
                exact_checked += 1
                emp = empirical_window_index(values, k, f0, budget)
                if emp is None or emp > bv.value:
                    return CriterionResult(
                        "asymptotic_regularity", False,
                        f"{name} at k={k}: witness {emp} exceeds bound "
                        f"{bv.value}")
    return CriterionResult(
        "asymptotic_regularity", True,
        f"all residuals below 1/(k+1) for k<=9; {exact_checked} exact "
        f"bounds compared")


# --- criterion 5: oracle suites -----------------------------------------------------


def criterion_oracles() -> CriterionResult:
    want = {"ratap": 1000, "limsup2": 1000, "xu": 100, "suzuki1": 50,
            "suzuki2": 100}
    parts = []
    for lemma, trials in want.items():
        res = run_suite(lemma, seed=7, trials=trials)
        if not res.ok:
            return CriterionResult(
                "oracle_suites", False,
                f"{lemma}: {res.passes}/{res.trials}, first failure: "
                f"{res.first_failure}")
        parts.append(f"{lemma} {res.passes}/{res.trials}")
    return CriterionResult("oracle_suites", True, ", ".join(parts))


# --- criterion 6: evaluator equivalence and hand pins --------------------------------

# Toy moduli for the battery: T1 keeps every loop small (a = 1 kills the
# exponential cell count), T2 exercises a > 1 and a non-constant Cmaj.
_T1 = {"a": 1, "c": 1, "N1": 1, "N2": 1, "N3": 1, "Cmaj": ("const", 1),
       "ell": ("id",), "L": ("id",), "Gamma": ("id",), "E": ("id",)}
_T2 = {"a": 2, "c": 2, "N1": 1, "N2": 1, "N3": 1, "Cmaj": ("affine", 1, 1),
       "ell": ("id",), "L": ("affine", 2, 0), "Gamma": ("id",), "E": ("id",)}

BATTERY = (
    {"name": "zeta", "k": 0, "n": 5, "mod": _T1},
    {"name": "zeta", "k": 1, "n": 3, "mod": _T2},
    {"name": "sigma", "k": 0, "n": 0, "d": 1, "mod": _T1},
    {"name": "sigma", "k": 2, "n": 1, "d": 3, "mod": _T2},
    {"name": "theta", "k": 0, "n": 0, "t": 1, "n_arg": 1, "f": ("id",)},
    {"name": "theta", "k": 2, "n": 3, "t": 2, "n_arg": 2,
     "f": ("affine", 1, 2)},
    {"name": "theta", "k": 1, "n": 1, "t": 1, "n_arg": 2,
     "f": ("table", (0, 2, 1))},
    {"name": "R", "k": 0, "t": 1, "a": 2},
    {"name": "R", "k": 2, "t": 4, "a": 3},
    {"name": "R", "k": 0, "t": 5000, "a": 2},
    {"name": "proj", "k": 0, "n_arg": 1, "f": ("affine", 1, 1)},
    {"name": "proj", "k": 1, "n_arg": 2, "f": ("affine", 1, 1)},
    {"name": "proj3", "k": 0, "n_arg": 1, "f": ("const", 0)},
    {"name": "proj3", "k": 0, "n_arg": 2, "f": ("id",)},
    {"name": "varphi_suzuki1", "k": 0, "l": 1, "t": 2, "a": 2, "n_arg": 1,
     "f": ("affine", 1, 2), "nu": ("affine", 1, 0)},
    {"name": "chi_tilde", "k": 0, "a": 1, "n_arg": 2, "f": ("const", 0),
     "nu": ("const", 5)},
    {"name": "chi0", "k": 0, "f": ("const", 0), "mod": _T1,
     "constant_c": True},
    {"name": "chi0", "k": 2, "f": ("id",), "mod": _T1},
    {"name": "nu", "k": 3, "mod": _T2},
    {"name": "mu", "k": 5, "mod": _T1},
    {"name": "xi", "k": 0, "f": ("const", 1), "mod": _T1,
     "constant_c": True},
    {"name": "res_Jn", "k": 0, "f": ("const", 0), "mod": _T1,
     "constant_c": True},
    {"name": "psi", "k": 0, "f": ("const", 0), "mod": _T1,
     "constant_c": True},
    {"name": "Psi", "k": 0, "f": ("const", 0), "mod": _T1,
     "constant_c": True},
    {"name": "phi", "k": 0, "f": ("const", 0), "mod": _T1,
     "constant_c": True},
)


def count_fn(spec) -> CountFn:
    """The production-side twin of refeval.make_fn."""
    kind = spec[0]
    if kind == "const":
        return Const(spec[1])
    if kind == "id":
        return Identity()
    if kind == "affine":
        return Affine(spec[1], spec[2])
    if kind == "table":
        return Table(spec[1])
    raise ValueError(f"unknown function spec: {spec!r}")


def moduli_from(mod: dict) -> Moduli:
    return Moduli(a=mod["a"], c=mod["c"], Cmaj=count_fn(mod["Cmaj"]),
                  ell=count_fn(mod["ell"]), Ldiv=count_fn(mod["L"]),
                  Gamma=count_fn(mod["Gamma"]), E=count_fn(mod["E"]),
                  N1=mod["N1"], N2=mod["N2"], N3=mod["N3"])


def production_bound(inst: dict, budget: Optional[Budget] = None) -> BoundValue:
    """Evaluate one battery instance through the production calculus."""
    name = inst["name"]
    k = inst["k"]
    f = count_fn(inst["f"]) if "f" in inst else None
    nu_rate = count_fn(inst["nu"]) if "nu" in inst else None
    moduli = moduli_from(inst["mod"]) if "mod" in inst else None
    constant_c = inst.get("constant_c", False)
    if name == "zeta":
        return bounds.zeta(k, inst["n"], moduli.c, moduli.Cmaj, budget)
    if name == "sigma":
        return bounds.sigma(k, inst["n"], moduli.Ldiv, inst["d"], budget)
    if name == "theta":
        return bounds.theta(k, inst["n"], inst["t"], inst["n_arg"], f, budget)
    if name == "R":
        return bounds.r_const(inst["a"], k, inst["t"], budget)
    if name == "proj":
        return bounds.proj_bound(k, f, inst["n_arg"], budget)
    if name == "proj3":
        return bounds.proj3_bound(k, f, inst["n_arg"], budget)
    if name == "varphi_suzuki1":
        return bounds.varphi_suzuki1(k, f, inst["l"], inst["t"], inst["a"],
                                     nu_rate, inst["n_arg"], budget)
    if name == "chi_tilde":
        return bounds.chi_tilde(k, f, inst["a"], nu_rate, inst["n_arg"],
                                budget)
    if name == "chi0":
        return bounds.chi0(k, f, moduli, constant_c=constant_c, budget=budget)
    if name == "nu":
        return nu(moduli, k, constant_c, budget)
    if name == "mu":
        return mu(moduli, k, budget)
    if name == "xi":
        return bounds.xi(k, f, moduli, constant_c=constant_c, budget=budget)
    if name == "res_Jn":
        return bounds.res_bounds(k, f, moduli, constant_c=constant_c,
                                 budget=budget)[1]
    if name == "psi":
        return bounds.psi(k, f, moduli, constant_c=constant_c, budget=budget)
    if name == "Psi":
        return bounds.psi_cap(k, f, moduli, constant_c=constant_c,
                              budget=budget)
    if name == "phi":
        return bounds.phi(k, f, moduli, constant_c=constant_c, budget=budget)
    raise ValueError(f"unknown battery name: {name!r}")


def reference_bound(inst: dict) -> RefResult:
    return ref_bound(**inst)


def _agree(bv: BoundValue, rv: RefResult) -> bool:
    if bv.is_exact != rv.is_exact:
        return False
    if bv.is_exact:
        return bv.value == rv.value
    return bv.stage == rv.stage


HAND_PINS = (
    ("sigma(0,0; L=id, D=1)", {"name": "sigma", "k": 0, "n": 0, "d": 1,
                               "mod": _T1}, "3"),
    ("theta(0,0,1,1,id)", {"name": "theta", "k": 0, "n": 0, "t": 1,
                           "n_arg": 1, "f": ("id",)}, "2"),
    ("R(2,0,1)", {"name": "R", "k": 0, "t": 1, "a": 2}, "6"),
    ("zeta(1,3; c=2, Cmaj=n+1)", {"name": "zeta", "k": 1, "n": 3,
                                  "mod": _T2}, "15"),
    ("nu_constc(0) toy", {"name": "nu", "k": 0, "mod": _T1,
                          "constant_c": True}, "32"),
)


def criterion_equivalence() -> CriterionResult:
    markers = 0
    for i, inst in enumerate(BATTERY):
        bv = production_bound(inst)
        rv = reference_bound(inst)
        if not _agree(bv, rv):
            return CriterionResult(
                "evaluator_equivalence", False,
                f"instance {i} ({inst['name']}): production "
                f"{bv.render()} != reference {rv.render()}")
        markers += 0 if bv.is_exact else 1
    for label, inst, expected in HAND_PINS:
        bv = production_bound(inst)
        if bv.render() != expected:
            return CriterionResult(
                "evaluator_equivalence", False,
                f"hand pin {label}: got {bv.render()}, expected {expected}")
    return CriterionResult(
        "evaluator_equivalence", True,
        f"{len(BATTERY)} instances agree ({markers} budget markers), "
        f"{len(HAND_PINS)} hand pins exact")


# --- criterion 7: monotonicity -------------------------------------------------------


def _k_series(name: str, base: dict, ks: range) -> list:
    values = []
    for k in ks:
        inst = dict(base, name=name, k=k)
        values.append(production_bound(inst))
    return values


def _monotone_prefix(series: list) -> bool:
    """Exact values must be nondecreasing and precede any budget markers."""
    prev = None
    seen_marker = False
    for bv in series:
        if not bv.is_exact:
            seen_marker = True
            continue
        if seen_marker:
            return False
        if prev is not None and bv.value < prev:
            return False
        prev = bv.value
    return True


# f <=* f' pairs; checked with strongly_majorizes before use.
_F_PAIRS = (
    (("const", 0), ("const", 3)),
    (("const", 3), ("affine", 1, 3)),
    (("id",), ("affine", 2, 1)),
    (("table", (1, 0, 2)), ("affine", 1, 2)),
)

_K_FAMILIES = (
    ("zeta", {"n": 3, "mod": _T2}),
    ("sigma", {"n": 1, "d": 2, "mod": _T1}),
    ("theta", {"n": 0, "t": 1, "n_arg": 2, "f": ("id",)}),
    ("R", {"t": 3, "a": 2}),
    ("proj", {"n_arg": 2, "f": ("affine", 1, 1)}),
    ("varphi_suzuki1", {"l": 0, "t": 1, "a": 1, "n_arg": 1,
                        "f": ("const", 2), "nu": ("id",)}),
    ("chi_tilde", {"a": 1, "n_arg": 1, "f": ("const", 0), "nu": ("id",)}),
    ("chi0", {"f": ("const", 0), "mod": _T1, "constant_c": True}),
    ("nu", {"mod": _T1, "constant_c": True}),
    ("mu", {"mod": _T1}),
    ("xi", {"f": ("const", 0), "mod": _T1, "constant_c": True}),
    ("psi", {"f": ("const", 0), "mod": _T1, "constant_c": True}),
    ("Psi", {"f": ("const", 0), "mod": _T1, "constant_c": True}),
    ("phi", {"f": ("const", 0), "mod": _T1, "constant_c": True}),
)

_F_FAMILIES = (
    ("theta", {"k": 2, "n": 0, "t": 1, "n_arg": 2}),
    ("proj", {"k": 1, "n_arg": 2}),
    ("chi_tilde", {"k": 0, "a": 1, "n_arg": 2, "nu": ("const", 3)}),
    ("chi0", {"k": 0, "mod": _T1, "constant_c": True}),
    ("xi", {"k": 0, "mod": _T1, "constant_c": True}),
)


def criterion_monotonicity() -> CriterionResult:
    ks = range(6)
    exact_points = 0
    for name, base in _K_FAMILIES:
        series = _k_series(name, base, ks)
        if not _monotone_prefix(series):
            rendered = [bv.render() for bv in series]
            return CriterionResult(
                "monotonicity", False,
                f"{name} not monotone in k: {rendered}")
        exact_points += sum(1 for bv in series if bv.is_exact)

    for lo_spec, hi_spec in _F_PAIRS:
        if not strongly_majorizes(count_fn(lo_spec), count_fn(hi_spec)):
            return CriterionResult(
                "monotonicity", False,
                f"battery pair broken: {lo_spec} not <=* {hi_spec}")
        for name, base in _F_FAMILIES:
            lo = production_bound(dict(base, name=name, f=lo_spec))
            hi = production_bound(dict(base, name=name, f=hi_spec))
            if lo.is_exact and hi.is_exact and lo.value > hi.value:
                return CriterionResult(
                    "monotonicity", False,
                    f"{name} not monotone under <=*: f={lo_spec} gives "
                    f"{lo.value} > {hi.value} from f'={hi_spec}")

    moduli = moduli_from(_T1)
    for k in range(3):
        for spec, _ in _F_PAIRS:
            f = count_fn(spec)
            direct = bounds.phi(k, f, moduli, constant_c=True)
            majored = bounds.phi_chi(k, majorize(f), moduli, constant_c=True)
            if direct.render() != majored.render():
                return CriterionResult(
                    "monotonicity", False,
                    f"phi(k, f) != phi(k, f^maj) at k={k}, f={spec}")

    return CriterionResult(
        "monotonicity", True,
        f"{len(_K_FAMILIES)} k-series monotone ({exact_points} exact "
        f"points), {len(_F_PAIRS)}x{len(_F_FAMILIES)} counterfunction "
        f"comparisons, phi majorization identity holds")


# --- entry ---------------------------------------------------------------------------


def run_all(config_path) -> list:
    """Execute the full battery; the config path names the quadratic
    experiment (criteria 1, 3 and 4)."""
    results = []
    cfg = None
    trace_a = None
    try:
        cfg = parse_config(Path(config_path).read_text(encoding="utf-8"))
        trace_a = _run_config(cfg)
    except Exception as exc:
        results.append(CriterionResult("experiment_a", False,
                                       f"config failed: {exc}"))

    def guarded(fn, *args):
        try:
            results.append(fn(*args))
        except Exception as exc:
            results.append(CriterionResult(fn.__name__.replace(
                "criterion_", ""), False, f"crashed: {exc}"))

    if cfg is not None:
        guarded(criterion_experiment_a, cfg, trace_a)
    guarded(criterion_experiment_b)
    if cfg is not None:
        guarded(criterion_diagnostics, cfg, trace_a)
        guarded(criterion_asymptotic, cfg, trace_a)
    guarded(criterion_oracles)
    guarded(criterion_equivalence)
    guarded(criterion_monotonicity)
    return results
