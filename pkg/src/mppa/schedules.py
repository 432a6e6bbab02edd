"""Parameter schedules for the iteration and their quantitative moduli.

A Schedule fixes the closed-form families for the anchor weight lambda_n,
the inertia gamma_n, the resolvent parameter c_n and the error term e_n;
the mixing weight delta_n is always derived as 1 - lambda_n - gamma_n.

Moduli packages the rates that make the convergence analysis quantitative:
ell witnesses lambda_n -> 0, Ldiv witnesses divergence of the lambda sums,
Gamma witnesses c_{n+1} - c_n -> 0, E witnesses the error tail being Cauchy,
and a, c, Cmaj, N1, N2, N3 are the numeric envelopes everything else is
phrased in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .countfn import (Affine, BoundValue, Budget, Closure, Composed, CountFn,
                      evaluate)
from .operators import as_point, norm

SLACK = 1e-9


@dataclass(frozen=True)
class ConstantSeq:
    value: float

    def at(self, n: int) -> float:
        return self.value

    def values(self, count: int) -> np.ndarray:
        return np.full(count, self.value)


@dataclass(frozen=True)
class HarmonicSeq:
    """n -> 1 / (n + shift)."""

    shift: float

    def __post_init__(self):
        if not (self.shift > 0):
            raise ValueError("harmonic shift must be positive")

    def at(self, n: int) -> float:
        return 1.0 / (n + self.shift)

    def values(self, count: int) -> np.ndarray:
        return 1.0 / (np.arange(count) + self.shift)


@dataclass(frozen=True)
class ZeroError:
    dim: int

    def at(self, n: int) -> np.ndarray:
        return np.zeros(self.dim)

    def values(self, count: int) -> np.ndarray:
        return np.zeros((count, self.dim))

    def norms(self, count: int) -> np.ndarray:
        return np.zeros(count)


@dataclass(frozen=True)
class GeometricError:
    """e_n = ratio**n * base with 0 < ratio < 1."""

    ratio: float
    base: tuple

    def __post_init__(self):
        if not (0 < self.ratio < 1):
            raise ValueError("geometric ratio must lie in (0, 1)")
        object.__setattr__(self, "base", tuple(float(v) for v in self.base))

    @property
    def dim(self) -> int:
        return len(self.base)

    def at(self, n: int) -> np.ndarray:
        return (self.ratio ** n) * np.asarray(self.base)

    def values(self, count: int) -> np.ndarray:
        scales = self.ratio ** np.arange(count)
        return scales[:, None] * np.asarray(self.base)

    def norms(self, count: int) -> np.ndarray:
        scales = self.ratio ** np.arange(count)
        return scales * float(np.linalg.norm(self.base))


@dataclass(frozen=True)
class Schedule:
    lam: object
    gamma: object
    c: object
    error: object

    def at(self, n: int):
        """Parameters (lambda, gamma, delta, c, e) at step n."""
        lam = self.lam.at(n)
        gam = self.gamma.at(n)
        delta = 1.0 - lam - gam
        if delta <= 0:
            raise ValueError(f"invalid schedule at n={n}: lambda + gamma >= 1")
        cv = self.c.at(n)
        if cv <= 0:
            raise ValueError(f"invalid schedule at n={n}: c must be positive")
        return lam, gam, delta, cv, self.error.at(n)

    def snapshot(self, horizon: int):
        """Vectorized parameters: scalars for n = 0..horizon, errors for
        n = 0..horizon-1."""
        count = horizon + 1
        lam = self.lam.values(count)
        gam = self.gamma.values(count)
        delta = 1.0 - lam - gam
        cs = self.c.values(count)
        errs = self.error.values(max(horizon, 0))
        return lam, gam, delta, cs, errs


def validate_schedule(schedule: Schedule, horizon: int) -> list:
    """All of lambda, gamma, delta must lie in (0, 1) and c must be positive
    up to the horizon; returns located violation messages."""
    lam, gam, delta, cs, _ = schedule.snapshot(horizon)
    problems = []
    for name, arr in (("lambda", lam), ("gamma", gam), ("delta", delta)):
        bad = np.nonzero((arr <= 0) | (arr >= 1))[0]
        if bad.size:
            n = int(bad[0])
            problems.append(f"{name} out of (0, 1) at n={n}: {arr[n]!r}")
    bad = np.nonzero(cs <= 0)[0]
    if bad.size:
        problems.append(f"c not positive at n={int(bad[0])}")
    return problems


@dataclass(frozen=True)
class Moduli:
    """Quantitative hypotheses: rate functions plus numeric envelopes.

    a bounds gamma_n away from 0 and 1 (1/a <= gamma_n <= 1 - 1/a), c is the
    reciprocal floor for c_n (c_n >= 1/c), Cmaj majorizes the running maximum
    of c_n, and N1 >= |u|, N2 >= error mass + 1, N3 >= max(|u - s|, |z0 - s|).
    """

    a: int
    c: int
    Cmaj: CountFn
    ell: CountFn
    Ldiv: CountFn
    Gamma: CountFn
    E: CountFn
    N1: int
    N2: int
    N3: int

    def __post_init__(self):
        # a = 1 makes the gamma band empty, which any schedule check will
        # flag, but the bound formulas remain well defined and are exercised
        # on such degenerate moduli by the evaluator cross-checks.
        if self.a < 1:
            raise ValueError("a must be a positive integer")
        if self.c < 1:
            raise ValueError("c must be a positive integer")
        for name in ("N1", "N2", "N3"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")


@dataclass(frozen=True)
class BoundContext:
    """Constants derived from the moduli, shared by the bound calculus."""

    N0: int
    N: int
    M1: int
    M2: int
    D: int
    G: CountFn


def derive_constants(moduli: Moduli) -> BoundContext:
    n0 = moduli.N2 + moduli.N3
    n = max(2 * moduli.N3, moduli.N2 + moduli.N3)
    m1 = 3 * moduli.N2 + 4 * n
    m2 = m1 + 2 * (moduli.N3 + n)
    d = 4 * n * n
    g = Composed(moduli.E, Affine(m2, m2))
    return BoundContext(N0=n0, N=n, M1=m1, M2=m2, D=d, G=g)


@dataclass
class ModuliReport:
    horizon: int
    k_cap: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def _rate_values(fn: CountFn, k_cap: int, budget: Optional[Budget]) -> list:
    vals = []
    for k in range(k_cap + 1):
        bv = evaluate(fn, k, budget)
        if not bv.is_exact:
            break
        vals.append(bv.value)
    return vals


def validate_moduli(schedule: Schedule, moduli: Moduli, horizon: int,
                    budget: Optional[Budget] = None,
                    k_cap: Optional[int] = None) -> ModuliReport:
    """Check the quantitative hypotheses against the schedule up to the
    horizon.  k ranges over [0, k_cap] (default: the horizon); hypotheses
    whose relevant index lies beyond the horizon are vacuous at that k.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if k_cap is None:
        k_cap = horizon
    lam, gam, delta, cs, errs = schedule.snapshot(horizon)
    violations = list(validate_schedule(schedule, horizon))

    # suffix maxima make each rate check O(1) per k
    lam_sufmax = np.maximum.accumulate(lam[::-1])[::-1]
    lam_cumsum = np.cumsum(lam)  # lam_cumsum[i] = sum of lam_0..lam_i
    cdiff = np.abs(np.diff(cs))
    cdiff_sufmax = (np.maximum.accumulate(cdiff[::-1])[::-1]
                    if cdiff.size else np.zeros(0))
    enorms = (np.linalg.norm(errs, axis=1) if errs.size else np.zeros(0))
    ecumsum = np.cumsum(enorms)

    for k, lk in enumerate(_rate_values(moduli.ell, k_cap, budget)):
        if lk <= horizon and lam_sufmax[lk] > 1.0 / (k + 1) + SLACK:
            n = lk + int(np.argmax(lam[lk:] > 1.0 / (k + 1) + SLACK))
            violations.append(
                f"lambda rate fails at k={k}: lambda_{n}={lam[n]!r} > 1/{k + 1}")
            break

    for k, Lk in enumerate(_rate_values(moduli.Ldiv, k_cap, budget)):
        if Lk > horizon:
            break
        total = float(lam_cumsum[Lk] - lam_cumsum[0]) if Lk >= 1 else 0.0
        if total < k - SLACK:
            violations.append(
                f"divergence rate fails at k={k}: sum of lambda_1..lambda_{Lk} "
                f"= {total!r} < {k}")
            break

    lo, hi = 1.0 / moduli.a, 1.0 - 1.0 / moduli.a
    bad = np.nonzero((gam < lo - SLACK) | (gam > hi + SLACK))[0]
    if bad.size:
        n = int(bad[0])
        violations.append(
            f"gamma leaves [1/{moduli.a}, 1 - 1/{moduli.a}] at n={n}: {gam[n]!r}")

    bad = np.nonzero(cs < 1.0 / moduli.c - SLACK)[0]
    if bad.size:
        n = int(bad[0])
        violations.append(f"c_n below 1/{moduli.c} at n={n}: {cs[n]!r}")

    c_runmax = np.maximum.accumulate(cs)
    for n in range(horizon + 1):
        bv = evaluate(moduli.Cmaj, n, budget)
        if not bv.is_exact:
            break
        if bv.value + SLACK < float(c_runmax[n]):
            violations.append(
                f"Cmaj fails at n={n}: {bv.value} < running max {c_runmax[n]!r}")
            break

    for k, gk in enumerate(_rate_values(moduli.Gamma, k_cap, budget)):
        if gk < cdiff_sufmax.size and cdiff_sufmax[gk] > 1.0 / (k + 1) + SLACK:
            violations.append(
                f"c-step rate fails at k={k}: |c_(n+1) - c_n| exceeds 1/{k + 1} "
                f"at some n >= {gk}")
            break

    for k, ek in enumerate(_rate_values(moduli.E, k_cap, budget)):
        if ek >= ecumsum.size:
            break
        tail = float(ecumsum[-1] - ecumsum[ek])
        if tail > 1.0 / (k + 1) + SLACK:
            violations.append(
                f"error tail rate fails at k={k}: sum past index {ek} is {tail!r}")
            break

    return ModuliReport(horizon=horizon, k_cap=k_cap, violations=violations)


def validate_anchors(moduli: Moduli, schedule: Schedule, u, z0, s,
                     budget: Optional[Budget] = None) -> list:
    """The numeric envelopes N1, N2, N3 against the concrete experiment."""
    u = as_point(u)
    z0 = as_point(z0)
    s = as_point(s)
    problems = []
    if moduli.N1 + SLACK < norm(u):
        problems.append(f"N1={moduli.N1} < |u|={norm(u)!r}")
    e0 = evaluate(moduli.E, 0, budget)
    if e0.is_exact:
        mass = float(np.sum(schedule.error.norms(e0.value + 1)))
        if moduli.N2 + SLACK < mass + 1.0:
            problems.append(f"N2={moduli.N2} < error mass {mass!r} + 1")
    else:
        problems.append("E(0) exceeded the evaluation budget")
    need = max(norm(u - s), norm(z0 - s))
    if moduli.N3 + SLACK < need:
        problems.append(f"N3={moduli.N3} < max(|u-s|, |z0-s|)={need!r}")
    return problems


def nu_fn(moduli: Moduli, constant_c: bool = False) -> CountFn:
    """Threshold rate: past nu(k), consecutive averaged points w_n separate
    from consecutive iterates by at most 1/(k+1).

    The general form needs the c-step rate Gamma; with a constant resolvent
    parameter the Gamma term drops and the remaining coefficients shrink.
    """
    a = moduli.a
    n0 = moduli.N2 + moduli.N3
    nsum = n0 + moduli.N1 + moduli.N3

    if constant_c:
        def fn(k, state):
            prev = state.stage
            state.stage = "nu"
            try:
                lv = moduli.ell(state.check(8 * a * nsum * (k + 1)), state)
                ev = moduli.E(state.check(4 * a * (k + 1)), state) + 1
                return max(lv, ev)
            finally:
                state.stage = prev
    else:
        def fn(k, state):
            prev = state.stage
            state.stage = "nu"
            try:
                gv = moduli.Gamma(state.check(10 * a * moduli.c * n0 * (k + 1)), state)
                lv = moduli.ell(state.check(10 * a * nsum * (k + 1)), state)
                ev = moduli.E(state.check(5 * a * (k + 1)), state) + 1
                return max(gv, lv, ev)
            finally:
                state.stage = prev

    return Closure(name="nu", fn=fn)


def mu_fn(moduli: Moduli) -> CountFn:
    """Threshold rate past which the two resolvent residuals (running
    parameter versus fixed parameter 1/c) stay within 1/(k+1) of each other."""
    a = moduli.a
    n0 = moduli.N2 + moduli.N3

    def fn(k, state):
        prev = state.stage
        state.stage = "mu"
        try:
            lv = moduli.ell(state.check(4 * a * (k + 1) * (n0 + moduli.N3)), state)
            ev = moduli.E(state.check(4 * a * (k + 1)), state) + 1
            return max(lv, ev)
        finally:
            state.stage = prev

    return Closure(name="mu", fn=fn)


def nu(moduli: Moduli, k: int, constant_c: bool = False,
       budget: Optional[Budget] = None) -> BoundValue:
    return evaluate(nu_fn(moduli, constant_c), k, budget)


def mu(moduli: Moduli, k: int, budget: Optional[Budget] = None) -> BoundValue:
    return evaluate(mu_fn(moduli), k, budget)
