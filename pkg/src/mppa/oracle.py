"""Brute-force verification of the combinatorial lemmas behind the bound
calculus, on concrete finite sequences.

Every lemma asserts a witness below an explicit bound.  The oracle searches
exhaustively, checks premises before trusting any instance, and uses exact
rational arithmetic for cell comparisons (doubles appear only in norms of
synthetic vector pairs, guarded by a 1e-9 slack).  Sequences extend beyond
their explicit prefix by repeating the final value, which keeps every
window well defined while staying a legitimate instance of the lemmas.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .bounds import chi_tilde, r_const, sigma, theta, varphi_suzuki1
from .countfn import (Affine, BudgetExceededError, Const, CountFn, Identity,
                      ceil_ln, evaluate)

NORM_SLACK = 1e-9
PREMISE_TOL = Fraction(1, 10 ** 12)
CONCLUSION_TOL = Fraction(1, 10 ** 9)


def _fval(f: CountFn, n: int) -> int:
    v = evaluate(f, n)
    if not v.is_exact:
        raise BudgetExceededError(v.stage)
    return v.value


def _exact(bound_value) -> int:
    if not bound_value.is_exact:
        raise BudgetExceededError(bound_value.stage)
    return bound_value.value


# --- domain types ---------------------------------------------------------------


@dataclass(frozen=True)
class BoundedSeq:
    """Finite rational sequence in [0, N], repeating its last value."""

    values: tuple
    bound: int

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("bound must be a natural number")
        vals = tuple(Fraction(v) for v in self.values)
        if not vals:
            raise ValueError("at least one value is required")
        for i, v in enumerate(vals):
            if v < 0 or v > self.bound:
                raise ValueError(f"value out of [0, N] at index {i}: {v}")
        object.__setattr__(self, "values", vals)

    def at(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("index must be a natural number")
        return self.values[min(n, len(self.values) - 1)]

    def window(self, lo: int, hi: int) -> tuple:
        """Values on [lo, hi] up to repetition of the tail."""
        if hi < lo:
            return ()
        last = len(self.values) - 1
        if lo >= last:
            return (self.values[last],)
        return self.values[lo:min(hi, last) + 1]


class SyntheticPair:
    """Pair (z, w) coupled by z_(n+1) = alpha_n w_n + (1 - alpha_n) z_n.

    w and alpha repeat their final entries; z is generated, never free, so
    the coupling holds exactly in double precision by construction.
    """

    def __init__(self, z0, w, alpha, a: int):
        if a < 1:
            raise ValueError("a must be a positive integer")
        self.a = int(a)
        self.z0 = np.asarray(z0, dtype=float).reshape(-1)
        self.w_list = [np.asarray(p, dtype=float).reshape(-1) for p in w]
        if not self.w_list:
            raise ValueError("w must contain at least one point")
        for p in self.w_list:
            if p.shape != self.z0.shape:
                raise ValueError("w entries must match the dimension of z0")
        self.alpha = tuple(float(x) for x in alpha)
        if not self.alpha:
            raise ValueError("alpha must contain at least one value")
        lo, hi = 1.0 / self.a, 1.0 - 1.0 / self.a
        for i, x in enumerate(self.alpha):
            if x < lo - 1e-12 or x > hi + 1e-12:
                raise ValueError(
                    f"alpha out of [1/a, 1-1/a] at index {i}: {x!r}")
        self._z = [self.z0]

    @property
    def dim(self) -> int:
        return self.z0.shape[0]

    def alpha_at(self, n: int) -> float:
        return self.alpha[min(n, len(self.alpha) - 1)]

    def w_at(self, n: int) -> np.ndarray:
        return self.w_list[min(n, len(self.w_list) - 1)]

    def z_at(self, n: int) -> np.ndarray:
        while len(self._z) <= n:
            m = len(self._z) - 1
            al = self.alpha_at(m)
            self._z.append(al * self.w_at(m) + (1.0 - al) * self._z[m])
        return self._z[n]

    def gap(self, n: int) -> float:
        return float(np.linalg.norm(self.w_at(n) - self.z_at(n)))

    def wdiff(self, n: int) -> float:
        """|w_(n+1) - w_n| - |z_(n+1) - z_n|, the almost-decrease surplus."""
        dw = float(np.linalg.norm(self.w_at(n + 1) - self.w_at(n)))
        dz = float(np.linalg.norm(self.z_at(n + 1) - self.z_at(n)))
        return dw - dz


# --- rational approximation of the limsup ----------------------------------------


def ratap_witness(xs: BoundedSeq, k: int, n: int, f: CountFn) -> Optional[int]:
    """Least p < N(k+1) whose cell [p/(k+1), (p+1)/(k+1)] is entered on the
    window [n, n+f(n)] while no window value exceeds its upper edge."""
    win = xs.window(n, n + _fval(f, n))
    for p in range(xs.bound * (k + 1)):
        lower = Fraction(p, k + 1)
        upper = Fraction(p + 1, k + 1)
        if any(x >= lower for x in win) and all(x <= upper for x in win):
            return p
    return None


def rationalapprox2_witness(xs: BoundedSeq, k: int, m_start: int, t: int,
                            f: CountFn) -> Optional[tuple]:
    """Least lexicographic (m, p), m in [M, theta], p < N(k+1), with
    x_(m+t) >= p/(k+1) and all of [m, m+f(m)] at most (p+1)/(k+1).
    Returned as (p, m)."""
    if t < 1:
        raise ValueError("t must be at least 1")
    cap = _exact(theta(k, m_start, t, xs.bound, f))
    cells = xs.bound * (k + 1)
    for m in range(m_start, cap + 1):
        probe = xs.at(m + t)
        win = xs.window(m, m + _fval(f, m))
        for p in range(cells):
            if probe >= Fraction(p, k + 1) and \
                    all(x <= Fraction(p + 1, k + 1) for x in win):
                return p, m
    return None


# --- quantitative recurrence lemma ------------------------------------------------


def _ext(seq: tuple, i: int) -> Fraction:
    return seq[i] if i < len(seq) else seq[-1]


def qtXu1_check(s, v, r, gamma, lam, ldiv: CountFn, d: int, k: int, n: int,
                p: int) -> Optional[bool]:
    """Check the damped-recurrence conclusion on a finite instance.

    Premises are verified first on the finite region the conclusion
    consumes (transitions and error mass up to index p, the divergence rate
    up to the level sigma uses); any failure returns None (indeterminate)
    so a broken instance can never produce a false positive.  On verified
    premises returns whether s_m <= 1/(k+1) for every m in [sigma(k,n), p].
    """
    s = tuple(Fraction(x) for x in s)
    v = tuple(Fraction(x) for x in v)
    r = tuple(Fraction(x) for x in r)
    gamma = tuple(Fraction(x) for x in gamma)
    lam = tuple(Fraction(x) for x in lam)
    if d < 1 or k < 0 or n < 0 or p < 0:
        return None
    if any(x < 0 or x > d for x in s):
        return None
    if any(x <= 0 or x >= 1 for x in lam):
        return None
    if any(x < 0 for x in gamma):
        return None

    quarter = Fraction(1, 4 * (k + 1))
    for m in range(n, p + 1):
        if _ext(v, m) > quarter / (p + 1) + PREMISE_TOL:
            return None
        if _ext(r, m) > quarter + PREMISE_TOL:
            return None
    if sum((_ext(gamma, i) for i in range(n, p + 1)),
           Fraction(0)) > quarter + PREMISE_TOL:
        return None

    for m in range(p + 1):
        rhs = (1 - _ext(lam, m)) * (_ext(s, m) + _ext(v, m)) \
            + _ext(lam, m) * _ext(r, m) + _ext(gamma, m)
        if _ext(s, m + 1) > rhs + PREMISE_TOL:
            return None

    # Divergence rate, probed up to the level sigma actually consumes.
    probe_hi = n + ceil_ln(4 * d * (k + 1))
    for kk in range(probe_hi + 1):
        lk = _fval(ldiv, kk)
        total = Fraction(0)
        for i in range(1, lk + 1):
            total += _ext(lam, i)
        if total < kk - PREMISE_TOL:
            return None

    start = _exact(sigma(k, n, ldiv, d))
    return all(_ext(s, m) <= Fraction(1, k + 1) + CONCLUSION_TOL
               for m in range(start, p + 1))


# --- quantitative Suzuki lemmas ------------------------------------------------------


def _check_gap_bound(pair: SyntheticPair, n_gap: int, horizon: int) -> None:
    for n in range(horizon + 1):
        if pair.gap(n) > n_gap + NORM_SLACK:
            raise ValueError(f"gap exceeds N at n={n}")


def _check_eqnu(pair: SyntheticPair, nu: CountFn, level: int,
                horizon: int) -> None:
    """The almost-decrease premise at one level: for n >= nu(level) the gap
    surplus stays below 1/(level+1), probed up to the horizon."""
    start = _fval(nu, level)
    tau = 1.0 / (level + 1)
    for m in range(start, horizon):
        if pair.wdiff(m) > tau + NORM_SLACK:
            raise ValueError(
                f"nu is not a valid almost-decrease rate: surplus at n={m} "
                f"exceeds 1/{level + 1}")


def suzuki1_witness(pair: SyntheticPair, k: int, l: int, t: int,
                    nu: CountFn, n_gap: int, f: CountFn) -> Optional[tuple]:
    """Least (m, p), m in [l, varphi(k, f)], p < R N, realizing the
    three-way sandwich on the companion gap.

    The conclusion depends on the counterfunction f, so f is part of the
    instance here.  Premises (the alpha band, the gap bound N and the
    almost-decrease rate nu at the level the proof consumes) are verified
    up to the search horizon; a fabricated nu raises ValueError.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    cells = _exact(r_const(pair.a, k, t))
    cap = _exact(varphi_suzuki1(k, f, l, t, pair.a, nu, n_gap))
    fmax = max(_fval(f, m) for m in range(l, cap + 1))
    horizon = cap + t + fmax + 2
    _check_gap_bound(pair, n_gap, horizon)
    _check_eqnu(pair, nu, cells - 1, horizon)

    tau = 1.0 / (k + 1)
    for m in range(l, cap + 1):
        fm = _fval(f, m)
        probe = float(np.linalg.norm(pair.w_at(m + t) - pair.z_at(m)))
        asum = 1.0 + sum(pair.alpha_at(m + i) for i in range(t))
        gap_t = pair.gap(m + t)
        win_max = max(pair.gap(i) for i in range(m, m + t + fm + 1))
        for p in range(cells * n_gap):
            hi = (p + 1) / cells
            if probe - asum * hi < -tau - NORM_SLACK:
                continue
            if gap_t < p / cells - NORM_SLACK:
                continue
            if win_max > hi + NORM_SLACK:
                continue
            return m, p
    return None


def suzuki2_index(pair: SyntheticPair, k: int, f: CountFn, nu: CountFn,
                  n_ball: int, horizon: int = 4096) -> Optional[int]:
    """Least n whose window [n, n+f(n)] keeps the companion gap below
    1/(k+1).

    Searches up to the bound chi_tilde(k, f) when that is exact within
    budget, otherwise up to `horizon`.  Premise checks mirror the lemma:
    norms bounded by N, the alpha band held by construction, and the
    almost-decrease rate probed at the level the proof consumes.
    """
    bound = chi_tilde(k, f, pair.a, nu, n_ball)
    cap = bound.value if bound.is_exact else horizon

    t = max(2 * n_ball * pair.a * (k + 1), 1)
    cells = _exact(r_const(pair.a, k, t))
    probe_hi = min(cap, 2000)
    for n in range(probe_hi + 1):
        zn = float(np.linalg.norm(pair.z_at(n)))
        wn = float(np.linalg.norm(pair.w_at(n)))
        if zn > n_ball + NORM_SLACK or wn > n_ball + NORM_SLACK:
            raise ValueError(f"iterate norm exceeds N at n={n}")
    _check_eqnu(pair, nu, cells - 1, probe_hi)

    tau = 1.0 / (k + 1)
    for n in range(cap + 1):
        fn = _fval(f, n)
        if all(pair.gap(m) <= tau + NORM_SLACK for m in range(n, n + fn + 1)):
            return n
    return None


# --- randomized suites -----------------------------------------------------------


@dataclass
class SuiteResult:
    lemma: str
    trials: int
    passes: int
    failures: int
    first_failure: Optional[str]

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def csv_line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{self.lemma},{self.trials},{self.passes},{status}"


def _random_seq(rng: random.Random, n_bound: int) -> BoundedSeq:
    length = rng.randrange(1, 13)
    vals = []
    for _ in range(length):
        den = rng.randrange(1, 10)
        vals.append(Fraction(rng.randrange(0, n_bound * den + 1), den))
    return BoundedSeq(values=tuple(vals), bound=n_bound)


def _random_counterfn(rng: random.Random, top: int = 3) -> CountFn:
    if rng.random() < 0.25:
        return Identity()
    return Const(rng.randrange(0, top + 1))


def _suite_ratap(rng: random.Random, trials: int):
    passes, failures, first = 0, 0, None
    for i in range(trials):
        xs = _random_seq(rng, rng.choice((1, 2, 3)))
        k = rng.randrange(0, 5)
        n = rng.randrange(0, 11)
        f = _random_counterfn(rng)
        p = ratap_witness(xs, k, n, f)
        if p is not None and p < xs.bound * (k + 1):
            passes += 1
        else:
            failures += 1
            first = first or f"trial {i}: no cell for {xs.values} k={k} n={n}"
    return passes, failures, first


def _suite_limsup2(rng: random.Random, trials: int):
    passes, failures, first = 0, 0, None
    for i in range(trials):
        xs = _random_seq(rng, rng.choice((1, 2, 3)))
        k = rng.randrange(0, 4)
        m_start = rng.randrange(0, 6)
        t = rng.randrange(1, 4)
        f = _random_counterfn(rng, top=2)
        got = rationalapprox2_witness(xs, k, m_start, t, f)
        if got is not None:
            passes += 1
        else:
            failures += 1
            first = first or f"trial {i}: no witness for {xs.values} " \
                             f"k={k} M={m_start} t={t}"
    return passes, failures, first


def _xu_instance(rng: random.Random, corrupt: bool):
    lam_val = Fraction(1, rng.choice((2, 3, 4)))
    ldiv = Affine(slope=lam_val.denominator, offset=0)
    k = rng.randrange(0, 3)
    n = rng.randrange(0, 6)
    p = n + rng.randrange(0, 31)
    length = p + rng.randrange(2, 8)

    quarter = Fraction(1, 4 * (k + 1))
    v = []
    r = []
    for m in range(length):
        vcap = quarter / (p + 1)
        v.append(vcap * Fraction(rng.randrange(0, 10), 10))
        r.append(quarter * Fraction(rng.randrange(0, 10), 10))
    budget_g = quarter
    gamma = []
    for _ in range(length - 1):
        take = budget_g * Fraction(rng.randrange(0, 4), 12)
        gamma.append(take)
        budget_g -= take
    gamma.append(Fraction(0))

    s = [Fraction(rng.randrange(0, 4), 2)]
    for m in range(length):
        s.append((1 - lam_val) * (s[m] + v[m]) + lam_val * r[m] + gamma[m])
    d = max(1, int(-(-max(s) // 1)))
    if corrupt:
        # Land the broken transition inside [0, p] so the probe sees it.
        bump = rng.randrange(1, p + 2)
        s[bump] += d + 1
        d = d * 2 + 2
    lam = [lam_val] * length
    return s, v, r, gamma, lam, ldiv, d, k, n, p


def _suite_xu(rng: random.Random, trials: int):
    passes, failures, first = 0, 0, None
    for i in range(trials):
        corrupt = i % 5 == 4
        inst = _xu_instance(rng, corrupt)
        s, v, r, gamma, lam, ldiv, d, k, n, p = inst
        got = qtXu1_check(s, v, r, gamma, lam, ldiv, d, k, n, p)
        want_ok = got is None if corrupt else got is True
        if want_ok:
            passes += 1
        else:
            failures += 1
            first = first or f"trial {i}: got {got!r} corrupt={corrupt} " \
                             f"k={k} n={n} p={p}"
    return passes, failures, first


def _unit(rng: random.Random, dim: int) -> np.ndarray:
    vec = np.array([rng.gauss(0.0, 1.0) for _ in range(dim)])
    nrm = float(np.linalg.norm(vec))
    if nrm < 1e-12:
        vec = np.zeros(dim)
        vec[0] = 1.0
        return vec
    return vec / nrm


def _walk_pair(rng: random.Random):
    """A pair whose w drifts by sigma/(n+1)^2 steps; nu = Affine(s, s) with
    s = ceil(sigma) is then a valid almost-decrease rate."""
    dim = 2
    a = rng.choice((3, 4))
    sig = 1.0 + rng.random()
    direction = _unit(rng, dim)
    w0 = np.array([rng.uniform(-0.5, 0.5) for _ in range(dim)])
    w = [w0]
    steps = rng.randrange(6, 13)
    for n in range(steps):
        w.append(w[-1] + (sig / (n + 1) ** 2) * direction)
    lo, hi = 1.0 / a, 1.0 - 1.0 / a
    alpha = [rng.uniform(lo, hi) for _ in range(steps)]
    z0 = np.array([rng.uniform(-0.5, 0.5) for _ in range(dim)])
    pair = SyntheticPair(z0=z0, w=w, alpha=alpha, a=a)
    nu = Affine(slope=int(-(-sig // 1)), offset=int(-(-sig // 1)))
    gap_max = max(pair.gap(n) for n in range(len(w) + 2))
    n_gap = max(1, int(-(-gap_max // 1)))
    return pair, nu, n_gap


def _suite_suzuki1(rng: random.Random, trials: int):
    passes, failures, first = 0, 0, None
    for i in range(trials):
        k = rng.randrange(0, 3)
        l = rng.randrange(0, 4)
        t = rng.randrange(1, 3)
        f = Const(rng.randrange(0, 3))
        if i % 10 == 9:
            # Fabricated rate: a large jump in w must be rejected up front.
            w = [np.zeros(2)] * 4 + [np.array([2.5, 0.0])] * 4
            pair = SyntheticPair(z0=np.zeros(2), w=w, alpha=[0.5] * 8, a=2)
            try:
                suzuki1_witness(pair, k, l, 1, Const(0), 4, f)
            except ValueError:
                passes += 1
            else:
                failures += 1
                first = first or f"trial {i}: fabricated nu accepted"
            continue
        if i % 2 == 0:
            a = rng.choice((2, 3))
            point = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1)])
            lo, hi = 1.0 / a, 1.0 - 1.0 / a
            alpha = [rng.uniform(lo, hi) for _ in range(5)]
            pair = SyntheticPair(z0=point, w=[point], alpha=alpha, a=a)
            nu, n_gap = Const(0), 1
        else:
            pair, nu, n_gap = _walk_pair(rng)
        got = suzuki1_witness(pair, k, l, t, nu, n_gap, f)
        if got is not None:
            passes += 1
        else:
            failures += 1
            first = first or f"trial {i}: no witness k={k} l={l} t={t}"
    return passes, failures, first


def _suite_suzuki2(rng: random.Random, trials: int):
    passes, failures, first = 0, 0, None
    for i in range(trials):
        f = Const(rng.randrange(0, 3))
        if i % 2 == 0:
            n_ball = rng.choice((1, 2, 3))
            k = rng.randrange(0, 2)
            point = _unit(rng, 2) * rng.uniform(0.0, n_ball)
            alpha = [0.5] * 4
            pair = SyntheticPair(z0=point, w=[point], alpha=alpha, a=2)
            got = suzuki2_index(pair, k, f, Const(0), n_ball)
            ok = got == 0
            label = "constant"
        else:
            n_ball = rng.choice((1, 2))
            k = rng.randrange(0, 2) if n_ball == 1 else 0
            pair = SyntheticPair(z0=np.zeros(1), w=[np.array([float(n_ball)])],
                                 alpha=[0.5], a=2)
            got = suzuki2_index(pair, k, f, Const(0), n_ball)
            want = max(0, (n_ball * (k + 1) - 1).bit_length())
            bound = chi_tilde(k, f, 2, Const(0), n_ball)
            ok = got == want and (not bound.is_exact or got <= bound.value)
            label = "geometric"
        if ok:
            passes += 1
        else:
            failures += 1
            first = first or f"trial {i}: {label} got {got!r}"
    return passes, failures, first


DEFAULT_TRIALS = {
    "ratap": 1000,
    "limsup2": 1000,
    "xu": 100,
    "suzuki1": 50,
    "suzuki2": 100,
}

_SUITES = {
    "ratap": _suite_ratap,
    "limsup2": _suite_limsup2,
    "xu": _suite_xu,
    "suzuki1": _suite_suzuki1,
    "suzuki2": _suite_suzuki2,
}


def run_suite(lemma: str, seed: int = 7,
              trials: Optional[int] = None) -> SuiteResult:
    """Run one lemma's randomized suite with a fixed seed."""
    if lemma not in _SUITES:
        raise ValueError(f"unknown lemma suite: {lemma!r}")
    count = DEFAULT_TRIALS[lemma] if trials is None else trials
    if count < 1:
        raise ValueError("trials must be positive")
    rng = random.Random(seed)
    passes, failures, first = _SUITES[lemma](rng, count)
    return SuiteResult(lemma=lemma, trials=count, passes=passes,
                       failures=failures, first_failure=first)
