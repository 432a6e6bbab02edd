"""The quantitative bound calculus: rates of metastability and of
asymptotic regularity for the anchored multi-parameter proximal iteration.

All formulas are evaluated literally over exact integers under a shared
per-call budget (see countfn).  Two conventions keep evaluation
deterministic and let an independently written evaluator reproduce results
bit for bit, including which stage a budget marker names:

* every defined symbol inside a formula (a product R, a threshold mu(k), a
  starting index M) is computed exactly once, in definition order, and the
  value is reused;
* every loop ticks the call counter once per step and aborts to the marker
  up front when the remaining allowance is provably smaller than the loop
  length, which is the same outcome the literal loop would reach.

Deep compositions (psi and above) overflow any realistic budget by design;
the marker is the documented answer there, not a failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .countfn import (BoundValue, Budget, BudgetExceededError, Closure,
                      CountFn, EvalState, ceil_ln, evaluate, iterate,
                      majorize)
from .schedules import BoundContext, Moduli, derive_constants, mu_fn, nu_fn

# Functional argument shape used by Theta: a bound taking (k, counterfn).
BoundFunctional = Callable[[int, CountFn, EvalState], int]


class _Stage:
    """Set the active formula name for budget markers, restoring on exit."""

    __slots__ = ("state", "name", "saved")

    def __init__(self, state: EvalState, name: str):
        self.state = state
        self.name = name

    def __enter__(self):
        self.saved = self.state.stage
        self.state.stage = self.name
        return self.state

    def __exit__(self, *exc):
        self.state.stage = self.saved
        return False


def _wrap(budget: Optional[Budget], fn) -> BoundValue:
    state = EvalState(budget)
    try:
        return BoundValue.exact(fn(state))
    except BudgetExceededError as exc:
        return BoundValue.exceeded(exc.stage)


# --- fixed points of nearby resolvents --------------------------------------

def _zeta(k: int, n: int, c: int, cmaj: CountFn, state: EvalState) -> int:
    with _Stage(state, "zeta"):
        state.tick()
        cn = cmaj(n, state)
        if cn < 1:
            raise ValueError("Cmaj must be >= 1 everywhere")
        return state.check(cn * c * (k + 1) - 1)


def zeta(k: int, n: int, c: int, cmaj: CountFn,
         budget: Optional[Budget] = None) -> BoundValue:
    """How far out a point may move a resolvent's fixed-point test: if x is
    1/zeta-close to fixed under J_(c_n), it is 1/(k+1)-close under J_(1/c)."""
    if c < 1:
        raise ValueError("c must be a positive integer")
    return _wrap(budget, lambda st: _zeta(k, n, c, cmaj, st))


# --- metastable convergence of monotone-ish quantities -----------------------

def _sigma(k: int, n: int, ldiv: CountFn, d: int, state: EvalState) -> int:
    with _Stage(state, "sigma"):
        state.tick()
        log_term = ceil_ln(state.check(4 * d * (k + 1)))
        return ldiv(state.check(n + log_term), state) + 1


def sigma(k: int, n: int, ldiv: CountFn, d: int,
          budget: Optional[Budget] = None) -> BoundValue:
    """Index past which the damped recurrence has decayed its initial mass:
    sigma(k, n) = Ldiv(n + ceil_ln(4 D (k+1))) + 1."""
    if d < 1:
        raise ValueError("D must be a positive integer")
    return _wrap(budget, lambda st: _sigma(k, n, ldiv, d, st))


def qtxu_sigma_window(k: int, n: int, p: int, ldiv: CountFn, d: int,
                      budget: Optional[Budget] = None) -> range:
    """The index window [sigma(k, n), p] on which the recurrence lemma pins
    s_m <= 1/(k+1); empty when sigma lands past p."""
    bv = sigma(k, n, ldiv, d, budget)
    if not bv.is_exact:
        raise BudgetExceededError(bv.stage)
    return range(bv.value, p + 1)


# --- finite pigeonhole recursion ---------------------------------------------

def _theta(k: int, m_start: int, t: int, n_cells: int, f: CountFn,
           state: EvalState) -> int:
    """theta(k, M, t, N, f) = M + (P-1) t + r_0 where P = N (k+1), r_P = 0
    and r_i = t + r_(i+1) + f(M + (i+1) t + r_(i+1))."""
    if t < 1 or n_cells < 1:
        raise ValueError("theta requires t >= 1 and N >= 1")
    with _Stage(state, "theta"):
        state.tick()
        p_steps = state.check(n_cells * (k + 1))
        state.require(p_steps)
        r = 0
        for i in range(p_steps - 1, -1, -1):
            state.tick()
            arg = state.check(m_start + (i + 1) * t + r)
            r = state.check(t + r + f(arg, state))
        return state.check(m_start + (p_steps - 1) * t + r)


def theta(k: int, m_start: int, t: int, n_cells: int, f: CountFn,
          budget: Optional[Budget] = None) -> BoundValue:
    return _wrap(budget, lambda st: _theta(k, m_start, t, n_cells, f, st))


def _r_const(a: int, k: int, t: int, state: EvalState) -> int:
    if a < 1 or t < 1:
        raise ValueError("R requires a >= 1 and t >= 1")
    with _Stage(state, "R"):
        state.tick()
        power = state.checked_pow(a, t)
        return state.check(state.check(t * (2 * t + 1)) * power * (k + 1))


def r_const(a: int, k: int, t: int, budget: Optional[Budget] = None) -> BoundValue:
    """Cell count R(a, k, t) = t (2t+1) a**t (k+1) for the averaged-gap
    pigeonhole argument."""
    return _wrap(budget, lambda st: _r_const(a, k, t, st))


# --- projection-style rates ---------------------------------------------------

def _proj(k: int, f: CountFn, n: int, state: EvalState) -> int:
    if n < 1:
        raise ValueError("proj requires N >= 1")
    with _Stage(state, "proj"):
        state.tick()
        r = state.check(n * n * (k + 1))
        state.require(r)
        v = 0
        for _ in range(r):
            state.tick()
            v = f(v, state)
        return v


def proj_bound(k: int, f: CountFn, n: int,
               budget: Optional[Budget] = None) -> BoundValue:
    """Metastability rate f**(N^2 (k+1)) (0) for the projection argument
    under exact monotone-functional interpretation of inner convexity."""
    return _wrap(budget, lambda st: _proj(k, f, n, st))


def _proj3(k: int, f: CountFn, n: int, state: EvalState) -> int:
    if n < 1:
        raise ValueError("proj3 requires N >= 1")
    with _Stage(state, "proj3"):
        state.tick()
        r = state.check(4 * state.checked_pow(n, 4) * (k + 1) * (k + 1))
        state.require(r)
        v = 0
        for _ in range(r):
            state.tick()
            blown = state.check(24 * n * (v + 1) * (v + 1))
            v = max(f(blown, state), blown)
        return state.check(24 * n * (v + 1) * (v + 1))


def proj3_bound(k: int, f: CountFn, n: int,
                budget: Optional[Budget] = None) -> BoundValue:
    """Metastability rate for the projection argument when only an
    approximate witness of the infimum is available."""
    return _wrap(budget, lambda st: _proj3(k, f, n, st))


# --- averaged-gap metastability (Suzuki-style lemmas) -------------------------

def _varphi_suzuki1(k: int, f: CountFn, l: int, t: int, a: int, nu: CountFn,
                    n_bound: int, state: EvalState) -> int:
    with _Stage(state, "varphi_suzuki1"):
        state.tick()
        r_cells = _r_const(a, k, t, state)
        m_start = max(a, l, nu(r_cells - 1, state))

        def g(m, st):
            return state.check(t + f(m, st))

        return _theta(r_cells - 1, m_start, t, n_bound,
                      Closure(name="varphi_suzuki1.g", fn=g), state)


def varphi_suzuki1(k: int, f: CountFn, l: int, t: int, a: int, nu: CountFn,
                   n_bound: int, budget: Optional[Budget] = None) -> BoundValue:
    """Witness bound for the three-way averaged-gap approximation: some
    m in [l, varphi] and cell p < R(a,k,t) N satisfy the gap sandwich."""
    if l < 0:
        raise ValueError("l must be a natural number")
    return _wrap(budget, lambda st: _varphi_suzuki1(k, f, l, t, a, nu, n_bound, st))


def _chi_tilde(k: int, f: CountFn, a: int, nu: CountFn, n_bound: int,
               state: EvalState) -> int:
    if n_bound < 1:
        raise ValueError("chi_tilde requires N >= 1")
    with _Stage(state, "chi_tilde"):
        state.tick()
        t = max(state.check(2 * n_bound * a * (k + 1)), 1)
        return _varphi_suzuki1(k, f, a, t, a, nu, 2 * n_bound, state)


def chi_tilde(k: int, f: CountFn, a: int, nu: CountFn, n_bound: int,
              budget: Optional[Budget] = None) -> BoundValue:
    """Rate of metastability for the gap |w_n - z_n| between iterates and
    their averaged companions, given a rate nu for the gap differences."""
    return _wrap(budget, lambda st: _chi_tilde(k, f, a, nu, n_bound, st))


def _chi0(k: int, f: CountFn, moduli: Moduli, constant_c: bool,
          state: EvalState) -> int:
    with _Stage(state, "chi0"):
        state.tick()
        n0 = moduli.N2 + moduli.N3
        n_bound = 2 * moduli.a * n0 + moduli.N1 + moduli.N3
        return _chi_tilde(k, f, moduli.a, nu_fn(moduli, constant_c),
                          n_bound, state)


def chi0(k: int, f: CountFn, moduli: Moduli,
         ctx: Optional[BoundContext] = None, constant_c: bool = False,
         budget: Optional[Budget] = None) -> BoundValue:
    """chi_tilde instantiated with the iteration's own envelopes: the gap
    |w_n - z_n| is metastable with ball radius 2 a N0 + N1 + N3."""
    return _wrap(budget, lambda st: _chi0(k, f, moduli, constant_c, st))


# --- residual rates ------------------------------------------------------------

def _mu(moduli: Moduli, k: int, state: EvalState) -> int:
    return mu_fn(moduli)(k, state)


def _nu(moduli: Moduli, constant_c: bool, k: int, state: EvalState) -> int:
    return nu_fn(moduli, constant_c)(k, state)


def _f_tilde(mu_k: int, f: CountFn, state: EvalState) -> CountFn:
    def fn(m, st):
        return state.check(mu_k + f(max(mu_k, m), st))

    return Closure(name="xi.f_tilde", fn=fn)


def _xi(k: int, f: CountFn, moduli: Moduli, constant_c: bool,
        state: EvalState) -> int:
    with _Stage(state, "xi"):
        state.tick()
        mu_val = _mu(moduli, 2 * k + 1, state)
        shifted = _f_tilde(mu_val, f, state)
        chi_val = _chi0(state.check(4 * moduli.a * (k + 1)), shifted, moduli,
                        constant_c, state)
        return max(mu_val, chi_val)


def xi(k: int, f: CountFn, moduli: Moduli,
       ctx: Optional[BoundContext] = None, constant_c: bool = False,
       budget: Optional[Budget] = None) -> BoundValue:
    """Rate of metastability for the fixed-parameter residual
    |J_(1/c)(z_n) - z_n|: max(mu(2k+1), chi0(4a(k+1), f~_(2k+1)))."""
    return _wrap(budget, lambda st: _xi(k, f, moduli, constant_c, st))


def xi_rate(k: int, chi_rate: CountFn, moduli: Moduli,
            budget: Optional[Budget] = None) -> BoundValue:
    """The counterfunction-free corollary form, usable whenever the gap rate
    chi does not depend on its counterfunction argument."""

    def run(state):
        with _Stage(state, "xi"):
            state.tick()
            mu_val = _mu(moduli, 2 * k + 1, state)
            chi_val = chi_rate(state.check(4 * moduli.a * (k + 1)), state)
            return max(mu_val, chi_val)

    return _wrap(budget, run)


def res_bounds(k: int, f: CountFn, moduli: Moduli, constant_c: bool = False,
               budget: Optional[Budget] = None) -> tuple:
    """Rates for the three asymptotic-regularity residuals at level k:
    step size |z_(n+1) - z_n|, running residual |J_(c_n)(z_n) - z_n|, and
    fixed residual |J_(1/c)(z_n) - z_n|."""
    dz = chi0(k, f, moduli, constant_c=constant_c, budget=budget)

    def run_jn(state):
        with _Stage(state, "xi"):
            state.tick()
            mu_val = _mu(moduli, k, state)
            shifted = _f_tilde(mu_val, f, state)
            chi_val = _chi0(state.check(2 * moduli.a * (k + 1)), shifted,
                            moduli, constant_c, state)
            return max(mu_val, chi_val)

    jn = _wrap(budget, run_jn)
    j = xi(k, f, moduli, constant_c=constant_c, budget=budget)
    return dz, jn, j


# --- removal of the sequential weak compactness argument ----------------------

def _plus_one(f: CountFn) -> CountFn:
    def fn(m, st):
        return f(m, st) + 1

    return Closure(name="succ_of", fn=fn)


def _psi(k: int, f: CountFn, moduli: Moduli, n_ball: int, constant_c: bool,
         state: EvalState) -> int:
    """psi(k, f) = xi(24 N (g_hat**R (0) + 1)^2, f + 1) with
    R = N^4 (k+1)^2 and g_hat(m) = max(f(xi(24N(m+1)^2, f+1)), 24N(m+1)^2)."""
    if n_ball < 1:
        raise ValueError("psi requires N >= 1")
    with _Stage(state, "psi"):
        state.tick()
        f1 = _plus_one(f)
        r = state.check(state.checked_pow(n_ball, 4) * (k + 1) * (k + 1))
        state.require(r)
        v = 0
        for _ in range(r):
            state.tick()
            blown = state.check(24 * n_ball * (v + 1) * (v + 1))
            inner = _xi(blown, f1, moduli, constant_c, state)
            v = max(f(inner, state), blown)
        k_top = state.check(24 * n_ball * (v + 1) * (v + 1))
        return _xi(k_top, f1, moduli, constant_c, state)


def psi(k: int, f: CountFn, moduli: Moduli,
        ctx: Optional[BoundContext] = None, constant_c: bool = False,
        budget: Optional[Budget] = None) -> BoundValue:
    """Rate of metastability for the distance to the pinned resolvent value
    |z_n - J_(1/c)(z_n)| relative to inner products against ball points."""
    if ctx is None:
        ctx = derive_constants(moduli)
    return _wrap(budget, lambda st: _psi(k, f, moduli, ctx.N, constant_c, st))


def _psi_cap(k: int, f: CountFn, moduli: Moduli, ctx: BoundContext,
             constant_c: bool, state: EvalState) -> int:
    """Psi(k, f) = psi(2k+1, h) where h folds the fixed-point transfer:
    h(m) = zeta((1 + 4N)(f(m) + 1) - 1, f(m))."""
    with _Stage(state, "Psi"):
        state.tick()
        n_ball = ctx.N

        def h(m, st):
            fm = f(m, st)
            return _zeta(state.check((1 + 4 * n_ball) * (fm + 1) - 1), fm,
                         moduli.c, moduli.Cmaj, st)

        return _psi(2 * k + 1, Closure(name="Psi.h", fn=h), moduli, n_ball,
                    constant_c, state)


def psi_cap(k: int, f: CountFn, moduli: Moduli,
            ctx: Optional[BoundContext] = None, constant_c: bool = False,
            budget: Optional[Budget] = None) -> BoundValue:
    if ctx is None:
        ctx = derive_constants(moduli)
    return _wrap(budget, lambda st: _psi_cap(k, f, moduli, ctx, constant_c, st))


# --- the main recursion ---------------------------------------------------------

def _theta_cap(k: int, f: CountFn, ldiv: CountFn, psi_fn: BoundFunctional,
               g_rate: CountFn, d: int, state: EvalState) -> int:
    """Theta(k, f) = Ldiv(h(PsiFn(4k+3, g))) + 1 with
    h(m) = max(m, G(4k+3) + 1) + ceil_ln(4 D (k+1)) and
    g(m) = 4 (k+1) (f(Ldiv(h(m)) + 1) + 1)."""
    if d < 1:
        raise ValueError("Theta requires D >= 1")
    with _Stage(state, "Theta"):
        state.tick()
        g_val = g_rate(state.check(4 * k + 3), state)
        log_term = ceil_ln(state.check(4 * d * (k + 1)))

        def h(m, st):
            return st.check(max(m, g_val + 1) + log_term)

        def g(m, st):
            hm = h(m, st)
            inner = ldiv(hm, st) + 1
            return st.check(4 * (k + 1) * (f(inner, st) + 1))

        witness = psi_fn(state.check(4 * k + 3),
                         Closure(name="Theta.g", fn=g), state)
        return state.check(ldiv(h(witness, state), state) + 1)


def psi_functional(moduli: Moduli, ctx: Optional[BoundContext] = None,
                   constant_c: bool = False) -> BoundFunctional:
    """The witness functional Theta consumes, closed over fixed moduli."""
    if ctx is None:
        ctx = derive_constants(moduli)

    def fn(kk, ff, state):
        return _psi_cap(kk, ff, moduli, ctx, constant_c, state)

    return fn


def theta_cap(k: int, f: CountFn, ldiv: CountFn, psi_fn: BoundFunctional,
              g_rate: CountFn, d: int,
              budget: Optional[Budget] = None) -> BoundValue:
    """The outer recursion assembling the full metastability rate from a
    witness functional PsiFn, the divergence rate Ldiv, the error-tail rate
    G and the squared-radius constant D."""
    return _wrap(budget, lambda st: _theta_cap(k, f, ldiv, psi_fn, g_rate, d, st))


def _phi_chi(k: int, f: CountFn, moduli: Moduli, ctx: BoundContext,
             constant_c: bool, state: EvalState) -> int:
    with _Stage(state, "phi"):
        state.tick()
        level = state.check(4 * (k + 1) * (k + 1) - 1)

        def bumped(m, st):
            return st.check(m + f(m, st))

        def psi_fn(kk, ff, st):
            return _psi_cap(kk, ff, moduli, ctx, constant_c, st)

        return _theta_cap(level, Closure(name="phi.bumped", fn=bumped),
                          moduli.Ldiv, psi_fn, ctx.G, ctx.D, state)


def phi_chi(k: int, f: CountFn, moduli: Moduli,
            ctx: Optional[BoundContext] = None, constant_c: bool = False,
            budget: Optional[Budget] = None) -> BoundValue:
    """Rate of metastability of the iteration itself, assembled from the
    gap rate chi0 through Psi and the outer recursion Theta."""
    if ctx is None:
        ctx = derive_constants(moduli)
    return _wrap(budget, lambda st: _phi_chi(k, f, moduli, ctx, constant_c, st))


def phi(k: int, f: CountFn, moduli: Moduli,
        ctx: Optional[BoundContext] = None, constant_c: bool = False,
        budget: Optional[Budget] = None) -> BoundValue:
    """Headline rate: phi(k, f) = phi_chi(k, f^maj).  Since counterfunctions
    are monotone by representation the majorization is the identity, and
    phi(k, f) = phi(k, f^maj) holds definitionally."""
    return phi_chi(k, majorize(f), moduli, ctx=ctx, constant_c=constant_c,
                   budget=budget)
