"""Monotone counting functions over exact integers, with budgeted evaluation.

Everything in this module is float-free.  Values are arbitrary-precision
Python ints, and the only non-integer arithmetic (deciding where a power of
e falls relative to an integer) runs on directed-rounded rational enclosures
whose precision doubles until the comparison is decided.

Evaluation is metered by a Budget: a magnitude cap (values above
2**magnitude_bits abort) and a call-count cap.  Hitting either limit is a
designed outcome, reported as a BoundValue marker rather than an exception,
so that callers can distinguish "the bound is this number" from "the bound
exists but is astronomically large".
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Optional

DEFAULT_MAGNITUDE_BITS = 4096
DEFAULT_MAX_CALLS = 10_000_000

BUDGET_BITS_ENV = "PPA_BUDGET_BITS"


def _bits_from_env() -> int:
    raw = os.environ.get(BUDGET_BITS_ENV)
    if raw is None:
        return DEFAULT_MAGNITUDE_BITS
    bits = int(raw)
    if bits < 8:
        raise ValueError(f"{BUDGET_BITS_ENV} must be at least 8, got {bits}")
    return bits


@dataclass(frozen=True)
class Budget:
    """Evaluation limits: values capped at 2**magnitude_bits, plus a call cap."""

    magnitude_bits: int = DEFAULT_MAGNITUDE_BITS
    max_calls: int = DEFAULT_MAX_CALLS

    @staticmethod
    def default() -> "Budget":
        return Budget(magnitude_bits=_bits_from_env())


class BudgetExceededError(Exception):
    """Internal signal that an evaluation ran over its budget.

    Carries the name of the innermost named formula that was active when the
    overflow happened.  Public entry points catch this and return a
    BoundValue marker; user code should never see the exception itself.
    """

    def __init__(self, stage: str):
        super().__init__(f"budget exceeded in {stage}")
        self.stage = stage


class EvalState:
    """Mutable per-evaluation budget bookkeeping.  Never shared between
    top-level evaluations; budget soundness depends on that."""

    __slots__ = ("magnitude_bits", "_cap", "max_calls", "calls", "stage")

    def __init__(self, budget: Optional[Budget] = None):
        if budget is None:
            budget = Budget.default()
        self.magnitude_bits = budget.magnitude_bits
        self._cap = 1 << budget.magnitude_bits
        self.max_calls = budget.max_calls
        self.calls = 0
        self.stage = "eval"

    def tick(self, n: int = 1) -> None:
        self.calls += n
        if self.calls > self.max_calls:
            raise BudgetExceededError(self.stage)

    def remaining(self) -> int:
        return self.max_calls - self.calls

    def require(self, n: int) -> None:
        """Abort now if the next n ticks cannot all fit.

        Used before loops whose length is known up front: the literal loop
        would consume at least one tick per step, so running it when n
        exceeds the remaining allowance can only end in the same marker.
        """
        if n > self.remaining():
            raise BudgetExceededError(self.stage)

    def check(self, value: int) -> int:
        if value > self._cap or -value > self._cap:
            raise BudgetExceededError(self.stage)
        return value

    def checked_pow(self, base: int, exp: int) -> int:
        """base**exp under the magnitude cap, refusing to materialize powers
        that are provably over the cap."""
        if exp < 0:
            raise ValueError("negative exponent")
        if base in (0, 1) or exp == 0:
            return base ** exp
        if exp > self.magnitude_bits:
            # base >= 2, so base**exp >= 2**exp > cap
            raise BudgetExceededError(self.stage)
        return self.check(base ** exp)


@dataclass(frozen=True)
class BoundValue:
    """Outcome of a budgeted evaluation: an exact natural number, or a
    marker naming the stage where the budget ran out."""

    value: Optional[int] = None
    stage: Optional[str] = None

    def __post_init__(self):
        if (self.value is None) == (self.stage is None):
            raise ValueError("BoundValue is either exact or exceeded, not both")
        if self.value is not None and self.value < 0:
            raise ValueError(f"bound values are natural numbers, got {self.value}")

    @classmethod
    def exact(cls, value: int) -> "BoundValue":
        return cls(value=value)

    @classmethod
    def exceeded(cls, stage: str) -> "BoundValue":
        return cls(stage=stage)

    @property
    def is_exact(self) -> bool:
        return self.value is not None

    def render(self) -> str:
        """CSV form: the number, or BUDGET_EXCEEDED(stage)."""
        if self.is_exact:
            return str(self.value)
        return f"BUDGET_EXCEEDED({self.stage})"

    def __str__(self) -> str:
        return self.render()


class CountFn:
    """A monotone function from naturals to naturals.

    Monotonicity is enforced by the representations themselves (tables store
    running maxima, affine coefficients are nonnegative, compositions of
    monotone functions are monotone), so majorization is a no-op on any
    value of this type.
    """

    def __call__(self, n: int, state: EvalState) -> int:
        state.tick()
        return state.check(self._eval(n, state))

    def _eval(self, n: int, state: EvalState) -> int:
        raise NotImplementedError

    def at(self, n: int, budget: Optional[Budget] = None) -> BoundValue:
        return evaluate(self, n, budget)


@dataclass(frozen=True)
class Const(CountFn):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("constant must be a natural number")

    def _eval(self, n, state):
        return self.value


@dataclass(frozen=True)
class Identity(CountFn):
    def _eval(self, n, state):
        return n


@dataclass(frozen=True)
class Affine(CountFn):
    """n -> slope*n + offset with nonnegative integer coefficients."""

    slope: int
    offset: int

    def __post_init__(self):
        if self.slope < 0 or self.offset < 0:
            raise ValueError("affine coefficients must be nonnegative")

    def _eval(self, n, state):
        return self.slope * n + self.offset


@dataclass(frozen=True)
class Table(CountFn):
    """Finite table extended by its final value.

    The stored values are the running maxima of the constructor argument, so
    every Table is monotone by construction.
    """

    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("table must be nonempty")
        normalized = []
        best = 0
        for v in self.values:
            if not isinstance(v, int) or v < 0:
                raise ValueError("table entries must be natural numbers")
            best = max(best, v)
            normalized.append(best)
        object.__setattr__(self, "values", tuple(normalized))

    def _eval(self, n, state):
        if n >= len(self.values):
            return self.values[-1]
        return self.values[n]


@dataclass(frozen=True)
class Max(CountFn):
    """Pointwise maximum; arguments are evaluated left to right."""

    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError("max needs at least one argument")

    def _eval(self, n, state):
        return max(f(n, state) for f in self.args)


@dataclass(frozen=True)
class Composed(CountFn):
    outer: CountFn
    inner: CountFn

    def _eval(self, n, state):
        return self.outer(self.inner(n, state), state)


@dataclass(frozen=True)
class ExpCeil(CountFn):
    """n -> ceil(scale * e**n), decided exactly by rational enclosures.

    scale * e**n is irrational for n >= 1, so the enclosure loop always
    terminates; n = 0 is the integer boundary and is handled directly.
    """

    scale: int

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be a positive integer")

    def _eval(self, n, state):
        if n == 0:
            return self.scale
        # e**n > 2**(1.44*n); refuse values provably over the magnitude cap
        if n > int(1.4427 * state.magnitude_bits) + 2:
            raise BudgetExceededError(state.stage)
        prec = 256
        while True:
            lo, hi = _exp_enclosure(n, prec)
            lo *= self.scale
            hi *= self.scale
            c_lo = -((-lo) >> prec) if lo % (1 << prec) else lo >> prec
            c_hi = -((-hi) >> prec) if hi % (1 << prec) else hi >> prec
            if c_lo == c_hi:
                return c_lo
            prec *= 2


@dataclass(frozen=True, eq=False)
class Closure(CountFn):
    """Named formula with captured parameters.  Equality is identity; these
    never round-trip through the config grammar."""

    name: str
    fn: Callable[[int, EvalState], int]

    def _eval(self, n, state):
        return self.fn(n, state)


def evaluate(f: CountFn, n: int, budget: Optional[Budget] = None) -> BoundValue:
    """Evaluate f at n under a fresh budget, reporting overflow as a marker."""
    if n < 0:
        raise ValueError("counting functions take natural arguments")
    state = EvalState(budget)
    try:
        return BoundValue.exact(f(n, state))
    except BudgetExceededError as exc:
        return BoundValue.exceeded(exc.stage)


def majorize(f: CountFn) -> CountFn:
    """Running-maximum closure of f.

    Every representation in this module is already monotone (tables are
    normalized at construction), so this is the identity; it exists so call
    sites can state the intent explicitly.
    """
    return f


def iterate(f: CountFn, r: int) -> CountFn:
    """The r-fold composition of f with itself (r = 0 gives the identity)."""
    if r < 0:
        raise ValueError("iteration count must be a natural number")

    def run(n, state):
        state.require(r)
        v = n
        for _ in range(r):
            state.tick()
            v = f(v, state)
        return v

    return Closure(name=f"iterate[{r}]", fn=run)


def strongly_majorizes(g: CountFn, f: CountFn, upto: int = 50,
                       budget: Optional[Budget] = None) -> bool:
    """Check g <=* f pointwise on [0, upto]: f dominates g and f is
    self-majorizing on that range.  A finite probe, not a proof."""
    prev_f = None
    for n in range(upto + 1):
        gv = evaluate(g, n, budget)
        fv = evaluate(f, n, budget)
        if not (gv.is_exact and fv.is_exact):
            return False
        if gv.value > fv.value:
            return False
        if prev_f is not None and fv.value < prev_f:
            return False
        prev_f = fv.value
    return True


# --- exact comparisons against powers of e ---------------------------------

_FACTORIALS_CACHE: dict = {}


def _e_scaled(prec: int) -> tuple:
    """Integers (lo, hi) with lo/2**prec < e < hi/2**prec."""
    cached = _FACTORIALS_CACHE.get(prec)
    if cached is not None:
        return cached
    # partial sums of sum 1/k!: S_K < e < S_K + 2/(K+1)!
    terms = 2
    while math.factorial(terms + 1) < (1 << (prec + 2)):
        terms += 1
    num = 0
    den = math.factorial(terms)
    for k in range(terms + 1):
        num += den // math.factorial(k)
    lo = (num << prec) // den
    tail_num = num * (terms + 1) + 2
    tail_den = den * (terms + 1)
    hi = -((-(tail_num << prec)) // tail_den)
    _FACTORIALS_CACHE[prec] = (lo, hi)
    return lo, hi


def _exp_enclosure(n: int, prec: int) -> tuple:
    """Integers (lo, hi) with lo/2**prec <= e**n <= hi/2**prec, n >= 1.

    Binary exponentiation with directed rounding: lower bounds round down,
    upper bounds round up, so direction is preserved at every step.
    """
    e_lo, e_hi = _e_scaled(prec)
    lo, hi = 1 << prec, 1 << prec
    base_lo, base_hi = e_lo, e_hi
    k = n
    while k:
        if k & 1:
            lo = (lo * base_lo) >> prec
            hi = -((-(hi * base_hi)) >> prec)
        k >>= 1
        if k:
            base_lo = (base_lo * base_lo) >> prec
            base_hi = -((-(base_hi * base_hi)) >> prec)
    return lo, hi


def ceil_ln(x: int) -> int:
    """Least m >= 0 with e**m >= x, decided exactly.

    Powers of e are irrational for m >= 1, so for x >= 2 the comparison
    e**m >= x is strict one way or the other and the precision-doubling
    loop terminates.
    """
    if x < 1:
        raise ValueError("ceil_ln requires x >= 1")
    if x == 1:
        return 0
    prec = 256
    while True:
        e_lo, e_hi = _e_scaled(prec)
        lo = hi = 1 << prec
        target = x << prec
        undecided = False
        m = 0
        while True:
            m += 1
            lo = (lo * e_lo) >> prec
            hi = -((-(hi * e_hi)) >> prec)
            if lo >= target:
                return m
            if hi < target:
                continue
            undecided = True
            break
        if undecided:
            prec *= 2
