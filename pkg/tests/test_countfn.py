"""Counting-function nodes, budgets and the exact exponential comparisons."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mppa.countfn import (BUDGET_BITS_ENV, DEFAULT_MAGNITUDE_BITS,
                          DEFAULT_MAX_CALLS, Affine, BoundValue, Budget,
                          BudgetExceededError, Composed, Const, CountFn,
                          EvalState, ExpCeil, Identity, Max, Table, ceil_ln,
                          evaluate, iterate, majorize, strongly_majorizes)


def val(f: CountFn, n: int, budget=None) -> int:
    bv = evaluate(f, n, budget)
    assert bv.is_exact, f"unexpected marker {bv.render()}"
    return bv.value


# --- node semantics ----------------------------------------------------------


def test_basic_nodes():
    assert val(Const(7), 100) == 7
    assert val(Identity(), 42) == 42
    assert val(Affine(3, 2), 5) == 17
    assert val(Max((Const(3), Identity())), 1) == 3
    assert val(Max((Const(3), Identity())), 9) == 9
    assert val(Composed(Affine(2, 0), Affine(1, 1)), 4) == 10


def test_table_running_max_hull():
    t = Table((3, 1, 2))
    assert t.values == (3, 3, 3)
    t = Table((0, 2, 1, 5))
    assert t.values == (0, 2, 2, 5)
    assert val(t, 0) == 0
    assert val(t, 2) == 2
    assert val(t, 50) == 5  # extends by the final value


def test_node_validation():
    with pytest.raises(ValueError):
        Const(-1)
    with pytest.raises(ValueError):
        Affine(-1, 0)
    with pytest.raises(ValueError):
        Affine(0, -2)
    with pytest.raises(ValueError):
        Table(())
    with pytest.raises(ValueError):
        Table((1, -2))
    with pytest.raises(ValueError):
        Table((1, 2.5))
    with pytest.raises(ValueError):
        Max(())
    with pytest.raises(ValueError):
        ExpCeil(0)
    with pytest.raises(ValueError):
        evaluate(Identity(), -1)


def test_expceil_pins():
    assert val(ExpCeil(1), 0) == 1
    assert val(ExpCeil(1), 1) == 3      # ceil(e)
    assert val(ExpCeil(4), 0) == 4
    assert val(ExpCeil(4), 1) == 11     # ceil(4e) = ceil(10.87...)
    assert val(ExpCeil(4), 2) == 30     # ceil(4e^2) = ceil(29.55...)
    assert val(ExpCeil(4), 3) == 81


def test_expceil_exponent_guard():
    # e**n needs about 1.44 n bits, so n far past the cap aborts up front.
    bv = evaluate(ExpCeil(1), 2000, Budget(magnitude_bits=64))
    assert not bv.is_exact
    assert bv.stage == "eval"


def test_iterate():
    assert val(iterate(Affine(2, 0), 5), 1) == 32
    assert val(iterate(Affine(1, 1), 10), 0) == 10
    assert val(iterate(Const(9), 0), 4) == 4  # zero-fold is the identity
    with pytest.raises(ValueError):
        iterate(Identity(), -1)


def test_iterate_loop_shortcut():
    # The loop would tick 10^9 times; require() aborts without running it.
    bv = evaluate(iterate(Identity(), 10 ** 9), 0)
    assert not bv.is_exact
    assert bv.stage == "eval"


def test_majorize_is_identity():
    f = Table((5, 1))
    assert majorize(f) is f


def test_strongly_majorizes():
    assert strongly_majorizes(Identity(), Affine(2, 1))
    assert strongly_majorizes(Const(0), Const(0))
    assert strongly_majorizes(Table((1, 0, 2)), Affine(1, 2))
    assert not strongly_majorizes(Affine(2, 1), Identity())
    assert not strongly_majorizes(Const(3), Const(0))


# --- BoundValue ---------------------------------------------------------------


def test_bound_value_invariants():
    assert BoundValue.exact(3).value == 3
    assert BoundValue.exact(0).is_exact
    marker = BoundValue.exceeded("theta")
    assert not marker.is_exact
    assert marker.stage == "theta"
    with pytest.raises(ValueError):
        BoundValue(value=None, stage=None)
    with pytest.raises(ValueError):
        BoundValue(value=3, stage="theta")
    with pytest.raises(ValueError):
        BoundValue.exact(-1)


def test_bound_value_render():
    assert BoundValue.exact(17).render() == "17"
    assert str(BoundValue.exact(17)) == "17"
    assert BoundValue.exceeded("psi").render() == "BUDGET_EXCEEDED(psi)"


# --- budgets -------------------------------------------------------------------


def test_budget_defaults_and_env(monkeypatch):
    monkeypatch.delenv(BUDGET_BITS_ENV, raising=False)
    b = Budget.default()
    assert b.magnitude_bits == DEFAULT_MAGNITUDE_BITS
    assert b.max_calls == DEFAULT_MAX_CALLS
    monkeypatch.setenv(BUDGET_BITS_ENV, "512")
    assert Budget.default().magnitude_bits == 512
    monkeypatch.setenv(BUDGET_BITS_ENV, "4")
    with pytest.raises(ValueError):
        Budget.default()


def test_eval_state_tick_and_check():
    state = EvalState(Budget(magnitude_bits=8, max_calls=3))
    state.tick(3)
    assert state.remaining() == 0
    with pytest.raises(BudgetExceededError):
        state.tick()

    state = EvalState(Budget(magnitude_bits=8, max_calls=100))
    assert state.check(256) == 256          # cap is 2**bits itself
    assert state.check(-256) == -256
    with pytest.raises(BudgetExceededError):
        state.check(257)
    with pytest.raises(BudgetExceededError):
        state.check(-257)


def test_eval_state_require():
    state = EvalState(Budget(max_calls=10))
    state.require(10)
    state.tick(5)
    with pytest.raises(BudgetExceededError):
        state.require(6)


def test_checked_pow():
    state = EvalState(Budget(magnitude_bits=16))
    assert state.checked_pow(2, 10) == 1024
    assert state.checked_pow(0, 10 ** 9) == 0   # trivial bases skip the guard
    assert state.checked_pow(1, 10 ** 9) == 1
    assert state.checked_pow(5, 0) == 1
    with pytest.raises(ValueError):
        state.checked_pow(2, -1)
    with pytest.raises(BudgetExceededError):
        state.checked_pow(2, 17)        # exponent above the bit cap
    with pytest.raises(BudgetExceededError):
        state.checked_pow(3, 16)        # materialized but over 2**16


def test_marker_carries_stage():
    state = EvalState(Budget(magnitude_bits=8, max_calls=100))
    state.stage = "theta"
    with pytest.raises(BudgetExceededError) as info:
        state.check(10 ** 9)
    assert info.value.stage == "theta"


def test_call_discipline_one_tick_per_call():
    state = EvalState()
    f = Composed(Identity(), Identity())
    assert f(5, state) == 5
    assert state.calls == 3  # outer entry + inner call + outer call


def test_magnitude_cap_on_results():
    bv = evaluate(Affine(1, 0), 10 ** 400, Budget(magnitude_bits=16))
    assert not bv.is_exact


# --- exact exponential comparisons ------------------------------------------------


def test_ceil_ln_pins():
    assert [ceil_ln(x) for x in (1, 2, 3, 4, 7, 8, 20, 21)] == \
        [0, 1, 2, 2, 2, 3, 3, 4]
    with pytest.raises(ValueError):
        ceil_ln(0)


@given(st.integers(min_value=1, max_value=10 ** 6))
@settings(max_examples=200, deadline=None)
def test_ceil_ln_against_float_log(x):
    m = ceil_ln(x)
    # Least m with e**m >= x; verified against the float log with a band
    # wide enough that double rounding cannot flip the comparison.
    ln = math.log(x)
    assert m - 1 < ln + 1e-9
    assert m >= ln - 1e-9


def test_ceil_ln_huge_argument():
    x = 10 ** 100
    m = ceil_ln(x)
    assert m == 231  # ceil(100 ln 10) = ceil(230.25...)


@given(st.integers(min_value=1, max_value=40), st.integers(min_value=1, max_value=9))
@settings(max_examples=60, deadline=None)
def test_expceil_brackets_float(n, scale):
    got = val(ExpCeil(scale), n)
    approx = scale * math.exp(n)
    slack = approx * 1e-12  # float exp is only relatively accurate
    assert approx - slack <= got <= approx + 1.0 + slack


# --- monotonicity property ---------------------------------------------------------


def _fn_strategy():
    leaf = st.one_of(
        st.builds(Const, st.integers(min_value=0, max_value=9)),
        st.just(Identity()),
        st.builds(Affine, st.integers(min_value=0, max_value=4),
                  st.integers(min_value=0, max_value=9)),
        st.builds(lambda vs: Table(tuple(vs)),
                  st.lists(st.integers(min_value=0, max_value=9),
                           min_size=1, max_size=5)),
    )
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.builds(Composed, sub, sub),
            st.builds(lambda a, b: Max((a, b)), sub, sub),
        ),
        max_leaves=4,
    )


@given(_fn_strategy(), st.integers(min_value=0, max_value=50))
@settings(max_examples=150, deadline=None)
def test_every_node_is_monotone(f, n):
    assert val(f, n) <= val(f, n + 1)


@given(_fn_strategy(), st.integers(min_value=0, max_value=30))
@settings(max_examples=100, deadline=None)
def test_evaluation_is_reproducible(f, n):
    assert evaluate(f, n) == evaluate(f, n)
