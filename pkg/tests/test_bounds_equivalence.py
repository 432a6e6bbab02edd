"""Two independently written evaluators against one frozen outcome table.

Every battery instance is pinned to its expected rendering (exact value or
budget marker), and both evaluators must reproduce it.  The tick-parity
block goes further: on shared instances the two implementations must spend
exactly the same number of budget ticks, which is what makes marker
placement deterministic rather than accidental.
"""

import pytest

from mppa import refeval
from mppa.acceptance import BATTERY, production_bound, reference_bound
from mppa.bounds import _chi0, _sigma, _theta, _varphi_suzuki1, _xi
from mppa.countfn import Affine, Const, EvalState, ExpCeil
from mppa.acceptance import moduli_from, _T1

# index -> expected rendering, frozen from the shipped battery
FROZEN = (
    "0",
    "15",
    "3",
    "11",
    "2",
    "1096",
    "16",
    "6",
    "8748",
    "BUDGET_EXCEEDED(R)",
    "1",
    "8",
    "11760895219231078522197964134138363672720024",
    "BUDGET_EXCEEDED(proj3)",
    "135239930216522",
    "1729",
    "139188",
    "BUDGET_EXCEEDED(theta)",
    "320",
    "72",
    "90459540",
    "11605212",
    "BUDGET_EXCEEDED(theta)",
    "BUDGET_EXCEEDED(theta)",
    "BUDGET_EXCEEDED(theta)",
)


def ids():
    return [f"{i:02d}-{inst['name']}" for i, inst in enumerate(BATTERY)]


def test_battery_shape():
    assert len(BATTERY) == len(FROZEN) == 25
    markers = sum(1 for text in FROZEN if text.startswith("BUDGET_EXCEEDED"))
    assert markers == 6


@pytest.mark.parametrize("index", range(len(BATTERY)), ids=ids())
def test_production_matches_frozen(index):
    assert production_bound(BATTERY[index]).render() == FROZEN[index]


@pytest.mark.parametrize("index", range(len(BATTERY)), ids=ids())
def test_reference_matches_frozen(index):
    assert reference_bound(BATTERY[index]).render() == FROZEN[index]


# --- tick parity -----------------------------------------------------------------


def _ref_mod(mod):
    built = dict(mod)
    for key in ("Cmaj", "ell", "L", "Gamma", "E"):
        built[key] = refeval.make_fn(mod[key])
    return built


# (label, production closure, reference closure, value, ticks)
PARITY = (
    ("sigma(1,2,expceil4,2)",
     lambda st: _sigma(1, 2, ExpCeil(4), 2, st),
     lambda st: refeval.ref_sigma(st, 1, 2, refeval.make_fn(("expceil", 4)), 2),
     595, 2),
    ("theta(2,3,2,2,affine12)",
     lambda st: _theta(2, 3, 2, 2, Affine(1, 2), st),
     lambda st: refeval.ref_theta(st, 2, 3, 2, 2,
                                  refeval.make_fn(("affine", 1, 2))),
     1096, 13),
    ("varphi(0,affine12,1,2,2,affine10,1)",
     lambda st: _varphi_suzuki1(0, Affine(1, 2), 1, 2, 2, Affine(1, 0), 1, st),
     lambda st: refeval.ref_varphi_suzuki1(
         st, 0, refeval.make_fn(("affine", 1, 2)), 1, 2, 2,
         refeval.make_fn(("affine", 1, 0)), 1),
     135239930216522, 124),
    ("chi0(0,const0,T1,cc)",
     lambda st: _chi0(0, Const(0), moduli_from(_T1), True, st),
     lambda st: refeval.ref_chi0(st, 0, refeval.make_fn(("const", 0)),
                                 _ref_mod(_T1), True),
     139188, 10808),
    ("xi(0,const1,T1,cc)",
     lambda st: _xi(0, Const(1), moduli_from(_T1), True, st),
     lambda st: refeval.ref_xi(st, 0, refeval.make_fn(("const", 1)),
                               _ref_mod(_T1), True),
     90459540, 1742412),
)


@pytest.mark.parametrize("case", PARITY, ids=[c[0] for c in PARITY])
def test_tick_parity(case):
    _, prod_fn, ref_fn, value, ticks = case

    state = EvalState()
    assert prod_fn(state) == value
    assert state.calls == ticks

    st = refeval.RefState(4096, 10 ** 7)
    assert ref_fn(st) == value
    assert st.used == ticks


def test_marker_parity_includes_tick_budget():
    # A tightened call budget must strand both evaluators at the same stage.
    tight = 5000
    from mppa.countfn import Budget
    bv = production_bound(dict(BATTERY[16]),
                          budget=Budget(magnitude_bits=4096, max_calls=tight))
    rv = refeval.ref_bound(calls=tight, **BATTERY[16])
    assert not bv.is_exact and not rv.is_exact
    assert bv.stage == rv.stage


def test_ref_ceil_ln_matches_production():
    from mppa.countfn import ceil_ln
    for x in (1, 2, 3, 4, 8, 20, 21, 1000, 10 ** 12):
        assert refeval.ref_ceil_ln(x) == ceil_ln(x)
