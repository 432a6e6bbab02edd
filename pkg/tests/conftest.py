"""Shared fixtures: repo paths, the two shipped configs, toy moduli."""

from pathlib import Path

import pytest

from mppa.config import parse_config
from mppa.countfn import Affine, Const, Identity
from mppa.schedules import Moduli

REPO = Path(__file__).resolve().parent.parent
CONFIG_A = REPO / "configs" / "experiment_a.cfg"
CONFIG_B = REPO / "configs" / "experiment_b.cfg"


@pytest.fixture(scope="session")
def config_a_text() -> str:
    return CONFIG_A.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def config_b_text() -> str:
    return CONFIG_B.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def cfg_a(config_a_text):
    return parse_config(config_a_text)


@pytest.fixture(scope="session")
def cfg_b(config_b_text):
    return parse_config(config_b_text)


@pytest.fixture(scope="session")
def toy_moduli() -> Moduli:
    """Everything small: a = 1 keeps the exponential cell counts tame."""
    return Moduli(a=1, c=1, Cmaj=Const(1), ell=Identity(), Ldiv=Identity(),
                  Gamma=Identity(), E=Identity(), N1=1, N2=1, N3=1)


@pytest.fixture(scope="session")
def toy_moduli2() -> Moduli:
    """a > 1 with a growing Cmaj and a stretched divergence rate."""
    return Moduli(a=2, c=2, Cmaj=Affine(1, 1), ell=Identity(),
                  Ldiv=Affine(2, 0), Gamma=Identity(), E=Identity(),
                  N1=1, N2=1, N3=1)
