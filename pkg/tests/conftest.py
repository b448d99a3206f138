import pytest
from mpmath import mp

from app.services.numerics import default_context
from app.services.recurrence import build


@pytest.fixture(scope="session")
def ctx20():
    return default_context(20, 4)


@pytest.fixture(scope="session")
def ctx30():
    return default_context(30, 4)


@pytest.fixture(scope="session")
def sqrt_pi_e2(ctx30):
    """rho_{1/2}(1) = sqrt(pi) e^{-2}."""
    with mp.workprec(ctx30.bits):
        return mp.sqrt(mp.pi) * mp.exp(-2)


@pytest.fixture(scope="session")
def anchor_table(ctx30):
    """nu = -1/2, t = 1: moments sqrt(pi) e^{-2} {1, 1.5, 3.25, ...}."""
    return build("-0.5", 1, 3, ctx30)


@pytest.fixture(scope="session")
def half_table(ctx20):
    return build("0.5", 1, 3, ctx20)
