import math

import pytest

from gelfand.nonlinearity import build_spec, family

J01 = 2.404825557695773  # first zero of J0, re-derived in test_spectrum


def liouville_lambda(alpha: float) -> float:
    """lambda(alpha) of the explicit solutions of -Delta u = lambda e^u on the unit disk."""
    return 8.0 * (math.exp(alpha / 2) - 1.0) * math.exp(-alpha)


@pytest.fixture(scope="session")
def f_exp():
    return family("exp")


@pytest.fixture(scope="session")
def f_cubic():
    return family("exp_pow", p=3)


@pytest.fixture(scope="session")
def f_double():
    return family("double_exp")


@pytest.fixture(scope="session")
def f_one():
    return build_spec("1")
