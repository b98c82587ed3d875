"""Shared fixtures: benchmark densities and oracle helpers."""

import numpy as np
import pytest
from scipy import integrate

from sigcomp import scenarios as bench
from sigcomp.density import SearchRegion, normalize


def simpson_oracle(fn, lo, hi, panels=1_000_000):
    """Brute-force composite-Simpson integral, independent of the library."""
    x = np.linspace(lo, hi, panels + 1)
    return float(integrate.simpson(fn(x), x=x))


@pytest.fixture(scope="session")
def unit_region():
    return SearchRegion(0.0, 1.0)


@pytest.fixture(scope="session")
def slope_signal(unit_region):
    """f_s(x) = 2x on [0, 1]."""
    return normalize(lambda x: np.asarray(x, dtype=float), unit_region)


@pytest.fixture(scope="session")
def flat_proposal(unit_region):
    """g = 1 on [0, 1]."""
    return normalize(lambda x: np.ones_like(np.asarray(x, dtype=float)), unit_region)


@pytest.fixture(scope="session")
def line_background():
    return bench.line_background()


@pytest.fixture(scope="session")
def line_signal():
    return bench.line_signal()


@pytest.fixture(scope="session")
def steep_power():
    return bench.steep_power_baseline()
