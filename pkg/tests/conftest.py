import math

import pytest

from ghzpulse.designer import DesignProblem, design_photonic, design_qubit
from ghzpulse.recipes import (
    design_ghz_pulse,
    design_photonic_pulse,
)

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def photonic_design_d3():
    """Near-resonant displacement pulse for d_max = 3 (shared, ~1 s)."""
    return design_photonic_pulse(3.0)


@pytest.fixture(scope="session")
def photonic_design_d1():
    return design_photonic_pulse(1.0)


@pytest.fixture(scope="session")
def ghz_design():
    """Transient-flattened GHZ pulse, |B(t_f)| = pi/8 (shared, ~1 min)."""
    return design_ghz_pulse()


@pytest.fixture(scope="session")
def qubit_design_quarter_pi():
    """Plain endpoint design at the quarter-pi target (design-only checks)."""
    return design_qubit(
        DesignProblem(kind="qubit", omega=TWO_PI * 1e9, t_f=1.89e-9,
                      k_terms=6, theta_target=math.pi / 4)
    )
