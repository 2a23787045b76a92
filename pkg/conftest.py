"""
Shared fixtures. Keeping this file at the repository root puts the root on
sys.path, so tests import the packages the same way the CLI does.
"""

import pytest

from physics.units import BeamConfig, TrapConfig


@pytest.fixture(scope="session")
def trap():
    """0.5 MHz trap holding 40Ca+."""
    return TrapConfig.from_mhz(0.5)


@pytest.fixture(scope="session")
def beam(trap):
    """100 eV electron with a spot of 0.05 R0, focused on the trap axis."""
    return BeamConfig.focused_on(trap, 100.0, 0.05)
