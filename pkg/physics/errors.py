"""
Exception hierarchy shared by the physics and quantum packages.
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for all simulator errors."""


class DomainError(SimulationError, ValueError):
    """Input outside the physical or mathematical domain of an operation."""


class PoleError(DomainError):
    """Gamma function evaluated at a non-positive integer."""


class PrecisionError(SimulationError, ArithmeticError):
    """
    Requested accuracy could not be reached.

    Args:
        message: Human readable description
        achieved_bound: Best error bound that was reached
        target: Tolerance that was asked for
    """

    def __init__(self, message: str, achieved_bound: float, target: Optional[float] = None):
        super().__init__(message)
        self.achieved_bound = achieved_bound
        self.target = target


class UnwrapError(SimulationError):
    """Phase samples too far apart to unwrap unambiguously."""

    def __init__(self, message: str, index: int, step: float):
        super().__init__(message)
        self.index = index
        self.step = step


class MeasurementImpossibleError(SimulationError):
    """Projection produced a state of zero norm."""
