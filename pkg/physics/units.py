"""
Unit conversions and kinematics.

Laboratory inputs (eV, MHz, nm, atomic mass units) are converted to atomic
units (hbar = m_e = |e| = 4 pi eps0 = 1). The electron velocity follows from
the relativistic dispersion E = c sqrt(c^2 + p^2) - c^2; the trap length scale
is R0 = (m_ion Omega)^(-1/2).

The longitudinal trap frequency and the ion height Z0 play no role in the
transverse coupling and are not represented.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

from config.system_config import PHYSICS_CONFIG
from physics.errors import DomainError

logger = logging.getLogger(__name__)

# CODATA 2018
SPEED_OF_LIGHT_AU = 137.035999084
HARTREE_EV = 27.211386245988
BOHR_NM = 0.0529177210903
ATOMIC_TIME_S = 2.4188843265857e-17
AMU_ELECTRON_MASSES = 1822.888486209


def nm_to_bohr(length_nm: float) -> float:
    return length_nm / BOHR_NM


def bohr_to_nm(length_bohr: float) -> float:
    return length_bohr * BOHR_NM


def ev_to_hartree(energy_ev: float) -> float:
    return energy_ev / HARTREE_EV


def hartree_to_ev(energy_hartree: float) -> float:
    return energy_hartree * HARTREE_EV


def angular_frequency_to_au(omega_rad_s: float) -> float:
    """Convert an angular frequency in rad/s to inverse atomic time units."""
    return omega_rad_s * ATOMIC_TIME_S


def amu_to_electron_masses(mass_u: float) -> float:
    return mass_u * AMU_ELECTRON_MASSES


def _check_energy(kinetic_energy_ev: float) -> None:
    if not math.isfinite(kinetic_energy_ev) or kinetic_energy_ev <= 0.0:
        raise DomainError(f"Kinetic energy must be positive and finite, got {kinetic_energy_ev} eV")


def lorentz_factor(kinetic_energy_ev: float) -> float:
    _check_energy(kinetic_energy_ev)
    return 1.0 + ev_to_hartree(kinetic_energy_ev) / SPEED_OF_LIGHT_AU ** 2


def electron_momentum(kinetic_energy_ev: float) -> float:
    """
    Relativistic electron momentum in atomic units.

    Args:
        kinetic_energy_ev: Kinetic energy in eV

    Returns:
        p with c sqrt(c^2 + p^2) - c^2 equal to the kinetic energy
    """
    _check_energy(kinetic_energy_ev)
    t = ev_to_hartree(kinetic_energy_ev)
    # p^2 = T^2/c^2 + 2T has no cancellation for small T
    return math.sqrt(t * t / SPEED_OF_LIGHT_AU ** 2 + 2.0 * t)


def electron_velocity(kinetic_energy_ev: float) -> float:
    """
    Relativistic electron speed in atomic units.

    Args:
        kinetic_energy_ev: Kinetic energy in eV

    Returns:
        v = p / gamma, strictly between 0 and c
    """
    return electron_momentum(kinetic_energy_ev) / lorentz_factor(kinetic_energy_ev)


@dataclass(frozen=True)
class TrapConfig:
    """
    Transverse harmonic trap holding a single ion.

    Attributes:
        omega: Angular trap frequency in rad/s
        ion_mass: Ion mass in electron masses
    """
    omega: float
    ion_mass: float = amu_to_electron_masses(PHYSICS_CONFIG['ion_mass_u'])

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise DomainError(f"Trap frequency must be positive, got {self.omega} rad/s")
        if not (math.isfinite(self.ion_mass) and self.ion_mass > 0.0):
            raise DomainError(f"Ion mass must be positive, got {self.ion_mass}")

    @classmethod
    def from_mhz(cls, frequency_mhz: float, ion_mass_u: float = PHYSICS_CONFIG['ion_mass_u'],
                 two_pi_convention: bool = PHYSICS_CONFIG['two_pi_convention']) -> 'TrapConfig':
        """
        Build a trap from a frequency quoted in MHz.

        With two_pi_convention=False the figure is read as an angular frequency
        in units of 1e6 rad/s, which is the reading that reproduces the quoted
        40 nm and 13 nm ground-state widths for 0.5 and 5 MHz.
        """
        omega = frequency_mhz * 1e6
        if two_pi_convention:
            omega *= 2.0 * math.pi
        return cls(omega=omega, ion_mass=amu_to_electron_masses(ion_mass_u))

    @property
    def omega_au(self) -> float:
        return angular_frequency_to_au(self.omega)

    @property
    def r0(self) -> float:
        """Oscillator length R0 in bohr."""
        return 1.0 / math.sqrt(self.ion_mass * self.omega_au)


@dataclass(frozen=True)
class BeamConfig:
    """
    Focused electron beam.

    Attributes:
        kinetic_energy: Kinetic energy in eV
        focus: Transverse focus position in bohr
        spot_width: Gaussian spot width delta_r in bohr
        arrival_time_phase: Omega * t_el in radians
        v_el: Derived electron speed in atomic units
    """
    kinetic_energy: float
    focus: Tuple[float, float] = (0.0, 0.0)
    spot_width: float = 0.0
    arrival_time_phase: float = PHYSICS_CONFIG['arrival_time_phase']
    v_el: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'v_el', electron_velocity(self.kinetic_energy))
        if not (math.isfinite(self.spot_width) and self.spot_width >= 0.0):
            raise DomainError(f"Spot width must be non-negative, got {self.spot_width}")
        focus = tuple(float(x) for x in self.focus)
        if len(focus) != 2 or not all(math.isfinite(x) for x in focus):
            raise DomainError(f"Focus must be a finite 2-vector, got {self.focus}")
        object.__setattr__(self, 'focus', focus)

    @classmethod
    def focused_on(cls, trap: TrapConfig, kinetic_energy_ev: float,
                   spot_fraction: float = PHYSICS_CONFIG['spot_width_fraction'],
                   focus: Tuple[float, float] = (0.0, 0.0),
                   arrival_time_phase: float = 0.0) -> 'BeamConfig':
        """Beam whose spot width is a fixed fraction of the trap length R0."""
        if spot_fraction < 0.0:
            raise DomainError(f"Spot fraction must be non-negative, got {spot_fraction}")
        return cls(kinetic_energy=kinetic_energy_ev, focus=focus,
                   spot_width=spot_fraction * trap.r0,
                   arrival_time_phase=arrival_time_phase)


def trap_ground_width(trap: TrapConfig) -> float:
    """
    Ground-state width R0/sqrt(2) of the trapped ion.

    Args:
        trap: Trap configuration

    Returns:
        Width in nanometers
    """
    width = bohr_to_nm(trap.r0) / math.sqrt(2.0)
    logger.debug(f"Ground-state width {width:.4f} nm for omega={trap.omega:.4g} rad/s")
    return width
