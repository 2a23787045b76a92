"""
Electron/qubit coupling through a motional cat state.

After a qubit-dependent displacement the ion is in (|-alpha>|-> + |alpha>|+>)/sqrt(2).
An electron passing at r picks up the scattering phase of the branch it
sees, which acts on the qubit as

    U = e^{i kappa} exp(i (g/2) sigma_x)

with g the difference and kappa the mean of the two branch phases. This module
builds g, kappa, U, products of U over several electrons, the
one-electron/many-qubit branch map and the qubit-flip curves.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from config.system_config import PHYSICS_CONFIG
from physics.errors import DomainError
from physics.scattering import delta_phi_continuous, effective_width, sigma_quadrature
from physics.units import BeamConfig, TrapConfig

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class CatState:
    """
    Real displacement alpha of the cat components at t_el = 0.

    Synchronising the electron arrival with the trap period makes
    alpha e^{i Omega t_el} real, so only a real 2-vector is stored.
    """
    alpha: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        alpha = np.asarray(self.alpha)
        if np.iscomplexobj(alpha):
            if np.any(alpha.imag != 0.0):
                raise DomainError(f"Cat displacement must be real, got {self.alpha}")
            alpha = alpha.real
        alpha = tuple(float(x) for x in np.ravel(alpha))
        if len(alpha) != 2 or not all(math.isfinite(x) for x in alpha):
            raise DomainError(f"Cat displacement must be a finite 2-vector, got {self.alpha}")
        object.__setattr__(self, 'alpha', alpha)

    @classmethod
    def along_x(cls, magnitude: float) -> 'CatState':
        return cls(alpha=(magnitude, 0.0))

    def centre(self, trap: TrapConfig) -> np.ndarray:
        """Position sqrt(2) R0 alpha of the +alpha component, in bohr."""
        return math.sqrt(2.0) * trap.r0 * np.asarray(self.alpha)


@dataclass(frozen=True)
class QubitUnitary:
    """
    Attributes:
        matrix: 2x2 unitary in the computational basis
        g: Rotation angle
        kappa: Global phase
    """
    matrix: np.ndarray
    g: float
    kappa: float

    @property
    def flip_probability(self) -> float:
        """|<1|U|0>|^2"""
        return float(abs(self.matrix[1, 0]) ** 2)


def _branch_impact_parameters(r_perp: Sequence[float], cat: CatState,
                              trap: TrapConfig) -> Tuple[float, float]:
    r = np.asarray(r_perp, dtype=float)
    if r.shape != (2,):
        raise DomainError(f"Electron position must be a 2-vector, got shape {r.shape}")
    centre = cat.centre(trap)
    return float(np.hypot(*(r - centre))), float(np.hypot(*(r + centre)))


def _branch_phases(r_perp: Sequence[float], cat: CatState, beam: BeamConfig,
                   trap: TrapConfig) -> Tuple[float, float]:
    b_minus, b_plus = _branch_impact_parameters(r_perp, cat, trap)
    width = effective_width(beam, trap)
    return (delta_phi_continuous(width, b_minus, beam.v_el),
            delta_phi_continuous(width, b_plus, beam.v_el))


def coupling_phase(r_perp: Sequence[float], cat: CatState, beam: BeamConfig,
                   trap: TrapConfig) -> float:
    """
    Qubit rotation angle g = dphi(|r - sqrt2 R0 alpha|) - dphi(|r + sqrt2 R0 alpha|).

    Both phases come from the same continuous branch, so g carries no
    spurious multiple of 2 pi.

    Args:
        r_perp: Electron position in bohr
        cat: Cat-state displacement
        beam: Electron beam (energy and spot width)
        trap: Ion trap

    Returns:
        g in radians
    """
    phi_minus, phi_plus = _branch_phases(r_perp, cat, beam, trap)
    return phi_minus - phi_plus


def global_phase(r_perp: Sequence[float], cat: CatState, beam: BeamConfig,
                 trap: TrapConfig) -> float:
    """Qubit-independent phase kappa, the mean of the two branch phases."""
    phi_minus, phi_plus = _branch_phases(r_perp, cat, beam, trap)
    return 0.5 * (phi_minus + phi_plus)


def electron_qubit_unitary(g: float, kappa: float = 0.0) -> QubitUnitary:
    """
    e^{i kappa} exp(i (g/2) sigma_x).

    Args:
        g: Rotation angle
        kappa: Global phase

    Returns:
        QubitUnitary holding the 2x2 matrix
    """
    if not (math.isfinite(g) and math.isfinite(kappa)):
        raise DomainError(f"Coupling angles must be finite, got g={g}, kappa={kappa}")
    phase = np.exp(1j * kappa)
    c, s = math.cos(0.5 * g), math.sin(0.5 * g)
    matrix = phase * np.array([[c, 1j * s], [1j * s, c]], dtype=complex)
    return QubitUnitary(matrix=matrix, g=g, kappa=kappa)


def flip_probability(g: float) -> float:
    return math.sin(0.5 * g) ** 2


def compose_unitaries(unitaries: Sequence[QubitUnitary]) -> QubitUnitary:
    """Matrix product of commuting electron/qubit unitaries."""
    if not unitaries:
        raise DomainError("Need at least one unitary to compose")
    matrix = IDENTITY.copy()
    for unitary in unitaries:
        matrix = unitary.matrix @ matrix
    return QubitUnitary(matrix=matrix, g=sum(u.g for u in unitaries),
                        kappa=sum(u.kappa for u in unitaries))


def multi_electron_phase(positions: Sequence[Sequence[float]], cat: CatState,
                         beam: BeamConfig, trap: TrapConfig) -> Tuple[float, float]:
    """
    Accumulated (g, kappa) for a sequence of electrons.

    The single-electron unitaries commute, so the product is the unitary of
    the summed angles.
    """
    if len(positions) == 0:
        raise DomainError("Need at least one electron position")
    total_g = 0.0
    total_kappa = 0.0
    for r_perp in positions:
        phi_minus, phi_plus = _branch_phases(r_perp, cat, beam, trap)
        total_g += phi_minus - phi_plus
        total_kappa += 0.5 * (phi_minus + phi_plus)
    logger.debug(f"{len(positions)} electrons: g={total_g:.6f}, kappa={total_kappa:.6f}")
    return total_g, total_kappa


def many_qubit_operator(n_paths: int, g: float, kappa: float = 0.0) -> Dict[int, QubitUnitary]:
    """
    One electron in a superposition of n paths, each passing its own qubit.

    Args:
        n_paths: Number of paths (and qubits)
        g: Rotation angle applied on the path's own qubit
        kappa: Global phase of each branch

    Returns:
        Map from 1-based path index to the unitary acting on qubit k of that
        branch; every other qubit of the branch is left alone
    """
    if n_paths < 1:
        raise DomainError(f"Need at least one path, got {n_paths}")
    unitary = electron_qubit_unitary(g, kappa)
    return {k: unitary for k in range(1, n_paths + 1)}


def apply_to_qubit(matrix: np.ndarray, register: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """
    Apply a single-qubit matrix to qubit `qubit` (1-based, most significant
    first) of a 2^n amplitude vector.
    """
    tensor = register.reshape((2,) * n_qubits)
    tensor = np.tensordot(matrix, tensor, axes=([1], [qubit - 1]))
    tensor = np.moveaxis(tensor, 0, qubit - 1)
    return tensor.reshape(-1)


def exact_sandwich_operator(r_perp: Sequence[float], cat: CatState, beam: BeamConfig,
                            trap: TrapConfig) -> np.ndarray:
    """
    Scattering operator evaluated between the displaced cat components.

    <+-alpha| S |+-alpha> is the Gaussian-smoothed Coulomb phase at the
    corresponding impact parameter, so the qubit operator is diagonal in the
    |+>, |-> basis with entries Sigma(b-) and Sigma(b+). Both entries come from
    direct quadrature of the smoothed phase, not from 1F1, so the result checks
    coupling_phase independently. Unlike U it keeps the moduli |Sigma| < 1.

    Returns:
        2x2 matrix in the computational basis
    """
    b_minus, b_plus = _branch_impact_parameters(r_perp, cat, trap)
    width = effective_width(beam, trap)
    diagonal = np.diag([sigma_quadrature(width, b_minus, beam.v_el),
                        sigma_quadrature(width, b_plus, beam.v_el)])
    return HADAMARD @ diagonal @ HADAMARD


def flip_probability_curve(energies_ev: Sequence[float], alphas: Sequence[float], trap: TrapConfig,
                           spot_fraction: float = PHYSICS_CONFIG['spot_width_fraction']) -> np.ndarray:
    """
    Qubit-flip probability sin^2(g/2) with the electron aimed at the +alpha component.

    Args:
        energies_ev: Electron energies, one column each
        alphas: Displacement magnitudes, one row each
        trap: Ion trap
        spot_fraction: delta_r / R0

    Returns:
        Array of shape (len(alphas), len(energies_ev))
    """
    curve = np.zeros((len(alphas), len(energies_ev)))
    for j, energy in enumerate(energies_ev):
        beam = BeamConfig.focused_on(trap, energy, spot_fraction)
        for i, alpha in enumerate(alphas):
            cat = CatState.along_x(alpha)
            g = coupling_phase(cat.centre(trap), cat, beam, trap)
            curve[i, j] = flip_probability(g)
        logger.info(f"Flip curve at {energy:g} eV: max probability {curve[:, j].max():.4f}")
    return curve


def cat_state_amplitudes(r_perp: Sequence[float], cat: CatState, beam: BeamConfig,
                         trap: TrapConfig) -> List[complex]:
    """
    Weights of the (+alpha, |+>) and (-alpha, |->) cat components after the electron passes.

    Each component picks up the phase factor e^{i dphi} of its own impact
    parameter; the pair equals e^{i (kappa +- g/2)}.
    """
    phi_minus, phi_plus = _branch_phases(r_perp, cat, beam, trap)
    return [complex(np.exp(1j * phi_minus)), complex(np.exp(1j * phi_plus))]
