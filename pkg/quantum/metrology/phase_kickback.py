"""
Phase kickback from one electron in N paths onto N ion qubits.

The electron starts in sum_k w_k |psi_k> with every qubit in |0>. Path k
passes qubit k and rotates it by exp(i (g/2) sigma_x); a specimen imprints
phi_k on path k; detecting the electron at transverse momentum p projects
each path onto e^{-i p.r_k}; the conditional phase correction
prod_k exp(i p.r_k |1><1|_k) then removes the momentum dependence from the
flipped components. For g = pi the register ends in sum_k w_k e^{i phi_k}
on the one-hot states.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from physics.errors import DomainError, MeasurementImpossibleError
from quantum.coupling.electron_qubit_coupling import apply_to_qubit, many_qubit_operator

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12


def one_hot_index(qubit: int, n_qubits: int) -> int:
    """Basis index of the state with only `qubit` (1-based) set."""
    return 1 << (n_qubits - qubit)


@dataclass(frozen=True)
class KickbackState:
    """
    Joint electron-path / qubit-register state.

    Attributes:
        n_paths: Number of paths N, equal to the number of qubits
        branches: (path index k, path weight w_k, register amplitudes of length 2^N)
    """
    n_paths: int
    branches: Tuple[Tuple[int, complex, np.ndarray], ...]

    def __post_init__(self):
        indices = [k for k, _, _ in self.branches]
        if self.n_paths < 1:
            raise DomainError(f"Need at least one path, got {self.n_paths}")
        if len(set(indices)) != len(indices) or any(k < 1 or k > self.n_paths for k in indices):
            raise DomainError(f"Path indices must be unique and within 1..{self.n_paths}, got {indices}")
        for _, _, register in self.branches:
            if np.shape(register) != (2 ** self.n_paths,):
                raise DomainError(f"Register must have {2 ** self.n_paths} amplitudes")
        if abs(self.norm() - 1.0) > NORM_TOLERANCE:
            raise DomainError(f"Kickback state must be normalised, norm is {self.norm():.15f}")

    @classmethod
    def initial(cls, weights: Sequence[complex]) -> 'KickbackState':
        """Electron in sum_k w_k |psi_k>, register in |0...0>; weights are normalised."""
        w = np.asarray(weights, dtype=complex)
        if w.ndim != 1 or w.size < 1:
            raise DomainError("Need a non-empty weight vector")
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise DomainError("Path weights must not all vanish")
        w = w / norm
        n = w.size
        zero = np.zeros(2 ** n, dtype=complex)
        zero[0] = 1.0
        return cls(n_paths=n, branches=tuple((k + 1, complex(w[k]), zero.copy()) for k in range(n)))

    def norm(self) -> float:
        return math.sqrt(sum(abs(w) ** 2 * float(np.vdot(reg, reg).real) for _, w, reg in self.branches))

    def joint_vector(self) -> np.ndarray:
        """Amplitudes in the path (major) x register basis."""
        vector = np.zeros((self.n_paths, 2 ** self.n_paths), dtype=complex)
        for k, w, register in self.branches:
            vector[k - 1] = w * register
        return vector.reshape(-1)


@dataclass(frozen=True)
class RegisterState:
    """
    Qubit register after the electron has been detected.

    Attributes:
        n_qubits: Register size
        amplitudes: Normalised 2^N amplitudes, qubit 1 most significant
        measured_p: Transverse momentum the electron was found at
    """
    n_qubits: int
    amplitudes: np.ndarray
    measured_p: Tuple[float, float]

    def probability(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)


def kickback_evolve(initial: KickbackState, g: float, specimen_phases: Sequence[float],
                    measured_p: Sequence[float], focus_points: Sequence[Sequence[float]],
                    kappa: float = 0.0) -> RegisterState:
    """
    Run the kickback chain up to and including the momentum-conditioned correction.

    Args:
        initial: Joint state before the interaction
        g: Rotation angle on the passed qubit
        specimen_phases: phi_k per path
        measured_p: Detected transverse momentum (a.u.)
        focus_points: r_k per path (bohr)
        kappa: Global phase of the electron/qubit unitary

    Returns:
        Register state after correction, renormalised
    """
    n = initial.n_paths
    phases = np.asarray(specimen_phases, dtype=float)
    points = np.asarray(focus_points, dtype=float)
    p = np.asarray(measured_p, dtype=float)
    if phases.shape != (n,) or points.shape != (n, 2) or p.shape != (2,):
        raise DomainError(f"Expected {n} phases, {n} focus points and a 2-vector momentum")

    branch_map = many_qubit_operator(n, g, kappa)
    projection = np.exp(-1j * points @ p)
    register = np.zeros(2 ** n, dtype=complex)
    for k, weight, branch_register in initial.branches:
        rotated = apply_to_qubit(branch_map[k].matrix, branch_register, k, n)
        register += weight * np.exp(1j * phases[k - 1]) * projection[k - 1] * rotated

    norm = np.linalg.norm(register)
    if norm <= NORM_TOLERANCE:
        raise MeasurementImpossibleError(f"Momentum {tuple(p)} has zero detection amplitude")

    # Correction phase exp(i p.r_k) on every component with qubit k set
    bits = (np.arange(2 ** n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    register *= np.exp(1j * bits @ (points @ p))
    logger.debug(f"Kickback over {n} paths, detection norm {norm:.6f}")
    return RegisterState(n_qubits=n, amplitudes=register / norm,
                         measured_p=(float(p[0]), float(p[1])))
