"""
Entanglement-assisted phase estimation with one ion qubit.

Each electron is split into a specimen path s and an interaction path i.
Path i couples to the qubit through e^{i kappa} exp(i (g/2) sigma_x); a beam
splitter tuned for g = pi recombines the paths, the specimen adds phi on s,
and detecting the electron at transverse momentum leaves a relative phase
xi between the paths that is undone by exp(i h sigma_x). After n electrons the
qubit carries beta_0 + n phi (g = pi) and is read out in the computational
basis.

Lost electrons are traced out after the interaction and followed by
exp(-i (g/4) sigma_x), which leaves the qubit coherence scaled by cos(g/2).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from physics.errors import DomainError, MeasurementImpossibleError
from quantum.coupling.electron_qubit_coupling import HADAMARD, IDENTITY, SIGMA_X, electron_qubit_unitary

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

DENSITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class IonQubitDensity:
    """2x2 density matrix of the ion qubit in the computational basis."""
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (2, 2):
            raise DomainError(f"Qubit density must be 2x2, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > DENSITY_TOLERANCE:
            raise DomainError("Qubit density must be Hermitian")
        if abs(np.trace(rho) - 1.0) > DENSITY_TOLERANCE:
            raise DomainError(f"Qubit density must have unit trace, got {np.trace(rho)}")
        if np.linalg.eigvalsh(rho).min() < -DENSITY_TOLERANCE:
            raise DomainError("Qubit density must be positive semidefinite")
        object.__setattr__(self, 'matrix', rho)

    @classmethod
    def from_coherence(cls, coherence: float = 1.0, beta: float = 0.0) -> 'IonQubitDensity':
        """(|+><+| + |-><-| + s e^{i beta} |+><-| + h.c.) / 2"""
        if not 0.0 <= coherence <= 1.0:
            raise DomainError(f"Coherence must lie in [0, 1], got {coherence}")
        off = 0.5 * coherence * np.exp(1j * beta)
        rho_pm = np.array([[0.5, off], [np.conj(off), 0.5]], dtype=complex)
        return cls(HADAMARD @ rho_pm @ HADAMARD)

    @classmethod
    def from_state(cls, state: Sequence[complex]) -> 'IonQubitDensity':
        psi = np.asarray(state, dtype=complex)
        norm = np.linalg.norm(psi)
        if norm == 0.0:
            raise DomainError("State vector must not vanish")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @property
    def p0(self) -> float:
        """Probability of reading |0>."""
        return float(min(1.0, max(0.0, self.matrix[0, 0].real)))

    def in_pm_basis(self) -> np.ndarray:
        return HADAMARD @ self.matrix @ HADAMARD

    @property
    def coherence(self) -> complex:
        """<+|rho|->, equal to s e^{i beta} / 2."""
        return complex(self.in_pm_basis()[0, 1])


@dataclass(frozen=True)
class ProtocolConfig:
    """
    Attributes:
        n_electrons: Number of electrons n
        loss_prob: Probability epsilon that an electron is not detected
        coupling_g: Rotation angle of the electron/qubit unitary
        true_phase: Specimen phase phi
        initial_beta: Phase beta_0 of the initial qubit state
        initial_coherence: Coherence s of the initial qubit state
        seed: Master seed of the random streams
        phase_offset: phi_hat - phi, the error of the prior used in the correction
    """
    n_electrons: int
    loss_prob: float = 0.0
    coupling_g: float = math.pi
    true_phase: float = 0.0
    initial_beta: float = 0.0
    initial_coherence: float = 1.0
    seed: int = 0
    phase_offset: float = 0.0

    def __post_init__(self):
        if int(self.n_electrons) != self.n_electrons or self.n_electrons < 0:
            raise DomainError(f"Electron count must be a non-negative integer, got {self.n_electrons}")
        if not (math.isfinite(self.loss_prob) and 0.0 <= self.loss_prob <= 1.0):
            raise DomainError(f"Loss probability must lie in [0, 1], got {self.loss_prob}")
        for name in ('coupling_g', 'true_phase', 'initial_beta', 'phase_offset'):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0.0 <= self.initial_coherence <= 1.0:
            raise DomainError(f"Initial coherence must lie in [0, 1], got {self.initial_coherence}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, 'n_electrons', int(self.n_electrons))
        object.__setattr__(self, 'seed', int(self.seed))

    @property
    def phase_estimate(self) -> float:
        return self.true_phase + self.phase_offset

    @property
    def correction_is_exact(self) -> bool:
        """Closed forms apply: the prior is exact, or g = pi where the correction does not use it."""
        return self.phase_offset == 0.0 or abs(self.coupling_g - math.pi) <= 1e-12

    def initial_density(self) -> IonQubitDensity:
        return IonQubitDensity.from_coherence(self.initial_coherence, self.initial_beta)


def _dagger(matrix: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(matrix, -1, -2))


def beam_splitter(kappa: float = 0.0) -> np.ndarray:
    """
    Path map sending (|s> + i e^{i kappa}|i>)/sqrt2 to |s> and
    (|s> - i e^{i kappa}|i>)/sqrt2 to |i>, basis order (s, i).
    """
    phase = np.exp(-1j * kappa)
    return np.array([[1.0, -1j * phase], [1.0, 1j * phase]], dtype=complex) / math.sqrt(2.0)


def detection_kraus(g: float, phi: ArrayLike, xi: ArrayLike, kappa: float = 0.0) -> np.ndarray:
    """
    Qubit operator for one electron detected with path phase difference xi.

    The electron starts in (|s> + |i>)/sqrt2, path i carries the coupling
    unitary, then beam splitter and specimen phase act, and the detection
    projects onto (e^{i xi}|s> + |i>)/sqrt2. With xi uniform on [0, 2 pi)
    the operators satisfy mean(2 K^dagger K) = 1.

    Returns:
        Array of shape broadcast(phi, xi) + (2, 2)
    """
    splitter = beam_splitter(kappa)
    coupling = electron_qubit_unitary(g, kappa).matrix
    bra_s = np.exp(-1j * np.asarray(xi, dtype=float)) * np.exp(1j * np.asarray(phi, dtype=float))
    c_s = (bra_s * splitter[0, 0] + splitter[1, 0]) / math.sqrt(2.0)
    c_i = (bra_s * splitter[0, 1] + splitter[1, 1]) / math.sqrt(2.0)
    c_s = np.asarray(c_s)[..., None, None]
    c_i = np.asarray(c_i)[..., None, None]
    return (c_s * IDENTITY + c_i * coupling) / math.sqrt(2.0)


def outcome_density(rho: np.ndarray, kraus: np.ndarray) -> np.ndarray:
    """Born density 2 tr(K rho K^dagger) of xi relative to the uniform measure, at most 2."""
    return 2.0 * np.real(np.trace(kraus @ rho @ _dagger(kraus), axis1=-2, axis2=-1))


def correction_angle(g: ArrayLike, xi: ArrayLike, phi_estimate: ArrayLike) -> ArrayLike:
    """
    Angle h of the correction exp(i h sigma_x) after detecting xi.

    Two-argument arctangent of

        sin(g/2) sin(xi/2)
        ---------------------------------------------------------------
        cos(xi/2) (cos(g/2) sin(phi) + 1) - cos(g/2) sin(xi/2) cos(phi)

    reduced to [0, pi), since exp(i pi sigma_x) is a global sign. Then
    h(0, xi, phi) = 0 and h(pi, xi, phi) = xi / 2 for xi in [0, 2 pi).
    """
    half_g = 0.5 * np.asarray(g, dtype=float)
    half_xi = 0.5 * np.asarray(xi, dtype=float)
    phi = np.asarray(phi_estimate, dtype=float)
    cos_g = np.where(np.isclose(half_g, 0.5 * math.pi, rtol=0.0, atol=1e-15), 0.0, np.cos(half_g))
    numerator = np.sin(half_g) * np.sin(half_xi)
    denominator = np.cos(half_xi) * (cos_g * np.sin(phi) + 1.0) - cos_g * np.sin(half_xi) * np.cos(phi)
    h = np.mod(np.arctan2(numerator, denominator), math.pi)
    # np.mod rounds tiny negative angles up to pi
    h = np.where(h >= math.pi, h - math.pi, h)
    return float(h) if np.ndim(h) == 0 else h


def correction_unitary(h: ArrayLike) -> np.ndarray:
    """exp(i h sigma_x), broadcast over h."""
    h = np.asarray(h, dtype=float)[..., None, None]
    return np.cos(h) * IDENTITY + 1j * np.sin(h) * SIGMA_X


def loss_channel(rho: np.ndarray, g: float, kappa: float = 0.0) -> np.ndarray:
    """
    Trace out an undetected electron, then apply exp(-i (g/4) sigma_x).

    The off-diagonal element in the |+>, |-> basis is multiplied by cos(g/2).
    """
    coupling = electron_qubit_unitary(g, kappa).matrix
    mixed = 0.5 * (rho + coupling @ rho @ _dagger(coupling))
    compensation = correction_unitary(-0.25 * g)
    return compensation @ mixed @ _dagger(compensation)


def simulate_sequence(cfg: ProtocolConfig, xi_values: Sequence[float],
                      lost: Optional[Sequence[bool]] = None, kappa: float = 0.0) -> IonQubitDensity:
    """
    Deterministic sequential evolution with prescribed detection outcomes.

    Args:
        cfg: Protocol parameters
        xi_values: Outcome xi for every electron (ignored for lost ones)
        lost: Loss flag per electron; no loss if omitted
        kappa: Global phase of the coupling

    Returns:
        Final qubit density
    """
    n = cfg.n_electrons
    lost = [False] * n if lost is None else list(lost)
    if len(xi_values) != n or len(lost) != n:
        raise DomainError(f"Need {n} outcomes and loss flags, got {len(xi_values)} and {len(lost)}")

    rho = cfg.initial_density().matrix
    for xi, is_lost in zip(xi_values, lost):
        if is_lost:
            rho = loss_channel(rho, cfg.coupling_g, kappa)
            continue
        kraus = detection_kraus(cfg.coupling_g, cfg.true_phase, xi, kappa)
        rho = kraus @ rho @ _dagger(kraus)
        weight = np.trace(rho).real
        if weight <= DENSITY_TOLERANCE:
            raise MeasurementImpossibleError(f"Outcome xi={xi} has zero probability")
        correction = correction_unitary(correction_angle(cfg.coupling_g, xi, cfg.phase_estimate))
        rho = correction @ (rho / weight) @ _dagger(correction)
    return IonQubitDensity(0.5 * (rho + rho.conj().T))


def run_ideal_protocol(cfg: ProtocolConfig, kappa: float = 0.0) -> IonQubitDensity:
    """
    Ideal protocol (g = pi, no loss) as a state-vector simulation.

    Detection outcomes are drawn from the seeded generator; for g = pi the
    final state does not depend on them.

    Args:
        cfg: Protocol parameters with coupling_g = pi and loss_prob = 0

    Returns:
        Pure state (e^{i(beta_0 + n phi)}|+> + |->)/sqrt2 for unit coherence
    """
    if abs(cfg.coupling_g - math.pi) > 1e-12 or cfg.loss_prob != 0.0:
        raise DomainError("The ideal protocol needs g = pi and no electron loss")
    if cfg.initial_coherence != 1.0:
        raise DomainError("The ideal protocol starts from a pure qubit state")

    rng = np.random.default_rng(cfg.seed)
    xis = rng.uniform(0.0, 2.0 * math.pi, size=cfg.n_electrons)
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    psi = (np.exp(1j * cfg.initial_beta) * plus + minus) / math.sqrt(2.0)
    for xi in xis:
        psi = detection_kraus(cfg.coupling_g, cfg.true_phase, xi, kappa) @ psi
        psi = psi / np.linalg.norm(psi)
        psi = correction_unitary(correction_angle(cfg.coupling_g, xi, cfg.phase_estimate)) @ psi
    logger.debug(f"Ideal protocol with {cfg.n_electrons} electrons, p0={abs(psi[0]) ** 2:.12f}")
    return IonQubitDensity.from_state(psi)


def _validate_n_g(n: int, g: float) -> None:
    if int(n) != n or n < 0:
        raise DomainError(f"Electron count must be a non-negative integer, got {n}")
    if not (math.isfinite(g) and 0.0 <= g <= math.pi):
        raise DomainError(f"Coupling g must lie in [0, pi], got {g}")


def phase_per_electron(g: float, phi: float) -> float:
    """
    Rotation psi of the qubit phase per detected electron, acot(csc(g/2) cot(phi/2) + cot(g/2)).

    Evaluated as a two-argument arctangent; psi = phi/2 for g = pi and 0 for g = 0.
    """
    half_g = 0.5 * g
    cos_g = 0.0 if abs(half_g - 0.5 * math.pi) < 1e-15 else math.cos(half_g)
    return math.atan2(math.sin(half_g) * math.sin(0.5 * phi),
                      math.cos(0.5 * phi) + cos_g * math.sin(0.5 * phi))


def p0_nonideal(n: int, g: float, phi: float, initial_beta: float = 0.0) -> float:
    """
    Probability of reading |0> after n detected electrons with coupling g.

    Args:
        n: Number of detected electrons
        g: Coupling angle in [0, pi]; g = 0 gives p0 = 1
        phi: Specimen phase
        initial_beta: beta_0 of the initial state

    Returns:
        cos^2(n psi + beta_0 / 2)
    """
    _validate_n_g(n, g)
    return math.cos(n * phase_per_electron(g, phi) + 0.5 * initial_beta) ** 2


def analytic_p0(cfg: ProtocolConfig) -> float:
    """
    Expected p0 with binomial electron loss and phi_hat = phi.

    Losing m electrons scales the coherence by cos^m(g/2); the remaining
    n - m detections rotate the qubit phase by 2 psi each.
    """
    n, eps, g = cfg.n_electrons, cfg.loss_prob, cfg.coupling_g
    if not cfg.correction_is_exact:
        raise DomainError(f"No closed form for p0 with phase_offset={cfg.phase_offset} and g={g}")
    _validate_n_g(n, g)
    psi = phase_per_electron(g, cfg.true_phase)
    cos_g = 0.0 if abs(0.5 * g - 0.5 * math.pi) < 1e-15 else math.cos(0.5 * g)
    lost = np.arange(n + 1)
    weights = stats.binom.pmf(lost, n, eps)
    coherence = cfg.initial_coherence * cos_g ** lost
    p0 = 0.5 + 0.5 * coherence * np.cos(cfg.initial_beta + 2.0 * (n - lost) * psi)
    return float(np.dot(weights, p0))


def fidelity(rho: IonQubitDensity, psi: Sequence[complex]) -> float:
    """<psi|rho|psi> for a normalised pure target."""
    vec = np.asarray(psi, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    return float(np.real(np.conj(vec) @ rho.matrix @ vec))
