"""
Monte-Carlo simulation of the phase-estimation protocol.

Trials are evolved as stacks of 2x2 density matrices. Each trial draws a
Bernoulli loss flag per electron; detected electrons draw the path phase
difference xi from its Born distribution (uniform proposal, rejection
against 2 tr(K rho K^dagger) <= 2), are corrected by exp(i h sigma_x) and lost
ones go through the loss channel. The final qubit is measured once in the
computational basis.

Trials are grouped in fixed-size chunks, each with its own child of the
master SeedSequence, so the outcome does not depend on the worker count.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from config.system_config import METROLOGY_CONFIG
from physics.errors import DomainError
from quantum.coupling.electron_qubit_coupling import HADAMARD
from quantum.metrology.phase_estimation import (
    ProtocolConfig, correction_angle, correction_unitary, detection_kraus,
    loss_channel, outcome_density,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MonteCarloResult:
    """
    Attributes:
        empirical_p0: Fraction of trials reading |0>
        standard_error: Binomial standard error of empirical_p0
        restart_count: Trials whose coherence was destroyed by losses
        trials: Number of trials
        zeros: Trials reading |0>
        detected_trials: Trials in which every electron was detected
        detected_zeros: Of those, trials reading |0>
    """
    empirical_p0: float
    standard_error: float
    restart_count: int
    trials: int
    zeros: int
    detected_trials: int
    detected_zeros: int

    def as_tuple(self) -> Tuple[float, float, int]:
        return self.empirical_p0, self.standard_error, self.restart_count

    @property
    def detected_fraction(self) -> float:
        return self.detected_trials / self.trials

    @property
    def detected_p0(self) -> float:
        if self.detected_trials == 0:
            return math.nan
        return self.detected_zeros / self.detected_trials


class ProtocolSimulator:
    """
    Chunked, seeded Monte-Carlo driver.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None, kappa: float = 0.0):
        """
        Initialize the simulator.

        Args:
            config: Overrides of METROLOGY_CONFIG
            kappa: Global phase of the electron/qubit coupling
        """
        self.config = config or METROLOGY_CONFIG
        self.chunk_size = int(self.config.get('chunk_size', 50000))
        self.restart_threshold = self.config.get('restart_coherence_threshold', 1e-9)
        self.kappa = kappa

    def _sample_outcomes(self, rng: np.random.Generator, rho: np.ndarray,
                         cfg: ProtocolConfig) -> np.ndarray:
        xi = np.empty(rho.shape[0])
        pending = np.arange(rho.shape[0])
        while pending.size:
            proposal = rng.uniform(0.0, 2.0 * math.pi, size=pending.size)
            threshold = rng.uniform(0.0, 2.0, size=pending.size)
            kraus = detection_kraus(cfg.coupling_g, cfg.true_phase, proposal, self.kappa)
            accepted = threshold < outcome_density(rho[pending], kraus)
            xi[pending[accepted]] = proposal[accepted]
            pending = pending[~accepted]
        return xi

    def _detect(self, rng: np.random.Generator, rho: np.ndarray, cfg: ProtocolConfig) -> np.ndarray:
        xi = self._sample_outcomes(rng, rho, cfg)
        kraus = detection_kraus(cfg.coupling_g, cfg.true_phase, xi, self.kappa)
        rho = kraus @ rho @ np.conj(np.swapaxes(kraus, -1, -2))
        rho /= np.real(np.trace(rho, axis1=-2, axis2=-1))[:, None, None]
        correction = correction_unitary(correction_angle(cfg.coupling_g, xi, cfg.phase_estimate))
        return correction @ rho @ np.conj(np.swapaxes(correction, -1, -2))

    def simulate_chunk(self, cfg: ProtocolConfig, size: int,
                       seed: np.random.SeedSequence) -> Dict[str, int]:
        """
        Evolve `size` independent trials.

        Returns:
            Counts of zeros, all-detected trials, their zeros and restarts
        """
        rng = np.random.default_rng(seed)
        rho = np.broadcast_to(cfg.initial_density().matrix, (size, 2, 2)).copy()
        lost = rng.random((size, cfg.n_electrons)) < cfg.loss_prob

        for k in range(cfg.n_electrons):
            lost_now = lost[:, k]
            if lost_now.any():
                rho[lost_now] = loss_channel(rho[lost_now], cfg.coupling_g, self.kappa)
            detected = np.flatnonzero(~lost_now)
            if detected.size:
                rho[detected] = self._detect(rng, rho[detected], cfg)

        p0 = np.clip(rho[:, 0, 0].real, 0.0, 1.0)
        zero = rng.random(size) < p0
        all_detected = ~lost.any(axis=1)
        coherence = 2.0 * np.abs((HADAMARD @ rho @ HADAMARD)[:, 0, 1])
        restarts = ~all_detected & (coherence < self.restart_threshold)
        return {
            'zeros': int(zero.sum()),
            'detected_trials': int(all_detected.sum()),
            'detected_zeros': int((zero & all_detected).sum()),
            'restarts': int(restarts.sum()),
        }

    def run(self, cfg: ProtocolConfig, trials: int, workers: int = 1) -> MonteCarloResult:
        """
        Run `trials` seeded trials of the protocol.

        Args:
            cfg: Protocol parameters, including the master seed
            trials: Number of trials
            workers: joblib worker count

        Returns:
            MonteCarloResult
        """
        if int(trials) != trials or trials < 1:
            raise DomainError(f"Need at least one trial, got {trials}")
        trials = int(trials)
        n_chunks = -(-trials // self.chunk_size)
        sizes = [self.chunk_size] * (n_chunks - 1) + [trials - self.chunk_size * (n_chunks - 1)]
        seeds = np.random.SeedSequence(cfg.seed).spawn(n_chunks)
        logger.info(f"Monte-Carlo: {trials} trials of {cfg.n_electrons} electrons in {n_chunks} chunks "
                    f"(eps={cfg.loss_prob}, g={cfg.coupling_g:.6f}, seed={cfg.seed})")

        counts = Parallel(n_jobs=workers)(
            delayed(self.simulate_chunk)(cfg, size, seed) for size, seed in zip(sizes, seeds))

        zeros = sum(c['zeros'] for c in counts)
        p0 = zeros / trials
        # A single trial carries no spread estimate; report the Bernoulli maximum
        stderr = 0.5 if trials == 1 else math.sqrt(p0 * (1.0 - p0) / trials)
        return MonteCarloResult(
            empirical_p0=p0,
            standard_error=stderr,
            restart_count=sum(c['restarts'] for c in counts),
            trials=trials,
            zeros=zeros,
            detected_trials=sum(c['detected_trials'] for c in counts),
            detected_zeros=sum(c['detected_zeros'] for c in counts),
        )


def monte_carlo_protocol(cfg: ProtocolConfig, trials: int, workers: int = 1,
                         config: Optional[Dict[str, Any]] = None) -> MonteCarloResult:
    """Convenience wrapper around ProtocolSimulator.run."""
    return ProtocolSimulator(config).run(cfg, trials, workers=workers)


def empirical_fisher(cfg: ProtocolConfig, trials: int, delta: float, workers: int = 1,
                     config: Optional[Dict[str, Any]] = None) -> Tuple[float, float]:
    """
    Fisher information per run estimated from simulated counts.

    The protocol is run at true_phase - delta and true_phase + delta with the
    same seed. On the trials where every electron was detected,

        F = ((p0+ - p0-) / (2 delta))^2 / (p0 (1 - p0)),   p0 = (p0+ + p0-) / 2

    and F is weighted by the detected fraction, which estimates the
    expectation over losses.

    Args:
        cfg: Protocol parameters; true_phase is the evaluation point
        trials: Trials per run
        delta: Half-width of the phase difference
        workers: joblib worker count

    Returns:
        (estimate, standard error) with the error propagated from binomial counts
    """
    if not (math.isfinite(delta) and delta > 0.0):
        raise DomainError(f"Phase step must be positive, got {delta}")
    simulator = ProtocolSimulator(config)
    minus = simulator.run(replace(cfg, true_phase=cfg.true_phase - delta), trials, workers=workers)
    plus = simulator.run(replace(cfg, true_phase=cfg.true_phase + delta), trials, workers=workers)
    if minus.detected_trials == 0 or plus.detected_trials == 0:
        raise DomainError("No trial detected every electron; the Fisher information is not estimable")

    p_minus, p_plus = minus.detected_p0, plus.detected_p0
    var_minus = p_minus * (1.0 - p_minus) / minus.detected_trials
    var_plus = p_plus * (1.0 - p_plus) / plus.detected_trials
    p_mid = 0.5 * (p_minus + p_plus)
    spread = p_mid * (1.0 - p_mid)
    if spread <= 0.0:
        raise DomainError(f"Detected p0={p_mid} carries no phase information")

    slope = (p_plus - p_minus) / (2.0 * delta)
    fisher_detected = slope * slope / spread
    fraction = (minus.detected_trials + plus.detected_trials) / (2.0 * trials)

    var_slope = (var_minus + var_plus) / (4.0 * delta * delta)
    var_mid = 0.25 * (var_minus + var_plus)
    var_fisher = ((2.0 * slope / spread) ** 2 * var_slope
                  + (fisher_detected * (1.0 - 2.0 * p_mid) / spread) ** 2 * var_mid)
    var_fraction = fraction * (1.0 - fraction) / (2.0 * trials)
    estimate = fraction * fisher_detected
    stderr = math.sqrt(fraction ** 2 * var_fisher + fisher_detected ** 2 * var_fraction)
    logger.info(f"Empirical Fisher {estimate:.6f} +- {stderr:.6f} at phi={cfg.true_phase} (delta={delta})")
    return estimate, stderr
