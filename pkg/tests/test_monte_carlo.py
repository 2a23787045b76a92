"""Statistical tests of the Monte-Carlo protocol simulator."""

import math

import pytest

from physics.errors import DomainError
from quantum.metrology.fisher_information import expected_fisher_lossy
from quantum.metrology.monte_carlo import (
    MonteCarloResult, ProtocolSimulator, empirical_fisher, monte_carlo_protocol,
)
from quantum.metrology.phase_estimation import ProtocolConfig, analytic_p0, p0_nonideal

SIGMAS = 3.0


def assert_within(result: MonteCarloResult, expected: float) -> None:
    stderr = math.sqrt(max(expected * (1.0 - expected), 1e-12) / result.trials)
    assert abs(result.empirical_p0 - expected) < SIGMAS * stderr + 1e-12


class TestSmallRuns:
    """Fast sanity checks."""

    def test_ideal_protocol(self):
        cfg = ProtocolConfig(n_electrons=3, true_phase=0.5, seed=1)
        result = monte_carlo_protocol(cfg, 20000)
        assert_within(result, analytic_p0(cfg))
        assert result.restart_count == 0
        assert result.detected_trials == result.trials

    def test_certain_outcome(self):
        # n phi = 2 pi leaves the qubit in |0>
        cfg = ProtocolConfig(n_electrons=4, true_phase=0.5 * math.pi, seed=3)
        result = monte_carlo_protocol(cfg, 5000)
        assert result.empirical_p0 == 1.0
        assert result.standard_error == 0.0

    def test_total_loss(self):
        cfg = ProtocolConfig(n_electrons=3, loss_prob=1.0, true_phase=0.4, seed=2)
        result = monte_carlo_protocol(cfg, 20000)
        assert_within(result, 0.5)
        assert result.detected_trials == 0
        assert math.isnan(result.detected_p0)
        assert result.restart_count == result.trials

    def test_single_trial(self):
        result = monte_carlo_protocol(ProtocolConfig(n_electrons=2, seed=9), 1)
        assert result.trials == 1
        assert result.standard_error == 0.5
        assert result.empirical_p0 in (0.0, 1.0)

    @pytest.mark.parametrize('trials', [0, -5, 2.5])
    def test_rejects_bad_trial_count(self, trials):
        with pytest.raises(DomainError):
            monte_carlo_protocol(ProtocolConfig(n_electrons=2), trials)

    @pytest.mark.parametrize('delta', [0.0, -0.1, math.nan])
    def test_fisher_rejects_bad_step(self, delta):
        with pytest.raises(DomainError):
            empirical_fisher(ProtocolConfig(n_electrons=2, true_phase=0.5), 100, delta)

    def test_fisher_needs_detected_trials(self):
        cfg = ProtocolConfig(n_electrons=2, loss_prob=1.0, true_phase=0.5)
        with pytest.raises(DomainError):
            empirical_fisher(cfg, 100, 0.1)

    def test_as_tuple(self):
        result = monte_carlo_protocol(ProtocolConfig(n_electrons=2, true_phase=0.3, seed=4), 100)
        assert result.as_tuple() == (result.empirical_p0, result.standard_error, result.restart_count)


class TestReproducibility:
    """Seeded chunks make runs repeatable."""

    def test_same_seed_same_result(self):
        cfg = ProtocolConfig(n_electrons=4, loss_prob=0.2, coupling_g=2.0, true_phase=0.3, seed=42)
        assert monte_carlo_protocol(cfg, 3000) == monte_carlo_protocol(cfg, 3000)

    def test_worker_count_does_not_matter(self):
        cfg = ProtocolConfig(n_electrons=3, loss_prob=0.1, coupling_g=2.5, true_phase=0.8, seed=7)
        simulator = ProtocolSimulator({'chunk_size': 1000})
        assert simulator.run(cfg, 4500, workers=1) == simulator.run(cfg, 4500, workers=2)


@pytest.mark.slow
class TestLargeRuns:
    """Agreement with the analytic mixture at 10^6 trials."""

    TRIALS = 1_000_000

    @pytest.mark.parametrize('n, eps, g, phi', [
        (5, 0.0, math.pi, 0.3),
        (5, 0.1, math.pi, 0.3),
        (8, 0.05, 2.2, -0.6),
        (3, 0.3, 1.4, 1.0),
    ])
    def test_matches_analytic_p0(self, n, eps, g, phi):
        cfg = ProtocolConfig(n_electrons=n, loss_prob=eps, coupling_g=g, true_phase=phi, seed=n)
        result = monte_carlo_protocol(cfg, self.TRIALS, workers=2)
        assert_within(result, analytic_p0(cfg))

    @pytest.mark.parametrize('n, eps', [(10, 0.05), (3, 0.2)])
    def test_detected_fraction_matches_loss_model(self, n, eps):
        cfg = ProtocolConfig(n_electrons=n, loss_prob=eps, true_phase=0.2, seed=11)
        result = monte_carlo_protocol(cfg, self.TRIALS, workers=2)
        keep = (1.0 - eps) ** n
        assert abs(result.detected_fraction - keep) < SIGMAS * math.sqrt(keep * (1.0 - keep) / self.TRIALS)
        estimate = n * n * result.detected_fraction
        assert estimate == pytest.approx(expected_fisher_lossy(n, eps), rel=0.01)
        detected_stderr = math.sqrt(0.25 / result.detected_trials)
        assert abs(result.detected_p0 - p0_nonideal(n, math.pi, 0.2)) < SIGMAS * detected_stderr
        assert result.restart_count == result.trials - result.detected_trials

    def test_empirical_fisher_under_loss(self):
        n, eps, phi, delta = 3, 0.2, 0.5, 0.1
        cfg = ProtocolConfig(n_electrons=n, loss_prob=eps, true_phase=phi, seed=23)
        estimate, stderr = empirical_fisher(cfg, self.TRIALS, delta, workers=2)

        # The same central difference applied to the closed form
        p_minus, p_plus = p0_nonideal(n, math.pi, phi - delta), p0_nonideal(n, math.pi, phi + delta)
        p_mid = 0.5 * (p_minus + p_plus)
        difference = ((p_plus - p_minus) / (2.0 * delta)) ** 2 / (p_mid * (1.0 - p_mid))
        expected = (1.0 - eps) ** n * difference
        assert abs(estimate - expected) < SIGMAS * stderr
        assert expected == pytest.approx(expected_fisher_lossy(n, eps), rel=0.05)
