"""Tests for the single-qubit phase-estimation protocol."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from physics.errors import DomainError
from quantum.coupling.electron_qubit_coupling import HADAMARD, IDENTITY
from quantum.metrology.phase_estimation import (
    IonQubitDensity, ProtocolConfig, analytic_p0, beam_splitter, correction_angle,
    correction_unitary, detection_kraus, fidelity, loss_channel, outcome_density,
    p0_nonideal, phase_per_electron, run_ideal_protocol, simulate_sequence,
)

couplings = st.floats(min_value=0.05, max_value=math.pi)
phases = st.floats(min_value=-math.pi, max_value=math.pi)
XI_GRID = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)


def target_state(beta: float) -> np.ndarray:
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / math.sqrt(2.0)
    return (np.exp(1j * beta) * plus + minus) / math.sqrt(2.0)


class TestIonQubitDensity:
    """Qubit density construction and validation."""

    @given(st.floats(min_value=0.0, max_value=1.0), phases)
    def test_coherence(self, s, beta):
        rho = IonQubitDensity.from_coherence(s, beta)
        assert rho.coherence == pytest.approx(0.5 * s * np.exp(1j * beta), abs=1e-14)
        assert np.trace(rho.matrix) == pytest.approx(1.0)

    @given(phases)
    def test_p0_of_pure_state(self, beta):
        rho = IonQubitDensity.from_coherence(1.0, beta)
        assert rho.p0 == pytest.approx(math.cos(0.5 * beta) ** 2, abs=1e-14)

    def test_from_state_normalises(self):
        rho = IonQubitDensity.from_state([3.0, 4.0j])
        assert rho.p0 == pytest.approx(0.36)

    @pytest.mark.parametrize('matrix', [
        [[1.0, 0.0], [0.0, 1.0]],
        [[0.5, 0.5j], [0.5j, 0.5]],
        [[1.5, 0.0], [0.0, -0.5]],
        [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
    ])
    def test_rejects_invalid_matrices(self, matrix):
        with pytest.raises(DomainError):
            IonQubitDensity(np.array(matrix, dtype=complex))

    def test_rejects_coherence_above_one(self):
        with pytest.raises(DomainError):
            IonQubitDensity.from_coherence(1.2)


class TestProtocolConfig:
    """Parameter validation."""

    @pytest.mark.parametrize('kwargs', [
        {'n_electrons': -1},
        {'n_electrons': 2.5},
        {'n_electrons': 3, 'loss_prob': 1.1},
        {'n_electrons': 3, 'loss_prob': math.nan},
        {'n_electrons': 3, 'initial_coherence': -0.1},
        {'n_electrons': 3, 'seed': -4},
        {'n_electrons': 3, 'true_phase': math.inf},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(DomainError):
            ProtocolConfig(**kwargs)

    def test_accepts_boundaries(self):
        cfg = ProtocolConfig(n_electrons=0, loss_prob=1.0)
        assert cfg.n_electrons == 0

    def test_phase_estimate(self):
        assert ProtocolConfig(n_electrons=1, true_phase=0.5, phase_offset=0.1).phase_estimate == pytest.approx(0.6)


class TestDetection:
    """Kraus operators, Born density and correction."""

    def test_beam_splitter_is_unitary(self):
        splitter = beam_splitter(0.4)
        assert np.allclose(splitter.conj().T @ splitter, IDENTITY, atol=1e-15)

    @given(couplings, phases, st.floats(min_value=-3.0, max_value=3.0))
    @settings(max_examples=100, deadline=None)
    def test_kraus_completeness(self, g, phi, kappa):
        kraus = detection_kraus(g, phi, XI_GRID, kappa)
        average = np.mean(2.0 * np.conj(np.swapaxes(kraus, -1, -2)) @ kraus, axis=0)
        assert np.allclose(average, IDENTITY, atol=1e-12)

    @given(couplings, phases)
    @settings(max_examples=100, deadline=None)
    def test_born_density(self, g, phi):
        rho = IonQubitDensity.from_coherence(1.0, 0.7).matrix
        density = outcome_density(rho, detection_kraus(g, phi, XI_GRID))
        assert np.all(density <= 2.0 + 1e-12)
        assert np.all(density >= -1e-12)
        assert np.mean(density) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(density, 1.0 + math.cos(0.5 * g) * np.sin(phi - XI_GRID), atol=1e-12)

    @given(couplings, phases)
    @settings(max_examples=100, deadline=None)
    def test_kraus_diagonal_in_pm_basis_with_equal_moduli(self, g, phi):
        for kraus in detection_kraus(g, phi, XI_GRID[::7]):
            pm = HADAMARD @ kraus @ HADAMARD
            assert abs(pm[0, 1]) < 1e-14 and abs(pm[1, 0]) < 1e-14
            assert abs(pm[0, 0]) == pytest.approx(abs(pm[1, 1]), abs=1e-13)

    @given(st.floats(min_value=0.0, max_value=2.0 * math.pi, exclude_max=True), phases)
    def test_correction_angle_limits(self, xi, phi):
        assert correction_angle(0.0, xi, phi) == 0.0
        h = correction_angle(math.pi, xi, phi)
        assert 0.0 <= h < math.pi
        # xi / 2 rounds to pi just below xi = 2 pi
        assert math.remainder(h - 0.5 * xi, math.pi) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize('xi, phi', [(3.0, 0.0), (4.0, 1.0), (6.0, -2.5), (2.5, 3.0)])
    def test_no_correction_without_coupling(self, xi, phi):
        assert correction_angle(0.0, xi, phi) == 0.0

    def test_correction_angle_at_full_coupling(self):
        assert correction_angle(math.pi, 1.0, 0.3) == pytest.approx(0.5, abs=1e-15)
        assert correction_angle(math.pi, 5.0, 0.3) == pytest.approx(2.5, abs=1e-15)
        assert np.all((correction_angle(1.3, XI_GRID, 0.4) >= 0.0) & (correction_angle(1.3, XI_GRID, 0.4) < math.pi))

    def test_correction_angle_broadcasts(self):
        h = correction_angle(math.pi, XI_GRID, 0.3)
        assert h.shape == XI_GRID.shape

    @given(st.floats(min_value=-5.0, max_value=5.0))
    def test_correction_unitary(self, h):
        u = correction_unitary(h)
        assert np.allclose(u.conj().T @ u, IDENTITY, atol=1e-14)
        assert np.allclose(HADAMARD @ u @ HADAMARD, np.diag([np.exp(1j * h), np.exp(-1j * h)]), atol=1e-14)


class TestLossChannel:
    """Tracing out an undetected electron."""

    @given(couplings, st.floats(min_value=0.0, max_value=1.0), phases, st.floats(min_value=-3.0, max_value=3.0))
    @settings(max_examples=100)
    def test_scales_coherence_by_cos_half_g(self, g, s, beta, kappa):
        rho = IonQubitDensity.from_coherence(s, beta)
        after = IonQubitDensity(loss_channel(rho.matrix, g, kappa))
        assert after.coherence == pytest.approx(math.cos(0.5 * g) * rho.coherence, abs=1e-14)
        assert np.allclose(np.diag(after.in_pm_basis()), [0.5, 0.5], atol=1e-14)

    def test_full_coupling_destroys_coherence(self):
        rho = IonQubitDensity.from_coherence(1.0, 0.3)
        after = IonQubitDensity(loss_channel(rho.matrix, math.pi))
        assert abs(after.coherence) < 1e-15
        assert after.p0 == pytest.approx(0.5)


class TestIdealProtocol:
    """g = pi, no loss: the qubit phase advances by phi per electron."""

    @pytest.mark.parametrize('n, phi, beta', list(itertools.product(
        [1, 3, 10], [0.0, 0.37, -1.2, 2.9], [0.0, 0.5, -2.0])))
    def test_p0_grid(self, n, phi, beta):
        cfg = ProtocolConfig(n_electrons=n, true_phase=phi, initial_beta=beta, seed=n)
        rho = run_ideal_protocol(cfg)
        assert rho.p0 == pytest.approx(math.cos(0.5 * (beta + n * phi)) ** 2, abs=1e-12)
        assert fidelity(rho, target_state(beta + n * phi)) == pytest.approx(1.0, abs=1e-12)

    def test_two_electrons_at_quarter_turn(self):
        rho = run_ideal_protocol(ProtocolConfig(n_electrons=2, true_phase=0.5 * math.pi))
        assert rho.p0 == pytest.approx(0.0, abs=1e-12)

    def test_outcome_independent(self):
        first = run_ideal_protocol(ProtocolConfig(n_electrons=5, true_phase=0.8, seed=1))
        second = run_ideal_protocol(ProtocolConfig(n_electrons=5, true_phase=0.8, seed=2))
        assert np.allclose(first.matrix, second.matrix, atol=1e-12)

    def test_zero_electrons(self):
        rho = run_ideal_protocol(ProtocolConfig(n_electrons=0, initial_beta=1.0))
        assert rho.p0 == pytest.approx(math.cos(0.5) ** 2)

    @pytest.mark.parametrize('kwargs', [
        {'coupling_g': 2.0}, {'loss_prob': 0.1}, {'initial_coherence': 0.9},
    ])
    def test_rejects_non_ideal(self, kwargs):
        with pytest.raises(DomainError):
            run_ideal_protocol(ProtocolConfig(n_electrons=2, **kwargs))


class TestNonIdealCoupling:
    """g < pi: each electron rotates the phase by 2 psi(g, phi)."""

    def test_psi_limits(self):
        assert phase_per_electron(math.pi, 0.8) == pytest.approx(0.4)
        assert phase_per_electron(0.0, 0.8) == pytest.approx(0.0)

    @given(couplings, st.floats(min_value=-3.0, max_value=3.0),
           st.lists(st.floats(min_value=0.0, max_value=2.0 * math.pi, exclude_max=True), min_size=1, max_size=6),
           st.floats(min_value=-2.0, max_value=2.0))
    @settings(max_examples=200, deadline=None)
    def test_sequence_matches_closed_form(self, g, phi, xis, beta):
        cfg = ProtocolConfig(n_electrons=len(xis), coupling_g=g, true_phase=phi, initial_beta=beta)
        rho = simulate_sequence(cfg, xis)
        assert rho.p0 == pytest.approx(p0_nonideal(len(xis), g, phi, beta), abs=1e-10)
        assert abs(rho.coherence) == pytest.approx(0.5, abs=1e-12)

    def test_correction_removes_outcome_dependence(self):
        cfg = ProtocolConfig(n_electrons=1, coupling_g=2.2, true_phase=0.3)
        reference = simulate_sequence(cfg, [0.0])
        corrected = simulate_sequence(cfg, [0.7])
        assert np.allclose(corrected.matrix, reference.matrix, atol=1e-10)
        assert abs(correction_angle(2.2, 0.0, 0.3)) < 1e-15

    @given(st.integers(min_value=0, max_value=50), couplings)
    def test_certain_zero_readings(self, n, g):
        assert p0_nonideal(n, g, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert p0_nonideal(n, 0.0, g) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize('n, g, phi', list(itertools.product(
        range(1, 9), [0.5, 1.5, 2.5, math.pi], [0.1, 0.4, 0.8])))
    def test_closed_form_on_reference_grid(self, n, g, phi):
        cfg = ProtocolConfig(n_electrons=n, coupling_g=g, true_phase=phi)
        xis = np.random.default_rng(n).uniform(0.0, 2.0 * math.pi, size=n)
        rho = simulate_sequence(cfg, xis)
        assert rho.p0 == pytest.approx(p0_nonideal(n, g, phi), abs=1e-10)
        assert analytic_p0(cfg) == pytest.approx(rho.p0, abs=1e-10)

    def test_wrong_prior_degrades_state(self):
        xis = [0.3, 2.0, 4.5, 1.1]
        exact = ProtocolConfig(n_electrons=4, true_phase=0.6)
        offset = ProtocolConfig(n_electrons=4, true_phase=0.6, phase_offset=0.4)
        target = target_state(4 * 0.6)
        assert fidelity(simulate_sequence(exact, xis), target) == pytest.approx(1.0, abs=1e-12)
        # With g = pi the correction ignores the prior
        assert fidelity(simulate_sequence(offset, xis), target) == pytest.approx(1.0, abs=1e-12)
        biased = ProtocolConfig(n_electrons=4, coupling_g=2.0, true_phase=0.6, phase_offset=0.4)
        matched = ProtocolConfig(n_electrons=4, coupling_g=2.0, true_phase=0.6)
        assert simulate_sequence(biased, xis).p0 != pytest.approx(simulate_sequence(matched, xis).p0, abs=1e-6)

    def test_sequence_length_checked(self):
        with pytest.raises(DomainError):
            simulate_sequence(ProtocolConfig(n_electrons=2), [0.1])

    @pytest.mark.parametrize('g', [-0.1, 3.5, math.nan])
    def test_p0_rejects_g_outside_range(self, g):
        with pytest.raises(DomainError):
            p0_nonideal(3, g, 0.2)


class TestAnalyticP0:
    """Binomial mixture over the number of lost electrons."""

    def test_no_loss(self):
        cfg = ProtocolConfig(n_electrons=7, coupling_g=2.2, true_phase=0.4, initial_beta=0.3)
        assert analytic_p0(cfg) == pytest.approx(p0_nonideal(7, 2.2, 0.4, 0.3), abs=1e-14)

    def test_total_loss_at_full_coupling(self):
        assert analytic_p0(ProtocolConfig(n_electrons=4, loss_prob=1.0, true_phase=0.9)) == pytest.approx(0.5)

    def test_no_electrons(self):
        assert analytic_p0(ProtocolConfig(n_electrons=0, initial_beta=1.0)) == pytest.approx(math.cos(0.5) ** 2)

    @pytest.mark.parametrize('g, eps', [(math.pi, 0.2), (2.0, 0.3), (1.0, 0.5)])
    def test_matches_enumerated_loss_patterns(self, g, eps):
        n = 4
        cfg = ProtocolConfig(n_electrons=n, loss_prob=eps, coupling_g=g, true_phase=0.7,
                             initial_beta=0.2, initial_coherence=0.9)
        rng = np.random.default_rng(5)
        total = 0.0
        for pattern in itertools.product([False, True], repeat=n):
            weight = eps ** sum(pattern) * (1.0 - eps) ** (n - sum(pattern))
            rho = simulate_sequence(cfg, rng.uniform(0.0, 2.0 * math.pi, size=n), lost=pattern)
            total += weight * rho.p0
        assert analytic_p0(cfg) == pytest.approx(total, abs=1e-12)

    def test_binomial_weights(self):
        cfg = ProtocolConfig(n_electrons=6, loss_prob=0.25, true_phase=0.3)
        ideal = p0_nonideal(6, math.pi, 0.3)
        p_all = stats.binom.pmf(0, 6, 0.25)
        assert analytic_p0(cfg) == pytest.approx(p_all * ideal + (1.0 - p_all) * 0.5, abs=1e-12)

    def test_offset_prior_has_no_closed_form(self):
        cfg = ProtocolConfig(n_electrons=3, coupling_g=2.0, true_phase=0.4, phase_offset=0.4)
        assert not cfg.correction_is_exact
        with pytest.raises(DomainError):
            analytic_p0(cfg)

    def test_offset_prior_at_full_coupling(self):
        n, eps = 3, 0.2
        cfg = ProtocolConfig(n_electrons=n, loss_prob=eps, true_phase=0.7, phase_offset=0.4)
        assert cfg.correction_is_exact
        rng = np.random.default_rng(9)
        total = 0.0
        for pattern in itertools.product([False, True], repeat=n):
            weight = eps ** sum(pattern) * (1.0 - eps) ** (n - sum(pattern))
            rho = simulate_sequence(cfg, rng.uniform(0.0, 2.0 * math.pi, size=n), lost=pattern)
            total += weight * rho.p0
        assert analytic_p0(cfg) == pytest.approx(total, abs=1e-12)
