"""Tests for log-Gamma and the Kummer function."""

import cmath
import math

import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from physics.errors import DomainError, PoleError, PrecisionError
from physics.special_functions import (
    Hyp1F1Params, gamma, hyp1f1, hyp1f1_asymptotic, hyp1f1_oracle, hyp1f1_series,
    ln_gamma, reciprocal_gamma,
)

finite = st.floats(min_value=-30.0, max_value=30.0, allow_nan=False)
# Electron speeds from a few eV upwards
speeds = st.floats(min_value=0.5, max_value=50.0)


def _close(actual: complex, expected: complex, rtol: float) -> bool:
    return abs(actual - expected) <= rtol * max(abs(expected), 1e-300)


class TestLnGamma:
    """Complex log-Gamma against mpmath and the classical identities."""

    @given(st.floats(min_value=0.5, max_value=50.0), finite)
    @settings(max_examples=300)
    def test_matches_mpmath_right_half_plane(self, re, im):
        expected = complex(mpmath.loggamma(mpmath.mpc(re, im)))
        assert abs(ln_gamma(complex(re, im)) - expected) < 1e-12 * max(1.0, abs(expected))

    @given(st.floats(min_value=-20.0, max_value=0.49), st.floats(min_value=-20.0, max_value=20.0))
    @settings(max_examples=300)
    def test_reflection_matches_gamma_value(self, re, im):
        z = complex(re, im)
        assume(abs(im) > 1e-3 or abs(re - round(re)) > 1e-3)
        expected = complex(mpmath.gamma(mpmath.mpc(re, im)))
        assert _close(gamma(z), expected, 1e-10)

    @given(st.floats(min_value=0.5, max_value=40.0), finite)
    @settings(max_examples=200)
    def test_recurrence(self, re, im):
        z = complex(re, im)
        lhs = cmath.exp(ln_gamma(z + 1.0) - ln_gamma(z))
        assert _close(lhs, z, 1e-12)

    @given(st.floats(min_value=0.5, max_value=30.0), finite)
    @settings(max_examples=200)
    def test_conjugation(self, re, im):
        z = complex(re, im)
        assert _close(ln_gamma(z.conjugate()), ln_gamma(z).conjugate(), 1e-13)

    @given(st.floats(min_value=1e-3, max_value=20.0))
    def test_modulus_on_unit_line(self, y):
        # |Gamma(1 - iy)|^2 = pi y / sinh(pi y)
        expected = math.pi * y / math.sinh(math.pi * y)
        assert abs(gamma(1.0 - 1j * y)) ** 2 == pytest.approx(expected, rel=1e-12)

    def test_half(self):
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    @pytest.mark.parametrize('n', [1, 2, 5, 10, 20])
    def test_factorials(self, n):
        assert gamma(n + 1).real == pytest.approx(math.factorial(n), rel=1e-13)

    @pytest.mark.parametrize('z', [0, -1, -2, -17])
    def test_poles(self, z):
        with pytest.raises(PoleError):
            ln_gamma(z)
        assert reciprocal_gamma(z) == 0

    def test_pole_error_is_domain_error(self):
        with pytest.raises(DomainError):
            ln_gamma(-3.0)

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            ln_gamma(complex(math.inf, 0.0))

    def test_large_imaginary_part_in_reflected_half_plane(self):
        z = complex(-2.5, 60.0)
        expected = complex(mpmath.loggamma(mpmath.mpc(z.real, z.imag)))
        value = ln_gamma(z)
        assert value.real == pytest.approx(expected.real, rel=1e-11)
        assert cmath.exp(1j * value.imag) == pytest.approx(cmath.exp(1j * expected.imag), abs=1e-9)


class TestHyp1F1Params:
    """Argument validation."""

    @pytest.mark.parametrize('b', [0, 3, 1.5, -1])
    def test_rejects_unsupported_b(self, b):
        with pytest.raises(DomainError):
            Hyp1F1Params(a=0.5j, b=b, z=-1.0)

    @pytest.mark.parametrize('z', [0.1, math.nan, -math.inf])
    def test_rejects_bad_z(self, z):
        with pytest.raises(DomainError):
            Hyp1F1Params(a=0.5j, b=1, z=z)

    def test_rejects_non_finite_a(self):
        with pytest.raises(DomainError):
            Hyp1F1Params(a=complex(math.nan, 0.0), b=1, z=-1.0)


class TestHyp1F1:
    """1F1(a; b; z) for z <= 0 against the extended-precision oracle."""

    @given(speeds, st.floats(min_value=0.0, max_value=120.0), st.sampled_from([1, 2]))
    @settings(max_examples=200, deadline=None)
    def test_matches_oracle(self, v, x, b):
        # a = i/v for b = 1 and a = 1 + i/v for b = 2, as used by the scattering formulas
        a = 1j / v if b == 1 else 1.0 + 1j / v
        params = Hyp1F1Params(a=a, b=b, z=-x)
        value = hyp1f1(params)
        expected = hyp1f1_oracle(params)
        assert abs(value - expected) <= 1e-12 * max(1.0, abs(expected))

    @given(speeds, st.floats(min_value=0.0, max_value=60.0))
    @settings(max_examples=100, deadline=None)
    def test_matches_mpmath_hyp1f1(self, v, x):
        params = Hyp1F1Params(a=1j / v, b=1, z=-x)
        with mpmath.workdps(40):
            expected = complex(mpmath.hyp1f1(mpmath.mpc(0.0, 1.0 / v), 1, -x))
        assert abs(hyp1f1(params) - expected) <= 1e-12 * max(1.0, abs(expected))

    @given(speeds, st.floats(min_value=0.0, max_value=200.0))
    @settings(max_examples=100, deadline=None)
    def test_conjugation_symmetry(self, v, x):
        value = hyp1f1(Hyp1F1Params(a=1j / v, b=1, z=-x))
        mirrored = hyp1f1(Hyp1F1Params(a=-1j / v, b=1, z=-x))
        assert abs(value - mirrored.conjugate()) <= 1e-13 * max(1.0, abs(value))

    @given(speeds, st.floats(min_value=0.0, max_value=500.0))
    @settings(max_examples=200, deadline=None)
    def test_scattering_element_bounded(self, v, x):
        y = 1.0 / v
        element = gamma(1.0 - 1j * y) * hyp1f1(Hyp1F1Params(a=1j * y, b=1, z=-x))
        assert abs(element) <= 1.0 + 1e-12

    @given(speeds, st.floats(min_value=0.01, max_value=80.0))
    @settings(max_examples=100, deadline=None)
    def test_derivative_identity(self, v, x):
        # d/dz 1F1(a; 1; z) = a 1F1(a + 1; 2; z)
        a = 1j / v
        h = 1e-5 * max(1.0, x)
        upper = hyp1f1(Hyp1F1Params(a=a, b=1, z=-(x - h)))
        lower = hyp1f1(Hyp1F1Params(a=a, b=1, z=-(x + h)))
        derivative = (upper - lower) / (2.0 * h)
        expected = a * hyp1f1(Hyp1F1Params(a=a + 1.0, b=2, z=-x))
        assert abs(derivative - expected) <= 1e-5 * max(1.0, abs(expected))

    def test_zero_argument(self):
        assert hyp1f1(Hyp1F1Params(a=3.0j, b=1, z=0.0)) == 1.0

    def test_zero_parameter(self):
        assert hyp1f1(Hyp1F1Params(a=0.0, b=2, z=-7.0)) == 1.0

    def test_real_parameter_reduces_to_exponential(self):
        # 1F1(1; 1; z) = e^z
        for x in (0.5, 10.0, 39.0):
            value = hyp1f1(Hyp1F1Params(a=1.0, b=1, z=-x))
            assert value.real == pytest.approx(math.exp(-x), rel=1e-13)

    @pytest.mark.parametrize('v', [0.5, 1.0, 2.710665, 20.0])
    def test_branches_agree_at_crossover(self, v):
        params = Hyp1F1Params(a=1j / v, b=1, z=-40.0)
        series = hyp1f1_series(params)
        asymptotic = hyp1f1_asymptotic(params)
        assert abs(series - asymptotic) <= 1e-11 * abs(series)

    def test_asymptotic_reports_insufficient_precision(self):
        params = Hyp1F1Params(a=1.0 + 3.0j, b=1, z=-2.0)
        with pytest.raises(PrecisionError) as excinfo:
            hyp1f1_asymptotic(params)
        assert excinfo.value.achieved_bound > excinfo.value.target

    def test_series_reports_non_convergence(self):
        params = Hyp1F1Params(a=0.5j, b=1, z=-30.0)
        with pytest.raises(PrecisionError):
            hyp1f1_series(params, {'series_rtol': 1e-17, 'series_max_terms': 5})

    def test_oracle_rejects_huge_argument(self):
        with pytest.raises(DomainError):
            hyp1f1_oracle(Hyp1F1Params(a=0.5j, b=1, z=-1e4))
