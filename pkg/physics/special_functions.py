"""
Complex log-Gamma and the Kummer function 1F1(a; b; z) for real z <= 0.

Only the parameter set needed by the scattering and back-action formulas is
supported: complex a, b in {1, 2}, real z <= 0. Evaluation uses the Kummer
transformation 1F1(a; b; z) = e^z 1F1(b - a; b; -z), which turns the
alternating Taylor series into one with a positive argument, and switches to
the large-argument asymptotic series once |z| exceeds the configured
crossover. `hyp1f1_oracle` is an independent extended-precision evaluation
used to validate both branches.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import mpmath

from config.system_config import SPECFUN_CONFIG
from physics.errors import DomainError, PoleError, PrecisionError

logger = logging.getLogger(__name__)

# Lanczos approximation, g = 7
LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)

SUPPORTED_B = (1.0, 2.0)


def _is_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _principal(z: complex) -> complex:
    """Reduce the imaginary part of a logarithm to (-pi, pi]."""
    im = math.remainder(z.imag, 2.0 * math.pi)
    if im == -math.pi:
        im = math.pi
    return complex(z.real, im)


def _log_sin_pi(z: complex) -> complex:
    # sin(pi z) overflows for large |Im z|; factor out the dominant exponential
    w = math.pi * z
    if abs(w.imag) < 20.0:
        return cmath.log(cmath.sin(w))
    if w.imag > 0.0:
        return -1j * w + cmath.log(0.5j) + cmath.log(1.0 - cmath.exp(2j * w))
    return 1j * w + cmath.log(-0.5j) + cmath.log(1.0 - cmath.exp(-2j * w))


def _ln_gamma_right(z: complex) -> complex:
    z = z - 1.0
    x = LANCZOS_COEFFICIENTS[0]
    for i in range(1, LANCZOS_G + 2):
        x += LANCZOS_COEFFICIENTS[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def ln_gamma(z: complex) -> complex:
    """
    Natural logarithm of the Gamma function for complex argument.

    For Re z >= 0.5 the value is the analytic continuation of log Gamma along
    the real axis; in the reflected half-plane the imaginary part is reduced to
    the principal interval.

    Args:
        z: Complex argument, not a non-positive integer

    Returns:
        log Gamma(z)
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"ln_gamma argument must be finite, got {z}")
    if _is_pole(z):
        raise PoleError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        # Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        return _principal(_LOG_PI - _log_sin_pi(z) - _ln_gamma_right(1.0 - z))
    return _ln_gamma_right(z)


def gamma(z: complex) -> complex:
    return cmath.exp(ln_gamma(z))


def reciprocal_gamma(z: complex) -> complex:
    """1/Gamma(z), zero at the poles."""
    z = complex(z)
    if _is_pole(z):
        return 0j
    return cmath.exp(-ln_gamma(z))


@dataclass(frozen=True)
class Hyp1F1Params:
    """
    Arguments of 1F1(a; b; z).

    Attributes:
        a: Complex first parameter
        b: Second parameter, 1 or 2
        z: Real argument, z <= 0
    """
    a: complex
    b: float
    z: float

    def __post_init__(self):
        a = complex(self.a)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise DomainError(f"Parameter a must be finite, got {self.a}")
        if float(self.b) not in SUPPORTED_B:
            raise DomainError(f"Parameter b must be 1 or 2, got {self.b}")
        if not math.isfinite(self.z) or self.z > 0.0:
            raise DomainError(f"Argument z must be finite and <= 0, got {self.z}")
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', float(self.b))
        object.__setattr__(self, 'z', float(self.z))


def hyp1f1_series(params: Hyp1F1Params, config: Optional[Dict[str, Any]] = None) -> complex:
    """
    Kummer-transformed Taylor series e^z * sum_n (b-a)_n x^n / ((b)_n n!), x = -z.

    Real and imaginary parts are accumulated with math.fsum.
    """
    config = config or SPECFUN_CONFIG
    rtol = config.get('series_rtol', 1e-17)
    max_terms = config.get('series_max_terms', 2000)

    c = params.b - params.a
    b = params.b
    x = -params.z
    term = 1.0 + 0j
    re_parts = [1.0]
    im_parts = [0.0]
    magnitude = 1.0
    for n in range(max_terms):
        term *= (c + n) * x / ((b + n) * (n + 1))
        re_parts.append(term.real)
        im_parts.append(term.imag)
        magnitude = max(magnitude, abs(term))
        if n > x and abs(term) <= rtol * magnitude:
            break
    else:
        raise PrecisionError(
            f"Series for 1F1 did not converge in {max_terms} terms at z={params.z}",
            achieved_bound=abs(term) / magnitude, target=rtol)
    total = complex(math.fsum(re_parts), math.fsum(im_parts))
    return math.exp(params.z) * total


def hyp1f1_asymptotic(params: Hyp1F1Params, config: Optional[Dict[str, Any]] = None) -> complex:
    """
    Large-|z| expansion Gamma(b)/Gamma(b-a) x^(-a) sum_s (a)_s (a-b+1)_s / s! x^(-s).

    The companion term proportional to e^(-x) is dropped; beyond the crossover
    it is below 1e-17 relative.
    """
    config = config or SPECFUN_CONFIG
    rtol = config.get('series_rtol', 1e-17)
    accept = config.get('asymptotic_rtol', 1e-12)

    a, b = params.a, params.b
    x = -params.z
    if x <= 0.0:
        raise DomainError("Asymptotic expansion needs z < 0")
    prefactor = math.gamma(b) * reciprocal_gamma(b - a) * cmath.exp(-a * math.log(x))
    if prefactor == 0:
        return 0j

    term = 1.0 + 0j
    total = term
    smallest = abs(term)
    s = 0
    while True:
        next_term = term * (a + s) * (a - b + 1 + s) / ((s + 1) * x)
        if next_term == 0:
            smallest = 0.0
            break
        if abs(next_term) > abs(term):
            # Divergent tail: stop at the smallest term
            break
        term = next_term
        total += term
        s += 1
        smallest = abs(term)
        if smallest <= rtol * abs(total):
            break

    achieved = smallest / abs(total)
    if achieved > accept:
        raise PrecisionError(
            f"Asymptotic 1F1 reached only {achieved:.2e} relative at z={params.z}",
            achieved_bound=achieved, target=accept)
    return prefactor * total


def hyp1f1(params: Hyp1F1Params, config: Optional[Dict[str, Any]] = None) -> complex:
    """
    Kummer confluent hypergeometric function 1F1(a; b; z) for z <= 0.

    Args:
        params: Validated arguments
        config: Optional overrides of SPECFUN_CONFIG

    Returns:
        Complex function value
    """
    config = config or SPECFUN_CONFIG
    if params.z == 0.0 or params.a == 0:
        return 1.0 + 0j
    if -params.z <= config.get('series_asymptotic_crossover', 40.0):
        return hyp1f1_series(params, config)
    return hyp1f1_asymptotic(params, config)


def hyp1f1_oracle(params: Hyp1F1Params, config: Optional[Dict[str, Any]] = None) -> complex:
    """
    Extended-precision direct Taylor series with a rigorous tail bound.

    The working precision grows with |z| to absorb the cancellation of the
    alternating series. Summation stops once the geometric bound on the
    remaining terms is below 10^-guard relative to the partial sum.

    Args:
        params: Validated arguments, |z| <= oracle_max_abs_z
        config: Optional overrides of SPECFUN_CONFIG

    Returns:
        Complex function value rounded to double precision
    """
    config = config or SPECFUN_CONFIG
    guard = config.get('oracle_guard_digits', 25)
    max_abs_z = config.get('oracle_max_abs_z', 500.0)
    x_abs = abs(params.z)
    if x_abs > max_abs_z:
        raise DomainError(f"Oracle limited to |z| <= {max_abs_z}, got {x_abs}")

    dps = guard + 15 + int(math.ceil(x_abs / math.log(10.0)))
    max_terms = int(4 * x_abs) + 400
    with mpmath.workdps(dps):
        a = mpmath.mpc(params.a.real, params.a.imag)
        b = mpmath.mpf(params.b)
        z = mpmath.mpf(params.z)
        abs_a = abs(a)
        tolerance = mpmath.mpf(10) ** (-guard)
        term = mpmath.mpc(1)
        total = mpmath.mpc(1)
        bound = mpmath.inf
        for n in range(max_terms):
            term = term * (a + n) * z / ((b + n) * (n + 1))
            total += term
            k = n + 1
            ratio = x_abs * max(1, (abs_a + k) / (b + k)) / (k + 1)
            if ratio < 1:
                bound = abs(term) * ratio / (1 - ratio)
                if bound <= tolerance * abs(total):
                    return complex(total)
        raise PrecisionError(
            f"Oracle series tail bound not met after {max_terms} terms at z={params.z}",
            achieved_bound=float(bound / abs(total)) if total != 0 else float('inf'),
            target=float(tolerance))
