"""
Electron/ion scattering matrix element.

The stroboscopic scattering operator acts on the ion's transverse motion as
the Coulomb phase |x|^(-2i/v) smoothed by the ion wave packet and the
electron spot. For a Gaussian of width a the convolution has the closed form

    Sigma_a(b) = Gamma(1 - i/v) a^(-2i/v) 1F1(i/v; 1; -b^2/a^2)

and the element seen by an ion in a coherent state is Sigma at the effective
width R_eff = sqrt(R0^2 + 2 delta_r^2), evaluated at the impact parameter
between the electron focus and the displaced ion centre. The divergent
global phase of the bare Coulomb operator is dropped.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from scipy import integrate, special

from config.system_config import SCATTERING_CONFIG
from physics.errors import DomainError, UnwrapError
from physics.special_functions import Hyp1F1Params, hyp1f1, ln_gamma
from physics.units import BeamConfig, TrapConfig

logger = logging.getLogger(__name__)

Offset = Union[float, Sequence[float]]


def _offset_magnitude(offset: Offset) -> float:
    if np.ndim(offset) == 0:
        return abs(float(offset))
    vec = np.asarray(offset, dtype=float)
    if vec.shape != (2,):
        raise DomainError(f"Offset must be a scalar or a 2-vector, got shape {vec.shape}")
    return float(math.hypot(vec[0], vec[1]))


def _check_width_speed(width: float, v_el: float) -> None:
    if not (math.isfinite(width) and width > 0.0):
        raise DomainError(f"Width must be positive, got {width}")
    if not (math.isfinite(v_el) and v_el > 0.0):
        raise DomainError(f"Electron speed must be positive, got {v_el}")


def sigma(width: float, offset: Offset, v_el: float) -> complex:
    """
    Gaussian-smoothed Coulomb phase Sigma_a(b).

    Args:
        width: Gaussian width a in bohr
        offset: Impact parameter b as a 2-vector or its magnitude, in bohr
        v_el: Electron speed in atomic units

    Returns:
        Complex value with modulus at most 1
    """
    _check_width_speed(width, v_el)
    b = _offset_magnitude(offset)
    y = 1.0 / v_el
    prefactor = cmath.exp(ln_gamma(1.0 - 1j * y) - 2j * y * math.log(width))
    return prefactor * hyp1f1(Hyp1F1Params(a=1j * y, b=1, z=-(b / width) ** 2))


def delta_phi_continuous(width: float, offset: Offset, v_el: float) -> float:
    """
    Phase of Sigma_a(b) continued without 2 pi jumps in b.

    For b <= a the principal argument of 1F1 is used; beyond that the known
    large-b behaviour -(2/v) ln b is split off and only a bounded remainder
    goes through the principal branch.
    """
    _check_width_speed(width, v_el)
    b = _offset_magnitude(offset)
    y = 1.0 / v_el
    s = (b / width) ** 2
    log_gamma = ln_gamma(1.0 - 1j * y)
    kummer = hyp1f1(Hyp1F1Params(a=1j * y, b=1, z=-s))
    if s <= 1.0:
        return log_gamma.imag - 2.0 * y * math.log(width) + cmath.phase(kummer)
    remainder = kummer * cmath.exp(1j * y * math.log(s) + log_gamma)
    return -2.0 * y * math.log(b) + cmath.phase(remainder)


def scatter_probability_at_origin(v_el: float) -> float:
    """1 - |Sigma_a(0)|^2 = 1 - pi / (v sinh(pi / v)), independent of a."""
    if not (math.isfinite(v_el) and v_el > 0.0):
        raise DomainError(f"Electron speed must be positive, got {v_el}")
    x = math.pi / v_el
    return 1.0 - x / math.sinh(x)


def sigma_quadrature(width: float, offset: Offset, v_el: float,
                     config: Optional[Dict[str, Any]] = None) -> complex:
    """
    Direct quadrature of the convolution of a unit-norm Gaussian with |x|^(-2i/v).

    The angular integral is done analytically (modified Bessel I0), leaving

        (2/a^2) int rho^(1-2i/v) exp(-(rho-b)^2/a^2) i0e(2 b rho / a^2) d rho

    over a window of the configured number of widths around b.
    """
    _check_width_speed(width, v_el)
    config = config or SCATTERING_CONFIG
    half_window = config.get('quadrature_half_window', 12.0)
    epsabs = config.get('quadrature_epsabs', 1e-12)
    epsrel = config.get('quadrature_epsrel', 1e-11)
    limit = config.get('quadrature_limit', 400)

    b = _offset_magnitude(offset)
    y = 1.0 / v_el
    a2 = width * width

    def integrand(rho: float) -> complex:
        if rho == 0.0:
            return 0j
        envelope = rho * math.exp(-(rho - b) ** 2 / a2) * special.i0e(2.0 * b * rho / a2)
        return envelope * cmath.exp(-2j * y * math.log(rho))

    lower = max(0.0, b - half_window * width)
    upper = b + half_window * width
    points = [b] if lower < b < upper else None
    re, _ = integrate.quad(lambda r: integrand(r).real, lower, upper,
                           epsabs=epsabs, epsrel=epsrel, limit=limit, points=points)
    im, _ = integrate.quad(lambda r: integrand(r).imag, lower, upper,
                           epsabs=epsabs, epsrel=epsrel, limit=limit, points=points)
    return 2.0 / a2 * complex(re, im)


@dataclass(frozen=True)
class ScatterInput:
    """
    One electron passing a trapped ion in a coherent state.

    Attributes:
        beam: Electron beam
        trap: Ion trap
        alpha: Coherent-state displacement, complex 2-vector
    """
    beam: BeamConfig
    trap: TrapConfig
    alpha: Tuple[complex, complex] = (0j, 0j)

    def __post_init__(self):
        alpha = tuple(complex(x) for x in self.alpha)
        if len(alpha) != 2:
            raise DomainError(f"Displacement alpha must be a 2-vector, got {self.alpha}")
        object.__setattr__(self, 'alpha', alpha)
        if self.effective_width <= 0.0:
            raise DomainError("Effective width must be positive")

    @property
    def effective_width(self) -> float:
        return effective_width(self.beam, self.trap)

    @property
    def impact_parameter(self) -> float:
        """|r - sqrt(2) R0 Re(alpha e^{i Omega t_el})| in bohr."""
        rotation = cmath.exp(1j * self.beam.arrival_time_phase)
        centre = [math.sqrt(2.0) * self.trap.r0 * (a * rotation).real for a in self.alpha]
        return math.hypot(self.beam.focus[0] - centre[0], self.beam.focus[1] - centre[1])


@dataclass(frozen=True)
class ScatterResult:
    """
    Attributes:
        element: Matrix element S
        delta_phi: Principal phase arg(S)
        p_scat: 1 - |S|^2
        impact_parameter: b in bohr
    """
    element: complex
    delta_phi: float
    p_scat: float
    impact_parameter: float

    @classmethod
    def from_element(cls, element: complex, impact_parameter: float) -> 'ScatterResult':
        return cls(element=element, delta_phi=cmath.phase(element),
                   p_scat=1.0 - abs(element) ** 2, impact_parameter=impact_parameter)


def effective_width(beam: BeamConfig, trap: TrapConfig) -> float:
    return math.sqrt(trap.r0 ** 2 + 2.0 * beam.spot_width ** 2)


def scatter(scatter_input: ScatterInput) -> ScatterResult:
    """
    Scattering matrix element for one electron transit.

    Args:
        scatter_input: Beam, trap and displacement

    Returns:
        Element, principal phase and state-change probability
    """
    b = scatter_input.impact_parameter
    element = sigma(scatter_input.effective_width, b, scatter_input.beam.v_el)
    return ScatterResult.from_element(element, b)


def phase_profile(scatter_input: ScatterInput, b_grid: Sequence[float],
                  config: Optional[Dict[str, Any]] = None,
                  workers: int = 1) -> List[Tuple[float, float, float]]:
    """
    Sweep the impact parameter and report the unwrapped phase relative to b = 0.

    The principal phases are unwrapped along the grid and the sweep is pinned
    to the continuous phase at the first grid point, so the reported offset to
    b = 0 is unambiguous even when the grid does not start at zero.

    Args:
        scatter_input: Supplies beam, trap and hence R_eff and v
        b_grid: Ascending impact parameters in bohr
        config: Optional overrides of SCATTERING_CONFIG
        workers: joblib worker count for the grid evaluation

    Returns:
        Rows of (b, delta_phi(b) - delta_phi(0), p_scat(b))
    """
    config = config or SCATTERING_CONFIG
    max_step = config.get('unwrap_max_step', math.pi / 2.0)
    grid = np.asarray(b_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("Impact-parameter grid must be a non-empty sequence")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0.0):
        raise DomainError("Impact parameters must be finite and non-negative")
    if np.any(np.diff(grid) < 0.0):
        raise DomainError("Impact-parameter grid must be sorted ascending")

    width = scatter_input.effective_width
    v_el = scatter_input.beam.v_el
    logger.info(f"Phase profile over {grid.size} points, R_eff={width:.2f} bohr, v={v_el:.5f}")

    elements = Parallel(n_jobs=workers)(delayed(sigma)(width, float(b), v_el) for b in grid)
    elements = np.asarray(elements, dtype=complex)

    unwrapped = np.unwrap(np.angle(elements))
    steps = np.abs(np.diff(unwrapped))
    if steps.size and steps.max() > max_step:
        index = int(steps.argmax())
        raise UnwrapError(
            f"Phase step {steps[index]:.3f} rad between b={grid[index]:.4g} and b={grid[index + 1]:.4g} "
            f"exceeds {max_step:.3f}; refine the grid",
            index=index, step=float(steps[index]))

    anchor = delta_phi_continuous(width, float(grid[0]), v_el)
    unwrapped += 2.0 * math.pi * round((anchor - unwrapped[0]) / (2.0 * math.pi))
    reference = delta_phi_continuous(width, 0.0, v_el)
    p_scat = 1.0 - np.abs(elements) ** 2
    return [(float(b), float(phase - reference), float(p))
            for b, phase, p in zip(grid, unwrapped, p_scat)]
