"""
Back action of the ion on a focused electron, and the internal-excitation bound.

eta is the probability that the electron's transverse state changes while the
ion stays in its ground state. To leading order in chi = 2 delta_r^2 / R0^2

    eta = chi (2 s + chi) |u'(s)|^2 / |u(s)|^2,   s = b^2 / R0^2

with u(s) = 1F1(i/v; 1; -s) and u'(s) = -(i/v) 1F1(1 + i/v; 2; -s). Second
order terms that vanish as s -> 0 are dropped, so the expansion is first order
in chi for intermediate s. `eta_exact` evaluates the full ratio of
convolutions for validation.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize, special

from config.system_config import SCATTERING_CONFIG
from physics.errors import DomainError
from physics.scattering import sigma
from physics.special_functions import Hyp1F1Params, hyp1f1
from physics.units import BOHR_NM, TrapConfig, trap_ground_width

logger = logging.getLogger(__name__)

AREA_UNITS = ('a0^2', 'pi*a0^2')


@dataclass(frozen=True)
class BackactionInput:
    """
    Attributes:
        chi: 2 delta_r^2 / R0^2, in [0, 1)
        s: b^2 / R0^2
        v_el: Electron speed in atomic units
    """
    chi: float
    s: float
    v_el: float

    def __post_init__(self):
        if not (math.isfinite(self.chi) and 0.0 <= self.chi < 1.0):
            raise DomainError(f"chi must lie in [0, 1) for the Gaussian series to converge, got {self.chi}")
        if not (math.isfinite(self.s) and self.s >= 0.0):
            raise DomainError(f"s must be non-negative, got {self.s}")
        if not (math.isfinite(self.v_el) and self.v_el > 0.0):
            raise DomainError(f"Electron speed must be positive, got {self.v_el}")


def _gradient_ratio(s: float, v_el: float) -> float:
    """|u'(s)|^2 / |u(s)|^2"""
    y = 1.0 / v_el
    u = hyp1f1(Hyp1F1Params(a=1j * y, b=1, z=-s))
    u_prime = -1j * y * hyp1f1(Hyp1F1Params(a=1.0 + 1j * y, b=2, z=-s))
    return abs(u_prime) ** 2 / abs(u) ** 2


def eta(backaction_input: BackactionInput) -> float:
    """
    Leading-order back-action probability.

    Args:
        backaction_input: chi, s and electron speed

    Returns:
        eta >= 0; exactly chi^2 / v^2 at s = 0
    """
    chi, s = backaction_input.chi, backaction_input.s
    if chi == 0.0:
        return 0.0
    return chi * (2.0 * s + chi) * _gradient_ratio(s, backaction_input.v_el)


def eta_map(chi_grid: Sequence[float], b_grid: Sequence[float], v_el: float,
            r0: float = 1.0) -> np.ndarray:
    """
    eta on the Cartesian product of chi and impact parameter.

    Args:
        chi_grid: Ascending chi values in [0, 1)
        b_grid: Ascending impact parameters, in the same length unit as r0
        v_el: Electron speed
        r0: Trap length; the default measures b in units of R0

    Returns:
        Array of shape (len(chi_grid), len(b_grid))
    """
    chis = np.asarray(chi_grid, dtype=float)
    bs = np.asarray(b_grid, dtype=float)
    if np.any(np.diff(chis) < 0.0) or np.any(np.diff(bs) < 0.0):
        raise DomainError("chi and b grids must be sorted ascending")
    if chis.size and (chis[0] < 0.0 or chis[-1] >= 1.0):
        raise DomainError(f"chi must lie in [0, 1), got range [{chis[0]}, {chis[-1]}]")
    if bs.size and bs[0] < 0.0:
        raise DomainError("Impact parameters must be non-negative")
    if not (math.isfinite(v_el) and v_el > 0.0):
        raise DomainError(f"Electron speed must be positive, got {v_el}")
    s_values = (bs / r0) ** 2
    ratio = np.array([_gradient_ratio(float(s), v_el) for s in s_values])
    result = chis[:, None] * (2.0 * s_values[None, :] + chis[:, None]) * ratio[None, :]
    logger.info(f"eta map {chis.size}x{bs.size}, max {result.max() if result.size else 0.0:.3e}")
    return result


def eta_peak(chi: float, v_el: float, s_max: float = 10.0) -> Tuple[float, float]:
    """
    Maximise the leading-order eta over s.

    Returns:
        (b / R0 at the maximum, maximal eta)
    """
    BackactionInput(chi=chi, s=0.0, v_el=v_el)
    result = optimize.minimize_scalar(lambda s: -eta(BackactionInput(chi, s, v_el)),
                                      bounds=(0.0, s_max), method='bounded',
                                      options={'xatol': 1e-8})
    return math.sqrt(result.x), -result.fun


def _smeared_intensity(r0: float, width: float, b: float, v_el: float,
                       config: Dict[str, Any]) -> float:
    """(|Sigma_R0|^2 * G_width)(b) by radial quadrature."""
    half_window = config.get('quadrature_half_window', 12.0)
    w2 = width * width

    def integrand(rho: float) -> float:
        return (rho * abs(sigma(r0, rho, v_el)) ** 2
                * math.exp(-(rho - b) ** 2 / w2) * special.i0e(2.0 * b * rho / w2))

    lower = max(0.0, b - half_window * width)
    upper = b + half_window * width
    value, _ = integrate.quad(integrand, lower, upper,
                              epsabs=config.get('quadrature_epsabs', 1e-12),
                              epsrel=config.get('quadrature_epsrel', 1e-11),
                              limit=config.get('quadrature_limit', 400))
    return 2.0 / w2 * value


def eta_exact(backaction_input: BackactionInput, config: Optional[Dict[str, Any]] = None) -> float:
    """
    eta as the ratio of convolutions, without expansion in chi.

        eta = 1 - |Sigma_R0 * G_w|^2 / (|Sigma_R0|^2 * G_w),  w = sqrt(chi) R0

    The numerator is Sigma at R_eff = R0 sqrt(1 + chi) in closed form; the
    denominator is integrated numerically. Lengths are measured in R0.
    """
    config = config or SCATTERING_CONFIG
    chi, s, v_el = backaction_input.chi, backaction_input.s, backaction_input.v_el
    if chi == 0.0:
        return 0.0
    b = math.sqrt(s)
    coherent = abs(sigma(math.sqrt(1.0 + chi), b, v_el)) ** 2
    smeared = _smeared_intensity(1.0, math.sqrt(chi), b, v_el, config)
    return 1.0 - coherent / smeared


@dataclass(frozen=True)
class CrossSectionBound:
    """
    Attributes:
        sigma_tot: Total inelastic cross section, in `area_unit`
        area_unit: 'a0^2' or 'pi*a0^2'
        radius_nm: Length whose disc area normalises the cross section
        p_scatt_bound: sigma_tot / (pi radius^2)
    """
    sigma_tot: float
    area_unit: str
    radius_nm: float
    p_scatt_bound: float


def internal_excitation_bound(sigma_tot: float, radius: Union[TrapConfig, float],
                              area_unit: str = 'a0^2') -> CrossSectionBound:
    """
    Upper bound sigma_tot / (pi R^2) on exciting the ion's internal state.

    Args:
        sigma_tot: Total cross section
        radius: A TrapConfig (its ground-state width R0/sqrt(2) is used, which
            is the 40 nm / 13 nm figure) or a length in nm
        area_unit: 'a0^2' reproduces the quoted 2e-5 .. 2e-4 range for
            sigma_tot = 36; 'pi*a0^2' reads the figure as a multiple of pi a0^2

    Returns:
        CrossSectionBound
    """
    if not (math.isfinite(sigma_tot) and sigma_tot > 0.0):
        raise DomainError(f"Cross section must be positive, got {sigma_tot}")
    if area_unit not in AREA_UNITS:
        raise DomainError(f"Unknown area unit {area_unit!r}, expected one of {AREA_UNITS}")
    radius_nm = trap_ground_width(radius) if isinstance(radius, TrapConfig) else float(radius)
    if not (math.isfinite(radius_nm) and radius_nm > 0.0):
        raise DomainError(f"Radius must be positive, got {radius_nm} nm")

    area_nm2 = sigma_tot * BOHR_NM ** 2
    if area_unit == 'pi*a0^2':
        area_nm2 *= math.pi
    bound = area_nm2 / (math.pi * radius_nm ** 2)
    return CrossSectionBound(sigma_tot=sigma_tot, area_unit=area_unit,
                             radius_nm=radius_nm, p_scatt_bound=bound)
