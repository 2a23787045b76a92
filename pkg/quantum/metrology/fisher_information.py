"""
Fisher information of the single-qubit phase-estimation protocol.

Covers the Heisenberg-limited ideal case, the expectation over electron
loss, the optimal electron number and gain over the standard quantum limit,
imperfect coupling g < pi and the attenuation by mixedness after losses.
"""

import logging
import math
from typing import Callable, Optional

from scipy import optimize

from config.system_config import METROLOGY_CONFIG
from physics.errors import DomainError
from quantum.metrology.phase_estimation import p0_nonideal

logger = logging.getLogger(__name__)


def _check_count(n: int, minimum: int = 1) -> None:
    if int(n) != n or n < minimum:
        raise DomainError(f"Electron count must be an integer >= {minimum}, got {n}")


def _check_eps(eps: float) -> None:
    if not (math.isfinite(eps) and 0.0 <= eps < 1.0):
        raise DomainError(f"Loss probability must lie in [0, 1), got {eps}")


def _check_phase(phi: float) -> None:
    if not (math.isfinite(phi) and 0.0 <= phi < math.pi):
        raise DomainError(f"Specimen phase must lie in [0, pi), got {phi}")


def fisher_ideal(n: int) -> float:
    """Heisenberg limit n^2."""
    _check_count(n)
    return float(n * n)


def expected_fisher_lossy(n: int, eps: float) -> float:
    """n^2 (1 - eps)^n: only runs without any loss keep their information."""
    _check_count(n)
    _check_eps(eps)
    return n * n * (1.0 - eps) ** n


def optimal_n_continuous(eps: float) -> float:
    """n* = -1/log(1 - eps), maximiser of the gain n (1 - eps)^n over the SQL."""
    _check_eps(eps)
    if eps == 0.0:
        return math.inf
    return -1.0 / math.log1p(-eps)


def optimal_n(eps: float) -> Optional[int]:
    """
    Electron number with the largest gain over the SQL, n* rounded half-up.

    Returns:
        None when eps = 0, where the gain grows without bound
    """
    n_star = optimal_n_continuous(eps)
    if math.isinf(n_star):
        return None
    return max(1, int(math.floor(n_star + 0.5)))


def relative_gain(eps: float) -> float:
    """Gain n*(1 - eps)^n* = -1/(e log(1 - eps)) of the lossy protocol over the SQL."""
    n_star = optimal_n_continuous(eps)
    if math.isinf(n_star):
        return math.inf
    return n_star / math.e


def gain_threshold_eps() -> float:
    """Loss probability at which the relative gain drops to 1."""
    return optimize.brentq(lambda eps: relative_gain(eps) - 1.0, 1e-6, 0.99, xtol=1e-14)


def sql_crossover(eps: float) -> Optional[float]:
    """
    Largest n with n (1 - eps)^n = 1, above which the expected Fisher
    information falls below the SQL.

    Returns:
        None if the expected Fisher information never beats the SQL
    """
    n_star = optimal_n_continuous(eps)
    if math.isinf(n_star):
        return None
    log_keep = math.log1p(-eps)

    def excess(n: float) -> float:
        return math.log(n) + n * log_keep

    if excess(n_star) <= 0.0:
        return None
    upper = 2.0 * n_star
    while excess(upper) > 0.0:
        upper *= 2.0
    return optimize.brentq(excess, n_star, upper, xtol=1e-10)


def fisher_nonideal(n: int, g: float, phi: float) -> float:
    """
    n^2 sin^2(g/2) / (1 + cos(g/2) sin(phi))^2 for imperfect coupling.

    Args:
        n: Detected electrons
        g: Coupling angle in [0, pi]
        phi: Specimen phase in [0, pi)

    Returns:
        Fisher information about phi
    """
    _check_count(n)
    if not (math.isfinite(g) and 0.0 <= g <= math.pi):
        raise DomainError(f"Coupling g must lie in [0, pi], got {g}")
    _check_phase(phi)
    half = 0.5 * g
    return n * n * math.sin(half) ** 2 / (1.0 + math.cos(half) * math.sin(phi)) ** 2


def advantage_threshold(g: float, phi: float) -> float:
    """Electron count above which fisher_nonideal exceeds the SQL n."""
    _check_phase(phi)
    half = 0.5 * g
    if math.sin(half) == 0.0:
        return math.inf
    return (1.0 + math.cos(half) * math.sin(phi)) ** 2 / math.sin(half) ** 2


def fisher_lossy_mixed(n_detected: int, m_lost: int, g: float, phi: float) -> float:
    """
    Fisher information after losing m electrons and detecting n.

    The qubit is a mixture (1 - c) I/2 + c rho* with c = cos^m(g/2), giving

        F~ = F 4 c^2 p0 (1 - p0) / (1 - c^2 (1 - 2 p0)^2)
    """
    _check_count(n_detected)
    _check_count(m_lost, minimum=0)
    fisher = fisher_nonideal(n_detected, g, phi)
    if m_lost == 0:
        return fisher
    c = math.cos(0.5 * g) ** m_lost
    if abs(c) < 1e-15:
        return 0.0
    p0 = p0_nonideal(n_detected, g, phi)
    denominator = 1.0 - c * c * (1.0 - 2.0 * p0) ** 2
    if denominator <= 0.0:
        return 0.0
    return fisher * 4.0 * c * c * p0 * (1.0 - p0) / denominator


def finite_difference_fisher(p0_of_phi: Callable[[float], float], phi: float,
                             step: Optional[float] = None) -> float:
    """
    (dp0/dphi)^2 / (p0 (1 - p0)) from a central difference.

    Args:
        p0_of_phi: Probability of outcome 0 as a function of phi
        phi: Evaluation point
        step: Difference step, METROLOGY_CONFIG['finite_difference_step'] by default
    """
    step = METROLOGY_CONFIG.get('finite_difference_step', 1e-4) if step is None else step
    p0 = p0_of_phi(phi)
    if p0 <= 0.0 or p0 >= 1.0:
        raise DomainError(f"Fisher information undefined at p0={p0}")
    slope = (p0_of_phi(phi + step) - p0_of_phi(phi - step)) / (2.0 * step)
    return slope * slope / (p0 * (1.0 - p0))
