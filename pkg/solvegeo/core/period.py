"""
Period function of loop level sets.

A loop level set of H = |x|^alpha y is identified either by beta (the flat
flowline direction V_beta hits it) or by x0 (its equatorial point
(x0, sqrt(1-x0^2), 0) with x0 beyond the equilibrium). P is the time a
flowline needs to go once around it.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from solvegeo.config.settings import Config
from solvegeo.core.algebra import check_alpha, equilibrium_abscissa, level_value
from solvegeo.core.errors import DomainError, IntegratorError
from solvegeo.core.special_fns import (
    ellip_E,
    ellip_K,
    ellip_K_derivative,
    imaginary_modulus_K,
    jacobi_dn,
)

logger = logging.getLogger(__name__)

HALF = 0.5
SQRT3 = math.sqrt(3.0)


def _check_beta(beta: float, closed: bool = False) -> float:
    beta = float(beta)
    ok = 0.0 < beta <= 1.0 if closed else 0.0 < beta < 1.0
    if not ok:
        raise DomainError(f"beta must lie in (0, 1{']' if closed else ')'}, got {beta}")
    return beta


def _check_x0_half(x0: float) -> float:
    x0 = float(x0)
    if not 1.0 / SQRT3 < x0 < 1.0:
        raise DomainError(f"x0 must lie in (1/sqrt(3), 1), got {x0}")
    return x0


def flat_direction(beta: float, alpha: float, z_sign: float = 1.0) -> np.ndarray:
    """V_beta = (beta sqrt(alpha/(1+alpha)), beta/sqrt(1+alpha), +-sqrt(1-beta^2))"""
    return np.array([
        beta * math.sqrt(alpha / (1.0 + alpha)),
        beta / math.sqrt(1.0 + alpha),
        math.copysign(math.sqrt(max(0.0, 1.0 - beta * beta)), z_sign),
    ])


def limit_period(alpha: float) -> float:
    """pi sqrt(2)/sqrt(alpha), the beta -> 1 limit (exact for alpha = 1 and 1/2)"""
    return math.pi * math.sqrt(2.0) / math.sqrt(alpha)


# ---------------------------------------------------------------------------
# Endpoint times
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EndpointTimes:
    t0: float
    t1: float

    def residuals(self, beta: float, alpha: float) -> Tuple[float, float]:
        target = (alpha + 1.0) / beta ** 2
        r0 = alpha * math.exp(2.0 * self.t0) + math.exp(-2.0 * alpha * self.t0) - target
        r1 = alpha * math.exp(-2.0 * self.t1) + math.exp(2.0 * alpha * self.t1) - target
        return r0 / target, r1 / target


def endpoint_times(beta: float, alpha: float) -> EndpointTimes:
    """Flow times at which the flat flowline through V_beta meets the unit circle"""
    alpha = check_alpha(alpha, positive=True)
    beta = _check_beta(beta)
    target = (alpha + 1.0) / beta ** 2

    def forward(t):
        return alpha * math.exp(2.0 * t) + math.exp(-2.0 * alpha * t) - target

    def backward(t):
        return alpha * math.exp(-2.0 * t) + math.exp(2.0 * alpha * t) - target

    upper0 = 0.5 * math.log(target / alpha)
    upper1 = math.log(target) / (2.0 * alpha)
    eps = 4 * np.finfo(float).eps
    t0 = brentq(forward, 0.0, upper0, xtol=1e-16, rtol=eps)
    t1 = brentq(backward, 0.0, upper1, xtol=1e-16, rtol=eps)
    return EndpointTimes(float(t0), float(t1))


def cardano_endpoint_times(beta: float) -> EndpointTimes:
    """alpha = 1/2 endpoint times from the real roots of u^3 - 3u/beta^2 + 2 = 0.

    e^{t0} is the largest root and e^{-t1} the middle one; the trigonometric
    form of Cardano's solution keeps the computation real.
    """
    beta = _check_beta(beta)
    theta = math.acos(-beta ** 3) / 3.0
    largest = 2.0 / beta * math.cos(theta)
    middle = 2.0 / beta * math.cos(theta - 2.0 * math.pi / 3.0)
    return EndpointTimes(math.log(largest), -math.log(middle))


# ---------------------------------------------------------------------------
# Periods
# ---------------------------------------------------------------------------

def _period_pieces(beta: float, alpha: float, times: EndpointTimes):
    """Integrands in s after t = t0 - s^2 (upper piece) and t = -t1 + s^2 (lower piece)"""
    scale = beta * beta / (1.0 + alpha)
    e_up, e_up_neg = math.exp(2.0 * times.t0), math.exp(-2.0 * alpha * times.t0)
    e_lo, e_lo_neg = math.exp(2.0 * alpha * times.t1), math.exp(-2.0 * times.t1)
    upper_limit = 4.0 / math.sqrt(scale * 2.0 * alpha * (e_up - e_up_neg))
    lower_limit = 4.0 / math.sqrt(scale * 2.0 * alpha * (e_lo - e_lo_neg))

    def upper(s):
        if s == 0.0:
            return upper_limit
        s2 = s * s
        gap = -alpha * e_up * math.expm1(-2.0 * s2) - e_up_neg * math.expm1(2.0 * alpha * s2)
        return 4.0 * s / math.sqrt(scale * gap)

    def lower(s):
        if s == 0.0:
            return lower_limit
        s2 = s * s
        gap = -e_lo * math.expm1(-2.0 * alpha * s2) - alpha * e_lo_neg * math.expm1(2.0 * s2)
        return 4.0 * s / math.sqrt(scale * gap)

    return upper, lower


def _integrate_piece(f, upper: float, label: str) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, _ = quad(f, 0.0, upper, epsabs=Config.QUAD_EPS, epsrel=Config.QUAD_EPS,
                            limit=Config.QUAD_LIMIT)
            return float(value)
        except IntegrationWarning as e:
            logger.warning(f"Gauss-Kronrod did not converge on the {label} piece ({e}); using tanh-sinh")
    try:
        with mpmath.workdps(30):
            value = mpmath.quad(lambda s: f(float(s)), [0, upper], method="tanh-sinh")
        return float(value)
    except Exception as e:
        raise IntegratorError(f"Quadrature failed on the {label} piece: {e}")


def period_quadrature(beta: float, alpha: float) -> float:
    """P(beta) = integral over [-t1, t0] of 2 dt / sqrt(1 - beta^2/(alpha+1) (alpha e^{2t} + e^{-2 alpha t}))"""
    alpha = check_alpha(alpha, positive=True)
    beta = _check_beta(beta)
    times = endpoint_times(beta, alpha)
    upper, lower = _period_pieces(beta, alpha, times)
    return (_integrate_piece(upper, math.sqrt(times.t0), "upper")
            + _integrate_piece(lower, math.sqrt(times.t1), "lower"))


def period_sol(beta: float) -> float:
    """alpha = 1 closed form 4/sqrt(1+beta^2) K((1-beta^2)/(1+beta^2))"""
    beta = _check_beta(beta, closed=True)
    b2 = beta * beta
    return 4.0 / math.sqrt(1.0 + b2) * ellip_K((1.0 - b2) / (1.0 + b2))


def period_half_elliptic(beta: float, times: Optional[EndpointTimes] = None) -> float:
    """alpha = 1/2 closed form in terms of the endpoint times"""
    beta = _check_beta(beta)
    times = times or endpoint_times(beta, 0.5)
    denom = math.exp(times.t0 - times.t1) + 2.0 * math.exp(times.t1)
    m = 2.0 * (math.exp(times.t1) - math.exp(-times.t0)) / denom
    return 4.0 * SQRT3 / (beta * math.sqrt(denom)) * ellip_K(m)


def period(beta: float, alpha: float) -> float:
    """Best available evaluation of P: closed forms where they exist"""
    alpha = check_alpha(alpha, positive=True)
    beta = _check_beta(beta, closed=True)
    if beta == 1.0:
        return limit_period(alpha) if alpha in (0.5, 1.0) else _limit_by_quadrature(alpha)
    if alpha == 1.0:
        return period_sol(beta)
    if alpha == 0.5:
        return period_half_elliptic(beta)
    return period_quadrature(beta, alpha)


def _limit_by_quadrature(alpha: float) -> float:
    return period_quadrature(1.0 - 1e-9, alpha)


# ---------------------------------------------------------------------------
# beta <-> x0
# ---------------------------------------------------------------------------

def _flat_level_coefficient(alpha: float) -> float:
    # H(V_beta) = beta^{1+alpha} * coefficient
    return alpha ** (alpha / 2.0) / (1.0 + alpha) ** ((1.0 + alpha) / 2.0)


def beta_from_level(level: float, alpha: float) -> float:
    alpha = check_alpha(alpha, positive=True)
    beta = (level / _flat_level_coefficient(alpha)) ** (1.0 / (1.0 + alpha))
    return min(beta, 1.0)


def beta_from_x0(x0: float, alpha: float) -> float:
    """beta of the loop through (x0, sqrt(1-x0^2), 0)"""
    alpha = check_alpha(alpha, positive=True)
    x0 = float(x0)
    lower = equilibrium_abscissa(alpha)
    if not lower <= x0 < 1.0:
        raise DomainError(f"x0 must lie in [{lower:.12g}, 1) for alpha={alpha}, got {x0}")
    if alpha == 0.5:
        return min(1.0, (1.5 * SQRT3 * (x0 - x0 ** 3)) ** (1.0 / 3.0))
    return beta_from_level(x0 ** alpha * math.sqrt(1.0 - x0 * x0), alpha)


def x0_from_beta(beta: float, alpha: float) -> float:
    alpha = check_alpha(alpha, positive=True)
    beta = _check_beta(beta, closed=True)
    lower = equilibrium_abscissa(alpha)
    if beta == 1.0:
        return lower
    target = beta ** (1.0 + alpha) * _flat_level_coefficient(alpha)
    return float(brentq(lambda x: x ** alpha * math.sqrt(1.0 - x * x) - target, lower, 1.0,
                        xtol=1e-16, rtol=4 * np.finfo(float).eps))


def loop_beta(direction: Sequence[float], alpha: float) -> Optional[float]:
    """beta of the loop level set through a unit direction, None off the loops"""
    u = np.asarray(direction, dtype=float)
    if u[0] == 0.0 or u[1] == 0.0:
        return None
    level = level_value(np.abs(u), alpha)
    beta = beta_from_level(level, alpha)
    if beta >= 1.0 - 1e-12:
        return None
    return beta


# ---------------------------------------------------------------------------
# alpha = 1/2 closed forms in x0
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfPeriodClosedForm:
    """Constants of y(t)^2 = nu1 + nu2 dn(t nu3, nu4)^2 for alpha = 1/2"""
    x0: float
    s: float
    nu1: float
    nu2: float
    nu3: float
    nu4: float
    sigma1: float
    sigma2: float

    @classmethod
    def from_x0(cls, x0: float) -> "HalfPeriodClosedForm":
        x0 = _check_x0_half(x0)
        x2 = x0 * x0
        s = x0 * math.sqrt(4.0 - 3.0 * x2)
        plus = 2.0 - 3.0 * x2 + s
        minus = 2.0 - 3.0 * x2 - s
        nu3 = math.sqrt(plus) / (2.0 * math.sqrt(2.0))
        nu4 = minus / plus
        return cls(
            x0=x0, s=s,
            nu1=0.5 * (x2 - s), nu2=0.5 * plus, nu3=nu3, nu4=nu4,
            sigma1=4.0 / math.sqrt(s),
            sigma2=(s + 3.0 * x2 - 2.0) / (2.0 * s),
        )

    @property
    def ds(self) -> float:
        return (4.0 * self.x0 - 6.0 * self.x0 ** 3) / self.s

    @property
    def dsigma1(self) -> float:
        return -2.0 * self.s ** -1.5 * self.ds

    @property
    def dsigma2(self) -> float:
        x0 = self.x0
        return (6.0 * x0 * self.s - (3.0 * x0 * x0 - 2.0) * self.ds) / (2.0 * self.s ** 2)

    def y_squared(self, t: float) -> float:
        return self.nu1 + self.nu2 * jacobi_dn(t * self.nu3, self.nu4) ** 2

    def period(self) -> float:
        k = imaginary_modulus_K(self.nu4) if self.nu4 < 0.0 else ellip_K(self.nu4)
        return 2.0 * k / self.nu3

    def y_squared_integral(self) -> float:
        """Integral of y^2 over [0, P/2]"""
        return self.nu1 * 0.5 * self.period() + self.nu2 / self.nu3 * ellip_E(self.nu4)


def period_half(x0: float) -> float:
    """alpha = 1/2 period as a function of x0, 2 K(nu4)/nu3"""
    return HalfPeriodClosedForm.from_x0(x0).period()


def period_derivative_terms(x0: float) -> Tuple[float, float]:
    """Coefficients of K(sigma2) and E(sigma2) in dP/dx0 (undefined at sigma2 = 0)"""
    c = HalfPeriodClosedForm.from_x0(x0)
    ratio = c.sigma1 * c.dsigma2 / (2.0 * c.sigma2)
    return c.dsigma1 - ratio, ratio / (1.0 - c.sigma2)


def dperiod_dx0(x0: float) -> float:
    """dP/dx0 for alpha = 1/2 from P = sigma1 K(sigma2)"""
    c = HalfPeriodClosedForm.from_x0(x0)
    return c.dsigma1 * ellip_K(c.sigma2) + c.sigma1 * c.dsigma2 * ellip_K_derivative(c.sigma2)


def derivative_bound_gap(x0: float) -> float:
    """G(x0) = dP/dx0 - pi (1/(2 sqrt x0) + 2 x0 sqrt x0/(1 - x0^2))"""
    x0 = _check_x0_half(x0)
    root = math.sqrt(x0)
    return dperiod_dx0(x0) - math.pi * (0.5 / root + 2.0 * x0 * root / (1.0 - x0 * x0))


# ---------------------------------------------------------------------------
# Half-period partner
# ---------------------------------------------------------------------------

def half_period_partner(x0: float, alpha: float) -> Tuple[float, float]:
    """The other equatorial point (x1, y1) of the loop through x0, with x1 below the equilibrium"""
    alpha = check_alpha(alpha, positive=True)
    lower = equilibrium_abscissa(alpha)
    if not lower < x0 < 1.0:
        raise DomainError(f"x0 must lie in ({lower:.12g}, 1), got {x0}")
    level = x0 ** alpha * math.sqrt(1.0 - x0 * x0)
    x1 = brentq(lambda x: x ** alpha * math.sqrt(1.0 - x * x) - level, 0.0, lower,
                xtol=1e-300, rtol=4 * np.finfo(float).eps)
    return float(x1), math.sqrt(1.0 - x1 * x1)


def half_period_partner_derivatives(x0: float, alpha: float) -> Tuple[float, float]:
    """(dx1/dx0, dy1/dx0) for the half-period partner point"""
    x1, y1 = half_period_partner(x0, alpha)
    y0 = math.sqrt(1.0 - x0 * x0)
    d_level = x0 ** (alpha - 1.0) * (alpha * y0 * y0 - x0 * x0) / y0
    dy1 = d_level / (x1 ** (alpha - 2.0) * (x1 * x1 - alpha * y1 * y1))
    return -y1 * dy1 / x1, dy1


# ---------------------------------------------------------------------------
# Loops and holonomy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LoopSpec:
    alpha: float
    beta: float
    x0: float
    period: float
    holonomy: Optional[float] = None

    @classmethod
    def from_x0(cls, x0: float, alpha: float, with_holonomy: bool = False) -> "LoopSpec":
        alpha = check_alpha(alpha, positive=True)
        beta = beta_from_x0(x0, alpha)
        loop = cls(alpha, beta, float(x0), period(beta, alpha))
        if with_holonomy:
            loop = cls(alpha, beta, float(x0), loop.period, holonomy(loop))
        return loop

    @classmethod
    def from_beta(cls, beta: float, alpha: float, with_holonomy: bool = False) -> "LoopSpec":
        return cls.from_x0(x0_from_beta(beta, alpha), alpha, with_holonomy)


def holonomy(loop: LoopSpec) -> float:
    """sqrt|a^alpha b| at the endpoint of the perfect symmetric geodesic"""
    from solvegeo.core.flow import flow_symmetric, require_half_period

    trajectory = flow_symmetric(loop.x0, None, loop.alpha)
    rho = require_half_period(trajectory)
    state = trajectory.state_at(rho)
    return math.sqrt(abs(abs(state.a) ** loop.alpha * state.b))


def holonomy_from_direction(direction: Sequence[float], alpha: float) -> float:
    """Holonomy computed from the perfect geodesic starting along any loop direction"""
    from solvegeo.core.flow import exp_map

    u = np.asarray(direction, dtype=float)
    beta = loop_beta(u, alpha)
    if beta is None:
        raise DomainError("Direction does not lie on a loop level set")
    end = exp_map(period(beta, alpha) * u, alpha)
    return math.sqrt(abs(abs(end.x) ** alpha * end.y))


def companion_line_holonomy(alpha: float, period_value: float) -> float:
    """Holonomy of the straight flat geodesic of length period_value"""
    a = period_value * equilibrium_abscissa(alpha)
    b = period_value / math.sqrt(1.0 + alpha)
    return math.sqrt(a ** alpha * b)
