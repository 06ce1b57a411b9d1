"""
ODE integration for G_alpha.

Covers the structure-field flow on the unit tangent sphere, the geodesic
(exponential map) system, the backward symmetric flowline with its endpoint
coordinates (a, b), the x0-variational system, and the concatenation
product used as an independent oracle for the exponential map.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from solvegeo.config.settings import Config
from solvegeo.core.algebra import (
    GroupPoint,
    SphereState,
    check_alpha,
    equilibrium_abscissa,
    structure_field,
)
from solvegeo.core.errors import DomainError, IntegratorError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = Config.REL_TOL
    abs_tol: float = Config.ABS_TOL
    max_step: float = Config.MAX_STEP
    dense_output: bool = True
    method: str = Config.INTEGRATOR_METHOD

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("Integrator tolerances must be positive")

    @classmethod
    def with_tol(cls, tol: Optional[float]) -> "IntegratorConfig":
        if tol is None:
            return cls()
        return cls(rel_tol=tol, abs_tol=tol)


DEFAULT_CONFIG = IntegratorConfig()


def _integrate(rhs: Callable, t_span: Tuple[float, float], y0: np.ndarray,
               cfg: IntegratorConfig):
    """solve_ivp with a retry that halves the step cap after a failure"""
    span = abs(t_span[1] - t_span[0])
    retrying = Retrying(
        stop=stop_after_attempt(Config.INTEGRATOR_RETRIES + 1),
        retry=retry_if_exception_type(IntegratorError),
        reraise=True,
    )
    for attempt in retrying:
        with attempt:
            n = attempt.retry_state.attempt_number
            max_step = cfg.max_step if n == 1 else min(cfg.max_step, span / (50.0 * 2 ** n))
            if n > 1:
                logger.warning(f"Retrying integration with max_step={max_step:.3g} (attempt {n})")
            sol = solve_ivp(
                rhs, t_span, y0,
                method=cfg.method,
                rtol=cfg.rel_tol,
                atol=cfg.abs_tol,
                max_step=max_step,
                dense_output=cfg.dense_output,
            )
            if not sol.success:
                t_reached = float(sol.t[-1]) if len(sol.t) else t_span[0]
                raise IntegratorError(f"Integration failed: {sol.message}", t_reached=t_reached)
    return sol


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------

def sphere_rhs(alpha: float):
    def rhs(t, u):
        return structure_field(u, alpha)
    return rhs


def geodesic_rhs(alpha: float, speed: float = 1.0):
    """State (x, y, z, u1, u2, u3); the leading axis may carry a batch"""
    def rhs(t, s):
        x, y, z, u1, u2, u3 = s[0], s[1], s[2], s[3], s[4], s[5]
        return speed * np.array([
            u1 * np.exp(z),
            u2 * np.exp(-alpha * z),
            u3,
            u1 * u3,
            -alpha * u2 * u3,
            alpha * u2 * u2 - u1 * u1,
        ])
    return rhs


def symmetric_rhs(alpha: float):
    def rhs(t, s):
        x, y, z, a, b = s
        return np.array([
            -x * z,
            alpha * y * z,
            x * x - alpha * y * y,
            2.0 * x + a * z,
            2.0 * y - alpha * b * z,
        ])
    return rhs


def variational_rhs(alpha: float):
    def rhs(t, s):
        x, y, z, a, b, xb, yb, zb, ab, bb = s
        return np.array([
            -x * z,
            alpha * y * z,
            x * x - alpha * y * y,
            2.0 * x + a * z,
            2.0 * y - alpha * b * z,
            -x * zb - z * xb,
            alpha * y * zb + alpha * z * yb,
            2.0 * x * xb - 2.0 * alpha * y * yb,
            2.0 * xb + z * ab + a * zb,
            2.0 * yb - alpha * z * bb - alpha * b * zb,
        ])
    return rhs


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicState:
    pos: GroupPoint
    dir: SphereState

    @classmethod
    def from_array(cls, s: Sequence[float]) -> "GeodesicState":
        u = np.asarray(s[3:6], dtype=float)
        return cls(GroupPoint.from_array(s[:3]), SphereState.from_vector(u))


@dataclass(frozen=True)
class SymFlowState:
    x: float
    y: float
    z: float
    a: float
    b: float


@dataclass(frozen=True)
class VarFlowState(SymFlowState):
    xbar: float
    ybar: float
    zbar: float
    abar: float
    bbar: float


@dataclass(frozen=True)
class Trajectory:
    """Dense solution of one integration; read-only after construction"""
    alpha: float
    t_end: float
    solution: object = field(repr=False)
    columns: Tuple[str, ...] = ()

    def __call__(self, t):
        return self.solution.sol(t)

    @property
    def t_steps(self) -> np.ndarray:
        return self.solution.t

    def sample(self, n: int, t_start: float = 0.0, t_stop: Optional[float] = None):
        """Return (times, states) on a uniform grid; states has shape (dim, n)"""
        t_stop = self.t_end if t_stop is None else t_stop
        times = np.linspace(t_start, t_stop, n)
        return times, self.solution.sol(times)

    def derivative(self, t) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class SphereTrajectory(Trajectory):
    def state_at(self, t: float) -> SphereState:
        return SphereState.from_vector(self(t))

    def derivative(self, t):
        return structure_field(self(t), self.alpha)


@dataclass(frozen=True)
class GeodesicTrajectory(Trajectory):
    def state_at(self, t: float) -> GeodesicState:
        return GeodesicState.from_array(self(t))

    def derivative(self, t):
        return geodesic_rhs(self.alpha)(t, self(t))


@dataclass(frozen=True)
class SymmetricTrajectory(Trajectory):
    x0: float = 0.0
    rho: Optional[float] = None

    def state_at(self, t: float) -> SymFlowState:
        return SymFlowState(*(float(v) for v in self(t)[:5]))

    def derivative(self, t):
        return symmetric_rhs(self.alpha)(t, self(t)[:5])

    def second_derivative_b(self, t):
        """b'' = alpha b (alpha z^2 - z')"""
        x, y, z, a, b = self(t)[:5]
        zp = x * x - self.alpha * y * y
        return self.alpha * b * (self.alpha * z * z - zp)


@dataclass(frozen=True)
class VariationalTrajectory(SymmetricTrajectory):
    def state_at(self, t: float) -> VarFlowState:
        return VarFlowState(*(float(v) for v in self(t)))

    def derivative(self, t):
        return variational_rhs(self.alpha)(t, self(t))


# ---------------------------------------------------------------------------
# Sphere flow and exponential map
# ---------------------------------------------------------------------------

def flow_sphere(s0, t_end: float, alpha: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> SphereTrajectory:
    """Flow of u' = Sigma_alpha(u) from s0 for time t_end (negative runs backwards)"""
    alpha = check_alpha(alpha)
    u0 = s0.as_array() if isinstance(s0, SphereState) else SphereState.from_vector(s0).as_array()
    sol = _integrate(sphere_rhs(alpha), (0.0, float(t_end)), u0, cfg)
    end = sol.y[:, -1]
    drift = abs(float(end @ end) - 1.0)
    if drift > 1e-9:
        logger.warning(f"Unit-norm drift {drift:.2e} after flowing to t={t_end}")
    return SphereTrajectory(alpha=alpha, t_end=float(t_end), solution=sol,
                            columns=("u1", "u2", "u3"))


def _split_vector(v: Sequence[float]) -> Tuple[np.ndarray, float]:
    v = np.asarray(v, dtype=float)
    length = float(np.linalg.norm(v))
    if length == 0.0:
        raise DomainError("exp_map is undefined for the zero vector direction")
    return v / length, length


def geodesic(v: Sequence[float], alpha: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> GeodesicTrajectory:
    """Unit-speed geodesic from the identity with initial velocity direction v/|v|, run for time |v|"""
    alpha = check_alpha(alpha)
    u0, length = _split_vector(v)
    y0 = np.concatenate([np.zeros(3), u0])
    sol = _integrate(geodesic_rhs(alpha), (0.0, length), y0, cfg)
    return GeodesicTrajectory(alpha=alpha, t_end=length, solution=sol,
                              columns=("x", "y", "z", "u1", "u2", "u3"))


def exp_map(v: Sequence[float], alpha: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> GroupPoint:
    """Riemannian exponential map at the identity"""
    alpha = check_alpha(alpha)
    u0, length = _split_vector(v)
    y0 = np.concatenate([np.zeros(3), u0])
    dense_off = IntegratorConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_step, False, cfg.method)
    sol = _integrate(geodesic_rhs(alpha), (0.0, length), y0, dense_off)
    return GroupPoint.from_array(sol.y[:3, -1])


def exp_map_batch(vectors: np.ndarray, alpha: float,
                  cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Exponential map of many vectors of equal length in one integration.

    Every geodesic is rescaled to the unit time interval, so all of them
    share one adaptive step sequence. Returns an (n, 3) array.
    """
    alpha = check_alpha(alpha)
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    lengths = np.linalg.norm(vectors, axis=1)
    if np.any(lengths == 0.0):
        raise DomainError("exp_map is undefined for the zero vector direction")
    if not np.allclose(lengths, lengths[0], rtol=1e-12, atol=0.0):
        raise DomainError("exp_map_batch expects vectors of a common length")
    length = float(lengths[0])
    units = vectors / lengths[:, None]
    n = units.shape[0]
    y0 = np.concatenate([np.zeros((n, 3)), units], axis=1).T.ravel()
    base = geodesic_rhs(alpha, speed=length)

    def rhs(t, flat):
        return base(t, flat.reshape(6, n)).ravel()

    dense_off = IntegratorConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_step, False, cfg.method)
    sol = _integrate(rhs, (0.0, 1.0), y0, dense_off)
    return sol.y[:, -1].reshape(6, n)[:3].T.copy()


def concat_product(points: np.ndarray, alpha: float) -> GroupPoint:
    """Left fold p_0 * p_1 * ... * p_n of group elements given as rows of an (n+1, 3) array.

    Expanding the fold, the x-coordinate collects x_j e^{z_0+...+z_{j-1}} and
    the y-coordinate y_j e^{-alpha (z_0+...+z_{j-1})}.
    """
    points = np.asarray(points, dtype=float)
    z = points[:, 2]
    z_before = np.concatenate(([0.0], np.cumsum(z)[:-1]))
    x = float(np.sum(points[:, 0] * np.exp(z_before)))
    y = float(np.sum(points[:, 1] * np.exp(-alpha * z_before)))
    return GroupPoint(x, y, float(np.sum(z)))


def exp_map_concat(v: Sequence[float], n_steps: int, alpha: float,
                   cfg: IntegratorConfig = DEFAULT_CONFIG) -> GroupPoint:
    """Endpoint as the product (eps l_0) * ... * (eps l_n) over the partitioned flowline.

    First order: the distance to exp_map(v) is about |v| max(1, |exp_map(v)|) / n_steps.
    """
    alpha = check_alpha(alpha)
    if n_steps < 1:
        raise DomainError(f"n_steps must be at least 1, got {n_steps}")
    u0, length = _split_vector(v)
    trajectory = flow_sphere(u0, length, alpha, cfg)
    times = np.linspace(0.0, length, n_steps + 1)
    flowline = trajectory(times).T
    eps = length / (n_steps + 1)
    return concat_product(eps * flowline, alpha)


# ---------------------------------------------------------------------------
# Conserved quantities along geodesics
# ---------------------------------------------------------------------------

def geodesic_momenta(state, alpha: float) -> Tuple[float, float, float]:
    """Killing momenta (A, B, C) = (u1 e^{-z}, u2 e^{alpha z}, A x - alpha B y + u3)"""
    s = _geodesic_array(state)
    x, y, z, u1, u2, u3 = s
    a_mom = u1 * math.exp(-z)
    b_mom = u2 * math.exp(alpha * z)
    return a_mom, b_mom, a_mom * x - alpha * b_mom * y + u3


def _geodesic_array(state) -> np.ndarray:
    if isinstance(state, GeodesicState):
        return np.concatenate([state.pos.as_array(), state.dir.as_array()])
    return np.asarray(state, dtype=float)


def cylinder_shift(beta: float, alpha: float, z_sign: float = 1.0) -> float:
    """Offset w0 of the cylinder axis for a geodesic leaving the identity along V_beta.

    Zero for beta = 1; z_sign is the sign of the third component of V_beta.
    """
    alpha = check_alpha(alpha, positive=True)
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    return math.copysign(1.0, z_sign) * math.sqrt(1.0 - beta * beta) * math.sqrt(1.0 + alpha) / (beta * math.sqrt(alpha))


def grayson_cylinder_residual(g, beta: float, alpha: float, shift: float = 0.0) -> float:
    """(w - shift)^2 + e^{2z} + e^{-2 alpha z}/alpha - (1+alpha)/(alpha beta^2), w = x - y sqrt(alpha)"""
    alpha = check_alpha(alpha, positive=True)
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if isinstance(g, GeodesicState):
        x, y, z = g.pos.x, g.pos.y, g.pos.z
    elif isinstance(g, GroupPoint):
        x, y, z = g.x, g.y, g.z
    else:
        x, y, z = (float(c) for c in np.asarray(g)[:3])
    w = x - y * math.sqrt(alpha) - shift
    return w * w + math.exp(2.0 * z) + math.exp(-2.0 * alpha * z) / alpha - (1.0 + alpha) / (alpha * beta * beta)


def cylinder_profile(beta: float, alpha: float, n: int = 200,
                     shift: float = 0.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cross-section of the cylinder in the (w, z) plane as (z, w_minus, w_plus) on n heights"""
    alpha = check_alpha(alpha, positive=True)
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    level = (1.0 + alpha) / (alpha * beta * beta)

    def excess(z):
        return math.exp(2.0 * z) + math.exp(-2.0 * alpha * z) / alpha - level

    if excess(0.0) >= 0.0:
        return np.zeros(1), np.full(1, shift), np.full(1, shift)
    z_hi = brentq(excess, 0.0, 0.5 * math.log(level) + 1.0)
    z_lo = brentq(excess, -math.log(alpha * level) / (2.0 * alpha) - 1.0, 0.0)
    z = np.linspace(z_lo, z_hi, n)
    half_width = np.sqrt(np.maximum(0.0, level - np.exp(2.0 * z) - np.exp(-2.0 * alpha * z) / alpha))
    return z, shift - half_width, shift + half_width


# ---------------------------------------------------------------------------
# Symmetric flowlines
# ---------------------------------------------------------------------------

def check_x0(x0: float, alpha: float) -> float:
    alpha = check_alpha(alpha, positive=True)
    x0 = float(x0)
    lower = equilibrium_abscissa(alpha)
    if not lower < x0 < 1.0:
        raise DomainError(f"x0 must lie in ({lower:.12g}, 1) for alpha={alpha}, got {x0}")
    return x0


def _expected_half_period(x0: float, alpha: float) -> Optional[float]:
    from solvegeo.core.period import beta_from_x0, period_quadrature

    try:
        beta = beta_from_x0(x0, alpha)
        if beta >= 1.0:
            return None
        return 0.5 * period_quadrature(beta, alpha)
    except (DomainError, IntegratorError) as e:
        logger.warning(f"No quadrature half period for x0={x0}, alpha={alpha}: {e}")
        return None


def _locate_half_period(sol, t_end: float) -> Optional[float]:
    """First positive time at which z returns to zero from above"""
    t_steps = sol.t
    z_steps = sol.y[2]
    for i in range(1, len(t_steps)):
        if z_steps[i - 1] > 0.0 and z_steps[i] <= 0.0:
            lo, hi = t_steps[i - 1], t_steps[i]
            if z_steps[i] == 0.0:
                return float(hi)
            return float(brentq(lambda t: sol.sol(t)[2], lo, hi,
                                xtol=Config.HALF_PERIOD_XTOL, rtol=4 * np.finfo(float).eps))
    return None


def _symmetric_initial(x0: float) -> np.ndarray:
    return np.array([x0, math.sqrt(1.0 - x0 * x0), 0.0, 0.0, 0.0])


def _run_symmetric(x0: float, t_end: Optional[float], alpha: float, cfg: IntegratorConfig,
                   rhs, y0: np.ndarray):
    expected = _expected_half_period(x0, alpha)
    if t_end is None:
        if expected is None:
            raise DomainError(f"Cannot choose a default time span for x0={x0}")
        t_end = 1.05 * expected + 0.5
    # z oscillates with amplitude ~ x0 - equilibrium; atol must stay below it
    amplitude = min(1.0, x0 - equilibrium_abscissa(alpha))
    dense = IntegratorConfig(cfg.rel_tol, cfg.abs_tol * amplitude, cfg.max_step, True, cfg.method)
    sol = _integrate(rhs, (0.0, float(t_end)), y0, dense)
    rho = _locate_half_period(sol, t_end)
    if rho is not None and expected is not None and abs(rho - expected) > Config.HALF_PERIOD_AGREEMENT:
        logger.warning(f"Half period from the flow ({rho:.12g}) and from quadrature "
                       f"({expected:.12g}) differ by {abs(rho - expected):.2e}")
    return sol, float(t_end), rho


def flow_symmetric(x0: float, t_end: Optional[float], alpha: float,
                   cfg: IntegratorConfig = DEFAULT_CONFIG) -> SymmetricTrajectory:
    """Backward flowline from (x0, sqrt(1-x0^2), 0) together with the endpoint coordinates (a, b).

    t_end=None runs slightly past the half period.
    """
    alpha = check_alpha(alpha, positive=True)
    x0 = check_x0(x0, alpha)
    sol, t_end, rho = _run_symmetric(x0, t_end, alpha, cfg, symmetric_rhs(alpha),
                                     _symmetric_initial(x0))
    return SymmetricTrajectory(alpha=alpha, t_end=t_end, solution=sol,
                               columns=("x", "y", "z", "a", "b"), x0=x0, rho=rho)


def flow_variational(x0: float, t_end: Optional[float], alpha: float,
                     cfg: IntegratorConfig = DEFAULT_CONFIG) -> VariationalTrajectory:
    """Symmetric flowline augmented with its x0-derivatives"""
    alpha = check_alpha(alpha, positive=True)
    x0 = check_x0(x0, alpha)
    y0 = math.sqrt(1.0 - x0 * x0)
    init = np.concatenate([_symmetric_initial(x0), [1.0, -x0 / y0, 0.0, 0.0, 0.0]])
    columns = ("x", "y", "z", "a", "b", "xbar", "ybar", "zbar", "abar", "bbar")
    sol, t_end, rho = _run_symmetric(x0, t_end, alpha, cfg, variational_rhs(alpha), init)
    return VariationalTrajectory(alpha=alpha, t_end=t_end, solution=sol,
                                 columns=columns, x0=x0, rho=rho)


def require_half_period(trajectory: SymmetricTrajectory) -> float:
    if trajectory.rho is None:
        raise IntegratorError(f"No half period found for x0={trajectory.x0} before t={trajectory.t_end}",
                              t_reached=trajectory.t_end)
    return trajectory.rho
