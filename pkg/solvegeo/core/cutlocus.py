"""
Endpoint curves of symmetric flowlines, segment classification and the
property checks built on them.

Every check returns a CheckReport whose worst_margin is positive when the
property holds (distance to the failing side, in the check's own units).
"""

import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from solvegeo.config.settings import Config
from solvegeo.core.algebra import check_alpha, equilibrium_abscissa
from solvegeo.core.errors import DomainError
from solvegeo.core.flow import (
    DEFAULT_CONFIG,
    IntegratorConfig,
    exp_map,
    flow_symmetric,
    flow_variational,
    require_half_period,
)
from solvegeo.core.period import (
    HalfPeriodClosedForm,
    LoopSpec,
    beta_from_x0,
    derivative_bound_gap,
    dperiod_dx0,
    half_period_partner,
    half_period_partner_derivatives,
    loop_beta,
    period,
    period_derivative_terms,
    period_quadrature,
)
from solvegeo.utils.parallel import sweep
from solvegeo.utils.precision import ratio_bound

logger = logging.getLogger(__name__)


@dataclass
class CheckReport:
    """Outcome of one property check over a grid"""
    name: str
    passed: bool
    worst_margin: float
    location: Dict[str, float] = field(default_factory=dict)
    grid: Dict[str, Any] = field(default_factory=dict)
    violations: List[Dict[str, float]] = field(default_factory=list)
    exploratory: bool = False
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        record = asdict(self)
        record["check_name"] = record.pop("name")
        record["pass"] = record.pop("passed")
        return record

    def log(self):
        marker = "✅" if self.passed else ("⚠️" if self.exploratory else "❌")
        logger.info(f"{marker} {self.name}: worst margin {self.worst_margin:.3e} at {self.location}")


def build_report(name: str, margins: Sequence[float], locations: Sequence[Dict[str, float]],
                 grid: Dict[str, Any], exploratory: bool = False, **details) -> CheckReport:
    margins = np.asarray(margins, dtype=float)
    if margins.size == 0:
        raise DomainError(f"{name}: empty grid")
    worst = int(np.nanargmin(margins)) if np.any(np.isfinite(margins)) else 0
    violations = [dict(loc, margin=float(m)) for m, loc in zip(margins, locations) if not m > 0.0]
    report = CheckReport(
        name=name,
        passed=not violations,
        worst_margin=float(margins[worst]),
        location=dict(locations[worst]),
        grid=grid,
        violations=violations[:50],
        exploratory=exploratory,
        details=details,
    )
    report.log()
    return report


def open_grid(lo: float, hi: float, n: int, inset: float = Config.GRID_INSET) -> np.ndarray:
    """Uniform grid on the open interval (lo, hi), endpoints inset"""
    return np.linspace(lo + inset, hi - inset, n)


def canonical_x0_grid(alpha: float, n: int, inset: float = Config.GRID_INSET) -> np.ndarray:
    return open_grid(equilibrium_abscissa(alpha), 1.0, n, inset)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

class SegmentKind(enum.Enum):
    SMALL = "small"
    PERFECT = "perfect"
    LARGE = "large"
    UNCLASSIFIABLE = "unclassifiable"


@dataclass(frozen=True)
class SegmentClass:
    kind: SegmentKind
    slack: float
    period: Optional[float] = None


def classify(v: Sequence[float], alpha: float, tol: Optional[float] = None) -> SegmentClass:
    """Compare the length of v with the period of the loop through its direction"""
    alpha = check_alpha(alpha, positive=True)
    v = np.asarray(v, dtype=float)
    length = float(np.linalg.norm(v))
    if length == 0.0:
        raise DomainError("classify needs a nonzero vector")
    beta = loop_beta(v / length, alpha)
    if beta is None:
        return SegmentClass(SegmentKind.UNCLASSIFIABLE, float("nan"))
    p = period(beta, alpha)
    slack = length - p
    threshold = (Config.PERFECT_TOL if tol is None else tol) * max(1.0, p)
    if abs(slack) <= threshold:
        kind = SegmentKind.PERFECT
    elif slack < 0.0:
        kind = SegmentKind.SMALL
    else:
        kind = SegmentKind.LARGE
    return SegmentClass(kind, slack, p)


# ---------------------------------------------------------------------------
# Lambda curves and the boundary curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneCurveSample:
    t: float
    a: float
    b: float
    aprime: float
    bprime: float


@dataclass(frozen=True)
class BoundaryPoint:
    x0: float
    a_end: float
    b_end: float
    da_dx0: float
    db_dx0: float
    rho: float
    x_half: float
    y_half: float
    drho_dx0: float
    db_dx0_direct: float


def _plane_samples(trajectory, times: np.ndarray) -> List[PlaneCurveSample]:
    states = trajectory(times)
    x, y, z, a, b = states[:5]
    alpha = trajectory.alpha
    aprime = 2.0 * x + a * z
    bprime = 2.0 * y - alpha * b * z
    return [PlaneCurveSample(float(t), float(ai), float(bi), float(ap), float(bp))
            for t, ai, bi, ap, bp in zip(times, a, b, aprime, bprime)]


def lambda_curve(x0: float, alpha: float, n_samples: int = 200,
                 cfg: IntegratorConfig = DEFAULT_CONFIG) -> List[PlaneCurveSample]:
    """Samples of (a(t), b(t)) at n_samples times in (0, rho]"""
    trajectory = flow_symmetric(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    times = rho * np.arange(1, n_samples + 1) / n_samples
    return _plane_samples(trajectory, times)


def box_margin(samples: Sequence[PlaneCurveSample]) -> float:
    """Smallest distance of the interior samples to the box (0, a_end) x (0, b_end)"""
    end = samples[-1]
    interior = samples[:-1]
    if not interior:
        return float("inf")
    return min(min(s.a, s.b, end.a - s.a, end.b - s.b) for s in interior)


def triangle_excess(samples: Sequence[PlaneCurveSample]) -> float:
    """Largest height of the curve above the diagonal from the origin to (a_end, b_end).

    Positive values mean the curve leaves the triangle (0,0), (a_end,0), (a_end,b_end).
    """
    end = samples[-1]
    slope = end.b / end.a
    return max(s.b - slope * s.a for s in samples[:-1])


def boundary_point(x0: float, alpha: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> BoundaryPoint:
    """Endpoint of the perfect symmetric geodesic through x0 and its x0-derivative"""
    trajectory = flow_variational(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    s = trajectory.state_at(rho)
    alpha = trajectory.alpha
    zprime = s.x * s.x - alpha * s.y * s.y
    if alpha == 0.5:
        drho = 0.5 * dperiod_dx0(x0)
    else:
        drho = -s.zbar / zprime
    aprime = 2.0 * s.x + s.a * s.z
    bprime = 2.0 * s.y - alpha * s.b * s.z
    bbar_closed = -(2.0 * s.zbar + alpha * s.b * s.ybar - s.a * s.xbar) / (s.y * (1.0 + alpha))
    return BoundaryPoint(
        x0=float(x0),
        a_end=s.a,
        b_end=s.b,
        da_dx0=s.abar + drho * aprime,
        db_dx0=bbar_closed + drho * bprime,
        rho=rho,
        x_half=s.x,
        y_half=s.y,
        drho_dx0=drho,
        db_dx0_direct=s.bbar + drho * bprime,
    )


def boundary_curve(alpha: float, x0_grid: Sequence[float],
                   cfg: IntegratorConfig = DEFAULT_CONFIG) -> List[BoundaryPoint]:
    alpha = check_alpha(alpha, positive=True)
    return sweep(lambda x0: boundary_point(float(x0), alpha, cfg), x0_grid)


# ---------------------------------------------------------------------------
# Checks on symmetric flowlines
# ---------------------------------------------------------------------------

def bprime_trace(x0: float, alpha: float, span: float = 1.0, n: int = 1000,
                 cfg: IntegratorConfig = DEFAULT_CONFIG) -> Tuple[np.ndarray, np.ndarray, float]:
    """(t, b'(t)) on (0, span * rho]; returns times, values and rho"""
    trajectory = flow_symmetric(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    if span > 1.0:
        trajectory = flow_symmetric(x0, span * rho * 1.01 + 0.1, alpha, cfg)
    times = span * rho * np.arange(1, n + 1) / n
    x, y, z, a, b = trajectory(times)[:5]
    return times, 2.0 * y - trajectory.alpha * b * z, rho


def _bounding_box_margins(args) -> Tuple[float, Dict[str, float]]:
    alpha, x0, n_t, cfg = args
    trajectory = flow_symmetric(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    times = rho * np.arange(1, n_t + 1) / (n_t + 1)
    x, y, z, a, b = trajectory(times)[:5]
    bprime = 2.0 * y - alpha * b * z
    aprime = 2.0 * x + a * z
    i_b, i_a = int(np.argmin(bprime)), int(np.argmin(aprime))
    if bprime[i_b] <= aprime[i_a]:
        return float(bprime[i_b]), {"alpha": alpha, "x0": float(x0), "t": float(times[i_b]), "which": 1.0}
    return float(aprime[i_a]), {"alpha": alpha, "x0": float(x0), "t": float(times[i_a]), "which": 0.0}


def check_bounding_box(alphas: Sequence[float], n_x0: int = 50, n_t: int = 1000,
                       cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """a'(t) > 0 and b'(t) > 0 on (0, rho) over an (alpha, x0) grid.

    location["which"] is 1 when the minimum is attained by b', 0 for a'.
    """
    jobs = []
    for alpha in alphas:
        alpha = check_alpha(alpha, positive=True)
        for x0 in canonical_x0_grid(alpha, n_x0, inset=1e-3):
            jobs.append((alpha, float(x0), n_t, cfg))
    results = sweep(_bounding_box_margins, jobs)
    return build_report("bounding_box", [m for m, _ in results], [loc for _, loc in results],
                        {"alphas": list(alphas), "n_x0": n_x0, "n_t": n_t})


def check_bprime_beyond_half_period(x0: float = 0.985, alpha: float = 0.75,
                                    cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """b' turns negative somewhere in (rho, 4 rho) while staying positive on (0, rho]"""
    times, bprime, rho = bprime_trace(x0, alpha, span=4.0, n=4000, cfg=cfg)
    beyond = times > rho
    i = int(np.argmin(np.where(beyond, bprime, np.inf)))
    margin = -float(bprime[i])
    within_min = float(np.min(bprime[~beyond]))
    return build_report("bprime_beyond_half_period", [margin], [{"x0": x0, "alpha": alpha, "t": float(times[i])}],
                        {"span": "(rho, 4 rho)"}, rho=rho, min_bprime_within=within_min)


def check_flowline_identities(x0: float, alpha: float, n: int = 400,
                              cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """Norm, a x - alpha b y = 2z, b y = 2 int y^2, a x = 2 int x^2 and 2 alpha int z >= t alpha z on (0, rho)"""
    from scipy.integrate import cumulative_trapezoid

    trajectory = flow_symmetric(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    times = np.linspace(0.0, rho, 20 * n + 1)
    x, y, z, a, b = trajectory(times)[:5]
    norm_drift = float(np.max(np.abs(x * x + y * y + z * z - 1.0)))
    linear = float(np.max(np.abs(a * x - alpha * b * y - 2.0 * z)))
    int_y2 = cumulative_trapezoid(y * y, times, initial=0.0)
    int_x2 = cumulative_trapezoid(x * x, times, initial=0.0)
    int_z = cumulative_trapezoid(z, times, initial=0.0)
    # trapezoid error at this spacing stays well below 1e-6
    integral_b = float(np.max(np.abs(b * y - 2.0 * int_y2)))
    integral_a = float(np.max(np.abs(a * x - 2.0 * int_x2)))
    inner = slice(1, -1)
    average_gap = float(np.min(2.0 * alpha * int_z[inner] - times[inner] * alpha * z[inner]))
    margins = [1e-9 - norm_drift, 1e-8 - linear, 1e-6 - integral_b, 1e-6 - integral_a, average_gap + 1e-9]
    names = ["norm", "linear", "integral_b", "integral_a", "average_z"]
    return build_report("flowline_identities", margins, [{"x0": x0, "alpha": alpha, "identity": k} for k in range(5)],
                        {"samples": len(times)}, identities=names)


def check_b_second_derivative(x0: float, alpha: float, n: int = 200,
                              cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """Central differences of b' against alpha b (alpha z^2 - z')"""
    trajectory = flow_symmetric(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    h = 1e-4
    times = np.linspace(0.05 * rho, 0.95 * rho, n)

    def bprime(t):
        x, y, z, a, b = trajectory(t)[:5]
        return 2.0 * y - alpha * b * z

    numeric = (bprime(times + h) - bprime(times - h)) / (2.0 * h)
    closed = trajectory.second_derivative_b(times)
    err = np.abs(numeric - closed)
    i = int(np.argmax(err))
    return build_report("b_second_derivative", [1e-6 - float(err[i])], [{"x0": x0, "alpha": alpha, "t": float(times[i])}],
                        {"n": n, "h": h})


def check_lambda_endpoint(x0: float, alpha: float, fraction: float = 0.5,
                          cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """exp_map(2t p_t) lands on (a(t), b(t), 0)"""
    trajectory = flow_symmetric(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    t = fraction * rho
    s = trajectory.state_at(t)
    end = exp_map(2.0 * t * np.array([s.x, s.y, s.z]), alpha, cfg)
    distance = math.dist((end.x, end.y, end.z), (s.a, s.b, 0.0))
    return build_report("lambda_endpoint", [1e-6 - distance], [{"x0": x0, "alpha": alpha, "t": t}], {})


# ---------------------------------------------------------------------------
# Perfect geodesics
# ---------------------------------------------------------------------------

def check_reciprocity(x0: float, alpha: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> Tuple[float, CheckReport]:
    """Endpoint of the perfect geodesic is mu (alpha y, x, 0) at the half-period point; returns mu"""
    point = boundary_point(x0, alpha, cfg)
    residual = point.a_end * point.x_half - alpha * point.b_end * point.y_half
    mu = point.a_end / (alpha * point.y_half)
    report = build_report("reciprocity", [1e-7 - abs(residual), abs(mu)],
                          [{"x0": x0, "alpha": alpha}, {"x0": x0, "alpha": alpha}], {}, mu=mu, residual=residual)
    return mu, report


def check_partner_identification(x0: float, alpha: float, fraction: float = 0.5,
                                 cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """Perfect vectors P(x, y, z) and P(x, y, -z) reach the same point"""
    loop = LoopSpec.from_x0(x0, alpha)
    trajectory = flow_symmetric(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    s = trajectory.state_at(fraction * rho)
    plus = exp_map(loop.period * np.array([s.x, s.y, s.z]), alpha, cfg)
    minus = exp_map(loop.period * np.array([s.x, s.y, -s.z]), alpha, cfg)
    distance = math.dist((plus.x, plus.y, plus.z), (minus.x, minus.y, minus.z))
    return build_report("partner_identification", [1e-6 - distance], [{"x0": x0, "alpha": alpha}], {},
                        endpoint=[plus.x, plus.y, plus.z], period=loop.period)


def check_half_period_point(x0: float, alpha: float, cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """(x(rho), y(rho)) is the other equatorial point of the level set, and 0 < x(rho) < y(rho)"""
    trajectory = flow_symmetric(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    s = trajectory.state_at(rho)
    x1, y1 = half_period_partner(x0, alpha)
    err = max(abs(s.x - x1), abs(s.y - y1))
    loc = {"x0": x0, "alpha": alpha}
    return build_report("half_period_point", [1e-8 - err, s.x, s.y - s.x], [loc, loc, loc], {},
                        x_half=s.x, y_half=s.y, rho=rho)


def central_difference(f: Callable[[float], np.ndarray], x0: float, h: float) -> np.ndarray:
    """Richardson-extrapolated central difference (4 D(h/2) - D(h)) / 3, error O(h^4)"""
    def d(step):
        return (np.asarray(f(x0 + step)) - np.asarray(f(x0 - step))) / (2.0 * step)

    return (4.0 * d(0.5 * h) - d(h)) / 3.0


def _difference_step(x0: float, alpha: float, h: float) -> float:
    return min(h, 0.5 * (x0 - equilibrium_abscissa(alpha)), 0.5 * (1.0 - x0))


def check_variational_vs_differences(x0: float, alpha: float, h: float = Config.FINITE_DIFFERENCE_STEP,
                                     cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """Bar variables at t = rho against central differences in x0"""
    trajectory = flow_variational(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    state = trajectory(rho)
    h = _difference_step(x0, alpha, h)
    differences = central_difference(lambda x: flow_symmetric(x, None, alpha, cfg)(rho)[:5], x0, h)
    bars = state[5:10]
    scale = np.maximum(np.abs(bars), 1e-2)
    rel = np.abs(differences - bars) / scale
    i = int(np.argmax(rel))
    return build_report("variational_vs_differences", [1e-4 - float(rel[i])],
                        [{"x0": x0, "alpha": alpha, "component": float(i)}], {"h": h},
                        bars=bars.tolist(), differences=differences.tolist())


def check_variational_identities(x0: float, alpha: float, n: int = 400,
                                 cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """Identities linking the bar variables along the whole flowline"""
    trajectory = flow_variational(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    times = np.linspace(0.0, rho, n)
    x, y, z, a, b, xb, yb, zb, ab, bb = trajectory(times)
    sphere = np.max(np.abs(x * xb + y * yb + z * zb))
    orthogonal = np.max(np.abs(x * ab + y * bb))
    linear = np.max(np.abs(a * xb + x * ab - alpha * b * yb - alpha * y * bb - 2.0 * zb))
    core = 2.0 * zb + alpha * b * yb - a * xb
    abar_closed = np.max(np.abs(ab - core / (x * (1.0 + alpha))))
    margins = [1e-8 - sphere, 1e-7 - orthogonal, 1e-7 - linear, 1e-6 - abar_closed]
    loc = {"x0": x0, "alpha": alpha}
    return build_report("variational_identities", margins, [dict(loc, identity=float(k)) for k in range(4)],
                        {"samples": n})


def check_bars_at_half_period(x0: float, alpha: float = 0.5,
                              cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """zbar(rho) + (dP/dx0 / 2) z'(rho) = 0 with zbar(rho) > 0, z'(rho) < 0,
    and (xbar, ybar)(rho) equal to the x0-derivative of the half-period point"""
    trajectory = flow_variational(x0, None, alpha, cfg)
    rho = require_half_period(trajectory)
    s = trajectory.state_at(rho)
    zprime = s.x * s.x - alpha * s.y * s.y
    if alpha == 0.5:
        dp = dperiod_dx0(x0)
    else:
        h = _difference_step(x0, alpha, Config.FINITE_DIFFERENCE_STEP)
        dp = float(central_difference(lambda x: period_quadrature(beta_from_x0(x, alpha), alpha), x0, h))
    residual = (s.zbar + 0.5 * dp * zprime) / max(1.0, abs(s.zbar))
    dx1, dy1 = half_period_partner_derivatives(x0, alpha)
    partner_err = max(abs(s.xbar - dx1), abs(s.ybar - dy1))
    loc = {"x0": x0, "alpha": alpha}
    return build_report("bars_at_half_period",
                        [1e-6 - abs(residual), s.zbar, -zprime, 1e-6 - partner_err],
                        [loc] * 4, {}, zbar=s.zbar, zprime=zprime, xbar=s.xbar, ybar=s.ybar, dperiod_dx0=dp,
                        partner_derivatives=[dx1, dy1])


# ---------------------------------------------------------------------------
# Boundary-curve checks
# ---------------------------------------------------------------------------

def check_monotonicity(alpha: float, x0_grid: Sequence[float], b_floor: Optional[float] = None,
                       cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """da/dx0 > 0 and db/dx0 <= 1e-8 along the boundary curve (optionally b_end >= b_floor)"""
    points = boundary_curve(alpha, x0_grid, cfg)
    margins, locations = [], []
    for p in points:
        margins += [p.da_dx0, 1e-8 - p.db_dx0]
        locations += [{"x0": p.x0, "quantity": 0.0}, {"x0": p.x0, "quantity": 1.0}]
        if b_floor is not None:
            margins.append(p.b_end - b_floor)
            locations.append({"x0": p.x0, "quantity": 2.0})
    return build_report("monotonicity", margins, locations,
                        {"alpha": alpha, "n": len(points)}, exploratory=alpha != 0.5,
                        b_end_min=min(p.b_end for p in points))


def check_boundary_ordering(alpha: float, x0_grid: Sequence[float],
                            cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """0 < b_end < a_end; holds for alpha = 1, only reported otherwise"""
    points = boundary_curve(alpha, x0_grid, cfg)
    margins = [min(p.b_end, p.a_end - p.b_end) for p in points]
    return build_report("boundary_ordering", margins, [{"x0": p.x0} for p in points],
                        {"alpha": alpha, "n": len(points)}, exploratory=alpha != 1.0)


def check_db_chain_rule(x0: float, alpha: float, h: float = Config.FINITE_DIFFERENCE_STEP,
                        cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """Chain-rule db/dx0 against central differences of b_end and against the direct bbar value"""
    centre = boundary_point(x0, alpha, cfg)
    h = _difference_step(x0, alpha, h)
    fd = float(central_difference(lambda x: boundary_point(x, alpha, cfg).b_end, x0, h))
    scale = max(abs(fd), 1e-2)
    rel_fd = abs(centre.db_dx0 - fd) / scale
    rel_direct = abs(centre.db_dx0 - centre.db_dx0_direct) / scale
    loc = {"x0": x0, "alpha": alpha}
    return build_report("db_chain_rule", [1e-5 - rel_fd, 1e-6 - rel_direct], [loc, loc], {"h": h},
                        chain_rule=centre.db_dx0, finite_difference=fd, direct=centre.db_dx0_direct)


def check_decrease_condition(x0_grid: Sequence[float], cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """alpha = 1/2: 2 (x^2 + y^2) dP/dx0 < b ybar - 2 a xbar at the half period.

    The inequality forces db/dx0 < 0; it is only expected where b_end > pi,
    so the report is exploratory.
    """
    margins, locations = [], []
    for x0 in x0_grid:
        x0 = float(x0)
        trajectory = flow_variational(x0, None, 0.5, cfg)
        s = trajectory.state_at(require_half_period(trajectory))
        lhs = 2.0 * (s.x * s.x + s.y * s.y) * dperiod_dx0(x0)
        margins.append(s.b * s.ybar - 2.0 * s.a * s.xbar - lhs)
        locations.append({"x0": x0, "b_end": s.b})
    return build_report("decrease_condition", margins, locations, {"n": len(margins)}, exploratory=True)


def check_holonomy_monotone(alpha: float, x0_grid: Sequence[float]) -> CheckReport:
    """Holonomy increases with the period along a family of loops"""
    loops = sweep(lambda x0: LoopSpec.from_x0(float(x0), alpha, with_holonomy=True), x0_grid)
    loops = sorted(loops, key=lambda loop: loop.period)
    margins = [(b.holonomy - a.holonomy) / (b.period - a.period) for a, b in zip(loops, loops[1:])]
    locations = [{"period": a.period, "x0": a.x0} for a in loops[:-1]]
    return build_report("holonomy_monotone", margins, locations, {"alpha": alpha, "n": len(loops)})


def jacobian_smallest_singular_value(x0: float, alpha: float, fraction: float = 0.5,
                                     h: float = 1e-6, cfg: IntegratorConfig = DEFAULT_CONFIG) -> float:
    """Smallest singular value of the finite-difference Jacobian of exp_map at a perfect vector"""
    loop = LoopSpec.from_x0(x0, alpha)
    trajectory = flow_symmetric(x0, None, alpha, cfg)
    s = trajectory.state_at(fraction * require_half_period(trajectory))
    v = loop.period * np.array([s.x, s.y, s.z])
    columns = []
    for k in range(3):
        step = np.zeros(3)
        step[k] = h
        plus = exp_map(v + step, alpha, cfg).as_array()
        minus = exp_map(v - step, alpha, cfg).as_array()
        columns.append((plus - minus) / (2.0 * h))
    return float(np.linalg.svd(np.column_stack(columns), compute_uv=False)[-1])


# ---------------------------------------------------------------------------
# alpha = 1/2 closed-form checks
# ---------------------------------------------------------------------------

def half_grid(n: int) -> np.ndarray:
    return open_grid(1.0 / math.sqrt(3.0), 1.0, n)


def check_derivative_bound(x0_grid: Sequence[float]) -> CheckReport:
    """G(x0) = dP/dx0 - pi (1/(2 sqrt x0) + 2 x0 sqrt x0/(1-x0^2)) < 0"""
    values = [derivative_bound_gap(float(x0)) for x0 in x0_grid]
    return build_report("derivative_bound", [-g for g in values], [{"x0": float(x0)} for x0 in x0_grid],
                        {"n": len(values)}, values=values if len(values) <= 200 else None)


def check_ratio_bound(x0_grid: Sequence[float]) -> CheckReport:
    """Closed-form ratio bound < 1 (extended precision), cross-checked against its definition"""
    margins, locations, mismatch = [], [], 0.0
    for x0 in x0_grid:
        x0 = float(x0)
        value = ratio_bound(x0)
        margins.append(1.0 - value)
        locations.append({"x0": x0})
        mismatch = max(mismatch, abs(value - ratio_bound_definition(x0)))
    return build_report("ratio_bound", margins, locations, {"n": len(margins)}, max_form_mismatch=mismatch)


def ratio_bound_definition(x0: float) -> float:
    """((2 g - E-coefficient) / K-coefficient)^2, the unsimplified form of the ratio bound"""
    k_coef, e_coef = period_derivative_terms(x0)
    root = math.sqrt(x0)
    g = 0.5 / root + 2.0 * x0 * root / (1.0 - x0 * x0)
    return ((2.0 * g - e_coef) / k_coef) ** 2


def check_derivative_signs(x0_grid: Sequence[float]) -> CheckReport:
    """dP/dx0 > 0, the K-coefficient < 0 and the E-coefficient > 0"""
    margins, locations = [], []
    for x0 in x0_grid:
        x0 = float(x0)
        k_coef, e_coef = period_derivative_terms(x0)
        margins += [dperiod_dx0(x0), -k_coef, e_coef]
        locations += [{"x0": x0, "term": float(k)} for k in range(3)]
    return build_report("derivative_signs", margins, locations, {"n": len(x0_grid)})


def check_dn_closed_form(x0: float, n: int = 400, cfg: IntegratorConfig = DEFAULT_CONFIG) -> CheckReport:
    """y(t)^2 = nu1 + nu2 dn(t nu3, nu4)^2 on [0, rho] and the closed period/integral values"""
    from scipy.integrate import quad

    closed = HalfPeriodClosedForm.from_x0(x0)
    trajectory = flow_symmetric(x0, None, 0.5, cfg)
    rho = require_half_period(trajectory)
    times = np.linspace(0.0, rho, n)
    y = trajectory(times)[1]
    deviation = max(abs(yy * yy - closed.y_squared(t)) for t, yy in zip(times, y))
    period_err = abs(2.0 * rho - closed.period())
    integral, _ = quad(lambda t: trajectory(t)[1] ** 2, 0.0, rho, epsabs=1e-12, epsrel=1e-12, limit=200)
    integral_err = abs(integral - closed.y_squared_integral())
    loc = {"x0": x0}
    return build_report("dn_closed_form", [1e-7 - deviation, 1e-8 - period_err, 1e-8 - integral_err],
                        [loc] * 3, {"n": n}, deviation=deviation)


def richardson_limit(steps: Sequence[float], values: Sequence[float]) -> float:
    """Value at step 0 from the Richardson tableau of values sampled at decreasing steps.

    Column k removes the h^k term of the error expansion.
    """
    if len(steps) != len(values) or not steps:
        raise DomainError("richardson_limit needs one value per step")
    n = len(values)
    table = [[float(v)] for v in values]
    for k in range(1, n):
        for i in range(k, n):
            ratio = steps[i - k] / steps[i]
            table[i].append(table[i][k - 1] + (table[i][k - 1] - table[i - 1][k - 1]) / (ratio - 1.0))
    return table[-1][-1]


def explore_boundary_limit(alphas: Sequence[float], x0_values: Sequence[float] = (0.99, 0.999, 0.9999),
                           cfg: IntegratorConfig = DEFAULT_CONFIG) -> List[Dict[str, Any]]:
    """Extrapolate b_end as x0 -> 1 and compare with 2/alpha (exploratory)"""
    rows = []
    for alpha in alphas:
        values = [boundary_point(x0, alpha, cfg).b_end for x0 in x0_values]
        estimate = richardson_limit([1.0 - x0 for x0 in x0_values], values)
        unstable = not math.isfinite(estimate) or abs(estimate - values[-1]) > abs(values[-1] - values[0])
        if unstable:
            estimate = values[-1]
            logger.warning(f"Extrapolation for alpha={alpha} is unstable; reporting the last value")
        rows.append({
            "alpha": alpha,
            "values": values,
            "estimate": estimate,
            "conjectured": 2.0 / alpha,
            "distance": estimate - 2.0 / alpha,
            "unstable": unstable,
        })
    return rows
