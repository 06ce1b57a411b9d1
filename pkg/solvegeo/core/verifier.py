"""
Verification suite for the `verify` command.
Runs the property checks over their grids and collects one report per check.
"""

import json
import logging
import math
import os
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.integrate import quad

from solvegeo.config.settings import Config
from solvegeo.core import cutlocus
from solvegeo.core.algebra import check_alpha, level_value
from solvegeo.core.cutlocus import CheckReport, build_report
from solvegeo.core.errors import DomainError, IntegratorError
from solvegeo.core.flow import (
    IntegratorConfig,
    cylinder_shift,
    flow_sphere,
    flow_symmetric,
    geodesic,
    grayson_cylinder_residual,
    require_half_period,
)
from solvegeo.core.period import (
    flat_direction,
    period_half,
    period_half_elliptic,
    period_quadrature,
    period_sol,
    x0_from_beta,
)
from solvegeo.core.special_fns import (
    ellip_E,
    ellip_K,
    imaginary_modulus_K,
    jacobi_dn,
    legendre_residual,
)
from solvegeo.core.sphere import (
    DirectionGrid,
    face_indices_valid,
    geodesic_sphere,
    lobe_extent,
    reflection_residual,
    sector_violations,
)
from solvegeo.scripts.performance_monitor import PerformanceMonitor

logger = logging.getLogger(__name__)

# alpha, P(alpha, 0.999)
PERIOD_TABLE = (
    (0.1, 14.0792), (0.2, 9.94735), (0.3, 8.11985), (0.4, 7.03114), (0.5, 6.28842),
    (0.6, 5.7403), (0.7, 5.31436), (0.8, 4.97106), (0.9, 4.68673), (1.0, 4.44622),
)
TABLE_BETA = 0.999


class SuiteConfig:
    """Grid sizes and switches of the verification suite"""
    DEFAULT_ALPHAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    DEFAULT_LOOP_ALPHAS = [1.0, 0.75, 0.5]
    DEFAULT_SPHERE_ALPHAS = [1.0, 0.75, 0.5, 0.0]

    def __init__(self, config_file: str = None):
        self.config_file = config_file or Config.VERIFY_CONFIG_FILE
        self.alphas = list(self.DEFAULT_ALPHAS)
        self.loop_alphas = list(self.DEFAULT_LOOP_ALPHAS)
        self.sphere_alphas = list(self.DEFAULT_SPHERE_ALPHAS)
        self.closed_form_points = Config.DEFAULT_GRID_POINTS
        self.monotonicity_points = 500
        self.beta_points = 100
        self.bbox_x0_points = 50
        self.bbox_t_points = 1000
        self.loops_per_alpha = 10
        self.random_cases = 20
        self.seed = 0
        self.sphere_enabled = True
        self.sphere_resolution = list(Config.SPHERE_RESOLUTION)
        self.sphere_radius = Config.SPHERE_RADIUS
        self.enabled_checks: List[str] = []
        self.load_config()

    def load_config(self):
        """Load configuration from file"""
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, 'r') as f:
                    config = json.load(f)
                for key, value in config.items():
                    if hasattr(self, key) and key != "config_file":
                        setattr(self, key, value)
                    else:
                        logger.warning(f"Ignoring unknown suite setting {key!r}")
                logger.info(f"Loaded configuration from {self.config_file}")
            else:
                logger.warning(f"Configuration file {self.config_file} not found. Using defaults.")
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading configuration: {e}")

    def save_config(self):
        """Save configuration to file"""
        config = {k: v for k, v in vars(self).items() if k != "config_file"}
        try:
            with open(self.config_file, 'w') as f:
                json.dump(config, f, indent=4)
            logger.info(f"Saved configuration to {self.config_file}")
        except OSError as e:
            logger.error(f"Error saving configuration: {e}")

    def is_enabled(self, name: str) -> bool:
        return not self.enabled_checks or name in self.enabled_checks


def _alphas_for(alpha: Optional[float], candidates) -> List[float]:
    if alpha is None:
        return [float(a) for a in candidates]
    return [alpha]


# ---------------------------------------------------------------------------
# Checks without a home in cutlocus
# ---------------------------------------------------------------------------

def check_period_table(alpha: Optional[float]) -> List[CheckReport]:
    rows = [(a, p) for a, p in PERIOD_TABLE if alpha is None or a == alpha]
    if not rows:
        return []
    margins, locations, values = [], [], []
    for a, printed in rows:
        value = period_quadrature(TABLE_BETA, a)
        values.append(value)
        margins += [5e-3 - abs(value - printed), value - math.pi * math.sqrt(2.0 / a)]
        locations += [{"alpha": a, "part": 0.0}, {"alpha": a, "part": 1.0}]
    return [build_report("period_table", margins, locations, {"beta": TABLE_BETA}, values=values)]


def check_closed_form_periods(alpha: Optional[float], n: int) -> List[CheckReport]:
    betas = np.linspace(0.05, 0.995, n)
    reports = []
    if alpha in (None, 1.0):
        err = [abs(period_sol(b) - period_quadrature(b, 1.0)) for b in betas]
        reports.append(build_report("closed_form_period_alpha_one", [1e-8 - e for e in err],
                                    [{"beta": float(b)} for b in betas], {"n": n}))
    if alpha in (None, 0.5):
        margins, locations = [], []
        for b in betas:
            reference = period_quadrature(b, 0.5)
            margins += [1e-8 - abs(period_half_elliptic(b) - reference),
                        1e-8 - abs(period_half(x0_from_beta(b, 0.5)) - reference)]
            locations += [{"beta": float(b), "form": 0.0}, {"beta": float(b), "form": 1.0}]
        reports.append(build_report("closed_form_period_alpha_half", margins, locations, {"n": n}))
    return reports


def check_conservation(alpha: Optional[float], cases: int, seed: int,
                       cfg: IntegratorConfig) -> List[CheckReport]:
    """Level-set drift, cylinder residual and the linear endpoint identity on random cases"""
    rng = np.random.default_rng(seed)
    level, cylinder, linear = [], [], []
    locations = []
    for _ in range(cases):
        a = alpha if alpha is not None else float(rng.uniform(0.2, 1.0))
        angle = rng.uniform(0.1, 0.5 * math.pi - 0.1)
        u3 = rng.uniform(-0.9, 0.9)
        r = math.sqrt(1.0 - u3 * u3)
        u0 = np.array([r * math.cos(angle), r * math.sin(angle), u3])
        times, states = flow_sphere(u0, 20.0, a, cfg).sample(400)
        h0 = level_value(u0, a)
        level.append(1e-9 - max(abs(level_value(s, a) - h0) for s in states.T))

        beta = float(rng.uniform(0.5, 0.95))
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        trajectory = geodesic(30.0 * flat_direction(beta, a, sign), a, cfg)
        shift = cylinder_shift(beta, a, sign)
        _, path = trajectory.sample(300)
        cylinder.append(1e-7 - max(abs(grayson_cylinder_residual(p, beta, a, shift)) for p in path.T))

        lower = math.sqrt(a / (1.0 + a))
        x0 = float(rng.uniform(lower + 1e-3, 1.0 - 1e-3))
        sym = flow_symmetric(x0, None, a, cfg)
        rho = require_half_period(sym)
        x, y, z, aa, bb = sym(np.linspace(0.0, rho, 400))[:5]
        linear.append(1e-8 - float(np.max(np.abs(aa * x - a * bb * y - 2.0 * z))))
        locations.append({"alpha": a, "x0": x0, "beta": beta})
    return [
        build_report("level_set_conservation", level, locations, {"cases": cases, "time": 20.0}),
        build_report("cylinder_conservation", cylinder, locations, {"cases": cases, "length": 30.0}),
        build_report("linear_endpoint_identity", linear, locations, {"cases": cases}),
    ]


def check_special_functions(seed: int, cases: int = 100) -> List[CheckReport]:
    rng = np.random.default_rng(seed)
    # edge values of the sampled range always included
    ms = np.concatenate([rng.uniform(-5.0, 0.999, cases), [-5.0 + 1e-9, 0.0, 0.999 - 1e-9]])
    k_err, e_err, dn_err, imag_err, legendre = [], [], [], [], []
    for m in ms:
        k_ref = quad(lambda t: 1.0 / math.sqrt(1.0 - m * math.sin(t) ** 2), 0.0, 0.5 * math.pi,
                     epsabs=1e-14, epsrel=1e-14)[0]
        e_ref = quad(lambda t: math.sqrt(1.0 - m * math.sin(t) ** 2), 0.0, 0.5 * math.pi,
                     epsabs=1e-14, epsrel=1e-14)[0]
        k_err.append(1e-11 - abs(ellip_K(m) - k_ref) / k_ref)
        e_err.append(1e-11 - abs(ellip_E(m) - e_ref) / e_ref)
        k = ellip_K(m)
        dn_sq = quad(lambda u: jacobi_dn(u, m) ** 2, 0.0, k, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        dn_err.append(1e-10 - abs(dn_sq - ellip_E(m)))
        if m < 0.0:
            imag_err.append(1e-12 * max(1.0, k_ref) - abs(imaginary_modulus_K(m) - k_ref))
        if 0.0 < m < 1.0:
            legendre.append(1e-11 - abs(legendre_residual(m)))
    loc = [{"m": float(m)} for m in ms]
    return [
        build_report("elliptic_K", k_err, loc, {"cases": cases}),
        build_report("elliptic_E", e_err, loc, {"cases": cases}),
        build_report("dn_square_integral", dn_err, loc, {"cases": cases}),
        build_report("imaginary_modulus", imag_err or [1.0], [{"m": float(m)} for m in ms if m < 0.0] or [{}],
                     {"cases": len(imag_err)}),
        build_report("legendre_relation", legendre or [1.0], [{"m": float(m)} for m in ms if 0.0 < m < 1.0] or [{}],
                     {"cases": len(legendre)}),
    ]


def check_boundary_symmetry_alpha_one(x0_values, cfg: IntegratorConfig) -> CheckReport:
    """For alpha = 1 the half-period point is (y0, x0)"""
    margins, locations = [], []
    for x0 in x0_values:
        trajectory = flow_symmetric(float(x0), None, 1.0, cfg)
        s = trajectory.state_at(require_half_period(trajectory))
        y0 = math.sqrt(1.0 - x0 * x0)
        margins.append(1e-8 - max(abs(s.y - x0), abs(s.x - y0)))
        locations.append({"x0": float(x0)})
    return build_report("boundary_symmetry_alpha_one", margins, locations, {"n": len(margins)})


def check_sphere(alphas, resolution, radius: float, cfg: IntegratorConfig) -> List[CheckReport]:
    grid = DirectionGrid.build(*resolution)
    reports = []
    for alpha in alphas:
        mesh = geodesic_sphere(alpha, radius, grid, cfg)
        pole_err = max(float(np.max(np.abs(mesh.vertices[0] - [0.0, 0.0, radius]))),
                       float(np.max(np.abs(mesh.vertices[grid.south] - [0.0, 0.0, -radius]))))
        margins = [
            -float(len(mesh.failed)) + 0.5,
            1e-7 - reflection_residual(mesh, grid, "x"),
            1e-7 - reflection_residual(mesh, grid, "y"),
            1e-9 - pole_err,
            0.5 - sector_violations(mesh, grid),
            1.0 if face_indices_valid(mesh) else -1.0,
        ]
        loc = {"alpha": alpha}
        reports.append(build_report("geodesic_sphere", margins,
                                    [dict(loc, part=float(k)) for k in range(len(margins))],
                                    {"resolution": list(resolution), "radius": radius},
                                    lobe_extent=lobe_extent(mesh)))
    return reports


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

class VerificationSuite:
    """Runs the enabled checks, timing each one"""

    def __init__(self, config: SuiteConfig = None, alpha: Optional[float] = None,
                 cfg: IntegratorConfig = None):
        self.config = config or SuiteConfig()
        self.alpha = None if alpha is None else check_alpha(alpha)
        self.cfg = cfg or IntegratorConfig()
        self.monitor = PerformanceMonitor()
        self.reports: List[CheckReport] = []

    def _checks(self) -> Dict[str, Callable[[], List[CheckReport]]]:
        c, cfg, alpha = self.config, self.cfg, self.alpha
        loop_alphas = _alphas_for(alpha, c.loop_alphas) if alpha is None or alpha > 0 else []
        half = alpha in (None, 0.5)
        half_grid = cutlocus.half_grid(c.closed_form_points)
        sample_x0 = lambda a, n: cutlocus.canonical_x0_grid(a, n, inset=1e-2)

        checks: Dict[str, Callable[[], List[CheckReport]]] = {
            "period_table": lambda: check_period_table(alpha),
            "closed_form_periods": lambda: check_closed_form_periods(alpha, c.beta_points),
            "special_functions": lambda: check_special_functions(c.seed),
        }
        if alpha is None or alpha > 0:
            checks["conservation"] = lambda: check_conservation(alpha, c.random_cases, c.seed, cfg)
            checks["bounding_box"] = lambda: [cutlocus.check_bounding_box(
                _alphas_for(alpha, c.alphas), c.bbox_x0_points, c.bbox_t_points, cfg)]
            checks["loops"] = lambda: [
                report
                for a in loop_alphas
                for x0 in sample_x0(a, c.loops_per_alpha)
                for report in (
                    cutlocus.check_partner_identification(float(x0), a, cfg=cfg),
                    cutlocus.check_reciprocity(float(x0), a, cfg)[1],
                    cutlocus.check_half_period_point(float(x0), a, cfg),
                )
            ]
            checks["variational"] = lambda: [
                report
                for a in loop_alphas
                for x0 in sample_x0(a, 3)
                for report in (
                    cutlocus.check_variational_vs_differences(float(x0), a, cfg=cfg),
                    cutlocus.check_variational_identities(float(x0), a, cfg=cfg),
                    cutlocus.check_bars_at_half_period(float(x0), a, cfg),
                )
            ]
            checks["flowline_identities"] = lambda: [
                report
                for a in loop_alphas
                for x0 in sample_x0(a, 3)
                for report in (
                    cutlocus.check_flowline_identities(float(x0), a, cfg=cfg),
                    cutlocus.check_b_second_derivative(float(x0), a, cfg=cfg),
                    cutlocus.check_lambda_endpoint(float(x0), a, cfg=cfg),
                )
            ]
            checks["exploration"] = lambda: self._exploration(loop_alphas)
            checks["boundary_ordering"] = lambda: [
                cutlocus.check_boundary_ordering(a, sample_x0(a, 20), cfg) for a in loop_alphas]
            checks["holonomy"] = lambda: [
                cutlocus.check_holonomy_monotone(a, sample_x0(a, c.loops_per_alpha)) for a in loop_alphas]
        if alpha in (None, 0.75):
            checks["bprime_beyond_half_period"] = lambda: [cutlocus.check_bprime_beyond_half_period(cfg=cfg)]
        if alpha in (None, 1.0):
            checks["boundary_symmetry"] = lambda: [
                check_boundary_symmetry_alpha_one(sample_x0(1.0, c.loops_per_alpha), cfg)]
        if half:
            checks["monotonicity"] = lambda: [cutlocus.check_monotonicity(
                0.5, cutlocus.half_grid(c.monotonicity_points), b_floor=4.0 - 1e-3, cfg=cfg)]
            checks["boundary_limit"] = lambda: [self._boundary_limit()]
            checks["derivative_bound"] = lambda: [cutlocus.check_derivative_bound(half_grid)]
            checks["ratio_bound"] = lambda: [cutlocus.check_ratio_bound(half_grid)]
            checks["derivative_signs"] = lambda: [cutlocus.check_derivative_signs(half_grid)]
            checks["dn_closed_form"] = lambda: [
                cutlocus.check_dn_closed_form(float(x0), cfg=cfg) for x0 in cutlocus.half_grid(20)]
            checks["decrease_condition"] = lambda: [cutlocus.check_decrease_condition(
                cutlocus.half_grid(50), cfg)]
        if c.sphere_enabled:
            sphere_alphas = [a for a in c.sphere_alphas if alpha is None or a == alpha]
            if sphere_alphas:
                checks["sphere"] = lambda: check_sphere(sphere_alphas, c.sphere_resolution, c.sphere_radius, cfg)
        return checks

    def _boundary_limit(self) -> CheckReport:
        point = cutlocus.boundary_point(0.9999, 0.5, self.cfg)
        return build_report("boundary_limit", [0.05 - abs(point.b_end - 4.0)], [{"x0": 0.9999}], {},
                            b_end=point.b_end)

    def _exploration(self, alphas: List[float]) -> List[CheckReport]:
        """Limit of b_end as x0 -> 1 against 2/alpha, and the exp_map Jacobian at perfect vectors"""
        rows = cutlocus.explore_boundary_limit(alphas, cfg=self.cfg)
        limit = build_report("boundary_limit_exploration",
                             [0.05 - abs(r["distance"]) for r in rows],
                             [{"alpha": r["alpha"]} for r in rows], {}, exploratory=True, rows=rows)
        sigmas, locations = [], []
        for a in alphas:
            for x0 in cutlocus.canonical_x0_grid(a, 3, inset=1e-2):
                sigmas.append(cutlocus.jacobian_smallest_singular_value(float(x0), a, cfg=self.cfg))
                locations.append({"alpha": a, "x0": float(x0)})
        jacobian = build_report("exp_map_jacobian", sigmas, locations, {}, exploratory=True)
        return [limit, jacobian]

    def run(self) -> List[CheckReport]:
        self.reports = []
        for name, check in self._checks().items():
            if not self.config.is_enabled(name):
                continue
            try:
                with self.monitor.track_operation(name, {"alpha": self.alpha}):
                    self.reports.extend(check())
            except (DomainError, IntegratorError) as e:
                self.reports.append(CheckReport(name=name, passed=False, worst_margin=float("nan"),
                                                details={"error": str(e)}))
        summary = self.monitor.get_summary().get("summary", {})
        logger.info(f"Ran {summary.get('total_operations', 0)} checks in {summary.get('total_duration', '0s')}")
        return self.reports

    @property
    def passed(self) -> bool:
        return all(r.passed or r.exploratory for r in self.reports)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "pass": self.passed,
            "checks": [r.to_dict() for r in self.reports],
        }
