import math

import numpy as np
import pytest

from solvegeo.core.cutlocus import (
    CheckReport,
    SegmentKind,
    boundary_point,
    box_margin,
    bprime_trace,
    build_report,
    canonical_x0_grid,
    central_difference,
    check_b_second_derivative,
    check_bars_at_half_period,
    check_boundary_ordering,
    check_bounding_box,
    check_bprime_beyond_half_period,
    check_db_chain_rule,
    check_decrease_condition,
    check_derivative_bound,
    check_derivative_signs,
    check_dn_closed_form,
    check_flowline_identities,
    check_half_period_point,
    check_holonomy_monotone,
    check_lambda_endpoint,
    check_monotonicity,
    check_partner_identification,
    check_ratio_bound,
    check_reciprocity,
    check_variational_identities,
    check_variational_vs_differences,
    classify,
    half_grid,
    explore_boundary_limit,
    jacobian_smallest_singular_value,
    lambda_curve,
    richardson_limit,
    triangle_excess,
)
from solvegeo.core.errors import DomainError
from solvegeo.core.period import flat_direction, period

HALF_GRID = np.linspace(0.6, 0.99, 8)


class TestClassify:
    def test_long_segment_is_large(self):
        result = classify(4.5 * flat_direction(0.999, 1.0), 1.0)
        assert result.kind is SegmentKind.LARGE
        assert result.slack > 0.0

    def test_period_length_is_perfect(self):
        p = period(0.999, 1.0)
        assert classify(p * flat_direction(0.999, 1.0), 1.0).kind is SegmentKind.PERFECT
        assert classify(4.0 * flat_direction(0.999, 1.0), 1.0).kind is SegmentKind.SMALL

    def test_vertical_direction_is_unclassifiable(self):
        result = classify([0.0, 0.0, 1.0], 1.0)
        assert result.kind is SegmentKind.UNCLASSIFIABLE
        assert math.isnan(result.slack)

    def test_zero_vector(self):
        with pytest.raises(DomainError):
            classify([0.0, 0.0, 0.0], 0.5)


def test_lambda_curve_stays_in_its_box():
    samples = lambda_curve(0.8, 0.5, n_samples=100)
    assert len(samples) == 100
    assert box_margin(samples) > 0.0
    assert all(s.aprime > 0.0 and s.bprime > 0.0 for s in samples[:-1])


def test_lambda_curve_leaves_the_triangle_near_the_equator():
    assert triangle_excess(lambda_curve(0.99945, 0.5, n_samples=400)) > 0.0


def test_bprime_trace_is_positive_up_to_the_half_period():
    times, values, rho = bprime_trace(0.9, 0.5, n=200)
    assert times[-1] == pytest.approx(rho)
    assert np.all(values > 0.0)


def test_bounding_box_on_a_small_grid():
    assert check_bounding_box([0.5, 1.0], n_x0=4, n_t=100).passed


def test_bprime_turns_negative_beyond_the_half_period():
    report = check_bprime_beyond_half_period()
    assert report.passed
    assert report.details["min_bprime_within"] > 0.0


@pytest.mark.parametrize("alpha, x0", [(0.5, 0.8), (0.75, 0.9), (1.0, 0.7)])
def test_flowline_identities(alpha, x0):
    assert check_flowline_identities(x0, alpha).passed
    assert check_b_second_derivative(x0, alpha, n=50).passed
    assert check_lambda_endpoint(x0, alpha).passed


@pytest.mark.parametrize("alpha, x0", [(0.5, 0.8), (1.0, 0.9)])
def test_perfect_geodesic_checks(alpha, x0):
    mu, report = check_reciprocity(x0, alpha)
    assert report.passed
    assert math.isfinite(mu)
    assert check_partner_identification(x0, alpha).passed
    assert check_half_period_point(x0, alpha).passed


@pytest.mark.parametrize("alpha, x0", [(0.5, 0.75), (0.75, 0.9), (0.5, 0.99), (1.0, 0.9)])
def test_variational_checks(alpha, x0):
    assert check_variational_vs_differences(x0, alpha).passed
    assert check_variational_identities(x0, alpha, n=100).passed
    assert check_bars_at_half_period(x0, alpha).passed


def test_bars_at_half_period_use_the_quadrature_period():
    report = check_bars_at_half_period(0.9, 0.75)
    assert report.passed
    details = report.details
    assert details["dperiod_dx0"] > 0.0
    assert details["dperiod_dx0"] == pytest.approx(-2.0 * details["zbar"] / details["zprime"], rel=1e-6)


def test_richardson_difference():
    value = central_difference(np.sin, 0.7, 1e-2)
    assert value == pytest.approx(math.cos(0.7), abs=1e-9)
    plain = (math.sin(0.71) - math.sin(0.69)) / 0.02
    assert abs(value - math.cos(0.7)) < abs(plain - math.cos(0.7))


def test_richardson_limit_removes_polynomial_error():
    steps = [1e-2, 1e-3, 1e-4]
    values = [4.0 + 2.0 * h - 3.0 * h * h for h in steps]
    assert richardson_limit(steps, values) == pytest.approx(4.0, abs=1e-12)
    assert richardson_limit([0.5], [1.25]) == 1.25
    with pytest.raises(DomainError):
        richardson_limit([1e-2, 1e-3], [4.0])


def test_boundary_point_at_alpha_one_is_symmetric():
    point = boundary_point(0.8, 1.0)
    assert point.x_half == pytest.approx(0.6, abs=1e-8)
    assert point.y_half == pytest.approx(0.8, abs=1e-8)
    assert point.db_dx0 == pytest.approx(point.db_dx0_direct, rel=1e-6)


def test_monotonicity_at_one_half():
    report = check_monotonicity(0.5, [0.65, 0.75, 0.85, 0.95])
    assert report.passed
    assert not report.exploratory
    assert report.details["b_end_min"] > 4.0 - 1e-3


def test_boundary_ordering():
    assert check_boundary_ordering(1.0, [0.75, 0.85, 0.95]).passed
    near_equilibrium = check_boundary_ordering(0.5, [0.58, 0.6])
    assert near_equilibrium.exploratory
    assert not near_equilibrium.passed


def test_db_chain_rule():
    assert check_db_chain_rule(0.8, 0.5).passed
    assert check_db_chain_rule(0.9, 0.75).passed


def test_decrease_condition_is_exploratory():
    report = check_decrease_condition([0.9, 0.95])
    assert report.exploratory
    assert math.isfinite(report.worst_margin)


def test_holonomy_grows_with_the_period():
    assert check_holonomy_monotone(1.0, [0.75, 0.85, 0.95]).passed


def test_closed_form_checks_at_one_half():
    assert check_derivative_bound(HALF_GRID).passed
    assert check_derivative_signs(HALF_GRID).passed
    report = check_ratio_bound(HALF_GRID)
    assert report.passed
    assert report.details["max_form_mismatch"] < 1e-8
    assert check_dn_closed_form(0.8).passed


def test_closed_forms_at_the_grid_extremes():
    grid = half_grid(20)
    assert check_dn_closed_form(float(grid[0])).passed
    assert check_dn_closed_form(float(grid[-1])).passed
    signs = check_derivative_signs(half_grid(400))
    assert signs.passed
    assert signs.location["x0"] < 0.6


def test_boundary_limit_at_one_half():
    row = explore_boundary_limit([0.5])[0]
    assert row["conjectured"] == 4.0
    assert row["estimate"] == pytest.approx(4.0, abs=0.05)


def test_jacobian_singular_value_at_a_perfect_vector():
    value = jacobian_smallest_singular_value(0.8, 0.5)
    assert math.isfinite(value) and value >= 0.0


def test_report_serialization():
    report = build_report("demo", [0.5, -0.1], [{"x0": 0.6}, {"x0": 0.7}], {"n": 2}, extra=1)
    assert isinstance(report, CheckReport)
    assert not report.passed
    assert report.worst_margin == -0.1
    assert report.location == {"x0": 0.7}
    record = report.to_dict()
    assert record["check_name"] == "demo"
    assert record["pass"] is False
    assert record["violations"] == [{"x0": 0.7, "margin": -0.1}]
    assert record["details"] == {"extra": 1}
    with pytest.raises(DomainError):
        build_report("empty", [], [], {})


def test_canonical_grid_is_open():
    grid = canonical_x0_grid(0.5, 5)
    assert grid[0] > 1.0 / math.sqrt(3.0)
    assert grid[-1] < 1.0
