import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solvegeo.core.algebra import equilibrium_abscissa
from solvegeo.core.errors import DomainError
from solvegeo.core.flow import flow_sphere
from solvegeo.core.period import (
    LoopSpec,
    beta_from_x0,
    cardano_endpoint_times,
    derivative_bound_gap,
    dperiod_dx0,
    endpoint_times,
    flat_direction,
    half_period_partner,
    half_period_partner_derivatives,
    holonomy,
    holonomy_from_direction,
    limit_period,
    loop_beta,
    period,
    period_half,
    period_half_elliptic,
    period_quadrature,
    period_sol,
    x0_from_beta,
)
from solvegeo.core.verifier import PERIOD_TABLE, TABLE_BETA
from solvegeo.utils.precision import ratio_bound


@pytest.mark.parametrize("alpha, printed", PERIOD_TABLE)
def test_period_table_rows(alpha, printed):
    value = period_quadrature(TABLE_BETA, alpha)
    assert value == pytest.approx(printed, abs=5e-3)
    assert value > limit_period(alpha)
    assert period(TABLE_BETA, alpha) == pytest.approx(value, abs=1e-8)


def test_period_table_has_ten_rows():
    assert len(PERIOD_TABLE) == 10
    assert dict(PERIOD_TABLE)[1.0] == pytest.approx(4.44622)


@pytest.mark.parametrize("beta", [0.2, 0.6, 0.9, 0.999])
def test_sol_closed_form_matches_quadrature(beta):
    assert period_sol(beta) == pytest.approx(period_quadrature(beta, 1.0), abs=1e-8)


@pytest.mark.parametrize("beta", [0.2, 0.6, 0.9, 0.999])
def test_half_closed_form_matches_quadrature(beta):
    assert period_half_elliptic(beta) == pytest.approx(period_quadrature(beta, 0.5), abs=1e-8)


@pytest.mark.parametrize("beta", [0.1, 0.5, 0.95, 0.9999])
def test_cardano_endpoints_match_root_finding(beta):
    closed = cardano_endpoint_times(beta)
    numeric = endpoint_times(beta, 0.5)
    assert closed.t0 == pytest.approx(numeric.t0, abs=1e-10)
    assert closed.t1 == pytest.approx(numeric.t1, abs=1e-10)
    assert max(abs(r) for r in closed.residuals(beta, 0.5)) < 1e-12


def test_limit_period():
    assert period(1.0, 1.0) == pytest.approx(math.pi * math.sqrt(2.0))
    assert period(1.0, 0.5) == pytest.approx(2.0 * math.pi)
    assert period(1.0 - 1e-6, 0.5) == pytest.approx(2.0 * math.pi, abs=1e-3)
    assert period_sol(1.0) == pytest.approx(limit_period(1.0), rel=1e-14)


@pytest.mark.parametrize("beta", [0.0, -0.2, 1.2])
def test_period_rejects_beta(beta):
    with pytest.raises(DomainError):
        period(beta, 0.5)


def test_period_decreases_in_beta():
    values = [period(b, 0.7) for b in np.linspace(0.3, 0.95, 8)]
    assert all(np.diff(values) < 0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.99), st.sampled_from([0.3, 0.5, 1.0]))
def test_beta_x0_round_trip(beta, alpha):
    x0 = x0_from_beta(beta, alpha)
    assert equilibrium_abscissa(alpha) < x0 < 1.0
    assert beta_from_x0(x0, alpha) == pytest.approx(beta, abs=1e-10)


def test_beta_of_the_equilibrium_is_one():
    assert beta_from_x0(equilibrium_abscissa(0.5), 0.5) == pytest.approx(1.0)
    assert x0_from_beta(1.0, 0.5) == equilibrium_abscissa(0.5)
    with pytest.raises(DomainError):
        beta_from_x0(0.3, 0.5)


@pytest.mark.parametrize("x0", [0.6, 0.75, 0.9, 0.99])
def test_period_half_agrees_with_beta_form(x0):
    assert period_half(x0) == pytest.approx(period(beta_from_x0(x0, 0.5), 0.5), rel=1e-9)


def test_period_half_tends_to_two_pi_at_the_equilibrium():
    assert period_half(1.0 / math.sqrt(3.0) + 1e-7) == pytest.approx(2.0 * math.pi, abs=1e-4)
    with pytest.raises(DomainError):
        period_half(0.5)


@pytest.mark.parametrize("x0", [0.65, 0.8, 0.95])
def test_period_derivative_against_differences(x0):
    h = 1e-6
    numeric = (period_half(x0 + h) - period_half(x0 - h)) / (2.0 * h)
    assert dperiod_dx0(x0) == pytest.approx(numeric, rel=1e-5)


def test_period_increases_in_x0():
    assert all(dperiod_dx0(x0) > 0.0 for x0 in np.linspace(0.6, 0.99, 20))


def test_derivative_bound_gap_is_negative():
    assert all(derivative_bound_gap(x0) < 0.0 for x0 in np.linspace(0.6, 0.99, 20))


def test_ratio_bound():
    assert ratio_bound(0.8) == pytest.approx(0.5869, abs=1e-3)
    assert all(ratio_bound(x0) < 1.0 for x0 in np.linspace(0.58, 0.9999, 25))


@pytest.mark.parametrize("x0", [0.75, 0.8, 0.95])
def test_partner_at_alpha_one_swaps_coordinates(x0):
    x1, y1 = half_period_partner(x0, 1.0)
    assert x1 == pytest.approx(math.sqrt(1.0 - x0 * x0), abs=1e-12)
    assert y1 == pytest.approx(x0, abs=1e-12)


@pytest.mark.parametrize("alpha, x0", [(0.5, 0.8), (0.3, 0.7), (0.75, 0.95)])
def test_partner_shares_the_level(alpha, x0):
    x1, y1 = half_period_partner(x0, alpha)
    assert x1 < equilibrium_abscissa(alpha)
    assert x1 ** alpha * y1 == pytest.approx(x0 ** alpha * math.sqrt(1.0 - x0 * x0), rel=1e-12)


@pytest.mark.parametrize("alpha, x0", [(0.5, 0.8), (1.0, 0.9)])
def test_partner_derivatives_against_differences(alpha, x0):
    h = 1e-6
    plus, minus = half_period_partner(x0 + h, alpha), half_period_partner(x0 - h, alpha)
    dx1, dy1 = half_period_partner_derivatives(x0, alpha)
    assert dx1 == pytest.approx((plus[0] - minus[0]) / (2.0 * h), rel=1e-5)
    assert dy1 == pytest.approx((plus[1] - minus[1]) / (2.0 * h), rel=1e-5)


def test_loop_beta():
    assert loop_beta(flat_direction(0.7, 0.5), 0.5) == pytest.approx(0.7, abs=1e-12)
    assert loop_beta([0.0, 0.6, 0.8], 0.5) is None
    assert loop_beta(flat_direction(1.0, 0.5), 0.5) is None


def test_loop_spec_constructors_agree():
    by_beta = LoopSpec.from_beta(0.8, 0.5)
    by_x0 = LoopSpec.from_x0(by_beta.x0, 0.5)
    assert by_x0.beta == pytest.approx(0.8, abs=1e-10)
    assert by_x0.period == pytest.approx(by_beta.period, abs=1e-8)
    assert by_beta.holonomy is None


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_holonomy_is_constant_along_the_loop(alpha):
    x0 = 0.85
    loop = LoopSpec.from_x0(x0, alpha, with_holonomy=True)
    start = [x0, math.sqrt(1.0 - x0 * x0), 0.0]
    elsewhere = flow_sphere(start, 1.3, alpha)(1.3)
    assert holonomy_from_direction(start, alpha) == pytest.approx(loop.holonomy, rel=1e-6)
    assert holonomy_from_direction(elsewhere, alpha) == pytest.approx(loop.holonomy, rel=1e-6)
    assert holonomy(loop) == pytest.approx(loop.holonomy)
