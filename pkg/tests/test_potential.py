"""Subordinator potentials, kernels, ball potentials, capacities and constants"""

import numpy as np
import pytest

from src.catalog.geometry import ball_volume
from src.catalog.processes import make_named, make_stable
from src.errors import ContractError, DivergentIntegralError, QuadratureError, UnsupportedSpecError
from src.exponent import psi_from_spec
from src.exponent.scaling import wlsc_fit
from src.potential import (
    BALL_UPPER,
    SUBORDINATOR_LOWER,
    SUBORDINATOR_UPPER,
    PotentialBracket,
    ball_potential,
    capacity_estimate,
    green_kernel,
    green_kernel_table,
    green_lower_factor,
    green_lower_radius_factor,
    kernel_bracket,
    kernel_lower_lp,
    laplace_cross_check,
    potential_constants,
    riesz_kernel,
    select_green_lower_factor,
    stehfest_coefficients,
    stehfest_invert,
    subordinator_potential,
)
from src.utils.quadrature import adaptive_integral, radial_integral

ANCHORS = (0.1, 1.0, 10.0)


class TestConstants:
    def test_values_in_three_dimensions(self):
        constants = potential_constants(3)
        assert constants.unit_ball == pytest.approx(4.0 * np.pi / 3.0)
        assert constants.C4 == pytest.approx(BALL_UPPER / constants.unit_ball)
        assert 0.0 < constants.C2 < constants.C1
        assert constants.c1 * (1.0 + constants.kappa) * np.exp(-constants.kappa) == pytest.approx(0.5)
        assert constants.capacity_lower == pytest.approx(constants.unit_ball / (36.0 * np.e))
        assert constants.C7 is not None and 0.0 < constants.C7 < 1.0

    def test_subordinator_constants(self):
        assert SUBORDINATOR_LOWER == pytest.approx((1.0 - 2.0 / np.e) / 2.0)
        assert SUBORDINATOR_UPPER == pytest.approx(np.e)

    def test_lp_lower_constant_radius(self):
        lower = kernel_lower_lp(3, beta=1.0, C_star=1.0, theta=0.0)
        assert lower.radius == np.inf
        assert lower.kappa >= 1.0 and lower.b == pytest.approx(1.0 / lower.kappa)

    def test_green_radius_factor_at_least_one_over_b(self):
        lower = kernel_lower_lp(3, beta=1.0, C_star=1.0, theta=0.0)
        assert green_lower_radius_factor(3, 0.5, lower) >= 1.0 / lower.b

    def test_green_factor_without_certificate(self):
        factor = select_green_lower_factor(3, None, 0.5, fallback=2.0, cap=8.0)
        assert (factor.value, factor.proven, factor.source) == (2.0, None, 'config')
        assert factor.inner_radius(1.0) == pytest.approx(0.2)

    def test_green_factor_from_certificate(self):
        certificate = wlsc_fit(psi_from_spec(make_stable(1.0, 3)).psi_star)
        capped = select_green_lower_factor(3, certificate, 0.5, fallback=2.0, cap=8.0)
        assert capped.source == 'config' and capped.value == 2.0 and capped.proven > 1e6
        proven = select_green_lower_factor(3, certificate, 0.5, fallback=2.0, cap=np.inf)
        assert proven.source == 'certificate' and proven.value == proven.proven == capped.proven
        assert proven.to_dict() == {'value': proven.value, 'proven': proven.value, 'source': 'certificate'}

    def test_green_factor_needs_transience(self):
        certificate = wlsc_fit(psi_from_spec(make_stable(1.0, 2)).psi_star)
        assert select_green_lower_factor(2, certificate, 0.5, fallback=2.0, cap=np.inf).source == 'config'

    def test_green_factor_of_a_spec(self, cauchy):
        factor = green_lower_factor(cauchy)
        assert factor.source == 'config' and factor.value == pytest.approx(2.0)

    def test_bad_dimension(self):
        with pytest.raises(ContractError):
            potential_constants(0)


class TestSubordinatorPotential:
    def test_stehfest_weights_sum_to_zero(self):
        assert stehfest_coefficients(12).sum() == pytest.approx(0.0, abs=1e-6)

    def test_stehfest_inverts_exponential(self):
        values = stehfest_invert(lambda p: 1.0 / (p + 1.0), np.array([0.5, 1.0, 2.0]))
        np.testing.assert_allclose(values, np.exp(-np.array([0.5, 1.0, 2.0])), rtol=1e-2)

    def test_closed_form_for_stable(self):
        potential = subordinator_potential(make_stable(1.0, 3).bernstein)
        assert potential.method == 'closed-form'
        assert float(potential(4.0)) == pytest.approx(2.0 * np.sqrt(4.0 / np.pi))

    def test_inversion_recovers_half_stable(self):
        potential = subordinator_potential(make_stable(1.0, 3).bernstein, force_inversion=True)
        r = np.geomspace(1e-2, 1e2, 9)
        assert potential.method == 'laplace-inversion'
        np.testing.assert_allclose(potential(r), 2.0 * np.sqrt(r / np.pi), rtol=1e-2)

    def test_inversion_stays_in_bracket(self, relativistic):
        potential = subordinator_potential(relativistic.bernstein)
        r = np.geomspace(1e-3, 1e3, 13)
        lower, upper = potential.bracket(r)
        values = potential(r)
        assert np.all(lower * (1 - 1e-9) <= values) and np.all(values <= upper * (1 + 1e-9))
        assert np.all(np.diff(values) >= 0.0)

    def test_off_grid_values_stay_monotone(self):
        potential = subordinator_potential(make_stable(1.0, 3).bernstein, force_inversion=True)
        r = np.array([1e10, 1e-10, 1e-8, 1e9, 1.0, 1e-9, 1e8])
        values = potential(r)
        lower, upper = potential.bracket(r)
        assert np.all(lower * (1 - 1e-9) <= values) and np.all(values <= upper * (1 + 1e-9))
        assert np.all(np.diff(values[np.argsort(r)]) >= 0.0)
        assert potential(1e-10) <= potential.values[0] <= potential.values[-1] <= potential(1e10)

    def test_bounded_phi_only_has_bracket(self):
        spec = make_named('sbm-custom', {'phi': '1 - exp(-lam)', 'unbounded': False}, 3)
        potential = subordinator_potential(spec.bernstein)
        assert potential.method == 'bracket-only'
        with pytest.raises(UnsupportedSpecError):
            potential(1.0)


class TestKernels:
    @pytest.mark.parametrize("x", ANCHORS)
    def test_brownian_motion(self, brownian, x):
        assert green_kernel(brownian, x) == pytest.approx(1.0 / (4.0 * np.pi * x), rel=1e-4)

    @pytest.mark.parametrize("x", ANCHORS)
    def test_cauchy(self, cauchy, x):
        assert green_kernel(cauchy, x) == pytest.approx(1.0 / (2.0 * np.pi ** 2 * x ** 2), rel=1e-4)

    @pytest.mark.parametrize("alpha, d", [(0.5, 3), (1.5, 3), (1.0, 4)])
    def test_riesz_reference(self, alpha, d):
        spec = make_stable(alpha, d)
        assert green_kernel(spec, 1.7) == pytest.approx(float(riesz_kernel(alpha, d, 1.7)), rel=1e-4)

    def test_vector_argument_uses_norm(self, cauchy):
        assert green_kernel(cauchy, np.array([3.0, 4.0, 0.0])) == pytest.approx(green_kernel(cauchy, 5.0))

    def test_recurrent_case_diverges(self):
        with pytest.raises(DivergentIntegralError):
            green_kernel(make_stable(1.5, 1), 1.0)

    def test_origin_is_excluded(self, cauchy):
        with pytest.raises(ContractError):
            green_kernel(cauchy, 0.0)

    def test_unimodal_has_no_subordination_kernel(self):
        with pytest.raises(UnsupportedSpecError):
            green_kernel(make_named('tempered', {'alpha': 1.0}, 3), 1.0)

    def test_table_interpolates(self, cauchy):
        table = green_kernel_table(cauchy)
        assert float(table(0.37)) == pytest.approx(green_kernel(cauchy, 0.37), rel=1e-3)

    @pytest.mark.parametrize("kind, params", [('stable', {'alpha': 1.0}), ('relativistic', {'alpha': 1.0, 'm': 1.0})])
    def test_kernel_bracket_holds(self, kind, params):
        spec = make_named(kind, params, 3)
        exponent = psi_from_spec(spec)
        certificate = wlsc_fit(exponent.psi_star)
        for x in (0.05, 0.5, 5.0):
            bracket = kernel_bracket(exponent, certificate, x)
            assert not bracket.violated
            assert bracket.upper is not None

    def test_upper_only_without_certificate(self, cauchy):
        bracket = kernel_bracket(psi_from_spec(cauchy), None, 1.0)
        assert bracket.lower is None
        assert 'upper bound only' in bracket.notes

    def test_kernel_bounds_need_transience(self):
        spec = make_stable(1.0, 2)
        with pytest.raises(ContractError):
            kernel_bracket(psi_from_spec(spec), None, 1.0)


class TestBallPotential:
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_brownian_ball(self, brownian, r):
        bracket = ball_potential(brownian, r)
        assert bracket.estimate == pytest.approx(r * r / 2.0, rel=1e-6)
        assert not bracket.violated

    @pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
    def test_laplace_identity(self, brownian, lam):
        check = laplace_cross_check(brownian, lam)
        assert check['rhs'] == pytest.approx(1.0 / (2.0 * lam), rel=1e-4)
        assert check['relative_difference'] < 1e-4

    def test_cauchy_ball_is_bracketed(self, cauchy):
        for r in (0.1, 1.0, 10.0):
            assert not ball_potential(cauchy, r).violated

    def test_unimodal_estimate_is_informational(self):
        bracket = ball_potential(make_named('tempered', {'alpha': 1.0}, 3), 1.0)
        assert bracket.method == 'laplace-inversion'
        assert 'informational' in bracket.notes
        assert bracket.lower < bracket.upper

    def test_cross_check_needs_subordinate_bm(self):
        with pytest.raises(UnsupportedSpecError):
            laplace_cross_check(make_named('tempered', {'alpha': 1.0}, 3), 1.0)

    def test_dimension_guard(self):
        with pytest.raises(ContractError):
            ball_potential(make_stable(1.0, 2), 1.0)


class TestCapacity:
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_brownian_capacity_band(self, brownian, r):
        bracket = capacity_estimate(brownian, r)
        ratio = bracket.estimate / (4.0 * np.pi * r)
        assert 1.0 / 3.0 <= ratio <= 3.0
        assert bracket.estimate == pytest.approx(ball_volume(3, r) / (r * r / 2.0), rel=1e-6)

    def test_lower_bound_and_floor(self, cauchy):
        bracket = capacity_estimate(cauchy, 1.0)
        assert bracket.lower <= bracket.estimate
        assert bracket.constants_used['general_set_floor'] <= bracket.estimate
        assert 'heuristic' in bracket.notes


class TestPotentialBracket:
    def test_violation_rules(self):
        assert not PotentialBracket(lower=1.0, upper=2.0, estimate=1.5).violated
        assert PotentialBracket(lower=1.0, upper=2.0, estimate=2.5).violated
        assert PotentialBracket(lower=3.0, upper=2.0).violated
        assert not PotentialBracket(lower=None, upper=2.0, estimate=0.1).violated
        assert not PotentialBracket(lower=1.0, upper=2.0, estimate=float('nan')).violated

    def test_row(self):
        row = PotentialBracket(lower=1.0, upper=2.0, estimate=1.5, method='quadrature').row(0.5)
        assert row == {'r_or_x': 0.5, 'lower': 1.0, 'estimate': 1.5, 'upper': 2.0, 'violated': False,
                       'method': 'quadrature'}


class TestQuadrature:
    def test_endpoint_singularity(self):
        result = adaptive_integral(lambda s: s ** -0.5, 0.0, 1.0)
        assert result.value == pytest.approx(2.0, rel=1e-8)
        assert result.nodes > 0

    def test_half_line(self):
        assert adaptive_integral(lambda s: np.exp(-s), 0.0, np.inf).value == pytest.approx(1.0, rel=1e-8)

    def test_breakpoint_at_a_jump(self):
        result = adaptive_integral(lambda s: np.where(s < 1.0, 1.0, 3.0), 0.0, 2.0, points=[1.0, 5.0])
        assert result.value == pytest.approx(4.0, rel=1e-10)

    def test_subdivision_limit(self):
        with pytest.raises(QuadratureError):
            adaptive_integral(lambda s: np.sin(1.0 / s), 1e-3, 1.0, limit=5)

    def test_radial_integral_end_corrections(self):
        result = radial_integral(lambda s: s ** -0.5 * np.exp(-s))
        assert result.value == pytest.approx(np.sqrt(np.pi), rel=1e-6)

    def test_radial_integral_divergence(self):
        with pytest.raises(DivergentIntegralError):
            radial_integral(lambda s: (1.0 + s) ** -0.5)
