"""Characteristic exponents, Pruitt function, envelopes and scaling certificates"""

import numpy as np
import pandas as pd
import pytest

from src.catalog.processes import make_named, make_stable
from src.errors import ContractError, UnsupportedSpecError
from src.exponent import bernstein_envelope, psi_from_spec, pruitt_h, truncated_moment
from src.exponent.scaling import (
    check_certificate,
    check_jump_prob_bound,
    default_beta_grid,
    jump_probability_bound,
    wlsc_fit,
)

RADII = np.geomspace(1e-2, 1e2, 9)


class TestCharacteristicExponent:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
    def test_stable_is_power(self, alpha):
        exponent = psi_from_spec(make_stable(alpha, 3))
        assert exponent.monotone
        np.testing.assert_allclose(exponent.psi0(RADII), RADII ** alpha, rtol=1e-12)
        np.testing.assert_allclose(exponent.psi_star(RADII), RADII ** alpha, rtol=1e-12)

    def test_zero_and_scalar_input(self):
        exponent = psi_from_spec(make_stable(1.0, 3))
        assert float(exponent.psi0(0.0)) == 0.0
        assert np.ndim(exponent.psi_star(2.0)) == 0

    def test_cached_per_spec(self):
        spec = make_stable(1.5, 3)
        assert psi_from_spec(spec) is psi_from_spec(spec)

    def test_oscillatory_path_reproduces_cauchy(self):
        """nu0(s) = s^-4 in d = 3 is the Cauchy density with constant 1, so psi0(r) = pi^2 r"""
        exponent = psi_from_spec(make_named('unimodal-custom', {'nu0': 's^(-4)'}, 3))
        r = np.array([0.1, 1.0, 10.0])
        np.testing.assert_allclose(exponent.psi0(r), np.pi ** 2 * r, rtol=1e-3)

    def test_truncation_lowers_psi0(self):
        truncated = psi_from_spec(make_named('truncated', {'alpha': 1.0}, 3))
        r = np.array([1.0, 10.0, 100.0])
        assert np.all(truncated.psi0(r) < np.pi ** 2 * r)

    def test_unimodal_envelope_dominates_and_is_monotone(self):
        exponent = psi_from_spec(make_named('tempered', {'alpha': 1.0}, 3))
        r = np.geomspace(1e-3, 1e3, 25)
        star = exponent.psi_star(r)
        assert np.all(np.diff(star) >= -1e-12 * star[1:])
        assert np.all(star >= exponent.psi0(r) * (1.0 - 1e-3))

    def test_psi_star_within_twelve_psi0(self):
        exponent = psi_from_spec(make_named('layered', {'alpha': 1.5, 'alpha1': 0.5}, 3))
        r = np.geomspace(1e-2, 1e2, 9)
        assert np.all(exponent.psi_star(r) <= 12.0 * exponent.psi0(r))


class TestPruitt:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_bracket_for_stable(self, alpha):
        spec = make_stable(alpha, 3)
        star = psi_from_spec(spec).psi_star
        for r in (0.1, 1.0, 10.0):
            h = pruitt_h(spec, r)
            surrogate = float(star(1.0 / r))
            assert 0.5 * surrogate <= h <= 8.0 * (1 + 2 * spec.d) * surrogate

    def test_stable_pruitt_scales(self):
        spec = make_stable(1.5, 3)
        assert pruitt_h(spec, 2.0) == pytest.approx(pruitt_h(spec, 1.0) * 2.0 ** -1.5, rel=1e-6)

    def test_brownian_motion_is_pure_gaussian(self):
        assert pruitt_h(make_stable(2.0, 3), 2.0) == pytest.approx(0.25)

    def test_truncated_moment_is_h_at_inverse(self):
        spec = make_named('tempered', {'alpha': 1.0}, 3)
        assert truncated_moment(spec, 4.0) == pytest.approx(pruitt_h(spec, 0.25))

    def test_needs_positive_radius(self):
        with pytest.raises(ContractError):
            pruitt_h(make_stable(1.0, 3), 0.0)

    def test_needs_levy_density(self):
        spec = make_named('sbm-custom', {'phi': 'lam^0.5'}, 3)
        with pytest.raises(UnsupportedSpecError):
            pruitt_h(spec, 1.0)


class TestBernsteinEnvelope:
    def test_sandwiches_psi_star(self):
        spec = make_named('truncated', {'alpha': 1.0}, 3)
        envelope = bernstein_envelope(spec)
        r = np.geomspace(1e-2, 1e2, 7)
        phi = envelope(r ** 2)
        star = psi_from_spec(spec).psi_star(r)
        assert np.all(phi / (8.0 * (1 + 2 * spec.d)) <= star)
        assert np.all(star <= 4.0 * phi)

    def test_is_bernstein_on_a_grid(self):
        envelope = bernstein_envelope(make_stable(1.0, 3))
        lam = np.geomspace(1e-3, 1e3, 13)
        values = envelope(lam)
        assert np.all(np.diff(values) > 0.0)
        assert np.all(np.diff(values / lam) < 0.0)


class TestScalingCertificate:
    def test_beta_grid(self):
        grid = default_beta_grid()
        assert grid.size == 64 and grid[0] > 0.0 and grid[-1] == pytest.approx(2.0)

    @pytest.mark.parametrize("alpha", [1.0, 1.5])
    def test_stable_recovers_alpha(self, alpha):
        certificate = wlsc_fit(psi_from_spec(make_stable(alpha, 3)).psi_star)
        assert certificate.verified
        assert certificate.beta == pytest.approx(alpha)
        assert certificate.C == pytest.approx(1.0, rel=1e-9)
        assert isinstance(certificate.candidates, pd.DataFrame)
        assert set(certificate.candidates.columns) >= {'beta', 'C', 'admissible'}

    def test_certificate_dict(self):
        certificate = wlsc_fit(lambda r: np.asarray(r) ** 0.5)
        assert certificate.slack is None
        assert set(certificate.to_dict()) == {'beta', 'theta', 'C', 'verified'}

    def test_checked_triple_reports_slack(self):
        checked = check_certificate(lambda r: np.asarray(r) ** 0.5, beta=0.5, theta=0.0, C=0.5)
        assert checked.to_dict()['slack'] == pytest.approx(1.0)

    def test_bounded_function_has_no_certificate(self):
        certificate = wlsc_fit(lambda r: 1.0 - np.exp(-np.asarray(r)))
        assert not certificate.verified

    def test_negative_theta(self):
        with pytest.raises(ContractError):
            wlsc_fit(lambda r: r, theta=-1.0)

    def test_non_positive_function(self):
        with pytest.raises(ContractError):
            wlsc_fit(lambda r: np.zeros_like(np.asarray(r)))

    def test_check_given_triple(self):
        f = psi_from_spec(make_stable(1.0, 3)).psi_star
        assert check_certificate(f, beta=1.0, theta=0.0, C=1.0).slack == pytest.approx(0.0, abs=1e-9)
        assert not check_certificate(f, beta=1.2, theta=0.0, C=1.0).verified


class TestJumpProbabilityBound:
    def test_bound_shape(self):
        exponent = psi_from_spec(make_stable(1.0, 3))
        assert jump_probability_bound(exponent, 0.5, 2.0) == pytest.approx(0.25)

    def test_decay_check(self):
        exponent = psi_from_spec(make_stable(1.0, 3))
        report = check_jump_prob_bound(exponent, 0.5, [1.0, 2.0, 4.0], [0.4, 0.2, 0.1], [0.01, 0.01, 0.01])
        assert not report.violated
        assert list(report.table['r']) == [1.0, 2.0, 4.0]

    def test_rising_estimate_is_a_violation(self):
        exponent = psi_from_spec(make_stable(1.0, 3))
        report = check_jump_prob_bound(exponent, 0.5, [1.0, 2.0], [0.1, 0.5], [0.01, 0.01])
        assert report.violated
        assert report.table['decay_violation'].tolist() == [False, True]

    def test_start_ball_too_large(self):
        exponent = psi_from_spec(make_stable(1.0, 3))
        with pytest.raises(ContractError):
            check_jump_prob_bound(exponent, 1.0, [1.0], [0.1])
