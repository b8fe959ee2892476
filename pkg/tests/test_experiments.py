"""Verification experiments, reports and the analytic inequality suite"""

import json

import numpy as np
import pandas as pd
import pytest

from src.catalog.processes import make_stable
from src.errors import ContractError
from src.experiments import (
    EXIT_CODES,
    EXPERIMENTS,
    FAIL,
    INCONCLUSIVE,
    PASS,
    ExitComparabilityExperiment,
    ExperimentReport,
    GreenFunctionExperiment,
    HarnackExperiment,
    HolderExperiment,
    InequalitySuite,
    KrylovSafonovExperiment,
    combine_verdicts,
    exit_time_scaling,
    jump_probability,
)
from src.experiments.harmonic import harnack_ratios
from src.experiments.report import table_payload
from src.mc import exit_tail_reference


def _report(**overrides):
    values = dict(experiment='demo', spec_fingerprint='0' * 64, spec={'kind': 'stable'}, config={'seed': 1},
                  tables={'t': pd.DataFrame({'a': [1.0, np.nan], 'b': [np.inf, 2.0]})},
                  verdict=PASS, notes=['ok'], summary={'value': np.float64(0.5), 'flag': np.bool_(True)})
    values.update(overrides)
    return ExperimentReport(**values)


class TestReports:
    def test_non_finite_values_become_null(self):
        payload = _report().to_dict()
        assert payload['tables'][0]['rows'] == [[1.0, None], [None, 2.0]]
        assert payload['summary'] == {'value': 0.5, 'flag': True}

    def test_json_is_canonical(self):
        text = _report().to_json()
        assert text == _report().to_json()
        assert list(json.loads(text)) == sorted(json.loads(text))

    def test_write(self, tmp_path):
        path = _report().write(tmp_path / 'nested' / 'report.json')
        assert json.loads(path.read_text())['verdict'] == PASS

    def test_exit_codes(self):
        assert EXIT_CODES == {PASS: 0, FAIL: 2, INCONCLUSIVE: 3}
        assert _report(verdict=INCONCLUSIVE).exit_code == 3

    def test_unknown_verdict(self):
        with pytest.raises(ValueError):
            _report(verdict='maybe')

    @pytest.mark.parametrize("verdicts, expected", [
        ([PASS, PASS], PASS), ([PASS, INCONCLUSIVE], INCONCLUSIVE), ([INCONCLUSIVE, FAIL], FAIL), ([], INCONCLUSIVE),
    ])
    def test_combine_verdicts(self, verdicts, expected):
        assert combine_verdicts(verdicts) == expected

    def test_table_payload(self):
        payload = table_payload('x', pd.DataFrame({'n': [np.int64(3)]}))
        assert payload == {'name': 'x', 'columns': ['n'], 'rows': [[3]]}

    def test_registry(self):
        assert set(EXPERIMENTS) == {'harnack', 'ks', 'exitcomp', 'holder', 'jump', 'exittime', 'green'}


class TestKrylovSafonov:
    def test_full_target_is_always_hit(self, cauchy, small_run):
        report = KrylovSafonovExperiment(cauchy, small_run.with_(n_replicas=200)).run([1.0, 4.0], [1.0])
        hitting = report.table('hitting')
        assert np.all(hitting['m'] == 1.0)
        assert report.verdict == PASS
        assert report.summary['scale_pairs'] == report.summary['scale_pairs_agreeing'] > 0
        assert report.spec_fingerprint and report.config['path']['seed'] == 11

    def test_shrink_range(self, cauchy, small_run):
        with pytest.raises(ContractError):
            KrylovSafonovExperiment(cauchy, small_run).run([1.0], [1.5])

    def test_missing_pair_is_noted(self, cauchy, small_run):
        report = KrylovSafonovExperiment(cauchy, small_run.with_(n_replicas=100)).run([1.0], [1.0])
        assert report.table('scale_pairs') is None
        assert any('scale agreement not checked' in note for note in report.notes)

    @pytest.mark.slow
    def test_small_targets_stay_above_floor(self, cauchy, small_run):
        report = KrylovSafonovExperiment(cauchy, small_run).run([1.0], [0.5])
        assert report.summary['min_m'] > 0.01
        assert report.verdict == PASS


class TestHarnackAndHolder:
    def test_grid_fits_in_half_ball(self, cauchy, small_run):
        grid = HarnackExperiment(cauchy, small_run).interior_grid(2.0)
        assert len(grid) == 27
        assert np.all(np.linalg.norm(grid, axis=1) < 1.0)

    def test_nested_regions_hold_on_a_shared_sample(self, cauchy, small_run):
        report = HarnackExperiment(cauchy, small_run.with_(n_replicas=200)).run([1.0, 2.0])
        nested = report.table('nested')
        assert len(nested) and nested['holds'].all()
        assert set(report.table('harmonic')['region']) == {'cap+0', 'shell1', 'shell2', 'tail2r', 'tail4r',
                                                           'complement'}
        assert report.verdict in (PASS, FAIL, INCONCLUSIVE)

    def test_spread_limit_by_kind(self, cauchy, relativistic, small_run):
        assert HarnackExperiment(cauchy, small_run).spread_limit() == 2.0
        assert HarnackExperiment(relativistic, small_run).spread_limit() == 3.0

    def test_ratios_leave_out_points_near_zero(self):
        table = pd.DataFrame({'r': 1.0, 'region': ['cap+0', 'cap+0', 'tail4r', 'tail4r', 'shell2', 'shell2'],
                              'estimate': [0.4, 0.6, 0.02, 0.001, 0.0, 0.0],
                              'stderr': [0.01, 0.01, 0.003, 0.001, 0.0, 0.0]})
        ratios = harnack_ratios(table, 3.0).set_index('region')
        assert ratios.loc['cap+0', 'ratio'] == pytest.approx(1.5)
        assert ratios.loc['tail4r', 'unresolved'] == 1 and np.isnan(ratios.loc['tail4r', 'ratio'])
        assert ratios.loc['shell2', 'unresolved'] == ratios.loc['shell2', 'points'] == 2

    def test_partly_resolved_region_is_inconclusive(self, cauchy, small_run, monkeypatch):
        """A grid point with h = 0 +- 3 stderr makes the report inconclusive, not a failure"""
        experiment = HarnackExperiment(cauchy, small_run)

        def harmonic(r, regions, grid, stream_offset=0):
            rows = []
            for i in range(len(grid)):
                rows.append({'point': i, 'region': 'cap+0', 'estimate': 0.5, 'stderr': 0.01})
                rows.append({'point': i, 'region': 'tail4r', 'estimate': 0.0 if i == 0 else 0.05, 'stderr': 0.01})
            return pd.DataFrame(rows)

        monkeypatch.setattr(experiment.simulator, 'estimate_harmonic', harmonic)
        report = experiment.run([1.0, 2.0])
        assert report.verdict == INCONCLUSIVE
        assert np.isfinite(report.table('per_r')['max_ratio']).all()
        assert any('no ratio formed' in note for note in report.notes)

    def test_holder_pairs(self, cauchy, small_run):
        report = HolderExperiment(cauchy, small_run.with_(n_replicas=500)).run(1.0)
        pairs = report.table('pairs')
        assert pairs['distance'].tolist() == [2.0 ** -k for k in range(1, 7)]
        assert report.summary['region'] == 'cap+0'
        if report.verdict == INCONCLUSIVE:
            assert report.summary['usable_pairs'] < 3


class TestExitExperiments:
    def test_same_ball_gives_unit_ratio(self, cauchy, small_run):
        report = ExitComparabilityExperiment(cauchy, small_run.with_(n_replicas=1000)).run(1.0, inner_radius=1.0)
        ratios = report.table('ratios')
        diagonal = ratios[(ratios['x'] == ratios['y']) & (ratios['denominator'] > 0.0)]
        assert len(diagonal) and np.allclose(diagonal['ratio'], 1.0)
        assert report.config['parameters']['side'] == pytest.approx(1.0)

    def test_continuous_exits_are_inconclusive(self, brownian, small_run):
        report = ExitComparabilityExperiment(brownian, small_run.with_(n_replicas=200)).run(1.0)
        assert report.verdict == INCONCLUSIVE
        assert report.exit_code == 3

    def test_inner_radius_range(self, cauchy, small_run):
        with pytest.raises(ContractError):
            ExitComparabilityExperiment(cauchy, small_run).run(1.0, inner_radius=2.0)

    def test_jump_probability_matches_cauchy_reference(self, cauchy, small_run):
        report = jump_probability(cauchy, 0.5, [1.0, 2.0, 4.0], small_run)
        table = report.table('jump_probability')
        np.testing.assert_allclose(table['estimate'], table['reference'], atol=0.05)
        assert table['reference'].iloc[0] == pytest.approx(exit_tail_reference(1.0, 0.5, 1.0))
        assert report.verdict == PASS

    def test_jump_probability_without_jumps(self, brownian, small_run):
        report = jump_probability(brownian, 0.5, [1.0, 2.0], small_run.with_(n_replicas=200))
        assert report.verdict == INCONCLUSIVE

    def test_start_ball_must_be_small(self, cauchy, small_run):
        with pytest.raises(ContractError):
            jump_probability(cauchy, 1.0, [1.0], small_run.with_(n_replicas=50))

    def test_exit_time_scaling(self, cauchy, small_run):
        report = exit_time_scaling(cauchy, [0.5, 1.0, 2.0], small_run.with_(n_replicas=1000))
        table = report.table('exit_time')
        np.testing.assert_allclose(table['reference'], 0.5 * table['r'])
        assert np.all(np.abs(table['product'] - 0.5) < 0.1)
        assert report.verdict == PASS

    @pytest.mark.slow
    def test_step_size_robustness(self, brownian, small_run):
        report = exit_time_scaling(brownian, [1.0], small_run, halve_dt=True)
        assert report.table('step_size')['robust'].all()


class TestGreenFunctionExperiment:
    def test_lower_bound_pairs_stay_in_range(self, cauchy, small_run):
        pairs = GreenFunctionExperiment(cauchy, small_run).lower_bound_pairs(1.0, 2.0)
        assert len(pairs) == 12
        for x, y in pairs:
            assert 2.0 * np.linalg.norm(x - y) <= 1.0 - np.linalg.norm(x) + 1e-12
            assert np.linalg.norm(y) < 1.0

    def test_small_ball_pairs(self, cauchy, small_run):
        pairs = GreenFunctionExperiment(cauchy, small_run).small_ball_pairs(1.0)
        assert pairs and all(max(np.linalg.norm(x), np.linalg.norm(y)) < 0.2 for x, y in pairs)

    @pytest.mark.slow
    def test_cauchy_bounds_hold(self, cauchy, small_run):
        """G_B1(x, y) / G(x - y) = sqrt(w / (1 + w)) for the Cauchy ball, above 0.85 on these pairs"""
        report = GreenFunctionExperiment(cauchy, small_run.with_(block_size=200)).run(1.0)
        lower = report.table('green_lower')
        assert lower['holds'].all() and (lower['censored'] == 0).all()
        assert report.summary['min_ratio'] > 0.5
        assert report.summary['empirical_C'] > 0.5
        factor = report.config['green_lower_factor']
        assert factor['source'] == 'config' and factor['proven'] > 8.0
        checks = report.table('poisson_checks').set_index('check')
        assert checks.loc['subprobability', 'holds']
        assert checks.loc['tail_vs_direct', 'reference'] == pytest.approx(exit_tail_reference(1.0, 1.0, 4.0),
                                                                           abs=0.03)
        assert report.summary['symmetry_disagreement'] <= 0.1
        assert report.verdict == PASS

    def test_continuous_exits_skip_poisson_part(self, brownian, small_run):
        experiment = GreenFunctionExperiment(brownian, small_run.with_(n_replicas=200))
        notes = []
        frame, checks, symmetry = experiment._poisson_checks(1.0, notes)
        assert frame is None and checks is None and symmetry is None
        assert 'Poisson kernel skipped' in notes[0]


class TestInequalitySuite:
    def test_stable_spec_passes(self):
        suite = InequalitySuite([make_stable(1.5, 3)], points=17)
        results = suite.run_all_validations()
        assert list(results.columns) == ['check', 'spec', 'points', 'violations', 'worst_slack', 'status',
                                         'detail']
        assert (results['status'] != FAIL).all(), results[results['status'] == FAIL].to_dict(orient='records')
        assert suite.verdict == PASS

    def test_report(self):
        report = InequalitySuite([make_stable(1.0, 3)], points=9).generate_report()
        assert report.experiment == 'verify'
        assert len(report.spec_fingerprint) == 64
        assert report.summary['specs'] == ['stable-1']
        assert report.exit_code == 0

    @pytest.mark.slow
    def test_default_catalog_passes(self):
        suite = InequalitySuite(d=3)
        suite.run_all_validations()
        assert suite.verdict == PASS
