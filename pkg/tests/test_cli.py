"""Command-line verbs, output formats and exit codes"""

import io
import json

import numpy as np
import pandas as pd
import pytest

from src.cli import build_parser, run


def _table(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text))


class TestUsage:
    @pytest.mark.parametrize("argv", [
        [],
        ['frobnicate'],
        ['psi'],
        ['psi', '--spec', 'stable:1', '--r', 'one,two'],
        ['simulate', '--spec', 'stable:1', '--seed', '-4'],
        ['experiment', 'sprint', '--spec', 'stable:1'],
        ['psi', '--spec', 'nope:1'],
    ])
    def test_usage_and_spec_errors_exit_one(self, argv):
        assert run(argv) == 1

    def test_every_verb_is_registered(self):
        parser = build_parser()
        args = parser.parse_args(['experiment', 'harnack', '--spec', 'stable:1'])
        assert (args.verb, args.name, args.d, args.format) == ('experiment', 'harnack', 3, 'csv')


class TestAnalyticVerbs:
    def test_psi_csv(self, capsys):
        assert run(['psi', '--spec', 'stable:1.5', '--r', '1,4']) == 0
        table = _table(capsys.readouterr().out)
        assert list(table.columns) == ['r', 'psi0', 'psi_star']
        np.testing.assert_allclose(table['psi_star'], [1.0, 8.0])

    def test_psi_json(self, capsys):
        assert run(['psi', '--spec', 'stable:1', '--format', 'json']) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload['name'] == 'psi' and payload['rows'] == [[1.0, 1.0, 1.0]]

    def test_catalog_table(self, capsys):
        assert run(['catalog']) == 0
        table = _table(capsys.readouterr().out)
        assert len(table) == 9
        assert table['fingerprint'].str.len().eq(64).all()

    def test_catalog_dumps_spec(self, tmp_path):
        out = tmp_path / 'spec.json'
        assert run(['catalog', '--spec', 'relativistic:1,2', '--d', '4', '--out', str(out)]) == 0
        document = json.loads(out.read_text())
        assert document['kind'] == 'relativistic' and document['d'] == 4

    def test_wlsc_prints_certificate(self, capsys):
        assert run(['wlsc', '--spec', 'stable:1']) == 0
        captured = capsys.readouterr()
        certificate = json.loads(next(line for line in captured.err.splitlines() if line.startswith("{")))
        assert certificate['verified'] and certificate['beta'] == pytest.approx(1.0)
        assert 'beta' in _table(captured.out).columns

    def test_pruitt_bracket(self, capsys):
        assert run(['pruitt', '--spec', 'stable:1', '--r', '0.5,2']) == 0
        assert not _table(capsys.readouterr().out)['violated'].any()

    def test_potential_and_laplace(self, capsys):
        assert run(['potential', '--spec', 'stable:2', '--r', '1']) == 0
        assert _table(capsys.readouterr().out)['estimate'].iloc[0] == pytest.approx(0.5, rel=1e-6)
        assert run(['potential', '--spec', 'stable:2', '--lam', '1']) == 0
        assert _table(capsys.readouterr().out)['rhs'].iloc[0] == pytest.approx(0.5, rel=1e-4)

    def test_kernel_at_point(self, capsys):
        assert run(['kernel', '--spec', 'stable:1', '--x', '0,3,4']) == 0
        table = _table(capsys.readouterr().out)
        assert table['r_or_x'].iloc[0] == pytest.approx(5.0)
        assert table['estimate'].iloc[0] == pytest.approx(1.0 / (2.0 * np.pi ** 2 * 25.0), rel=1e-4)

    def test_capacity(self, capsys):
        assert run(['capacity', '--spec', 'stable:2', '--r', '1']) == 0
        assert _table(capsys.readouterr().out)['estimate'].iloc[0] == pytest.approx(8.0 * np.pi / 3.0, rel=1e-6)

    def test_kernel_needs_transience(self):
        assert run(['kernel', '--spec', 'stable:1', '--d', '2']) == 1


class TestSimulation:
    ARGS = ['simulate', '--spec', 'stable:1', '--n', '100', '--dt', '1e-3']

    def test_seeded_runs_repeat(self, capsys):
        assert run(self.ARGS + ['--seed', '9']) == 0
        first = capsys.readouterr().out
        assert run(self.ARGS + ['--seed', '9', '--threads', '2']) == 0
        assert capsys.readouterr().out == first
        table = _table(first)
        assert len(table) == 100
        assert list(table.columns[:5]) == ['replica', 'tau', 'exit_x', 'exit_y', 'exit_z']

    def test_drawn_seed_is_printed(self, capsys):
        assert run(self.ARGS) == 0
        assert 'seed: ' in capsys.readouterr().err

    def test_occupation_to_file(self, tmp_path):
        out = tmp_path / 'occupation.csv'
        assert run(self.ARGS + ['--seed', '1', '--occupation', '--out', str(out)]) == 0
        table = _table(out.read_text())
        assert list(table.columns) == ['cell_index', 'cx', 'cy', 'cz', 'mass', 'stderr']
        assert table['mass'].sum() > 0.0

    def test_start_outside_ball(self):
        assert run(self.ARGS + ['--seed', '1', '--x', '2,0,0']) == 1


class TestExperimentsAndVerify:
    def test_experiment_report(self, tmp_path, capsys):
        out = tmp_path / 'exittime.json'
        code = run(['experiment', 'exittime', '--spec', 'stable:1', '--n', '300', '--seed', '5',
                    '--r', '0.5,1', '--out', str(out)])
        report = json.loads(out.read_text())
        assert code == 0 and report['verdict'] == 'pass'
        assert report['config']['path']['seed'] == 5
        assert capsys.readouterr().out.startswith('exittime: pass')

    def test_preset_seed_is_used(self, tmp_path):
        out = tmp_path / 'jump.json'
        code = run(['experiment', 'jump', '--spec', 'stable:1', '--n', '200', '--preset', 'quick',
                    '--out', str(out)])
        report = json.loads(out.read_text())
        assert code in (0, 2, 3)
        assert report['config']['path']['seed'] == 20240601
        assert report['config']['parameters']['s'] == pytest.approx(0.5)

    def test_green_experiment(self, tmp_path):
        out = tmp_path / 'green.json'
        code = run(['experiment', 'green', '--spec', 'stable:1', '--n', '300', '--seed', '5', '--out', str(out)])
        report = json.loads(out.read_text())
        assert code in (0, 2, 3)
        assert report['experiment'] == 'green_function'
        assert report['config']['green_lower_factor']['value'] == pytest.approx(2.0)
        assert {table['name'] for table in report['tables']} >= {'green_lower', 'small_ball', 'poisson_kernel'}

    def test_verify_table(self, capsys):
        assert run(['verify', '--spec', 'stable:1.5']) == 0
        table = _table(capsys.readouterr().out)
        assert (table['status'] != 'fail').all()

    def test_verify_json_report(self, tmp_path):
        out = tmp_path / 'verify.json'
        assert run(['verify', '--spec', 'stable:1', '--out', str(out), '--format', 'json']) == 0
        assert json.loads(out.read_text())['experiment'] == 'verify'
