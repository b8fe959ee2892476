#!/usr/bin/env python3
"""
Command-Line Front End
======================

    levy <verb> [flags]

Verbs: catalog, psi, wlsc, pruitt, potential, kernel, capacity, simulate,
experiment <harnack|ks|exitcomp|holder|jump|exittime|green>, verify.

Exit codes: 0 success/pass, 2 inequality violation, 3 inconclusive,
1 usage or compute error. Results go to stdout (or --out); logs to stderr.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from src.catalog.processes import default_catalog
from src.catalog.spec_io import dump_spec, resolve_spec, spec_fingerprint
from src.config import run_configurations
from src.errors import LevyToolkitError
from src.experiments import EXPERIMENTS, EXIT_CODES, FAIL, InequalitySuite
from src.experiments.report import table_payload
from src.exponent.characteristic import psi_from_spec
from src.exponent.pruitt import pruitt_h
from src.exponent.scaling import wlsc_fit
from src.mc.records import PathConfig
from src.mc.simulation import PathSimulator
from src.potential.balls import ball_potential, capacity_estimate, laplace_cross_check
from src.potential.kernels import kernel_bracket
from src.utils.file_paths import get_report_path
from src.utils.logging_utils import setup_logger

VERBS = ('catalog', 'psi', 'wlsc', 'pruitt', 'potential', 'kernel', 'capacity', 'simulate', 'experiment',
         'verify')
OK, USAGE_ERROR = 0, 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def _floats(text: str) -> List[float]:
    try:
        return [float(value) for value in text.split(',') if value.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from exc


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--spec', help="Spec JSON path or shorthand kind[:p1,p2] (e.g. stable:1.5)")
    common.add_argument('--d', type=int, default=3, help="Dimension for shorthand specs (default: 3)")
    common.add_argument('--out', help="Output file (default: stdout; reports go to reports/)")
    common.add_argument('--seed', type=_seed, help="RNG seed (printed when omitted)")
    common.add_argument('--n', type=int, help="Replica count")
    common.add_argument('--dt', type=float, help="Time step")
    common.add_argument('--eps', type=float, help="Small-jump cutoff")
    common.add_argument('--format', choices=('csv', 'json'), default='csv', help="Table format (default: csv)")
    common.add_argument('--r', type=_floats, help="Comma-separated radii")
    common.add_argument('--x', type=_floats, help="Comma-separated point coordinates")
    common.add_argument('--lam', type=_floats, help="Comma-separated Laplace arguments")
    common.add_argument('--s', type=float, help="Start-ball radius for the jump experiment")
    common.add_argument('--threads', type=int, help="Worker threads (results do not depend on it)")
    common.add_argument('--preset', choices=sorted(run_configurations.PRESETS), help="Run preset for experiments")
    common.add_argument('--occupation', action='store_true', help="simulate: write the occupation histogram")

    parser = _Parser(prog='levy', description="Potential theory and Monte Carlo verification for "
                                              "isotropic unimodal Lévy processes")
    verbs = parser.add_subparsers(dest='verb', metavar='verb', parser_class=_Parser)
    verbs.required = True
    for verb in VERBS:
        sub = verbs.add_parser(verb, parents=[common], help=f"{verb} verb")
        if verb == 'experiment':
            sub.add_argument('name', choices=sorted(EXPERIMENTS))
    return parser


class LevyCLI:
    """Dispatches one parsed command line"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.logger = setup_logger('levy')

    # -------------------------------------------------------------------------
    # helpers
    # -------------------------------------------------------------------------

    def spec(self):
        if not self.args.spec:
            raise UsageError(f"'{self.args.verb}' needs --spec")
        return resolve_spec(self.args.spec, d=self.args.d)

    def radii(self, default: List[float]) -> List[float]:
        return self.args.r or default

    def seed(self, fallback: Optional[int] = None) -> int:
        if self.args.seed is not None:
            return self.args.seed
        seed = fallback if fallback is not None else int(np.random.SeedSequence().entropy % 2 ** 64)
        print(f"seed: {seed}", file=sys.stderr)
        return seed

    def path_config(self, preset: Optional[dict] = None) -> PathConfig:
        preset = preset or {}
        return PathConfig.from_config(dt=self.args.dt or preset.get('dt'), eps=self.args.eps,
                                      n_replicas=self.args.n or preset.get('n_replicas'),
                                      workers=self.args.threads, seed=self.seed(preset.get('seed')))

    def emit(self, frame: pd.DataFrame, name: str = 'table') -> None:
        """CSV with round-trip floats, or a JSON table payload"""
        if self.args.format == 'json':
            text = json.dumps(table_payload(name, frame), sort_keys=True, indent=2, ensure_ascii=False)
        else:
            text = frame.to_csv(index=False, lineterminator='\n')
        if self.args.out:
            Path(self.args.out).write_text(text if text.endswith('\n') else text + '\n', encoding='utf-8')
            self.logger.info(f"📄 Wrote {self.args.out}")
        else:
            sys.stdout.write(text if text.endswith('\n') else text + '\n')

    @staticmethod
    def bracket_code(frame: pd.DataFrame) -> int:
        return EXIT_CODES[FAIL] if frame['violated'].any() else OK

    # -------------------------------------------------------------------------
    # verbs
    # -------------------------------------------------------------------------

    def catalog(self) -> int:
        if self.args.spec:
            text = dump_spec(self.spec(), self.args.out)
            if not self.args.out:
                print(text)
            return OK
        rows = [{'name': spec.name, 'kind': spec.kind, 'd': spec.d, 'sbm': spec.is_sbm,
                 'fingerprint': spec_fingerprint(spec)} for spec in default_catalog(self.args.d)]
        self.emit(pd.DataFrame(rows), 'catalog')
        return OK

    def psi(self) -> int:
        exponent = psi_from_spec(self.spec())
        r = np.asarray(self.radii([1.0]))
        self.emit(pd.DataFrame({'r': r, 'psi0': exponent.psi0(r), 'psi_star': exponent.psi_star(r)}), 'psi')
        return OK

    def wlsc(self) -> int:
        exponent = psi_from_spec(self.spec())
        certificate = wlsc_fit(exponent.psi_star)
        print(json.dumps(certificate.to_dict(), sort_keys=True), file=sys.stderr)
        self.emit(certificate.candidates, 'wlsc')
        return OK

    def pruitt(self) -> int:
        spec = self.spec()
        exponent = psi_from_spec(spec)
        rows = []
        for r in self.radii([1.0]):
            surrogate = float(exponent.psi_star(1.0 / r))
            h = pruitt_h(spec, r)
            lower, upper = 0.5 * surrogate, 8.0 * (1 + 2 * spec.d) * surrogate
            rows.append({'r': r, 'h': h, 'psi_star_inv': surrogate, 'lower': lower, 'upper': upper,
                         'violated': not lower <= h <= upper})
        frame = pd.DataFrame(rows)
        self.emit(frame, 'pruitt')
        return self.bracket_code(frame)

    def potential(self) -> int:
        spec = self.spec()
        if self.args.lam:
            frame = pd.DataFrame([laplace_cross_check(spec, lam) for lam in self.args.lam])
            self.emit(frame, 'laplace')
            return OK
        rows = []
        for r in self.radii([1.0]):
            bracket = ball_potential(spec, r)
            rows.append(dict(bracket.row(r), notes=bracket.notes))
        frame = pd.DataFrame(rows)
        self.emit(frame, 'ball_potential')
        return self.bracket_code(frame)

    def kernel(self) -> int:
        spec = self.spec()
        exponent = psi_from_spec(spec)
        certificate = wlsc_fit(exponent.psi_star)
        points = [np.asarray(self.args.x)] if self.args.x else self.radii([1.0])
        rows = []
        for point in points:
            bracket = kernel_bracket(exponent, certificate, point)
            rows.append(dict(bracket.row(float(np.linalg.norm(point))), notes=bracket.notes))
        frame = pd.DataFrame(rows)
        self.emit(frame, 'kernel')
        return self.bracket_code(frame)

    def capacity(self) -> int:
        spec = self.spec()
        rows = []
        for r in self.radii([1.0]):
            bracket = capacity_estimate(spec, r)
            rows.append(dict(bracket.row(r), notes=bracket.notes))
        frame = pd.DataFrame(rows)
        self.emit(frame, 'capacity')
        return self.bracket_code(frame)

    def simulate(self) -> int:
        spec = self.spec()
        simulator = PathSimulator(spec, self.path_config())
        r = self.radii([1.0])[0]
        x0 = np.asarray(self.args.x) if self.args.x else np.zeros(spec.d)
        if self.args.occupation:
            histogram = simulator.occupation(r, x0)
            self.logger.info(f"📊 Occupation total mass {histogram.total_mass:.6g} over {histogram.n} replicas")
            self.emit(histogram.to_frame(), 'occupation')
            return OK
        batch = simulator.simulate_exit(x0, r)
        self.logger.info(f"📊 mean tau {batch.mean_tau:.6g} +- {batch.tau_stderr:.2g}, "
                         f"jumped {batch.jump_fraction:.3f}, censored {batch.n_censored}")
        self.emit(batch.to_frame(), 'exits')
        return OK

    def experiment(self) -> int:
        if self.args.preset:
            run_configurations.set_active_config(self.args.preset)
        preset = run_configurations.ACTIVE_CONFIG
        spec = self.spec()
        name = self.args.name
        runner = EXPERIMENTS[name](spec, self.path_config(preset))
        if name == 'harnack':
            report = runner.run(self.radii(preset['r_grid']))
        elif name == 'ks':
            report = runner.run(self.radii(preset['r_grid']), preset['shrink_grid'])
        elif name in ('exitcomp', 'green'):
            report = runner.run(self.radii([1.0])[0])
        elif name == 'holder':
            report = runner.run(self.radii([preset['holder_radius']])[0])
        elif name == 'jump':
            report = runner.run(self.args.s or preset['jump_start_radius'], self.radii(preset['jump_r_grid']))
        else:
            report = runner.run(self.radii(preset['r_grid']))
        path = Path(self.args.out) if self.args.out else Path(
            get_report_path(f"{name}_{report.spec_fingerprint[:12]}.json"))
        report.write(path)
        self.logger.info(f"📄 Report written to {path}")
        print(f"{name}: {report.verdict} ({path})")
        return report.exit_code

    def verify(self) -> int:
        specs = [self.spec()] if self.args.spec else default_catalog(self.args.d)
        suite = InequalitySuite(specs)
        results = suite.run_all_validations()
        if self.args.out and self.args.format == 'json':
            suite.generate_report().write(self.args.out)
        else:
            self.emit(results, 'verify')
        return EXIT_CODES[suite.verdict]

    def dispatch(self) -> int:
        return getattr(self, self.args.verb)()


def run(argv: Optional[List[str]] = None) -> int:
    """Execute one command line and return its exit code"""
    try:
        args = build_parser().parse_args(argv)
        return LevyCLI(args).dispatch()
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return USAGE_ERROR
    except LevyToolkitError as exc:
        setup_logger('levy').error(f"❌ {type(exc).__name__}: {exc}", exc_info=True)
        return USAGE_ERROR
    except ValueError as exc:
        setup_logger('levy').error(f"❌ {exc}", exc_info=True)
        return USAGE_ERROR


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
