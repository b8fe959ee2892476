#!/usr/bin/env python3
"""
Analytic Inequality Suite
=========================

Deterministic checks (no Monte Carlo) of every proven two-sided inequality
on the catalog, the entry point of ``levy verify``:

- radial profiles and Bernstein functions satisfy their invariants;
- psi* envelope scaling, psi* <= 12 psi0;
- Pruitt function and Bernstein envelope sandwiches of psi*;
- subordinator potential, ball potential, kernel and capacity brackets;
- closed-form anchors (Brownian and Cauchy kernels, Brownian ball potential).

Each check adds one row per spec to the results table: points checked,
violations, the worst relative slack and a status.
"""

from typing import Callable, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.catalog.processes import ProcessSpec, check_bernstein, check_profile, default_catalog
from src.catalog.projection import project_density_1d
from src.catalog.spec_io import spec_fingerprint, stable_hash
from src.config import get_grid_config
from src.errors import LevyToolkitError, ProfileInvariantError
from src.experiments.report import FAIL, PASS, ExperimentReport
from src.exponent.characteristic import psi_from_spec
from src.exponent.pruitt import bernstein_envelope, pruitt_h
from src.exponent.scaling import wlsc_fit
from src.potential.balls import ball_potential, capacity_estimate
from src.potential.kernels import green_kernel, kernel_bracket, potential_for, riesz_kernel
from src.utils.logging_utils import setup_logger

CHECK_RTOL = 1e-9
ENVELOPE_FACTORS = (0.125, 0.5, 1.0, 2.0, 8.0)
PSI_STAR_FACTOR = 12.0
INVERSION_VIOLATION_LIMIT = 0.05
ANCHOR_RTOL = 1e-4
ANCHOR_RADII = (0.1, 1.0, 10.0)

SKIPPED = 'skipped'


class InequalitySuite:
    """
    Runs every analytic check on a list of specs

    Usage:
        suite = InequalitySuite(default_catalog(3))
        results = suite.run_all_validations()
        report = suite.generate_report()
    """

    def __init__(self, specs: Optional[Sequence[ProcessSpec]] = None, d: int = 3, points: int = 49):
        self.specs = list(specs) if specs is not None else default_catalog(d)
        grids = get_grid_config()
        self.grid = np.geomspace(grids.envelope_min, grids.envelope_max, points)
        self.ball_grid = np.geomspace(grids.ball_min, grids.ball_max, grids.ball_points)
        self.logger = setup_logger('InequalitySuite')
        self.rows: List[dict] = []
        self.stats = {'checks': 0, 'violations': 0, 'skipped': 0, 'errors': 0}

    # -------------------------------------------------------------------------
    # bookkeeping
    # -------------------------------------------------------------------------

    def _record(self, check: str, spec: ProcessSpec, points: int, violations: int, worst: float,
                status: Optional[str] = None, detail: str = ''):
        status = status or (FAIL if violations else PASS)
        self.rows.append({'check': check, 'spec': spec.name, 'points': int(points), 'violations': int(violations),
                          'worst_slack': float(worst), 'status': status, 'detail': detail})
        self.stats['checks'] += 1
        self.stats['violations'] += int(violations)
        if status == SKIPPED:
            self.stats['skipped'] += 1
        if status == FAIL:
            self.logger.warning(f"⚠️ {check} on '{spec.name}': {violations} violation(s) {detail}")

    def _bracket(self, check: str, spec: ProcessSpec, lower, value, upper, detail: str = ''):
        """Record lower <= value <= upper pointwise (None or NaN bounds are open)"""
        value = np.asarray(value, dtype=float)
        slack = np.full(value.shape, np.inf)
        bad = ~np.isfinite(value)
        for bound, is_lower in ((lower, True), (upper, False)):
            if bound is None:
                continue
            bound = np.broadcast_to(np.asarray(bound, dtype=float), value.shape)
            active = np.isfinite(bound)
            with np.errstate(divide='ignore', invalid='ignore'):
                if is_lower:
                    bad |= active & (value < bound * (1.0 - CHECK_RTOL))
                    margin = value / bound - 1.0
                else:
                    bad |= active & (value > bound * (1.0 + CHECK_RTOL))
                    margin = bound / value - 1.0
            slack = np.where(active, np.minimum(slack, margin), slack)
        self._record(check, spec, value.size, int(bad.sum()), float(np.min(slack)) if slack.size else np.inf,
                     detail=detail)

    def _guarded(self, check: str, spec: ProcessSpec, action: Callable[[], None]):
        try:
            action()
        except ProfileInvariantError as exc:
            self._record(check, spec, 0, 1, -np.inf, detail=f"{exc} pair={exc.pair}")
        except LevyToolkitError as exc:
            self.stats['errors'] += 1
            self._record(check, spec, 0, 1, -np.inf, detail=f"{type(exc).__name__}: {exc}")

    # -------------------------------------------------------------------------
    # runner
    # -------------------------------------------------------------------------

    def run_all_validations(self) -> pd.DataFrame:
        """Execute all checks on all specs"""
        self.logger.info(f"🚀 Inequality suite: {len(self.specs)} specs, {self.grid.size}-point grid")
        self.rows = []
        for spec in self.specs:
            self.logger.info(f"🔄 Checking '{spec.name}'")
            self._guarded('profile', spec, lambda: self.validate_profiles(spec))
            self._guarded('envelope_scaling', spec, lambda: self.validate_envelope_scaling(spec))
            self._guarded('psi_star_vs_psi0', spec, lambda: self.validate_psi_star(spec))
            self._guarded('pruitt', spec, lambda: self.validate_pruitt(spec))
            self._guarded('bernstein_envelope', spec, lambda: self.validate_bernstein_envelope(spec))
            self._guarded('subordinator_potential', spec, lambda: self.validate_subordinator_potential(spec))
            self._guarded('ball_potential', spec, lambda: self.validate_ball_potential(spec))
            self._guarded('kernel', spec, lambda: self.validate_kernel(spec))
            self._guarded('capacity', spec, lambda: self.validate_capacity(spec))
            self._guarded('closed_form', spec, lambda: self.validate_closed_forms(spec))
        results = self.results
        failed = int((results['status'] == FAIL).sum())
        icon = '✅' if not failed else '❌'
        self.logger.info(f"{icon} Inequality suite finished: {len(results)} checks, {failed} failed")
        return results

    @property
    def results(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=['check', 'spec', 'points', 'violations', 'worst_slack',
                                                'status', 'detail'])

    @property
    def verdict(self) -> str:
        return FAIL if (self.results['status'] == FAIL).any() else PASS

    # -------------------------------------------------------------------------
    # checks
    # -------------------------------------------------------------------------

    def validate_profiles(self, spec: ProcessSpec):
        """nu0 non-increasing and integrable, nu1 non-increasing, phi a Bernstein function"""
        checked = 0
        if spec.is_sbm:
            checked += check_bernstein(spec.bernstein).size
        density = spec.levy_density
        if density is not None and density.has_jumps:
            checked += check_profile(density).size
            if not spec.is_sbm and spec.d >= 2:
                checked += project_density_1d(spec).check_monotone().size
        self._record('profile', spec, checked, 0, np.inf)

    def validate_envelope_scaling(self, spec: ProcessSpec):
        """(1/2) s^2/(s^2+1) psi*(r) <= psi*(s r) <= 2 (1+s^2) psi*(r)"""
        exponent = psi_from_spec(spec)
        base = exponent.psi_star(self.grid)
        lower, value, upper = [], [], []
        for s in ENVELOPE_FACTORS:
            lower.append(0.5 * s * s / (s * s + 1.0) * base)
            value.append(exponent.psi_star(s * self.grid))
            upper.append(2.0 * (1.0 + s * s) * base)
        self._bracket('envelope_scaling', spec, np.concatenate(lower), np.concatenate(value),
                      np.concatenate(upper))

    def validate_psi_star(self, spec: ProcessSpec):
        exponent = psi_from_spec(spec)
        self._bracket('psi_star_vs_psi0', spec, None, exponent.psi_star(self.grid),
                      PSI_STAR_FACTOR * exponent.psi0(self.grid))

    def validate_pruitt(self, spec: ProcessSpec):
        """(1/2) psi*(1/r) <= h(r) <= 8 (1+2d) psi*(1/r)"""
        if spec.levy_density is None:
            self._record('pruitt', spec, 0, 0, np.inf, status=SKIPPED, detail='no radial Lévy density')
            return
        exponent = psi_from_spec(spec)
        surrogate = exponent.psi_star(1.0 / self.grid)
        h = np.array([pruitt_h(spec, r) for r in self.grid])
        self._bracket('pruitt', spec, 0.5 * surrogate, h, 8.0 * (1 + 2 * spec.d) * surrogate)

    def validate_bernstein_envelope(self, spec: ProcessSpec):
        """phi_env(r^2) / (8(1+2d)) <= psi*(r) <= 4 phi_env(r^2)"""
        if spec.levy_density is None:
            self._record('bernstein_envelope', spec, 0, 0, np.inf, status=SKIPPED, detail='no radial Lévy density')
            return
        envelope = bernstein_envelope(spec)
        phi = envelope(self.grid ** 2)
        exponent = psi_from_spec(spec)
        self._bracket('bernstein_envelope', spec, phi / (8.0 * (1 + 2 * spec.d)), exponent.psi_star(self.grid),
                      4.0 * phi)

    def validate_subordinator_potential(self, spec: ProcessSpec):
        if not spec.is_sbm:
            self._record('subordinator_potential', spec, 0, 0, np.inf, status=SKIPPED, detail='not an SBM')
            return
        potential = potential_for(spec)
        if potential.method == 'bracket-only':
            self._record('subordinator_potential', spec, 0, 0, np.inf, status=SKIPPED, detail='bounded phi')
            return
        lower, upper = potential.bracket(self.grid)
        self._bracket('subordinator_potential', spec, lower, potential(self.grid), upper,
                      detail=f"method={potential.method}")
        if potential.method == 'laplace-inversion' and potential.violation_rate >= INVERSION_VIOLATION_LIMIT:
            self._record('subordinator_inversion_rate', spec, potential.grid.size,
                         potential.stats['clamped_points'], -potential.violation_rate,
                         detail=f"pre-clamp violation rate {potential.violation_rate:.1%}")

    def validate_ball_potential(self, spec: ProcessSpec):
        if not spec.is_sbm or spec.d < 3:
            self._record('ball_potential', spec, 0, 0, np.inf, status=SKIPPED, detail='needs an SBM in d >= 3')
            return
        brackets = [ball_potential(spec, r) for r in self.ball_grid]
        self._bracket('ball_potential', spec, [b.lower for b in brackets], [b.estimate for b in brackets],
                      [b.upper for b in brackets])

    def validate_kernel(self, spec: ProcessSpec):
        """|x|^d psi*(1/|x|) G(x) <= 36e/|B1|, plus the certified lower bounds"""
        if not spec.is_sbm or spec.d < 3:
            self._record('kernel', spec, 0, 0, np.inf, status=SKIPPED, detail='needs an SBM in d >= 3')
            return
        exponent = psi_from_spec(spec)
        certificate = wlsc_fit(exponent.psi_star)
        brackets = [kernel_bracket(exponent, certificate, r) for r in self.ball_grid]
        lower = [b.lower if b.lower is not None else np.nan for b in brackets]
        self._bracket('kernel', spec, lower,
                      [b.estimate for b in brackets], [b.upper for b in brackets],
                      detail=f"certificate beta={certificate.beta:g} verified={certificate.verified}")

    def validate_capacity(self, spec: ProcessSpec):
        if not spec.is_sbm or spec.d < 3:
            self._record('capacity', spec, 0, 0, np.inf, status=SKIPPED, detail='needs an SBM in d >= 3')
            return
        brackets = [capacity_estimate(spec, r) for r in self.ball_grid]
        self._bracket('capacity', spec, [b.lower for b in brackets], [b.estimate for b in brackets], None)

    def validate_closed_forms(self, spec: ProcessSpec):
        """Stable kernels against the Riesz formula, Brownian ball potential r^2/2"""
        alpha = float(spec.params.get('alpha', 1.0)) if spec.kind == 'stable' else None
        if alpha is None or spec.d < 3:
            self._record('closed_form', spec, 0, 0, np.inf, status=SKIPPED, detail='no closed form')
            return
        radii = np.array(ANCHOR_RADII)
        kernel = np.array([green_kernel(spec, r) for r in radii])
        reference = riesz_kernel(alpha, spec.d, radii)
        errors = np.abs(kernel / reference - 1.0)
        if alpha == 2.0 and spec.d == 3:
            balls = np.array([ball_potential(spec, r).estimate for r in (0.5, 1.0, 2.0)])
            errors = np.concatenate([errors, np.abs(balls / (0.5 * np.array([0.5, 1.0, 2.0]) ** 2) - 1.0)])
        self._record('closed_form', spec, errors.size, int((errors > ANCHOR_RTOL).sum()),
                     float(ANCHOR_RTOL - errors.max()), detail=f"max relative error {errors.max():.2e}")

    # -------------------------------------------------------------------------
    # report
    # -------------------------------------------------------------------------

    def generate_report(self) -> ExperimentReport:
        results = self.results if self.rows else self.run_all_validations()
        fingerprints = sorted(spec_fingerprint(spec) for spec in self.specs)
        notes = [f"{row['check']} on {row['spec']}: {row['detail']}"
                 for row in results[results['status'] == FAIL].to_dict(orient='records')]
        summary = {'checks': int(len(results)), 'failed': int((results['status'] == FAIL).sum()),
                   'skipped': int((results['status'] == SKIPPED).sum()), 'specs': [s.name for s in self.specs]}
        return ExperimentReport(experiment='verify', spec_fingerprint=stable_hash(fingerprints),
                                spec={'catalog': [spec.document for spec in self.specs]},
                                config={'grid_points': int(self.grid.size), 'ball_points': int(self.ball_grid.size),
                                        'rtol': CHECK_RTOL},
                                tables={'checks': results}, verdict=self.verdict, notes=notes, summary=summary)
