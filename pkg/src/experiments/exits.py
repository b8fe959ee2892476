#!/usr/bin/env python3
"""
Exit Distribution Experiments
=============================

- ExitComparabilityExperiment: P^x(X_{tau_{B_r0}} in Z) against
  P^y(X_{tau_{B_r}} in Z) for x, y in B_{r0/2} and exterior cells Z of B_r.
- JumpProbabilityExperiment: P^0(|X_{tau_{B_s}}| >= r) over a radius grid,
  checked against the psi* decay shape and the Pruitt-function form.
- ExitTimeScalingExperiment: E^0 tau_{B_r} psi*(1/r) across radii, with an
  optional step-size robustness run at dt/2.
"""

from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import ContractError, UnsupportedSpecError
from src.experiments.base import VerificationExperiment, combined_se
from src.experiments.report import FAIL, INCONCLUSIVE, PASS, ExperimentReport
from src.exponent.characteristic import psi_from_spec
from src.exponent.pruitt import pruitt_h
from src.exponent.scaling import check_jump_prob_bound, wlsc_fit
from src.mc.records import ExitBatch
from src.mc.regions import BOUNDARY_RTOL, AnnulusPartition
from src.mc.simulation import PathSimulator, exit_tail_reference, exit_time_reference

STEP_SIZE_RELATIVE = 0.05


def _stable_alpha(spec) -> Optional[float]:
    return float(spec.params.get('alpha', 1.0)) if spec.kind == 'stable' else None


class ExitComparabilityExperiment(VerificationExperiment):
    name = 'exit_comparability'

    def start_grid(self, r0: float) -> np.ndarray:
        """0, +-0.45 r0 e1 and 0.45 r0 e2 (all inside B_{r0/2})"""
        points = [self.axis_point(0.0), self.axis_point(0.45 * r0), self.axis_point(-0.45 * r0)]
        if self.d > 1:
            points.append(self.axis_point(0.45 * r0, axis=1))
        return np.array(points)

    def _cell_probabilities(self, batch: ExitBatch, partition: AnnulusPartition, r: float) -> Tuple[np.ndarray, ...]:
        positions = batch.exit_positions[batch.completed]
        labels = partition.assign(positions)
        labels[np.linalg.norm(positions, axis=1) <= r * (1.0 + BOUNDARY_RTOL)] = -1
        n = positions.shape[0]
        counts = np.bincount(labels[labels >= 0], minlength=partition.n_cells + 1)
        p = counts / n
        return p, np.sqrt(p * (1.0 - p) / n)

    def run(self, r: float, inner_radius: Optional[float] = None, side: Optional[float] = None) -> ExperimentReport:
        """
        Args:
            r: outer radius
            inner_radius: radius of the ball exited from x (default r0 = r/(2L+1));
                with inner_radius = r both estimates come from the same sample
            side: cell side of the annulus partition (default r)
        """
        r0 = self.r0(r)
        inner = r0 if inner_radius is None else float(inner_radius)
        if not 0.0 < inner <= r:
            raise ContractError(f"inner radius must lie in (0, r], got {inner!r}")
        partition = AnnulusPartition(self.d, r, side if side is not None else r)
        grid = self.start_grid(r0)
        self.logger.info(f"🚀 Exit comparability on '{self.spec.name}': r={r:g}, inner={inner:g}, "
                         f"{partition.n_cells} cells + tail, {len(grid)} start points")

        batches: Dict[Tuple[float, int], Tuple[np.ndarray, np.ndarray]] = {}
        for radius in sorted({inner, float(r)}):
            for i, point in enumerate(grid):
                batch = self.simulator.simulate_exit(point, radius, stream=self.next_stream())
                batches[(radius, i)] = self._cell_probabilities(batch, partition, r)

        labels = [str(c) for c in range(partition.n_cells)] + ['tail']
        rows = []
        for i in range(len(grid)):
            num, num_se = batches[(inner, i)]
            for j in range(len(grid)):
                den, den_se = batches[(float(r), j)]
                informative = (num > 0.0) | (den > 0.0)
                for cell in np.flatnonzero(informative):
                    ratio = num[cell] / den[cell] if den[cell] > 0.0 else float('inf')
                    ratio_se = (ratio * np.sqrt((num_se[cell] / num[cell]) ** 2 + (den_se[cell] / den[cell]) ** 2)
                                if num[cell] > 0.0 and den[cell] > 0.0 else float('nan'))
                    rows.append({'x': i, 'y': j, 'cell': labels[cell], 'numerator': num[cell],
                                 'numerator_stderr': num_se[cell], 'denominator': den[cell],
                                 'denominator_stderr': den_se[cell], 'ratio': ratio, 'ratio_stderr': ratio_se,
                                 'resolved': bool(num[cell] > self.sigma * num_se[cell]
                                                  and den[cell] > self.sigma * den_se[cell]),
                                 'violation': bool(den[cell] == 0.0 and num[cell] > self.sigma * num_se[cell])})
        table = pd.DataFrame(rows, columns=['x', 'y', 'cell', 'numerator', 'numerator_stderr', 'denominator',
                                            'denominator_stderr', 'ratio', 'ratio_stderr', 'resolved', 'violation'])
        isotropy = self._isotropy(batches, partition, inner, float(r))

        resolved = table[table['resolved']]
        tail = resolved[resolved['cell'] == 'tail']
        notes = []
        summary = {'cells': partition.n_cells, 'resolved_entries': int(len(resolved)),
                   'violations': int(table['violation'].sum()),
                   'max_resolved_ratio': float(resolved['ratio'].max()) if len(resolved) else None,
                   'max_tail_ratio': float(tail['ratio'].max()) if len(tail) else None,
                   'inner_radius': inner}
        if len(isotropy):
            summary['isotropy_disagreements'] = int((~isotropy['agree']).sum())
        if table['violation'].any():
            verdict = FAIL
            notes.append(f"{int(table['violation'].sum())} cell(s) reached from x but never from y")
        elif not len(resolved):
            verdict = INCONCLUSIVE
            notes.append("no exterior cell is resolved above the noise (continuous exits land on the sphere)")
        else:
            verdict = PASS
        tables = {'ratios': table, 'start_points': pd.DataFrame(grid, columns=[f"x{k}" for k in range(self.d)])}
        if len(isotropy):
            tables['isotropy'] = isotropy
        return self.report(tables, verdict, notes, summary,
                           {'r': float(r), 'inner_radius': inner, 'side': partition.side})

    def _isotropy(self, batches, partition: AnnulusPartition, inner: float, r: float) -> pd.DataFrame:
        """ratio(x, Z) against ratio(-x, -Z) with y = 0, for the antipodal pair on the first axis"""
        mirror = np.append(partition.mirror(), partition.tail_label)
        den, den_se = batches[(r, 0)]
        plus, plus_se = batches[(inner, 1)]
        minus, minus_se = batches[(inner, 2)]
        rows = []
        for cell in range(partition.n_cells + 1):
            image = mirror[cell]
            if image < 0 or den[cell] <= 0.0 or den[image] <= 0.0:
                continue
            if plus[cell] <= self.sigma * plus_se[cell] and minus[image] <= self.sigma * minus_se[image]:
                continue
            a = plus[cell] / den[cell]
            b = minus[image] / den[image]
            se = float(combined_se(plus_se[cell] / den[cell], minus_se[image] / den[image]))
            rows.append({'cell': int(cell), 'image': int(image), 'ratio_x': a, 'ratio_minus_x': b,
                         'difference': a - b, 'stderr': se, 'agree': bool(abs(a - b) <= self.sigma * se)})
        return pd.DataFrame(rows, columns=['cell', 'image', 'ratio_x', 'ratio_minus_x', 'difference',
                                           'stderr', 'agree'])


class JumpProbabilityExperiment(VerificationExperiment):
    name = 'jump_probability'

    def run(self, s: float, r_grid: Sequence[float]) -> ExperimentReport:
        """
        Args:
            s: start-ball radius
            r_grid: radii r >= 2s
        """
        r_values = np.sort(np.asarray(r_grid, dtype=float))
        self.logger.info(f"🚀 Jump probability on '{self.spec.name}': s={s:g}, r in {r_values.tolist()}")
        batch = self.simulator.simulate_exit(np.zeros(self.d), s, stream=self.next_stream())
        norms = np.linalg.norm(batch.exit_positions, axis=1)
        estimates, errors = zip(*[batch.proportion(norms >= radius) for radius in r_values])
        exponent = psi_from_spec(self.spec)
        certificate = wlsc_fit(exponent.psi_star)
        check = check_jump_prob_bound(exponent, s, r_values, estimates, errors, certificate=certificate,
                                      sigma_rule=self.sigma)
        table = check.table.copy()
        notes = []

        try:
            h = np.array([pruitt_h(self.spec, radius) for radius in r_values])
            table['pruitt_h'] = h
            table['pruitt_ratio'] = table['estimate'] / (h * batch.mean_tau)
        except UnsupportedSpecError as exc:
            notes.append(f"Pruitt form skipped: {exc}")
        alpha = _stable_alpha(self.spec)
        if alpha is not None and alpha < 2.0:
            table['reference'] = [exit_tail_reference(alpha, s, radius) for radius in r_values]

        summary = {'s': float(s), 'mean_tau': batch.mean_tau, 'tau_stderr': batch.tau_stderr,
                   'jump_fraction': batch.jump_fraction, 'censored': batch.n_censored,
                   'certificate': certificate.to_dict()}
        if 'pruitt_ratio' in table:
            summary['max_pruitt_ratio'] = float(table['pruitt_ratio'].max())
        if not np.any(np.asarray(estimates) > 0.0):
            verdict = INCONCLUSIVE
            notes.append("no path left B_s beyond the smallest r (continuous exits)")
        elif check.violated:
            verdict = FAIL
            notes.append("estimate increases along r beyond the sigma band")
        else:
            verdict = PASS
        return self.report({'jump_probability': table}, verdict, notes, summary,
                           {'s': float(s), 'r_grid': r_values.tolist()})


class ExitTimeScalingExperiment(VerificationExperiment):
    name = 'exit_time_scaling'

    def run(self, r_grid: Sequence[float], halve_dt: bool = False) -> ExperimentReport:
        """
        Args:
            r_grid: ball radii
            halve_dt: also rerun at dt/2 and compare the mean exit times
        """
        exponent = psi_from_spec(self.spec)
        alpha = _stable_alpha(self.spec)
        self.logger.info(f"🚀 Exit-time scaling on '{self.spec.name}': r in {list(r_grid)}")
        rows = []
        for r in r_grid:
            batch = self.simulator.simulate_exit(np.zeros(self.d), r, stream=self.next_stream())
            psi = float(exponent.psi_star(1.0 / r))
            row = {'r': float(r), 'mean_tau': batch.mean_tau, 'stderr': batch.tau_stderr, 'psi_star': psi,
                   'product': batch.mean_tau * psi, 'censored': batch.n_censored}
            if alpha is not None:
                row['reference'] = exit_time_reference(alpha, self.d, r)
            rows.append(row)
        table = pd.DataFrame(rows)

        band = self.settings.exit_time_band
        inside = (table['product'] >= 1.0 / band) & (table['product'] <= band)
        notes = []
        verdict = PASS if inside.all() else FAIL
        if not inside.all():
            notes.append(f"mean tau psi*(1/r) leaves [1/{band:g}, {band:g}]")
        tables = {'exit_time': table}
        if halve_dt:
            steps = self._step_size(r_grid)
            tables['step_size'] = steps
            if not steps['robust'].all():
                verdict = FAIL
                notes.append("halving dt moved the mean exit time beyond the tolerance")
        summary = {'band': band, 'spread': float(table['product'].max() / table['product'].min()),
                   'censored': int(table['censored'].sum())}
        return self.report(tables, verdict, notes, summary,
                           {'r_grid': [float(r) for r in r_grid], 'halve_dt': halve_dt})

    def _step_size(self, r_grid: Sequence[float]) -> pd.DataFrame:
        fine = PathSimulator(self.spec, self.config.with_(dt=self.config.dt / 2.0,
                                                          max_steps=2 * self.config.max_steps))
        rows = []
        for r in r_grid:
            stream = self.next_stream()
            coarse = self.simulator.simulate_exit(np.zeros(self.d), r, stream=stream)
            halved = fine.simulate_exit(np.zeros(self.d), r, stream=stream)
            difference = halved.mean_tau - coarse.mean_tau
            se = float(combined_se(coarse.tau_stderr, halved.tau_stderr))
            tolerance = self.sigma * se + STEP_SIZE_RELATIVE * coarse.mean_tau
            rows.append({'r': float(r), 'mean_tau_dt': coarse.mean_tau, 'mean_tau_half_dt': halved.mean_tau,
                         'difference': difference, 'tolerance': tolerance,
                         'robust': bool(abs(difference) <= tolerance)})
        return pd.DataFrame(rows)


def exit_comparability(spec, r: float, cfg=None, inner_radius: Optional[float] = None) -> ExperimentReport:
    return ExitComparabilityExperiment(spec, cfg).run(r, inner_radius)


def jump_probability(spec, s: float, r_grid: Sequence[float], cfg=None) -> ExperimentReport:
    return JumpProbabilityExperiment(spec, cfg).run(s, r_grid)


def exit_time_scaling(spec, r_grid: Sequence[float], cfg=None, halve_dt: bool = False) -> ExperimentReport:
    return ExitTimeScalingExperiment(spec, cfg).run(r_grid, halve_dt)
