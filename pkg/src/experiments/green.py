#!/usr/bin/env python3
"""
Green Function and Exit Distribution Experiment
===============================================

Checks the Hunt-formula Green function and the Ikeda–Watanabe exit
distribution of B_r against their lower bounds and against direct simulation:

- G_{B_r}(x, y) >= eps G(x - y) whenever L |x - y| <= r - |x|, with L the
  Green lower-bound radius factor;
- G_{B_r}(x, y) >= C G(x - y) with C > 0 for x, y in B_{r/5} (subordinate BMs);
  the smallest observed ratio is reported as the empirical C;
- the Poisson kernel from x = 0 is a subprobability, its tail {|z| > 4r}
  matches the direct exit frequency and mirrored cells Z, -Z carry equal mass.
"""

from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from src.errors import UnsupportedSpecError
from src.experiments.base import VerificationExperiment, combined_se
from src.experiments.report import FAIL, INCONCLUSIVE, PASS, ExperimentReport
from src.mc.regions import ANNULUS_OUTER, AnnulusPartition, Tail
from src.potential.green_function import hunt_green, poisson_kernel
from src.potential.kernels import green_kernel_table

# Share of mirrored cell pairs allowed outside the sigma band
SYMMETRY_DISAGREEMENT_LIMIT = 0.1
# Absolute allowances for evaluating the jump density at cell centers
TAIL_ALLOWANCE = 0.02
TOTAL_ALLOWANCE = 0.05
FAR_FRACTIONS = (0.5, 1.0)
SMALL_BALL = 0.2


class GreenFunctionExperiment(VerificationExperiment):
    name = 'green_function'

    def lower_bound_pairs(self, r: float, factor: float) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(x, y) pairs with L |x - y| = f (r - |x|) for f in FAR_FRACTIONS"""
        pairs = []
        for start in (0.0, 0.25 * r):
            x = self.axis_point(start)
            reach = (r - start) / factor
            for fraction in FAR_FRACTIONS:
                step = fraction * reach
                pairs.append((x, x + self.axis_point(step)))
                pairs.append((x, x - self.axis_point(step)))
                if self.d > 1:
                    pairs.append((x, x + self.axis_point(step, axis=1)))
        return pairs

    def small_ball_pairs(self, r: float) -> List[Tuple[np.ndarray, np.ndarray]]:
        """(x, y) pairs inside B_{r/5}"""
        near = 0.75 * SMALL_BALL * r
        x_points = [self.axis_point(0.0), self.axis_point(near)]
        y_points = [self.axis_point(-near), self.axis_point(0.5 * SMALL_BALL * r, axis=min(1, self.d - 1))]
        return [(x, y) for x in x_points for y in y_points if np.linalg.norm(x - y) > 0.0]

    def _green_rows(self, r: float, pairs, kernel, exits: Dict[bytes, object]) -> pd.DataFrame:
        rows = []
        for x, y in pairs:
            key = x.tobytes()
            if key not in exits:
                exits[key] = self.simulator.simulate_exit(x, r, stream=self.next_stream())
            estimate = hunt_green(self.spec, r, x, y, exits[key], kernel=kernel)
            rows.append({'x0': float(x[0]), 'y0': float(y[0]), 'y1': float(y[1]) if self.d > 1 else 0.0,
                         'distance': float(np.linalg.norm(x - y)), 'green': estimate.value,
                         'stderr': estimate.stderr, 'free_kernel': estimate.free_kernel,
                         'ratio': estimate.value / estimate.free_kernel, 'censored': estimate.censored})
        return pd.DataFrame(rows)

    def _green_checks(self, r: float, notes: List[str]):
        if not self.spec.is_sbm:
            notes.append(f"'{self.spec.name}' has no tabulated potential kernel: Green bounds skipped")
            return None, None
        kernel = green_kernel_table(self.spec)
        factor = self.green_factor
        eps = self.settings.green_lower_eps
        exits: Dict[bytes, object] = {}

        lower = self._green_rows(r, self.lower_bound_pairs(r, factor.value), kernel, exits)
        lower['bound'] = eps * lower['free_kernel']
        lower['holds'] = lower['green'] + self.sigma * lower['stderr'] >= lower['bound']

        small = self._green_rows(r, self.small_ball_pairs(r), kernel, exits)
        small['holds'] = small['green'] - self.sigma * small['stderr'] > 0.0
        return lower, small

    def _poisson_checks(self, r: float, notes: List[str]):
        if not self.spec.has_jumps:
            notes.append(f"'{self.spec.name}' exits continuously: Poisson kernel skipped")
            return None, None, None
        origin = np.zeros(self.d)
        histogram, batch = self.simulator.occupation(r, origin, stream=self.next_stream(), with_exits=True)
        frame = poisson_kernel(self.spec, r, origin, histogram)
        partition = AnnulusPartition(self.d, r)

        total = float(frame['mass'].sum())
        # cells share one occupation sample, so their errors add up
        total_se = float(frame['stderr'].sum())
        if not np.isfinite(total_se):
            notes.append("a single replica block gives no Poisson-kernel errors: checks skipped")
            return frame, None, None
        tail = frame[frame['cell'] == 'tail'].iloc[0]
        direct, direct_se = batch.proportion(Tail(ANNULUS_OUTER * r).contains(batch.exit_positions))
        tail_se = float(combined_se(tail['stderr'], direct_se))
        checks = pd.DataFrame([
            {'check': 'subprobability', 'estimate': total, 'reference': 1.0, 'stderr': total_se,
             'holds': bool(total <= 1.0 + self.sigma * total_se + TOTAL_ALLOWANCE)},
            {'check': 'tail_vs_direct', 'estimate': float(tail['mass']), 'reference': direct, 'stderr': tail_se,
             'holds': bool(abs(tail['mass'] - direct) <= self.sigma * tail_se + TAIL_ALLOWANCE)},
            {'check': 'total_vs_jump_fraction', 'estimate': total, 'reference': batch.jump_fraction,
             'stderr': total_se, 'holds': None},
        ])

        masses = frame['mass'].to_numpy()[:-1]
        errors = frame['stderr'].to_numpy()[:-1]
        cell = np.arange(masses.size)
        image = partition.mirror()
        pair = image > cell
        se = combined_se(errors[pair], errors[image[pair]])
        symmetry = pd.DataFrame({'cell': cell[pair], 'image': image[pair], 'mass': masses[pair],
                                 'mirror_mass': masses[image[pair]], 'stderr': se})
        symmetry['agree'] = np.abs(symmetry['mass'] - symmetry['mirror_mass']) <= self.sigma * symmetry['stderr']
        return frame, checks, symmetry

    def run(self, r: float) -> ExperimentReport:
        """
        Args:
            r: ball radius
        """
        self.r0(r)
        factor = self.green_factor
        self.logger.info(f"🚀 Green function on '{self.spec.name}': r={r:g}, L={factor.value:.4g} "
                         f"({factor.source}), eps={self.settings.green_lower_eps:g}")
        notes: List[str] = []
        if factor.source == 'config' and factor.proven is not None:
            notes.append(f"proven L = {factor.proven:.3e} exceeds the cap; configured L = {factor.value:g} used")

        tables: Dict[str, pd.DataFrame] = {}
        summary = {'L': factor.value, 'eps': self.settings.green_lower_eps}
        failures = []
        try:
            lower, small = self._green_checks(r, notes)
        except UnsupportedSpecError as exc:
            notes.append(f"Green bounds skipped: {exc}")
            lower, small = None, None
        if lower is not None:
            tables.update({'green_lower': lower, 'small_ball': small})
            summary.update({'min_ratio': float(lower['ratio'].min()), 'empirical_C': float(small['ratio'].min())})
            if not lower['holds'].all():
                failures.append(f"{int((~lower['holds']).sum())} pair(s) fall below eps G(x - y)")
            if not small['holds'].all():
                failures.append("the Green function vanishes for some pair in B_{r/5}")

        frame, checks, symmetry = self._poisson_checks(r, notes)
        if frame is not None:
            tables['poisson_kernel'] = frame
        if checks is not None:
            tables.update({'poisson_checks': checks, 'symmetry': symmetry})
            disagreeing = float((~symmetry['agree']).mean()) if len(symmetry) else 0.0
            summary.update({'poisson_total': float(checks['estimate'].iloc[0]),
                            'jump_fraction': float(checks['reference'].iloc[2]),
                            'symmetry_disagreement': disagreeing})
            for row in checks.itertuples():
                if row.holds is not None and not row.holds:
                    failures.append(f"Poisson kernel check '{row.check}' failed")
            if disagreeing > SYMMETRY_DISAGREEMENT_LIMIT:
                failures.append(f"{disagreeing:.1%} of mirrored cells disagree beyond {self.sigma:g} stderr")

        if failures:
            verdict = FAIL
            notes.extend(failures)
        elif not tables:
            verdict = INCONCLUSIVE
            notes.append("neither the Green bounds nor the Poisson kernel apply")
        else:
            verdict = PASS
        return self.report(tables, verdict, notes, summary, {'r': float(r)})


def green_function_bounds(spec, r: float, cfg=None) -> ExperimentReport:
    return GreenFunctionExperiment(spec, cfg).run(r)
