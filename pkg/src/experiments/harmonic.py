#!/usr/bin/env python3
"""
Harnack and Hölder Experiments
==============================

Both work with the harmonic functions h_F(x) = P^x(X_{tau_{B_r}} in F) of
exterior regions F.

- HarnackExperiment: max/min of h_F over a cubic grid in B_{r/2} per r and F,
  then the spread of the per-r maxima across r (scale invariance).
- HolderExperiment: differences h(x) - h(y) on symmetric pairs |x - y| = r 2^-k
  along the first axis and a least-squares fit of the exponent.
"""

import itertools
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from src.experiments.base import VerificationExperiment, combined_se
from src.experiments.report import FAIL, INCONCLUSIVE, PASS, ExperimentReport
from src.mc.regions import ExteriorRegion, FullComplement, HalfSpaceCap, Shell, Tail

# Nested region pairs (inner, outer) checked for h_inner <= h_outer
NESTED = (('tail4r', 'tail2r'), ('shell1', 'complement'), ('tail2r', 'complement'), ('cap+0', 'complement'))
MIN_HOLDER_PAIRS = 3


def default_family(r: float) -> List[ExteriorRegion]:
    """Half-space cap, shells k = 1, 2, tails beyond 2r and 4r, and the full complement"""
    return [HalfSpaceCap(r), Shell(r, 1), Shell(r, 2), _Renamed(Tail(2.0 * r), 'tail2r'),
            _Renamed(Tail(4.0 * r), 'tail4r'), FullComplement(r)]


class _Renamed(ExteriorRegion):
    """Region under a scale-free name, so rows for different r line up"""

    def __init__(self, region: ExteriorRegion, name: str):
        self.region = region
        self.name = name

    def contains(self, points):
        return self.region.contains(points)


def harnack_ratios(table: pd.DataFrame, sigma: float) -> pd.DataFrame:
    """
    max/min of h per (r, region) over the grid

    A grid point is unresolved when its estimate is within ``sigma`` standard
    errors of 0; a group with any unresolved point gets no ratio (NaN).
    """
    rows = []
    for (r, region), group in table.groupby(['r', 'region'], sort=False):
        unresolved = int((group['estimate'] <= sigma * group['stderr']).sum())
        low, high = float(group['estimate'].min()), float(group['estimate'].max())
        rows.append({'r': r, 'region': region, 'min_h': low, 'max_h': high,
                     'ratio': high / low if unresolved == 0 else float('nan'),
                     'points': int(len(group)), 'unresolved': unresolved})
    return pd.DataFrame(rows, columns=['r', 'region', 'min_h', 'max_h', 'ratio', 'points', 'unresolved'])


class HarnackExperiment(VerificationExperiment):
    name = 'harnack'

    def interior_grid(self, r: float) -> np.ndarray:
        """n points per axis on [-r/4, r/4], product grid clipped to the open ball B_{r/2}"""
        n = self.settings.harnack_grid
        axis = np.linspace(-0.25 * r, 0.25 * r, n)
        points = np.array(list(itertools.product(axis, repeat=self.d)))
        inside = np.linalg.norm(points, axis=1) < r / 2.0
        return points[inside]

    def spread_limit(self) -> float:
        if self.spec.kind == 'stable':
            return self.settings.harnack_spread_stable
        return self.settings.harnack_spread_other

    def run(self, r_grid: Sequence[float], family=None) -> ExperimentReport:
        """
        Args:
            r_grid: ball radii
            family: callable r -> list of regions (default: ``default_family``)
        """
        family = family or default_family
        self.logger.info(f"🚀 Harnack on '{self.spec.name}': r in {list(r_grid)}")
        estimates = []
        for r in r_grid:
            grid = self.interior_grid(r)
            frame = self.simulator.estimate_harmonic(r, family(r), grid, stream_offset=self._stream + 1)
            self._stream += len(grid)
            frame.insert(0, 'r', float(r))
            estimates.append(frame)
        table = pd.concat(estimates, ignore_index=True)

        notes = []
        ratio_table = harnack_ratios(table, self.sigma)
        for row in ratio_table.itertuples():
            if row.unresolved == row.points:
                notes.append(f"{row.region} at r={row.r:g}: h indistinguishable from 0, skipped")
            elif row.unresolved:
                notes.append(f"{row.region} at r={row.r:g}: {row.unresolved} of {row.points} grid points "
                             f"within {self.sigma:g} stderr of 0, no ratio formed")
        partial = ratio_table[(ratio_table['unresolved'] > 0) & (ratio_table['unresolved'] < ratio_table['points'])]

        formed = ratio_table.dropna(subset=['ratio'])
        per_r = (formed.groupby('r', sort=False)['ratio'].max().rename('max_ratio').reset_index()
                 if len(formed) else pd.DataFrame(columns=['r', 'max_ratio']))
        nested = self._nested_check(table)

        limit = self.spread_limit()
        spread = float(per_r['max_ratio'].max() / per_r['max_ratio'].min()) if len(per_r) else float('nan')
        if not len(per_r):
            verdict = INCONCLUSIVE
            notes.append("no region was resolved at every grid point")
        elif spread > limit:
            verdict = FAIL
            notes.append(f"cross-r spread {spread:.3f} exceeds {limit:g}")
        elif len(partial):
            verdict = INCONCLUSIVE
            notes.append(f"{len(partial)} (r, region) group(s) only partly resolved")
        else:
            verdict = PASS
        if len(nested) and not nested['holds'].all():
            verdict = FAIL
            notes.append("nested regions violate h_inner <= h_outer")

        summary = {'per_r_max_ratio': dict(zip([str(r) for r in per_r['r']], per_r['max_ratio'].tolist())),
                   'spread': spread, 'spread_limit': limit, 'grid_points': int(len(self.interior_grid(1.0)))}
        return self.report({'harmonic': table, 'ratios': ratio_table, 'per_r': per_r, 'nested': nested},
                           verdict, notes, summary, {'r_grid': [float(r) for r in r_grid]})

    def _nested_check(self, table: pd.DataFrame) -> pd.DataFrame:
        rows = []
        keyed = table.set_index(['r', 'point', 'region'])
        regions = set(table['region'])
        for inner, outer in NESTED:
            if inner not in regions or outer not in regions:
                continue
            for r, point in table[['r', 'point']].drop_duplicates().itertuples(index=False, name=None):
                a, b = keyed.loc[(r, point, inner)], keyed.loc[(r, point, outer)]
                slack = float(b['estimate'] - a['estimate'])
                se = float(combined_se(a['stderr'], b['stderr']))
                rows.append({'r': r, 'point': point, 'inner': inner, 'outer': outer, 'slack': slack,
                             'holds': bool(slack >= -self.sigma * se)})
        return pd.DataFrame(rows, columns=['r', 'point', 'inner', 'outer', 'slack', 'holds'])


class HolderExperiment(VerificationExperiment):
    name = 'holder'

    def run(self, r: float, region: Optional[ExteriorRegion] = None) -> ExperimentReport:
        """
        Args:
            r: ball radius
            region: exterior region F (default: the half-space cap {z_1 > 0})
        """
        region = region or HalfSpaceCap(r)
        levels = self.settings.holder_levels
        self.logger.info(f"🚀 Hölder on '{self.spec.name}': r={r:g}, F={region.name}, k=1..{levels}")

        rows = []
        for k in range(1, levels + 1):
            gap = r * 2.0 ** (-k)
            x, y = self.axis_point(gap / 2.0), self.axis_point(-gap / 2.0)
            hx = self.simulator.simulate_exit(x, r, stream=self.next_stream())
            hy = self.simulator.simulate_exit(y, r, stream=self.next_stream())
            px, sx = hx.proportion(region.contains(hx.exit_positions))
            py, sy = hy.proportion(region.contains(hy.exit_positions))
            difference = abs(px - py)
            se = float(combined_se(sx, sy))
            rows.append({'k': k, 'distance': gap, 'h_x': px, 'h_y': py, 'stderr_x': sx, 'stderr_y': sy,
                         'difference': difference, 'stderr': se,
                         'usable': bool(difference > self.sigma * se and difference > 0.0)})
        table = pd.DataFrame(rows)

        usable = table[table['usable']]
        notes = []
        summary = {'region': region.name, 'usable_pairs': int(len(usable))}
        if len(usable) < MIN_HOLDER_PAIRS:
            notes.append(f"only {len(usable)} pair(s) resolved above {self.sigma:g} stderr; "
                         f"need {MIN_HOLDER_PAIRS} for a fit")
            return self.report({'pairs': table}, INCONCLUSIVE, notes, summary,
                               {'r': float(r), 'levels': levels})

        fit = stats.linregress(np.log(usable['distance']), np.log(usable['difference']))
        delta, delta_se = float(fit.slope), float(fit.stderr)
        summary.update({'delta': delta, 'delta_stderr': delta_se, 'intercept': float(fit.intercept),
                        'r_value': float(fit.rvalue)})
        if delta - self.sigma * delta_se > 0.0:
            verdict = PASS
        else:
            verdict = FAIL
            notes.append(f"fitted exponent {delta:.3f} +- {delta_se:.3f} is not positive at {self.sigma:g} sigma")
        return self.report({'pairs': table}, verdict, notes, summary, {'r': float(r), 'levels': levels})


def harnack_ratio(spec, r_grid: Sequence[float], family=None, cfg=None) -> ExperimentReport:
    return HarnackExperiment(spec, cfg).run(r_grid, family)


def holder_exponent(spec, r: float, region: Optional[ExteriorRegion] = None, cfg=None) -> ExperimentReport:
    return HolderExperiment(spec, cfg).run(r, region)
