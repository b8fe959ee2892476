#!/usr/bin/env python3
"""
Path Simulation
===============

Steps replicas of a catalog process until they leave B_r, in fixed-size
replica blocks. Each block draws from its own counter-based stream,

    Generator(Philox(SeedSequence([seed, stream, block]))),

and blocks are merged in block order, so every output depends only on
(seed, config, spec) and not on the number of worker threads.

Within a step the Gaussian part moves first. A path whose Gaussian endpoint
stays inside is tested for an unseen crossing with the Brownian-bridge
probability exp(-2 d1 d2 / v) (d1, d2 the distances of both endpoints to the
sphere, v the per-coordinate Gaussian variance of the step); diffusive exits
are projected radially onto the sphere. The jumps are added afterwards and a
jump exit keeps its exact overshoot.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import betainc, gamma

from src.catalog.geometry import ball_volume
from src.catalog.processes import ProcessSpec
from src.errors import ContractError
from src.mc.records import ExitBatch, OccupationHistogram, PathConfig
from src.mc.regions import BallTarget, ExteriorRegion
from src.mc.samplers import IncrementSampler, increment_sampler
from src.utils.logging_utils import setup_logger

MAX_DENSE_CELLS = 1 << 24


@dataclass
class _BlockResult:
    batch: ExitBatch
    cell_codes: Optional[np.ndarray] = None
    cell_time: Optional[np.ndarray] = None


@dataclass
class HittingEstimate:
    probability: float
    stderr: float
    replicas: int
    censored: int

    def to_dict(self) -> Dict[str, Any]:
        return {'probability': self.probability, 'stderr': self.stderr, 'replicas': self.replicas,
                'censored': self.censored}


class PathSimulator:
    """
    First-exit simulation engine for one process

    Usage:
        simulator = PathSimulator(make_stable(1.0), PathConfig(seed=7, n_replicas=10_000))
        batch = simulator.simulate_exit(np.zeros(3), r=1.0)
    """

    def __init__(self, spec: ProcessSpec, config: Optional[PathConfig] = None):
        self.spec = spec
        self.d = spec.d
        self.config = config or PathConfig.from_config()
        self.logger = setup_logger('PathSimulator')
        self.stats: Dict[str, Any] = {'runs': 0, 'replicas': 0, 'censored': 0, 'steps': 0}
        self._green_factor = None

    # -------------------------------------------------------------------------
    # engine
    # -------------------------------------------------------------------------

    def _point(self, x) -> np.ndarray:
        point = np.atleast_1d(np.asarray(x, dtype=float))
        if point.size == 1 and self.d > 1:
            point = np.concatenate([point, np.zeros(self.d - 1)])
        if point.shape != (self.d,):
            raise ContractError(f"expected a point in R^{self.d}, got shape {point.shape}")
        return point

    def green_lower_factor(self):
        """Radius factor L behind the default r0 = r / (2L + 1), computed once per simulator"""
        if self._green_factor is None:
            # potential imports mc.regions, so the dependency is resolved at call time
            from src.potential.kernels import green_lower_factor
            self._green_factor = green_lower_factor(self.spec)
        return self._green_factor

    def _sampler(self, r: float) -> IncrementSampler:
        return increment_sampler(self.spec, self.config.dt, self.config.cutoff(r))

    def _block_sizes(self) -> List[int]:
        n, size = self.config.n_replicas, self.config.block_size
        return [min(size, n - start) for start in range(0, n, size)]

    def _run_block(self, sampler: IncrementSampler, x0: np.ndarray, r: float, stream: int, block: int,
                   n: int, target: Optional[BallTarget], cell_side: Optional[float]) -> _BlockResult:
        cfg, d = self.config, self.d
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, stream, block])))
        pos = np.tile(x0, (n, 1))
        alive = np.ones(n, dtype=bool)
        taus = np.full(n, cfg.max_steps * cfg.dt)
        exits = np.full((n, d), np.nan)
        pre = np.full((n, d), np.nan)
        steps = np.full(n, cfg.max_steps)
        jumped = np.zeros(n, dtype=bool)
        hit = np.zeros(n, dtype=bool) if target is not None else None

        if target is not None:
            started = target.contains(pos)
            hit[started] = True
            alive[started] = False
            taus[started] = 0.0
            steps[started] = 0

        dense = None
        offset = 0
        if cell_side is not None:
            offset = int(np.ceil(r / cell_side)) + 1
            shape = (2 * offset,) * d
            if np.prod(shape, dtype=float) > MAX_DENSE_CELLS:
                raise ContractError(f"occupation grid with side {cell_side:g} is too fine in d={d}")
            dense = np.zeros(int(np.prod(shape)))

        v = sampler.bridge_variance
        step = 0
        while alive.any() and step < cfg.max_steps:
            step += 1
            idx = np.flatnonzero(alive)
            p = pos[idx]
            if dense is not None:
                cells = np.floor(p / cell_side).astype(int) + offset
                codes = np.ravel_multi_index(cells.T, (2 * offset,) * d)
                dense += cfg.dt * np.bincount(codes, minlength=dense.size)

            inc = sampler.sample(rng, idx.size)
            mid = p + inc.gaussian
            r_p = np.linalg.norm(p, axis=1)
            r_mid = np.linalg.norm(mid, axis=1)
            diffusive = r_mid >= r
            if v > 0.0:
                crossing = np.exp(-2.0 * np.maximum(r - r_p, 0.0) * np.maximum(r - r_mid, 0.0) / v)
                diffusive |= rng.random(idx.size) < crossing
            end = mid + inc.jumps
            r_end = np.linalg.norm(end, axis=1)
            by_jump = ~diffusive & (r_end >= r)
            exited = diffusive | by_jump

            out = idx[exited]
            taus[out] = step * cfg.dt
            steps[out] = step
            pre[out] = p[exited]
            projected = r * mid / np.maximum(r_mid, 1e-300)[:, None]
            exits[out] = np.where(diffusive[exited][:, None], projected[exited], end[exited])
            jumped[out] = by_jump[exited]
            alive[out] = False

            stay = idx[~exited]
            pos[stay] = end[~exited]
            if target is not None and stay.size:
                landed = target.contains(end[~exited])
                reached = stay[landed]
                hit[reached] = True
                taus[reached] = step * cfg.dt
                steps[reached] = step
                alive[reached] = False

        batch = ExitBatch(r=r, x0=x0, taus=taus, exit_positions=exits, pre_exit_positions=pre,
                          steps=steps, jumped=jumped, censored=alive.copy(), hit=hit)
        if dense is None:
            return _BlockResult(batch)
        codes = np.flatnonzero(dense)
        return _BlockResult(batch, cell_codes=codes, cell_time=dense[codes])

    def _run(self, x0, r: float, stream: int = 0, target: Optional[BallTarget] = None,
             cell_side: Optional[float] = None) -> List[_BlockResult]:
        if not r > 0.0:
            raise ContractError(f"ball radius must be > 0, got {r!r}")
        x0 = self._point(x0)
        if not np.linalg.norm(x0) < r:
            raise ContractError(f"starting point must lie inside B_r (|x0|={np.linalg.norm(x0)!r}, r={r!r})")
        sampler = self._sampler(r)
        sizes = self._block_sizes()

        def run(block: int) -> _BlockResult:
            return self._run_block(sampler, x0, r, stream, block, sizes[block], target, cell_side)

        if self.config.workers > 1 and len(sizes) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
                results = list(executor.map(run, range(len(sizes))))
        else:
            results = [run(block) for block in range(len(sizes))]

        censored = sum(result.batch.n_censored for result in results)
        self.stats['runs'] += 1
        self.stats['replicas'] += self.config.n_replicas
        self.stats['censored'] += censored
        self.stats['steps'] += int(sum(result.batch.steps.sum() for result in results))
        if censored:
            self.logger.warning(f"⚠️ {censored} of {self.config.n_replicas} paths hit max_steps="
                                f"{self.config.max_steps} (censored)")
        return results

    # -------------------------------------------------------------------------
    # estimators
    # -------------------------------------------------------------------------

    def simulate_exit(self, x0, r: float, stream: int = 0) -> ExitBatch:
        """First exits of B_r from x0 for every replica"""
        return ExitBatch.concat([result.batch for result in self._run(x0, r, stream)])

    def estimate_harmonic(self, r: float, region, x_grid: Sequence, stream_offset: int = 0) -> pd.DataFrame:
        """
        h_F(x) = P^x(X_tau in F) on a grid of starting points

        ``region`` is one ExteriorRegion or a sequence of them; every region is
        evaluated on the same exit sample of a grid point.

        Returns:
            DataFrame: point, region, x coordinates, estimate, stderr, replicas, censored
        """
        regions = [region] if isinstance(region, ExteriorRegion) else list(region)
        rows = []
        for i, x in enumerate(x_grid):
            batch = self.simulate_exit(x, r, stream=stream_offset + i)
            point = self._point(x)
            for candidate in regions:
                estimate, stderr = batch.proportion(candidate.contains(batch.exit_positions))
                row = {'point': i, 'region': candidate.name}
                row.update({f"x{k}": float(point[k]) for k in range(self.d)})
                row.update({'estimate': estimate, 'stderr': stderr, 'replicas': int(batch.completed.sum()),
                            'censored': batch.n_censored})
                rows.append(row)
        return pd.DataFrame(rows)

    def estimate_hitting_before_exit(self, target: BallTarget, r: float, x0, r0: Optional[float] = None,
                                     stream: int = 0) -> HittingEstimate:
        """
        P^x0(T_A < tau_{B_r}) for a closed ball A inside B_{r0}

        r0 defaults to r / (2L + 1) with L from ``green_lower_factor``.

        Raises:
            ContractError: A not inside B_{r0}, or |x0| > r0
        """
        if r0 is None:
            r0 = self.green_lower_factor().inner_radius(r)
        if not target.inside(r0):
            raise ContractError(f"target ball must lie inside B_r0 (r0={r0!r})")
        if np.linalg.norm(self._point(x0)) > r0 * (1.0 + 1e-12):
            raise ContractError(f"|x0| must be <= r0={r0!r}")
        results = self._run(x0, r, stream, target=target)
        batch = ExitBatch.concat([result.batch for result in results])
        probability, stderr = batch.proportion(batch.hit)
        return HittingEstimate(probability=probability, stderr=stderr, replicas=int(batch.completed.sum()),
                               censored=batch.n_censored)

    def occupation(self, r: float, x0, stream: int = 0, with_exits: bool = False):
        """
        Occupation histogram of B_r (cell side r * cell_fraction)

        Total mass equals the mean of tau over all replicas (censored ones at
        max_steps * dt). With ``with_exits`` the exit batch is returned as well.
        """
        side = r * self.config.cell_fraction
        results = self._run(x0, r, stream, cell_side=side)
        x0 = self._point(x0)
        offset = int(np.ceil(r / side)) + 1
        codes = np.unique(np.concatenate([result.cell_codes for result in results]))
        block_time = np.zeros((len(results), codes.size))
        for b, result in enumerate(results):
            block_time[b, np.searchsorted(codes, result.cell_codes)] = result.cell_time
        index = np.stack(np.unravel_index(codes, (2 * offset,) * self.d), axis=1) - offset
        block_counts = np.array([result.batch.n for result in results], dtype=float)
        histogram = OccupationHistogram(r=r, x0=x0, side=side, index=index, block_time=block_time,
                                        block_counts=block_counts, stats=dict(self.stats))
        if with_exits:
            return histogram, ExitBatch.concat([result.batch for result in results])
        return histogram


# =============================================================================
# FUNCTIONAL FRONT END
# =============================================================================

def simulate_exit(spec: ProcessSpec, x0, r: float, cfg: Optional[PathConfig] = None) -> ExitBatch:
    return PathSimulator(spec, cfg).simulate_exit(x0, r)


def estimate_harmonic(spec: ProcessSpec, r: float, region, x_grid: Sequence,
                      cfg: Optional[PathConfig] = None) -> pd.DataFrame:
    return PathSimulator(spec, cfg).estimate_harmonic(r, region, x_grid)


def estimate_hitting_before_exit(spec: ProcessSpec, target: BallTarget, r: float, x0,
                                 cfg: Optional[PathConfig] = None, r0: Optional[float] = None) -> HittingEstimate:
    return PathSimulator(spec, cfg).estimate_hitting_before_exit(target, r, x0, r0)


def occupation(spec: ProcessSpec, r: float, x0, cfg: Optional[PathConfig] = None) -> OccupationHistogram:
    return PathSimulator(spec, cfg).occupation(r, x0)


# =============================================================================
# CLOSED-FORM REFERENCES
# =============================================================================

def exit_time_reference(alpha: float, d: int, r: float) -> float:
    """E^0 tau_{B_r} of the alpha-stable process: r^alpha Gamma(d/2) / (2^alpha Gamma(1+alpha/2) Gamma((d+alpha)/2))"""
    return float(r ** alpha * gamma(d / 2.0)
                 / (2.0 ** alpha * gamma(1.0 + alpha / 2.0) * gamma((d + alpha) / 2.0)))


def exit_tail_reference(alpha: float, r: float, rho: float) -> float:
    """P^0(|X_tau_{B_r}| >= rho) of the alpha-stable process, alpha < 2"""
    if not 0.0 < alpha < 2.0:
        raise ContractError(f"the exit tail reference needs 0 < alpha < 2, got {alpha!r}")
    if rho <= r:
        return 1.0
    return float(betainc(alpha / 2.0, 1.0 - alpha / 2.0, (r / rho) ** 2))


def relative_volume(d: int, inner: float, outer: float) -> float:
    """|B_inner| / |B_outer|"""
    return ball_volume(d, inner) / ball_volume(d, outer)
