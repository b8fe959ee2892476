#!/usr/bin/env python3
"""
Green Function and Poisson Kernel Estimators
============================================

MC-backed estimators for the process killed on leaving B_r:

- ``hunt_green``: G_{B_r}(x, y) = G(y - x) - E^x G(X_tau - y), the expectation
  averaged over sampled exit positions;
- ``poisson_kernel``: P^x(X_tau in Z) = int_{B_r} nu(Z - y) G_{B_r}(x, dy) on a
  cubic partition of the annulus {r < |z| <= 4r} plus the tail {|z| > 4r},
  with G_{B_r}(x, .) taken from an occupation histogram.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy.special import betainc

from src.catalog.geometry import sphere_area
from src.catalog.processes import ProcessSpec, RadialLevyDensity
from src.errors import ContractError, SingularEvaluationError, UnsupportedSpecError
from src.mc.records import ExitBatch
from src.mc.regions import ANNULUS_OUTER, AnnulusPartition
from src.potential.kernels import green_kernel_table
from src.utils.logging_utils import setup_logger
from src.utils.quadrature import adaptive_integral

SINGULAR_FRACTION = 1e-6
TAIL_TABLE_POINTS = 65
CELL_CHUNK = 64


@dataclass
class GreenEstimate:
    """G_{B_r}(x, y) with its MC standard error"""
    value: float
    stderr: float
    clamped: bool
    free_kernel: float
    samples: int
    censored: int = 0

    def to_dict(self):
        return {'value': self.value, 'stderr': self.stderr, 'clamped': self.clamped,
                'free_kernel': self.free_kernel, 'samples': self.samples, 'censored': self.censored}


def _as_point(point, d: int) -> np.ndarray:
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.size == 1 and d > 1:
        point = np.concatenate([point, np.zeros(d - 1)])
    if point.shape != (d,):
        raise ContractError(f"expected a point in R^{d}, got shape {point.shape}")
    return point


def hunt_green(spec: ProcessSpec, r: float, x, y, exits,
               kernel: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> GreenEstimate:
    """
    Green function of B_r by the Hunt formula

    Args:
        spec: process
        r: ball radius
        x, y: points of B_r (a scalar is read as a point on the first axis)
        exits: exit positions from x (an ExitBatch, whose censored rows are dropped, or an (N, d) array)
        kernel: radial potential kernel rho -> G(rho); defaults to the tabulated
            kernel of a subordinate BM

    Raises:
        SingularEvaluationError: |x - y| < 1e-6 r
    """
    d = spec.d
    x, y = _as_point(x, d), _as_point(y, d)
    if not (np.linalg.norm(x) < r and np.linalg.norm(y) < r):
        raise ContractError("hunt_green needs x and y inside B_r")
    separation = float(np.linalg.norm(y - x))
    if separation < SINGULAR_FRACTION * r:
        raise SingularEvaluationError(f"|x - y| = {separation!r} is below {SINGULAR_FRACTION:g} r")
    if kernel is None:
        if not spec.is_sbm:
            raise UnsupportedSpecError(f"'{spec.name}': supply a potential kernel for a unimodal triplet")
        kernel = green_kernel_table(spec)

    logger = setup_logger('GreenFunction')
    positions = np.asarray(getattr(exits, 'exit_positions', exits), dtype=float)
    if positions.ndim != 2 or positions.shape[1] != d:
        raise ContractError("exits must hold exit positions in R^d")
    censored = 0
    if isinstance(exits, ExitBatch):
        censored = exits.n_censored
        positions = positions[exits.completed]
        if censored:
            logger.warning(f"⚠️ {censored} of {exits.n} exit paths are censored, "
                           f"left out of the Hunt average")
    if positions.shape[0] < 2:
        raise ContractError("exits must hold at least two completed exit positions")
    free = float(kernel(separation))
    corrections = np.asarray(kernel(np.linalg.norm(positions - y, axis=1)), dtype=float)
    value = free - float(corrections.mean())
    stderr = float(corrections.std(ddof=1) / np.sqrt(corrections.size))
    clamped = value < 0.0
    if clamped:
        logger.warning(f"⚠️ Hunt estimate {value:.3e} < 0 clamped to 0 (stderr {stderr:.3e})")
    return GreenEstimate(value=max(value, 0.0), stderr=stderr, clamped=clamped, free_kernel=free,
                         samples=int(corrections.size), censored=censored)


# =============================================================================
# POISSON KERNEL
# =============================================================================

def _sphere_fraction_outside(d: int, s: np.ndarray, y_norm: float, rho: float) -> np.ndarray:
    """Fraction of the sphere |w| = s with |w + y| > rho"""
    if d == 1:
        return 0.5 * ((s + y_norm > rho).astype(float) + (np.abs(s - y_norm) > rho).astype(float))
    a = (d - 1) / 2.0
    c = np.clip((rho * rho - s * s - y_norm * y_norm) / (2.0 * s * y_norm), -1.0, 1.0)
    return 1.0 - betainc(a, a, (1.0 + c) / 2.0)


def exterior_ball_mass(density: RadialLevyDensity, y_norm: float, rho: float) -> float:
    """nu({w : |w + y| > rho}) for |y| < rho"""
    if not 0.0 <= y_norm < rho:
        raise ContractError("exterior_ball_mass needs 0 <= |y| < rho")
    far = density.tail_mass(rho + y_norm, rtol=1e-7)
    if y_norm == 0.0:
        return far
    d = density.d

    def shell(s):
        s = np.asarray(s, dtype=float)
        return density(s) * s ** (d - 1) * _sphere_fraction_outside(d, s, y_norm, rho)

    near = adaptive_integral(shell, rho - y_norm, rho + y_norm, points=density.all_breakpoints, rtol=1e-7,
                             atol=1e-300, label='exterior shell mass').value
    return far + sphere_area(d) * near


def poisson_kernel(spec: ProcessSpec, r: float, x, occupation, side: Optional[float] = None) -> pd.DataFrame:
    """
    Exit distribution of B_r from x by the Ikeda–Watanabe formula

    Args:
        occupation: OccupationHistogram of B_r started at x
        side: exterior cell side (default 8r / max(4, floor(4096^(1/d))), i.e. r/2 in d = 3)

    Returns:
        DataFrame with one row per exterior cell (c0..c{d-1}, volume, mass, stderr) and a
        final row for the tail {|z| > 4r} (cell = 'tail', centers NaN)

    Raises:
        UnsupportedSpecError: the process has no Lévy density (exits continuously)
    """
    if not spec.has_jumps:
        raise UnsupportedSpecError(f"'{spec.name}' has no jumps: the exit is continuous")
    d = spec.d
    _as_point(x, d)
    density = spec.levy_density
    logger = setup_logger('PoissonKernel')

    centers = np.asarray(occupation.centers, dtype=float)
    block_masses = np.asarray(occupation.block_masses, dtype=float)  # (blocks, cells), time / replicas
    weights = np.asarray(occupation.block_weights, dtype=float)      # replicas per block / N
    partition = AnnulusPartition(d, r, side)
    cells, volume = partition.centers, partition.volume
    logger.info(f"🔄 Poisson kernel: {len(cells)} exterior cells against {len(centers)} occupied cells")

    block_values = np.empty((block_masses.shape[0], len(cells)))
    for start in range(0, len(cells), CELL_CHUNK):
        chunk = cells[start:start + CELL_CHUNK]
        distances = np.linalg.norm(chunk[:, None, :] - centers[None, :, :], axis=2)
        jump_density = density(distances)
        block_values[:, start:start + CELL_CHUNK] = volume * block_masses @ jump_density.T

    radii = np.linspace(0.0, r, TAIL_TABLE_POINTS)
    tail_table = np.array([exterior_ball_mass(density, value, ANNULUS_OUTER * r) for value in radii])
    tail_per_cell = np.interp(np.linalg.norm(centers, axis=1), radii, tail_table)
    block_tail = block_masses @ tail_per_cell

    values = np.column_stack([block_values, block_tail])
    mass = weights @ values
    stderr = _batch_stderr(values, weights)

    frame = pd.DataFrame(np.vstack([cells, np.full((1, d), np.nan)]), columns=[f"c{i}" for i in range(d)])
    frame.insert(0, 'cell', [str(i) for i in range(len(cells))] + ['tail'])
    frame['volume'] = np.append(np.full(len(cells), volume), np.nan)
    frame['mass'] = mass
    frame['stderr'] = stderr
    logger.info(f"📊 Total Poisson-kernel mass {mass.sum():.4f}")
    return frame


def _batch_stderr(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Batch-means standard error of the weighted block average"""
    blocks = values.shape[0]
    if blocks < 2:
        return np.full(values.shape[1], np.nan)
    normalized = weights / weights.sum()
    mean = normalized @ values
    spread = (normalized[:, None] * (values - mean) ** 2).sum(axis=0) * blocks / (blocks - 1)
    return np.sqrt(spread / blocks)
