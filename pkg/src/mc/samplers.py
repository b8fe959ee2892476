#!/usr/bin/env python3
"""
Increment Samplers
==================

One step X_{t+dt} - X_t of a catalog process, vectorized over replicas:

- stable-exact: S ~ stable subordinator over dt by Kanter's representation,
  then a centered Gaussian with per-coordinate variance 2S (alpha = 2: S = dt);
- tempered-stable-rejection: the stable draw accepted with probability
  exp(-m^(2/alpha) S), which yields the relativistic subordinator;
- compound Poisson + Gaussian (any process with a radial Lévy density): jumps
  with |z| >= eps at rate Lambda(eps), uniform directions and radii from the
  tabulated radial tail, plus a Gaussian with per-coordinate variance
  2 a dt + (dt/d) int_{|z|<eps} |z|^2 nu(dz) replacing the small jumps.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from src.catalog.geometry import sphere_area
from src.catalog.processes import ProcessSpec, RadialLevyDensity
from src.config import get_simulation_config
from src.errors import ContractError, UnsupportedSpecError
from src.utils.logging_utils import setup_logger
from src.utils.quadrature import gauss_legendre

RADIAL_SPAN = 1e12


@dataclass
class Increment:
    """Gaussian and jump parts of one step for n replicas"""
    gaussian: np.ndarray
    jumps: np.ndarray
    jumped: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.gaussian + self.jumps


def stable_subordinator(rng: np.random.Generator, a: float, dt: float, n: int) -> np.ndarray:
    """n draws of S with E exp(-lam S) = exp(-dt lam^a), 0 < a < 1 (Kanter)"""
    u = np.pi * (rng.random(n) + 2.0 ** -54)
    e = rng.exponential(1.0, n)
    z = (np.sin(a * u) / np.sin(u) ** (1.0 / a)) * (np.sin((1.0 - a) * u) / e) ** ((1.0 - a) / a)
    return dt ** (1.0 / a) * z


def tempered_subordinator(rng: np.random.Generator, a: float, shift: float, dt: float, n: int) -> np.ndarray:
    """n draws of S with E exp(-lam S) = exp(-dt ((lam + shift)^a - shift^a)) by rejection"""
    out = np.empty(n)
    pending = np.arange(n)
    while pending.size:
        draws = stable_subordinator(rng, a, dt, pending.size)
        accept = rng.random(pending.size) < np.exp(-shift * draws)
        out[pending[accept]] = draws[accept]
        pending = pending[~accept]
    return out


def uniform_directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class RadialJumpTable:
    """
    Radii of the jumps with |z| >= eps by monotone inverse-CDF interpolation

    F(s) = 1 - Lambda(s) / Lambda(eps) on a log grid of ``points`` radii from eps
    up to the truncation radius (or eps * 1e12), with the tail beyond the grid
    continued as a power law.
    """

    def __init__(self, density: RadialLevyDensity, eps: float, points: Optional[int] = None):
        points = points or get_simulation_config().radial_table_points
        d = density.d
        upper = density.truncation if density.truncation is not None else eps * RADIAL_SPAN
        if not upper > eps:
            raise ContractError(f"eps={eps!r} leaves no jumps below the truncation radius")
        grid = np.geomspace(eps, upper, points)
        inner = [b for b in density.all_breakpoints if eps < b < upper]
        grid = np.union1d(grid, inner)

        x, w = gauss_legendre(8)
        lo, hi = np.log(grid[:-1]), np.log(grid[1:])
        t = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * x[None, :]
        s = np.exp(t)
        segments = sphere_area(d) * (0.5 * (hi - lo)[:, None] * w[None, :] * density(s) * s ** d).sum(axis=1)
        beyond = 0.0 if density.truncation is not None else density.tail_mass(upper, rtol=1e-7)
        tail = np.concatenate([np.cumsum(segments[::-1])[::-1], [0.0]]) + beyond

        self.eps = eps
        self.grid = grid
        self.log_grid = np.log(grid)
        self.rate = float(tail[0])
        self.beyond = float(beyond)
        self.cdf = 1.0 - tail / self.rate
        self.decay = float(np.log(tail[-2] / tail[-1]) / (self.log_grid[-1] - self.log_grid[-2])) if beyond > 0 else 0.0

    def sample(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        radii = np.exp(np.interp(u, self.cdf, self.log_grid))
        far = u > self.cdf[-1]
        if np.any(far) and self.beyond > 0.0:
            remaining = (1.0 - u[far]) * self.rate
            radii[far] = self.grid[-1] * (self.beyond / remaining) ** (1.0 / self.decay)
        return radii


class IncrementSampler:
    """
    Increment sampler for one (spec, dt, eps)

    ``bridge_variance`` is the per-coordinate variance of the Gaussian part of a
    step, the input of the Brownian-bridge crossing test (0 when absent).
    """

    def __init__(self, spec: ProcessSpec, dt: float, eps: float):
        if not (dt > 0.0 and eps > 0.0):
            raise ContractError(f"dt and eps must be > 0 (dt={dt!r}, eps={eps!r})")
        self.spec, self.d, self.dt, self.eps = spec, spec.d, dt, eps
        self.logger = setup_logger('IncrementSampler')
        self.table: Optional[RadialJumpTable] = None
        tag = spec.bernstein.sampler if spec.is_sbm else None

        if tag == 'stable-exact':
            self.alpha = float(spec.bernstein.params['alpha'])
            self.mode = 'brownian' if self.alpha >= 2.0 else 'stable'
            self.bridge_variance = 2.0 * dt * spec.bernstein.drift if self.mode == 'brownian' else 0.0
        elif tag == 'tempered-stable-rejection':
            self.alpha = float(spec.bernstein.params['alpha'])
            self.shift = float(spec.bernstein.params['shift'])
            self.mode = 'tempered'
            self.bridge_variance = 0.0
        elif spec.levy_density is not None:
            density = spec.levy_density
            self.mode = 'compound-poisson'
            small = density.inner_moment(eps, rtol=1e-7) if density.has_jumps else 0.0
            self.small_jump_variance = dt * small / self.d
            self.bridge_variance = 2.0 * spec.gaussian_coefficient * dt + self.small_jump_variance
            if density.has_jumps:
                self.table = RadialJumpTable(density, eps)
                self.logger.info(f"📋 '{spec.name}': jump rate {self.table.rate:.4g} above eps={eps:g}, "
                                 f"small-jump variance {self.small_jump_variance:.3e}")
        else:
            raise UnsupportedSpecError(f"'{spec.name}' has no exact sampler and no Lévy density")

    def sample(self, rng: np.random.Generator, n: int) -> Increment:
        d, dt = self.d, self.dt
        zeros = np.zeros((n, d))
        if self.mode == 'brownian':
            return Increment(np.sqrt(self.bridge_variance) * rng.standard_normal((n, d)), zeros,
                             np.zeros(n, dtype=bool))
        if self.mode in ('stable', 'tempered'):
            a = self.alpha / 2.0
            if self.mode == 'stable':
                times = stable_subordinator(rng, a, dt, n)
            else:
                times = tempered_subordinator(rng, a, self.shift, dt, n)
            jumps = np.sqrt(2.0 * times)[:, None] * rng.standard_normal((n, d))
            return Increment(zeros, jumps, np.ones(n, dtype=bool))

        gaussian = np.sqrt(self.bridge_variance) * rng.standard_normal((n, d))
        jumps = zeros
        counts = np.zeros(n, dtype=int)
        if self.table is not None:
            counts = rng.poisson(self.table.rate * dt, n)
            total = int(counts.sum())
            if total:
                radii = self.table.sample(rng.random(total))
                directions = uniform_directions(rng, total, d)
                owners = np.repeat(np.arange(n), counts)
                jumps = np.zeros((n, d))
                np.add.at(jumps, owners, radii[:, None] * directions)
        return Increment(gaussian, jumps, counts > 0)


@lru_cache(maxsize=32)
def increment_sampler(spec: ProcessSpec, dt: float, eps: float) -> IncrementSampler:
    """Sampler cached per (spec object, dt, eps)"""
    return IncrementSampler(spec, dt, eps)


def sample_increment(spec: ProcessSpec, dt: float, eps: float, rng: np.random.Generator) -> np.ndarray:
    """One increment of X over dt as a d-vector"""
    return increment_sampler(spec, dt, eps).sample(rng, 1).total[0]
