#!/usr/bin/env python3
"""
Characteristic Exponents
========================

psi0(r), the radial profile of the characteristic exponent, and its monotone
envelope psi*(r) = sup_{s <= r} psi0(s).

- subordinate BM: psi0(r) = phi(r^2), already non-decreasing, so psi* = psi0;
- unimodal triplet: psi0(r) = a r^2 + 2 int_0^inf (1 - cos(rz)) nu1(z) dz, with
  nu1 the one-dimensional projection of the Lévy density.

The oscillatory integral is evaluated in x = rz, which puts the zeros of
1 - cos(x) on the fixed lattice 2 pi k: the first period on log panels, the
next K - 1 periods with two Gauss–Legendre panels each, and the remainder by
the integration-by-parts tail  T(z_K) + nu1'(z_K) / r^2,  z_K = 2 pi K / r.
K doubles from 64 until two successive totals agree to the tolerance.
"""

from functools import lru_cache
from typing import Dict, Optional

import numpy as np

from src.catalog.processes import ProcessSpec
from src.catalog.projection import ProjectedDensity
from src.config import get_grid_config, get_quadrature_config
from src.errors import QuadratureError
from src.utils.logging_utils import setup_logger
from src.utils.quadrature import gauss_legendre, log_rule

FIRST_PERIOD_SPAN = 12  # decades below 2 pi covered by the first-period panels
R_CHUNK = 256
PERIOD_CHUNK = 128


class CharacteristicExponent:
    """
    Radial characteristic exponent with a cached monotone envelope

    Usage:
        exponent = psi_from_spec(make_stable(1.5, 3))
        exponent.psi0(2.0), exponent.psi_star(2.0)
    """

    def __init__(self, spec: ProcessSpec, rtol: Optional[float] = None,
                 envelope_points: Optional[int] = None):
        self.spec = spec
        self.d = spec.d
        self.gaussian = spec.gaussian_coefficient
        quadrature = get_quadrature_config()
        grids = get_grid_config()
        self.rtol = rtol if rtol is not None else quadrature.psi_rtol
        self.initial_periods = quadrature.initial_periods
        self.period_cap = quadrature.period_cap
        self.envelope_grid = np.geomspace(grids.envelope_min, grids.envelope_max,
                                          envelope_points or grids.envelope_points)
        self.logger = setup_logger('CharacteristicExponent')
        self.stats: Dict[str, float] = {'evaluations': 0, 'max_periods': 0, 'max_panel_error': 0.0}

        self._projected: Optional[ProjectedDensity] = None
        if not spec.is_sbm and spec.has_jumps:
            self._projected = ProjectedDensity(spec.levy_density)
        self._envelope: Optional[np.ndarray] = None

    # -------------------------------------------------------------------------
    # psi0
    # -------------------------------------------------------------------------

    @property
    def monotone(self) -> bool:
        """psi0 is non-decreasing by construction (subordinate BM or pure Gaussian)"""
        return self.spec.is_sbm or self._projected is None

    def psi0(self, r) -> np.ndarray:
        """Radial exponent psi0(r), vectorized; psi0(0) = 0"""
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        out = np.zeros_like(flat)
        positive = flat > 0.0
        if self.spec.is_sbm:
            out[positive] = self.spec.bernstein(flat[positive] ** 2)
        else:
            out[positive] = self.gaussian * flat[positive] ** 2
            if self._projected is not None and np.any(positive):
                values = flat[positive]
                jump_part = np.concatenate([self._oscillatory(values[i:i + R_CHUNK])
                                            for i in range(0, values.size, R_CHUNK)])
                out[positive] += jump_part
        self.stats['evaluations'] += int(flat.size)
        return out.reshape(r.shape) if r.ndim else out[0]

    def _oscillatory(self, r: np.ndarray) -> np.ndarray:
        """2 int_0^inf (1 - cos(rz)) nu1(z) dz for a block of radii"""
        nu1 = self._projected
        two_pi = 2.0 * np.pi

        # First period, x in (0, 2 pi], log panels plus a power-law end correction
        x_lo = two_pi * 10.0 ** (-FIRST_PERIOD_SPAN)
        x, w = log_rule(x_lo, two_pi, per_decade=10)
        kernel = 2.0 * np.sin(0.5 * x) ** 2
        first = (nu1(x[None, :] / r[:, None]) * (kernel * w)[None, :]).sum(axis=1)
        f0 = nu1(x_lo / r) * 2.0 * np.sin(0.5 * x_lo) ** 2
        f1 = nu1(x_lo * np.e / r) * 2.0 * np.sin(0.5 * x_lo * np.e) ** 2
        with np.errstate(divide='ignore', invalid='ignore'):
            slope = np.log(f1 / f0)
        correction = np.where((f0 > 0.0) & np.isfinite(slope) & (slope > -1.0),
                              x_lo * f0 / (slope + 1.0), 0.0)
        first = first + correction

        # Whole periods 1..K-1, two panels per period split at the peak of 1 - cos
        K = self.initial_periods
        periods = self._periods(r, 1, K)
        total = 2.0 * (first + periods) / r + 2.0 * self._tail(r, K)
        pending = np.ones(r.size, dtype=bool)
        while True:
            next_K = 2 * K
            if next_K > self.period_cap:
                break
            periods[pending] += self._periods(r[pending], K, next_K)
            refined = 2.0 * (first[pending] + periods[pending]) / r[pending] + 2.0 * self._tail(r[pending], next_K)
            converged = np.abs(refined - total[pending]) <= self.rtol * np.abs(refined)
            total[pending] = refined
            self.stats['max_periods'] = max(self.stats['max_periods'], next_K)
            idx = np.flatnonzero(pending)
            pending[idx[converged]] = False
            K = next_K
            if not np.any(pending):
                return total
        bad = np.flatnonzero(pending)
        if bad.size:
            raise QuadratureError(f"psi0 at r={r[bad[0]]!r} after {K} periods", partial=float(total[bad[0]]),
                                  error=float('nan'))
        return total

    def _periods(self, r: np.ndarray, k_start: int, k_stop: int) -> np.ndarray:
        """int_{2 pi k_start}^{2 pi k_stop} (1 - cos x) nu1(x / r) dx"""
        total = np.zeros(r.size)
        for k in range(k_start, k_stop, PERIOD_CHUNK):
            total += self._period_block(r, k, min(k + PERIOD_CHUNK, k_stop))
        return total

    def _period_block(self, r: np.ndarray, k_start: int, k_stop: int) -> np.ndarray:
        xg, wg = gauss_legendre(16)
        xc, wc = gauss_legendre(8)
        edges = np.pi * np.arange(2 * k_start, 2 * k_stop + 1, dtype=float)
        mid, half = 0.5 * (edges[:-1] + edges[1:]), 0.5 * np.diff(edges)

        def integrate(nodes, weights):
            x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
            wts = (half[:, None] * weights[None, :]).ravel() * 2.0 * np.sin(0.5 * x) ** 2
            return self._projected(x[None, :] / r[:, None]) @ wts

        fine = integrate(xg, wg)
        coarse = integrate(xc, wc)
        scale = np.maximum(np.abs(fine), 1e-300)
        self.stats['max_panel_error'] = max(self.stats['max_panel_error'],
                                            float(np.max(np.abs(fine - coarse) / scale)))
        return fine

    def _tail(self, r: np.ndarray, K: int) -> np.ndarray:
        z_K = 2.0 * np.pi * K / r
        return self._projected.tail_mass(z_K) + self._projected.derivative(z_K) / r ** 2

    # -------------------------------------------------------------------------
    # envelope
    # -------------------------------------------------------------------------

    @property
    def envelope_values(self) -> np.ndarray:
        if self._envelope is None:
            if not self.monotone:
                self.logger.info(f"🔄 Building psi* envelope for '{self.spec.name}' "
                                 f"on {self.envelope_grid.size} grid points")
            self._envelope = np.maximum.accumulate(self.psi0(self.envelope_grid))
            if not self.monotone:
                self.logger.info(f"✅ Envelope ready ({self.stats['max_periods']} periods max)")
        return self._envelope

    def psi_star(self, r) -> np.ndarray:
        """Monotone envelope psi*(r); equals psi0 exactly when psi0 is non-decreasing"""
        if self.monotone:
            return self.psi0(r)
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        grid, env = self.envelope_grid, self.envelope_values
        out = np.zeros_like(flat)
        inside = (flat >= grid[0]) & (flat <= grid[-1])
        if np.any(inside):
            log_env = np.log(np.maximum(env, 1e-300))
            out[inside] = np.exp(np.interp(np.log(flat[inside]), np.log(grid), log_env))
        above = flat > grid[-1]
        if np.any(above):
            out[above] = np.maximum(env[-1], self.psi0(flat[above]))
        below = (flat < grid[0]) & (flat > 0.0)
        if np.any(below):
            out[below] = np.minimum(self.psi0(flat[below]), env[0])
        return out.reshape(r.shape) if r.ndim else out[0]


@lru_cache(maxsize=64)
def psi_from_spec(spec: ProcessSpec) -> CharacteristicExponent:
    """Characteristic exponent of a catalog process (cached per spec object)"""
    return CharacteristicExponent(spec)


def psi_star(exponent: CharacteristicExponent, r) -> np.ndarray:
    return exponent.psi_star(r)
