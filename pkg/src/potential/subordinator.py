#!/usr/bin/env python3
"""
Subordinator Potential Measures
===============================

U[0, r) = E int_0^inf 1{T_t < r} dt for the subordinator with Laplace exponent
phi, which satisfies

    int e^{-lam s} U(ds) = 1 / phi(lam)    and    (1 - 2/e) / (2 phi(1/r)) <= U[0, r) <= e / phi(1/r).

Closed-form potentials (stable subordinators, pure drift) are integrated
directly. Otherwise r -> U[0, r), whose Laplace transform is 1 / (lam phi(lam)),
is inverted by the Gaver–Stehfest method on a log grid, clamped into the
bracket above and made monotone by a running maximum. Raw inversions leaving
the bracket by more than 10% flag the result as low-confidence.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional

import numpy as np
from scipy.special import factorial

from src.catalog.processes import BernsteinFunction
from src.config import get_grid_config, get_quadrature_config
from src.errors import UnsupportedSpecError
from src.potential.constants import SUBORDINATOR_LOWER, SUBORDINATOR_UPPER
from src.utils.logging_utils import setup_logger
from src.utils.quadrature import adaptive_integral

INVERSION_MIN, INVERSION_MAX = 1e-8, 1e8
LOW_CONFIDENCE_MARGIN = 0.10


@lru_cache(maxsize=None)
def stehfest_coefficients(order: int) -> np.ndarray:
    """Salzer summation weights V_1..V_M of the Gaver–Stehfest formula (M even)"""
    if order % 2 != 0:
        order += 1
    half = order // 2
    weights = np.zeros(order)
    for k in range(1, order + 1):
        terms = [j ** half * factorial(2 * j, exact=True)
                 / (factorial(half - j, exact=True) * factorial(j, exact=True) * factorial(j - 1, exact=True)
                    * factorial(k - j, exact=True) * factorial(2 * j - k, exact=True))
                 for j in range((k + 1) // 2, min(k, half) + 1)]
        weights[k - 1] = (-1) ** (k + half) * sum(terms)
    return weights


def stehfest_invert(transform: Callable[[np.ndarray], np.ndarray], t, order: Optional[int] = None) -> np.ndarray:
    """f(t) ~ ln2/t sum_k V_k F(k ln2 / t), vectorized over t"""
    order = order or get_quadrature_config().stehfest_order
    weights = stehfest_coefficients(order)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    p = np.outer(np.log(2.0) / t, np.arange(1, weights.size + 1))
    values = np.asarray(transform(p.ravel()), dtype=float).reshape(p.shape)
    return (values @ weights) * np.log(2.0) / t


@dataclass
class SubordinatorPotential:
    """U[0, r) for a Bernstein function, with its evaluation method and diagnostics"""
    bernstein: BernsteinFunction
    method: str
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    low_confidence: bool = False
    violation_rate: float = 0.0
    stats: Dict[str, float] = field(default_factory=dict)

    def bracket(self, r) -> tuple:
        """((1 - 2/e) / (2 phi(1/r)), e / phi(1/r))"""
        phi = self.bernstein(1.0 / np.asarray(r, dtype=float))
        return SUBORDINATOR_LOWER / phi, SUBORDINATOR_UPPER / phi

    def _off_grid(self, r: np.ndarray) -> np.ndarray:
        """Clamped inversion beyond the grid, joined monotonically to the tabulated ends"""
        out = _clamped_inversion(self.bernstein, r)[0]
        below = r < self.grid[0]
        out[below] = np.fmin(out[below], self.values[0])
        out[~below] = np.fmax(out[~below], self.values[-1])
        order = np.argsort(r, kind='stable')
        out[order] = np.fmax.accumulate(out[order])
        return out

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        if self.method == 'bracket-only':
            raise UnsupportedSpecError("phi is bounded: U has an atom at 0 and only the bracket is available")
        if self.method == 'closed-form':
            out = _closed_form(self.bernstein, flat)
        else:
            out = np.zeros_like(flat)
            inside = (flat >= self.grid[0]) & (flat <= self.grid[-1])
            off_grid = ~inside & (flat > 0.0)
            out[inside] = np.exp(np.interp(np.log(flat[inside]), np.log(self.grid), np.log(self.values)))
            if np.any(off_grid):
                out[off_grid] = self._off_grid(flat[off_grid])
        out[flat <= 0.0] = 0.0
        return out.reshape(r.shape) if r.ndim else out[0]


def _closed_form(bernstein: BernsteinFunction, r: np.ndarray) -> np.ndarray:
    if bernstein.potential_cdf is not None:
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.asarray(bernstein.potential_cdf(r), dtype=float)
    density = bernstein.potential_density
    return np.array([adaptive_integral(density, 0.0, value, rtol=1e-10, label='potential density').value
                     if value > 0 else 0.0 for value in r])


def _clamped_inversion(bernstein: BernsteinFunction, r: np.ndarray):
    def transform(lam):
        return 1.0 / (lam * bernstein(lam))

    raw = stehfest_invert(transform, r)
    phi = bernstein(1.0 / r)
    lower, upper = SUBORDINATOR_LOWER / phi, SUBORDINATOR_UPPER / phi
    return np.clip(raw, lower, upper), raw, lower, upper


def subordinator_potential(bernstein: BernsteinFunction, force_inversion: bool = False) -> SubordinatorPotential:
    """
    Potential measure U[0, r) of the subordinator with Laplace exponent phi

    Args:
        bernstein: Bernstein function
        force_inversion: use the Gaver–Stehfest path even when a closed form exists

    Returns:
        SubordinatorPotential with method 'closed-form', 'laplace-inversion' or 'bracket-only'
    """
    logger = setup_logger('SubordinatorPotential')
    if not bernstein.unbounded:
        logger.warning("⚠️ phi is bounded; returning the bracket only")
        return SubordinatorPotential(bernstein=bernstein, method='bracket-only')

    has_closed_form = bernstein.potential_cdf is not None or bernstein.potential_density is not None
    if has_closed_form and not force_inversion:
        return SubordinatorPotential(bernstein=bernstein, method='closed-form')

    grid = np.geomspace(INVERSION_MIN, INVERSION_MAX, get_grid_config().inversion_points)
    clamped, raw, lower, upper = _clamped_inversion(bernstein, grid)
    outside = (raw < lower) | (raw > upper)
    far_outside = (raw < lower * (1.0 - LOW_CONFIDENCE_MARGIN)) | (raw > upper * (1.0 + LOW_CONFIDENCE_MARGIN))
    values = np.maximum.accumulate(clamped)
    potential = SubordinatorPotential(
        bernstein=bernstein,
        method='laplace-inversion',
        grid=grid,
        values=values,
        low_confidence=bool(np.any(far_outside) or not np.all(np.isfinite(raw))),
        violation_rate=float(np.mean(outside)),
        stats={'clamped_points': int(outside.sum()), 'far_outside_points': int(far_outside.sum())},
    )
    if potential.low_confidence:
        logger.warning(f"⚠️ Low-confidence inversion: {far_outside.sum()} of {grid.size} points "
                       f"left the bracket by more than {LOW_CONFIDENCE_MARGIN:.0%}")
    return potential
