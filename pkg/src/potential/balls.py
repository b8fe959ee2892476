#!/usr/bin/env python3
"""
Ball Potentials and Capacities
==============================

G(B_r), the expected time the process started at 0 spends in B_r, and the
capacity of the closed ball derived from it through |B_r| <= G(B_r) Cap(B_r).

For a subordinate BM, P(|B_s| < r) = P(Gamma(d/2) < r^2/(4s)), hence

    G(B_r) = int_0^inf gammainc(d/2, r^2 / (4s)) U(ds).

For a unimodal triplet only the Laplace identity

    lam int_0^inf e^{-lam u} G(B_sqrt(u)) du = (4 pi)^(-d/2) int e^{-|x|^2/4} / psi(sqrt(lam) x) dx

is available; its Gaver–Stehfest inversion is reported as an informational
estimate next to the proven bracket C2 / psi*(1/r) <= G(B_r) <= 36e / psi*(1/r).
"""

from functools import lru_cache
from typing import Callable, Dict, Tuple, Union

import numpy as np
from scipy.special import gammainc

from src.catalog.geometry import ball_volume, sphere_area
from src.catalog.processes import ProcessSpec
from src.errors import ContractError, UnsupportedSpecError
from src.exponent.characteristic import CharacteristicExponent, psi_from_spec
from src.potential.bracket import PotentialBracket
from src.potential.constants import BALL_UPPER, potential_constants
from src.potential.kernels import potential_for, stieltjes_integral
from src.potential.subordinator import stehfest_invert
from src.utils.quadrature import log_quadrature, radial_integral

CAPACITY_HEURISTIC_FACTOR = 3.0
PSI_TABLE_MIN, PSI_TABLE_MAX, PSI_TABLE_PER_DECADE = 1e-8, 1e8, 16

Target = Union[ProcessSpec, CharacteristicExponent]


def _resolve(target: Target) -> Tuple[ProcessSpec, CharacteristicExponent]:
    if isinstance(target, CharacteristicExponent):
        return target.spec, target
    return target, psi_from_spec(target)


def _require_transient_dimension(spec: ProcessSpec, operation: str) -> None:
    if spec.d < 3:
        raise ContractError(f"{operation} needs d >= 3, got d={spec.d}")


@lru_cache(maxsize=32)
def _psi0_table(exponent: CharacteristicExponent) -> Callable[[np.ndarray], np.ndarray]:
    """log-log interpolant of psi0 with power-law ends (for repeated unimodal evaluations)"""
    decades = np.log10(PSI_TABLE_MAX / PSI_TABLE_MIN)
    grid = np.geomspace(PSI_TABLE_MIN, PSI_TABLE_MAX, int(decades * PSI_TABLE_PER_DECADE) + 1)
    log_grid = np.log(grid)
    log_values = np.log(np.maximum(exponent.psi0(grid), 1e-300))
    low = (log_values[1] - log_values[0]) / (log_grid[1] - log_grid[0])
    high = (log_values[-1] - log_values[-2]) / (log_grid[-1] - log_grid[-2])

    def psi0(r):
        log_r = np.log(np.maximum(np.asarray(r, dtype=float), 1e-300))
        out = np.interp(log_r, log_grid, log_values)
        out = np.where(log_r < log_grid[0], log_values[0] + low * (log_r - log_grid[0]), out)
        out = np.where(log_r > log_grid[-1], log_values[-1] + high * (log_r - log_grid[-1]), out)
        return np.exp(out)

    return psi0


def laplace_rhs(target: Target, lam: float) -> float:
    """(4 pi)^(-d/2) int_{R^d} e^{-|x|^2/4} / psi0(sqrt(lam) |x|) dx"""
    spec, exponent = _resolve(target)
    d = spec.d
    root = np.sqrt(lam)
    psi0 = exponent.psi0 if exponent.monotone else _psi0_table(exponent)

    def integrand(s):
        with np.errstate(over='ignore', under='ignore', divide='ignore'):
            return np.exp(-s * s / 4.0) * s ** (d - 1) / psi0(root * s)

    result = radial_integral(integrand, scale=1.0, span=8.0, rtol=1e-10, atol=1e-300,
                             label='Laplace identity')
    return (4.0 * np.pi) ** (-d / 2.0) * sphere_area(d) * result.value


def _sbm_ball_estimate(spec: ProcessSpec, r: float) -> Tuple[float, str]:
    d = spec.d
    scale = r * r
    bernstein = spec.bernstein

    def occupation(s):
        with np.errstate(divide='ignore'):
            return gammainc(d / 2.0, scale / (4.0 * np.asarray(s, dtype=float)))

    if bernstein.potential_density is not None:
        result = radial_integral(lambda s: occupation(s) * bernstein.potential_density(s), scale=scale,
                                 rtol=1e-10, atol=1e-300, label='ball potential')
        return result.value, 'quadrature'
    potential = potential_for(spec)
    if potential.method == 'bracket-only':
        raise UnsupportedSpecError(f"'{spec.name}': bounded phi, ball potential is infinite")
    return stieltjes_integral(potential, occupation, scale, decay=d / 2.0, label='ball potential'), 'stieltjes'


def _laplace_ball_estimate(spec: ProcessSpec, exponent: CharacteristicExponent, r: float) -> float:
    def transform(p):
        return np.array([laplace_rhs(exponent, value) / value for value in np.atleast_1d(p)])

    return float(stehfest_invert(transform, r * r)[0])


def ball_estimate(target: Target, r: float) -> Tuple[float, str]:
    """Point estimate of G(B_r) and the method that produced it"""
    spec, exponent = _resolve(target)
    if not r > 0.0:
        raise ContractError(f"ball radius must be > 0, got {r!r}")
    if spec.is_sbm:
        return _sbm_ball_estimate(spec, r)
    return _laplace_ball_estimate(spec, exponent, r), 'laplace-inversion'


def ball_potential(target: Target, r: float) -> PotentialBracket:
    """
    G(B_r) with the bracket C2 / psi*(1/r) <= G(B_r) <= 36e / psi*(1/r)

    Raises:
        ContractError: d < 3 or r <= 0
    """
    spec, exponent = _resolve(target)
    _require_transient_dimension(spec, 'ball_potential')
    constants = potential_constants(spec.d)
    estimate, method = ball_estimate(exponent, r)
    psi = float(exponent.psi_star(1.0 / r))
    notes = '' if spec.is_sbm else 'Laplace-inversion estimate is informational'
    return PotentialBracket(lower=constants.C2 / psi, upper=BALL_UPPER / psi, estimate=estimate,
                            constants_used={'C1': constants.C1, 'C2': constants.C2, 'kappa': constants.kappa,
                                            '36e': BALL_UPPER},
                            method=method, notes=notes)


def laplace_cross_check(target: Target, lam: float) -> Dict[str, float]:
    """
    Both sides of the Laplace identity for the ball potential of a subordinate BM

    lhs = lam int e^{-lam u} G(B_sqrt(u)) du, rhs = the radial psi integral.
    """
    spec, exponent = _resolve(target)
    if not spec.is_sbm:
        raise UnsupportedSpecError("the Laplace cross-check needs an independent ball estimate (subordinate BM)")
    _require_transient_dimension(spec, 'laplace_cross_check')
    if not lam > 0.0:
        raise ContractError(f"lam must be > 0, got {lam!r}")

    def integrand(u):
        values = np.array([_sbm_ball_estimate(spec, np.sqrt(value))[0] for value in np.atleast_1d(u)])
        return lam * np.exp(-lam * u) * values

    lhs = log_quadrature(integrand, 1e-10 / lam, 60.0 / lam, per_decade=4).value
    rhs = laplace_rhs(exponent, lam)
    return {'lam': float(lam), 'lhs': float(lhs), 'rhs': float(rhs),
            'relative_difference': float(abs(lhs - rhs) / abs(rhs))}


def capacity_estimate(target: Target, r: float) -> PotentialBracket:
    """
    Cap(closed B_r) ~ |B_r| / G(B_r)

    The lower bound |B1|/(36e) psi*(1/r) r^d is proven; the upper bound is the
    estimate times 3, a heuristic band. ``constants_used['general_set_floor']``
    is the floor C3 psi*(|A|^(-1/d)) |A| for any set A with |A| = |B_r|.
    """
    spec, exponent = _resolve(target)
    _require_transient_dimension(spec, 'capacity_estimate')
    constants = potential_constants(spec.d)
    volume = ball_volume(spec.d, r)
    ball, method = ball_estimate(exponent, r)
    estimate = volume / ball
    floor = constants.C3 * float(exponent.psi_star(volume ** (-1.0 / spec.d))) * volume
    lower = constants.capacity_lower * float(exponent.psi_star(1.0 / r)) * r ** spec.d
    return PotentialBracket(lower=lower, upper=CAPACITY_HEURISTIC_FACTOR * estimate, estimate=estimate,
                            constants_used={'|B1|/36e': constants.capacity_lower, 'C3': constants.C3,
                                            'general_set_floor': floor},
                            method=method,
                            notes=f"upper = {CAPACITY_HEURISTIC_FACTOR:g} x estimate (heuristic, not proven)")
