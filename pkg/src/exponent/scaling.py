#!/usr/bin/env python3
"""
Weak Lower Scaling Certificates
===============================

WLSC(beta, theta, C):  f(lam r) >= C lam^beta f(r)  for lam >= 1, r >= theta.

``wlsc_fit`` computes, for every candidate beta,

    C(beta) = inf over the probe grid of f(lam r) / (lam^beta f(r))

on lam in [1, 1e4] and r in [max(theta, 1e-6), 1e6] (log grids). A candidate
is admissible when C(beta) clears the floor 1e-3 *and* the infimum has
stabilized inside the probe range, i.e. the infimum over lam <= 1e4 equals the
infimum over lam <= 1e3. The largest admissible beta wins; without one the
certificate degenerates to the smallest beta, flagged non-verified.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import get_grid_config
from src.errors import ContractError

STABILIZATION_RTOL = 1e-6


@dataclass
class ScalingCertificate:
    """A WLSC triple with the probe grid it was checked on"""
    beta: float
    theta: float
    C: float
    slack: Optional[float]
    verified: bool
    lambdas: np.ndarray = field(repr=False, default_factory=lambda: np.array([]))
    radii: np.ndarray = field(repr=False, default_factory=lambda: np.array([]))
    candidates: Optional[pd.DataFrame] = field(repr=False, default=None)

    @property
    def grid(self) -> Sequence[Tuple[float, float]]:
        """The (lam, r) probe pairs"""
        return [(float(lam), float(r)) for lam in self.lambdas for r in self.radii]

    def to_dict(self) -> Dict[str, Any]:
        payload = {'beta': float(self.beta), 'theta': float(self.theta), 'C': float(self.C),
                   'verified': bool(self.verified)}
        if self.slack is not None:
            payload['slack'] = float(self.slack)
        return payload


def default_beta_grid(count: Optional[int] = None) -> np.ndarray:
    """``count`` equally spaced values in (0, 2]"""
    count = count or get_grid_config().beta_count
    return 2.0 * np.arange(1, count + 1) / count


def default_probe_grid(theta: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """lam in [1, lambda_max] and r in [max(theta, 1e-6), 1e6], both 10 points per decade"""
    grids = get_grid_config()
    per_decade = grids.lambda_points_per_decade
    lam_steps = int(round(np.log10(grids.lambda_max) * per_decade))
    lambdas = 10.0 ** (np.arange(lam_steps + 1) / per_decade)
    r_min = max(theta, grids.envelope_min)
    if not r_min < grids.envelope_max:
        raise ContractError(f"theta={theta!r} leaves no probe radii below {grids.envelope_max!r}")
    r_steps = int(np.floor(np.log10(grids.envelope_max / r_min) * per_decade + 1e-9))
    radii = r_min * 10.0 ** (np.arange(r_steps + 1) / per_decade)
    return lambdas, radii


def _ratio_table(f: Callable, lambdas: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """f(lam r) / f(r) for every probe pair, f evaluated once per distinct argument"""
    products = np.outer(lambdas, radii)
    points, inverse = np.unique(np.concatenate([products.ravel(), radii]), return_inverse=True)
    values = np.asarray(f(points), dtype=float)
    if np.any(~(values > 0.0)):
        bad = points[np.argmax(~(values > 0.0))]
        raise ContractError(f"f must be strictly positive on the probe grid (f({bad!r}) = "
                            f"{values[np.argmax(~(values > 0.0))]!r})")
    at_products = values[inverse[:products.size]].reshape(products.shape)
    at_radii = values[inverse[products.size:]]
    return at_products / at_radii[None, :]


def _scaling_constants(ratio: np.ndarray, lambdas: np.ndarray, beta: float,
                       lambda_cut: float) -> Tuple[float, float]:
    scaled = ratio / lambdas[:, None] ** beta
    full = float(scaled.min())
    inner = lambdas <= lambda_cut * (1.0 + 1e-12)
    sub = float(scaled[inner].min()) if np.any(inner) else full
    return full, sub


def wlsc_fit(f: Callable, theta: float = 0.0, beta_grid: Optional[Sequence[float]] = None,
             probe_grid: Optional[Tuple[np.ndarray, np.ndarray]] = None,
             floor: Optional[float] = None) -> ScalingCertificate:
    """
    Fit a weak lower scaling certificate for f

    Args:
        f: vectorized positive function (typically psi* of a process)
        theta: scaling threshold, supplied by the caller
        beta_grid: candidate exponents (default 64 values in (0, 2])
        probe_grid: (lambdas, radii); defaults to ``default_probe_grid(theta)``
        floor: admissibility floor for C (default 1e-3)

    Returns:
        ScalingCertificate; ``candidates`` holds the full (beta, C, admissible) table
    """
    if theta < 0.0:
        raise ContractError(f"theta must be >= 0, got {theta!r}")
    floor = floor if floor is not None else get_grid_config().scaling_floor
    betas = np.sort(np.asarray(beta_grid if beta_grid is not None else default_beta_grid(), dtype=float))
    lambdas, radii = probe_grid if probe_grid is not None else default_probe_grid(theta)
    lambdas, radii = np.asarray(lambdas, dtype=float), np.asarray(radii, dtype=float)
    ratio = _ratio_table(f, lambdas, radii)
    lambda_cut = lambdas.max() / 10.0

    rows = []
    for beta in betas:
        full, sub = _scaling_constants(ratio, lambdas, beta, lambda_cut)
        stabilized = full >= sub * (1.0 - STABILIZATION_RTOL)
        rows.append({'beta': float(beta), 'C': full, 'stabilized': bool(stabilized),
                     'admissible': bool(stabilized and full >= floor)})
    candidates = pd.DataFrame(rows)

    admissible = candidates[candidates['admissible']]
    if len(admissible):
        best = admissible.iloc[-1]
        verified = True
    else:
        best = candidates.iloc[0]
        verified = False
    return ScalingCertificate(beta=float(best['beta']), theta=float(theta), C=float(best['C']),
                              slack=None, verified=verified, lambdas=lambdas, radii=radii,
                              candidates=candidates)


def check_certificate(f: Callable, beta: float, theta: float, C: float,
                      probe_grid: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> ScalingCertificate:
    """Check a given triple on the probe grid; slack = min f(lam r)/(C lam^beta f(r)) - 1"""
    if not C > 0.0:
        raise ContractError(f"C must be > 0, got {C!r}")
    lambdas, radii = probe_grid if probe_grid is not None else default_probe_grid(theta)
    lambdas, radii = np.asarray(lambdas, dtype=float), np.asarray(radii, dtype=float)
    ratio = _ratio_table(f, lambdas, radii)
    slack = float((ratio / (C * lambdas[:, None] ** beta)).min() - 1.0)
    return ScalingCertificate(beta=float(beta), theta=float(theta), C=float(C), slack=slack,
                              verified=slack >= 0.0, lambdas=lambdas, radii=radii)


# =============================================================================
# JUMP PROBABILITY BOUND
# =============================================================================

def jump_probability_bound(exponent, s: float, r: float) -> float:
    """psi*(1/r) / psi*(1/s), the shape of the bound on P(|X_{tau_{B_s}}| >= r)"""
    return float(exponent.psi_star(1.0 / r) / exponent.psi_star(1.0 / s))


@dataclass
class JumpBoundReport:
    s: float
    table: pd.DataFrame
    violated: bool
    beta: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {'s': self.s, 'beta': self.beta, 'violated': self.violated,
                'rows': self.table.to_dict(orient='records')}


def check_jump_prob_bound(exponent, s: float, r, mc_estimate, stderr=None,
                          certificate: Optional[ScalingCertificate] = None,
                          sigma_rule: float = 3.0) -> JumpBoundReport:
    """
    Compare MC estimates of P^0(|X_{tau_{B_s}}| >= r) with psi*(1/r)/psi*(1/s)

    Only the qualitative decay is asserted: along increasing r the estimate
    may not rise by more than ``sigma_rule`` combined standard errors.

    Raises:
        ContractError: some s > r/2
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    estimate = np.atleast_1d(np.asarray(mc_estimate, dtype=float))
    se = np.zeros_like(estimate) if stderr is None else np.atleast_1d(np.asarray(stderr, dtype=float))
    if estimate.shape != r.shape or se.shape != r.shape:
        raise ContractError("r, mc_estimate and stderr must have the same length")
    if np.any(s > r / 2.0 * (1.0 + 1e-12)):
        raise ContractError(f"check_jump_prob_bound needs s <= r/2 (s={s!r}, r={r.tolist()!r})")

    order = np.argsort(r)
    r, estimate, se = r[order], estimate[order], se[order]
    bound = np.array([jump_probability_bound(exponent, s, radius) for radius in r])
    table = pd.DataFrame({'r': r, 'estimate': estimate, 'stderr': se, 'bound': bound,
                          'ratio': estimate / bound})
    verified_beta = certificate.beta if certificate is not None and certificate.verified else None
    if verified_beta is not None:
        table['scaled_ratio'] = estimate / (s / r) ** verified_beta
    rises = estimate[1:] - estimate[:-1] > sigma_rule * np.sqrt(se[1:] ** 2 + se[:-1] ** 2)
    table['decay_violation'] = np.concatenate([[False], rises])
    return JumpBoundReport(s=float(s), table=table, violated=bool(np.any(rises)), beta=verified_beta)
