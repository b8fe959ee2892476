#!/usr/bin/env python3
"""
Potential Kernels
=================

G(x) = int_0^inf g_s(x) U(ds),   g_s(y) = (4 pi s)^(-d/2) exp(-|y|^2 / (4s)),

for a subordinate Brownian motion. With a closed-form potential density u the
integral is a radial quadrature in s (log panels around s = |x|^2); otherwise
it is a Stieltjes sum against U[0, .) on a log partition of
[|x|^2 1e-6, |x|^2 1e6] plus a power-law tail.

``kernel_bracket`` places G between the proven bounds

    C_low / (|x|^d psi*(1/|x|)) <= G(x) <= C4 / (|x|^d psi*(1/|x|)),

the lower one only inside the radius allowed by a verified certificate.
"""

from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma

from src.catalog.processes import ProcessSpec
from src.config import get_experiment_config, get_grid_config, get_quadrature_config
from src.errors import ContractError, DivergentIntegralError, UnsupportedSpecError
from src.exponent.characteristic import CharacteristicExponent, psi_from_spec
from src.exponent.scaling import ScalingCertificate, wlsc_fit
from src.potential.bracket import PotentialBracket
from src.potential.constants import (
    GreenLowerFactor,
    kernel_lower_lp,
    kernel_lower_sbm,
    potential_constants,
    select_green_lower_factor,
)
from src.potential.subordinator import SubordinatorPotential, subordinator_potential
from src.utils.logging_utils import setup_logger
from src.utils.quadrature import radial_integral

STIELTJES_SPAN = 6.0


def _radius(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x)) if x.ndim else abs(float(x))


def _require_sbm(spec: ProcessSpec) -> None:
    if not spec.is_sbm:
        raise UnsupportedSpecError(f"'{spec.name}' is not a subordinate Brownian motion")


@lru_cache(maxsize=64)
def potential_for(spec: ProcessSpec) -> SubordinatorPotential:
    """Subordinator potential of an SBM (cached per spec object)"""
    _require_sbm(spec)
    return subordinator_potential(spec.bernstein)


def riesz_kernel(alpha: float, d: int, rho) -> np.ndarray:
    """Closed-form alpha-stable kernel Gamma((d-alpha)/2) / (2^alpha pi^(d/2) Gamma(alpha/2)) rho^(alpha-d)"""
    if not (0.0 < alpha <= 2.0 and alpha < d):
        raise ContractError(f"Riesz kernel needs 0 < alpha <= 2 and alpha < d (alpha={alpha}, d={d})")
    const = gamma((d - alpha) / 2.0) / (2.0 ** alpha * np.pi ** (d / 2.0) * gamma(alpha / 2.0))
    return const * np.asarray(rho, dtype=float) ** (alpha - d)


def stieltjes_integral(potential: Callable, weight: Callable, scale: float, decay: float,
                       cells: Optional[int] = None, label: str = 'Stieltjes integral') -> float:
    """
    int_0^inf weight(s) U(ds) on a log partition of [scale 1e-6, scale 1e6]

    The head uses U(s_0) weight(s_0); beyond S = scale 1e6 the weight decays as
    s^-decay and U grows like s^q, giving weight(S) q U(S) / (decay - q).

    Raises:
        DivergentIntegralError: q >= decay
    """
    cells = cells or get_grid_config().stieltjes_cells
    edges = np.geomspace(scale * 10.0 ** -STIELTJES_SPAN, scale * 10.0 ** STIELTJES_SPAN, cells + 1)
    U = np.maximum.accumulate(np.asarray(potential(edges), dtype=float))
    mids = np.sqrt(edges[:-1] * edges[1:])
    body = float(np.dot(weight(mids), np.diff(U)))
    head = float(U[0] * weight(edges[:1])[0])
    q = np.log(U[-1] / U[-2]) / np.log(edges[-1] / edges[-2]) if U[-2] > 0.0 else 0.0
    if q >= decay:
        raise DivergentIntegralError(f"{label}: U grows like s^{q:.3f}, too fast for the s^-{decay:g} weight",
                                     partial=body + head, error=np.inf)
    tail = float(weight(edges[-1:])[0] * q * U[-1] / (decay - q))
    return body + head + tail


def green_kernel(spec: ProcessSpec, x, rtol: Optional[float] = None) -> float:
    """
    Potential kernel G(x) of a subordinate Brownian motion

    Raises:
        UnsupportedSpecError: not a subordinate BM, or phi bounded
        DivergentIntegralError: recurrent case (kernel infinite)
    """
    _require_sbm(spec)
    rho = _radius(x)
    if not rho > 0.0:
        raise ContractError("green_kernel needs x != 0")
    d = spec.d
    rtol = rtol or get_quadrature_config().kernel_rtol
    bernstein = spec.bernstein
    scale = rho * rho

    def heat(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(over='ignore', under='ignore', divide='ignore'):
            return (4.0 * np.pi * s) ** (-d / 2.0) * np.exp(-scale / (4.0 * s))

    if bernstein.potential_density is not None:
        result = radial_integral(lambda s: heat(s) * bernstein.potential_density(s), scale=scale,
                                 rtol=rtol, atol=1e-300, label='potential kernel')
        return result.value
    potential = potential_for(spec)
    if potential.method == 'bracket-only':
        raise UnsupportedSpecError(f"'{spec.name}': bounded phi, potential measure has an atom at 0")
    return stieltjes_integral(potential, heat, scale, decay=d / 2.0, label='potential kernel')


class GreenKernelTable:
    """log-log interpolant of r -> G(r) for repeated evaluation (Hunt formula, MC post-processing)"""

    def __init__(self, spec: ProcessSpec, rho_min: float = 1e-5, rho_max: float = 1e5,
                 points_per_decade: int = 16):
        _require_sbm(spec)
        self.spec = spec
        decades = np.log10(rho_max / rho_min)
        self.grid = np.geomspace(rho_min, rho_max, int(round(decades * points_per_decade)) + 1)
        values = np.array([green_kernel(spec, rho) for rho in self.grid])
        self.log_grid = np.log(self.grid)
        self.log_values = np.log(values)
        self.low_slope = (self.log_values[1] - self.log_values[0]) / (self.log_grid[1] - self.log_grid[0])
        self.high_slope = (self.log_values[-1] - self.log_values[-2]) / (self.log_grid[-1] - self.log_grid[-2])

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        log_rho = np.log(np.maximum(rho, 1e-300))
        out = np.interp(log_rho, self.log_grid, self.log_values)
        below, above = log_rho < self.log_grid[0], log_rho > self.log_grid[-1]
        out = np.where(below, self.log_values[0] + self.low_slope * (log_rho - self.log_grid[0]), out)
        out = np.where(above, self.log_values[-1] + self.high_slope * (log_rho - self.log_grid[-1]), out)
        return np.exp(out)


@lru_cache(maxsize=16)
def green_kernel_table(spec: ProcessSpec) -> GreenKernelTable:
    return GreenKernelTable(spec)


def kernel_bracket(exponent: CharacteristicExponent, certificate: Optional[ScalingCertificate], x,
                   estimate: Optional[float] = None) -> PotentialBracket:
    """
    Proven bracket for G(x)

    Args:
        exponent: characteristic exponent of the process (d >= 3)
        certificate: WLSC certificate of psi*; None or unverified gives the upper bound only
        x: point or radius
        estimate: kernel value to place in the bracket (computed for subordinate BMs when omitted)
    """
    spec = exponent.spec
    d = spec.d
    if d < 3:
        raise ContractError(f"kernel bounds need d >= 3, got d={d}")
    rho = _radius(x)
    if not rho > 0.0:
        raise ContractError("kernel_bracket needs x != 0")
    constants = potential_constants(d)
    base = rho ** d * float(exponent.psi_star(1.0 / rho))
    used = {'C4': constants.C4}
    lower = None
    notes = []

    if certificate is not None and certificate.verified:
        lp = kernel_lower_lp(d, certificate.beta, certificate.C, certificate.theta)
        used.update({'C5': lp.constant, 'b': lp.b, 'kappa': lp.kappa})
        if rho <= lp.radius:
            lower = lp.constant / base
        if spec.is_sbm:
            sbm = kernel_lower_sbm(d, certificate.beta / 2.0, certificate.C, certificate.theta ** 2)
            used['C6'] = sbm.constant
            if rho <= sbm.radius:
                lower = max(lower or 0.0, sbm.constant / base)
        if lower is None:
            notes.append('|x| beyond the certified radius: upper bound only')
    else:
        notes.append('no verified certificate: upper bound only')

    if estimate is None and spec.is_sbm:
        estimate = green_kernel(spec, rho)
    return PotentialBracket(lower=lower, upper=constants.C4 / base, estimate=estimate, constants_used=used,
                            method='kernel', notes='; '.join(notes))


def green_lower_factor(spec: ProcessSpec) -> GreenLowerFactor:
    """
    Radius factor L of the Green lower bound G_{B_r}(x, y) >= eps G(x - y)

    L comes from a WLSC certificate fitted to psi*; the configured factor
    stands in when there is no verified certificate or the proven L exceeds
    the configured cap.
    """
    settings = get_experiment_config()
    certificate = wlsc_fit(psi_from_spec(spec).psi_star) if spec.d >= 3 else None
    factor = select_green_lower_factor(spec.d, certificate, settings.green_lower_eps,
                                       settings.green_lower_factor, settings.green_lower_factor_cap)
    logger = setup_logger('GreenLowerFactor')
    if factor.source == 'certificate':
        logger.info(f"📐 '{spec.name}': L = {factor.value:.4g} from the scaling certificate")
    elif factor.proven is not None:
        logger.info(f"📐 '{spec.name}': proven L = {factor.proven:.3e} exceeds the cap "
                    f"{settings.green_lower_factor_cap:g}, using the configured L = {factor.value:g}")
    else:
        logger.info(f"📐 '{spec.name}': no verified certificate, using the configured L = {factor.value:g}")
    return factor
