#!/usr/bin/env python3
"""
Proven Constants
================

Explicit constants of the potential-kernel, ball-potential, capacity and Green
function bounds, evaluated once per dimension:

- C1 = 2^-(d+1) pi^(-d/2) int exp(-|x|^2/4) / (1 + |x|^2) dx
- kappa solves c1 Gamma(2, kappa) = 1/2 with c1 = 144e / C1, Gamma(2, k) = (1 + k) e^-k
- C2 = C1 / (4 (kappa + 1))            G(B_r) >= C2 / psi*(1/r)
- 36e                                   G(B_r) <= 36e / psi*(1/r)
- C3 = |B1|^2 / (72e (1 + |B1|^2))     Cap(A) >= C3 psi*(|A|^(-1/d)) |A|
- C4 = 36e / |B1|                       |x|^d psi*(1/|x|) G(x) <= C4
- C7 = Gamma(d/2-1, 1/4)/Gamma(d/2-1) (1 - e^(-3/4))   special SBM Green lower bound

Certificate-dependent lower constants (C5 with its radius factor b, and the
subordinate-BM C6 chain) come from ``kernel_lower_lp`` and ``kernel_lower_sbm``.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaincc

from src.catalog.geometry import sphere_area, unit_ball_volume
from src.errors import ContractError
from src.utils.quadrature import adaptive_integral

E = float(np.e)
SUBORDINATOR_LOWER = (1.0 - 2.0 / E) / 2.0
SUBORDINATOR_UPPER = E
BALL_UPPER = 36.0 * E


@dataclass(frozen=True)
class PotentialConstants:
    d: int
    unit_ball: float
    C1: float
    c1: float
    kappa: float
    C2: float
    C3: float
    C4: float
    C7: Optional[float]

    @property
    def capacity_lower(self) -> float:
        """|B1| / (36e)"""
        return self.unit_ball / BALL_UPPER

    def as_dict(self) -> Dict[str, float]:
        return {'C1': self.C1, 'c1': self.c1, 'kappa': self.kappa, 'C2': self.C2, 'C3': self.C3,
                'C4': self.C4, 'C7': self.C7, '36e': BALL_UPPER, '|B1|': self.unit_ball}


def _gaussian_weighted_integral(d: int) -> float:
    """int_{R^d} exp(-|x|^2/4) / (1 + |x|^2) dx"""
    result = adaptive_integral(lambda s: np.exp(-s * s / 4.0) * s ** (d - 1) / (1.0 + s * s), 0.0, np.inf,
                               rtol=1e-10, label='C1 integral')
    return sphere_area(d) * result.value


@lru_cache(maxsize=None)
def potential_constants(d: int) -> PotentialConstants:
    """Dimension constants (cached)"""
    if d < 1:
        raise ContractError(f"dimension must be >= 1, got {d}")
    unit_ball = unit_ball_volume(d)
    C1 = 2.0 ** (-(d + 1)) * np.pi ** (-d / 2.0) * _gaussian_weighted_integral(d)
    c1 = 144.0 * E / C1
    if c1 > 0.5:
        kappa = brentq(lambda k: c1 * (1.0 + k) * np.exp(-k) - 0.5, 0.0, 200.0, xtol=1e-14)
    else:
        kappa = 0.0
    C2 = C1 / (4.0 * (kappa + 1.0))
    C3 = unit_ball ** 2 / (72.0 * E * (1.0 + unit_ball ** 2))
    C4 = BALL_UPPER / unit_ball
    C7 = float(gammaincc(d / 2.0 - 1.0, 0.25) * (1.0 - np.exp(-0.75))) if d >= 3 else None
    return PotentialConstants(d=d, unit_ball=unit_ball, C1=float(C1), c1=float(c1), kappa=float(kappa),
                              C2=float(C2), C3=float(C3), C4=float(C4), C7=C7)


@dataclass(frozen=True)
class KernelLowerConstants:
    """G(x) >= constant / (|x|^d f(1/|x|)) for |x| <= radius"""
    constant: float
    radius: float
    kappa: float
    b: float
    source: str


def kernel_lower_lp(d: int, beta: float, C_star: float, theta: float) -> KernelLowerConstants:
    """
    Lower kernel constant from a WLSC(beta, theta, C*) certificate of psi*

    kappa = (24 / (c C*))^(1/beta) with c = C2 / (36e); C5 = 36e / (|B1| kappa^d);
    valid for |x| <= b R, b = 1/kappa, R = 1/theta.
    """
    if not (beta > 0.0 and C_star > 0.0):
        raise ContractError("certificate needs beta > 0 and C* > 0")
    constants = potential_constants(d)
    c = constants.C2 / BALL_UPPER
    kappa = max((24.0 / (c * C_star)) ** (1.0 / beta), 1.0)
    C5 = BALL_UPPER / (constants.unit_ball * kappa ** d)
    R = np.inf if theta == 0.0 else 1.0 / theta
    return KernelLowerConstants(constant=float(C5), radius=float(R / kappa), kappa=float(kappa),
                                b=float(1.0 / kappa), source='C5')


def _heat_kernel_at_unit(d: int, t: float) -> float:
    """g_t(1) = (4 pi t)^(-d/2) exp(-1/(4t))"""
    return float((4.0 * np.pi * t) ** (-d / 2.0) * np.exp(-1.0 / (4.0 * t)))


def kernel_lower_sbm(d: int, beta_phi: float, C_star: float, theta_phi: float) -> KernelLowerConstants:
    """
    Subordinate-BM lower kernel constant from a WLSC(beta, R^-2, C*) certificate of phi

    c2 = 2e^2 / ((e - 2) C*), kappa = (2 c2)^(-1/beta),
    C6 = (1 - 2/e)/4 (g_kappa(1) ^ g_1(1)); valid for |x| <= R.
    """
    if not (beta_phi > 0.0 and C_star > 0.0):
        raise ContractError("certificate needs beta > 0 and C* > 0")
    c2 = 2.0 * E ** 2 / ((E - 2.0) * C_star)
    kappa = (2.0 * c2) ** (-1.0 / beta_phi)
    C6 = (1.0 - 2.0 / E) / 4.0 * min(_heat_kernel_at_unit(d, kappa), _heat_kernel_at_unit(d, 1.0))
    R = np.inf if theta_phi == 0.0 else 1.0 / np.sqrt(theta_phi)
    return KernelLowerConstants(constant=float(C6), radius=float(R), kappa=float(kappa), b=1.0, source='C6')


def green_lower_radius_factor(d: int, eps: float, lower: KernelLowerConstants) -> float:
    """L = (4 C4 / (C5 (1 - eps)))^(1/(d-2)) v 1/b"""
    if d < 3:
        raise ContractError(f"Green function bounds need d >= 3, got d={d}")
    if not 0.0 < eps < 1.0:
        raise ContractError(f"eps must lie in (0, 1), got {eps!r}")
    C4 = potential_constants(d).C4
    return float(max((4.0 * C4 / (lower.constant * (1.0 - eps))) ** (1.0 / (d - 2)), 1.0 / lower.b))


@dataclass(frozen=True)
class GreenLowerFactor:
    """The radius factor L behind r0 = r / (2L + 1)"""
    value: float
    proven: Optional[float]
    source: str

    def inner_radius(self, r: float) -> float:
        return r / (2.0 * self.value + 1.0)

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {'value': self.value, 'proven': self.proven, 'source': self.source}


def select_green_lower_factor(d: int, certificate, eps: float, fallback: float, cap: float) -> GreenLowerFactor:
    """
    L from a verified WLSC certificate of psi* when it is at most ``cap``

    The proven factor is reported either way. Without a verified certificate,
    for d < 3, or above the cap, ``fallback`` is used.
    """
    if d < 3 or certificate is None or not certificate.verified:
        return GreenLowerFactor(value=float(fallback), proven=None, source='config')
    lower = kernel_lower_lp(d, certificate.beta, certificate.C, certificate.theta)
    proven = green_lower_radius_factor(d, eps, lower)
    if proven <= cap:
        return GreenLowerFactor(value=proven, proven=proven, source='certificate')
    return GreenLowerFactor(value=float(fallback), proven=proven, source='config')
