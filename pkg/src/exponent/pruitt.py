"""
Pruitt function, truncated second moment and the Bernstein envelope.

    h(r)   = a r^-2 + int min(1, |z|^2 / r^2) nu(dz)
    I(r)   = a r^2  + int min(1, (r|z|)^2) nu(dz)          (= h(1/r))
    phi(l) = a l    + int (1 - exp(-|z|^2 l)) nu(dz)

All three are radial integrals of nu0 split at the profile breakpoints; the
drift term of a general triplet is absent because every catalog process is
symmetric.
"""

from typing import Optional

import numpy as np

from src.catalog.geometry import sphere_area
from src.catalog.processes import BernsteinFunction, ProcessSpec, RadialLevyDensity
from src.config import get_quadrature_config
from src.errors import ContractError, UnsupportedSpecError
from src.utils.quadrature import radial_integral


def _density(spec: ProcessSpec) -> RadialLevyDensity:
    density = spec.levy_density
    if density is None:
        raise UnsupportedSpecError(
            f"process '{spec.name}' has no radial Lévy density (supply 'levy_measure' for sbm-custom)")
    return density


def pruitt_h(spec: ProcessSpec, r: float, rtol: Optional[float] = None) -> float:
    """
    Pruitt function h(r)

    Args:
        spec: catalog process with a radial Lévy density
        r: radius > 0

    Returns:
        h(r) = a/r^2 + (int_{|z|<r} |z|^2 nu(dz)) / r^2 + nu(|z| >= r)
    """
    if not r > 0.0:
        raise ContractError(f"pruitt_h needs r > 0, got {r!r}")
    rtol = rtol or get_quadrature_config().radial_rtol
    density = _density(spec)
    inner = density.inner_moment(r, rtol=rtol)
    tail = density.tail_mass(r, rtol=rtol)
    return float(density.gaussian / r ** 2 + inner / r ** 2 + tail)


def truncated_moment(spec: ProcessSpec, r: float) -> float:
    """I(r) = a r^2 + int (1 ^ (r|z|)^2) nu(dz)"""
    if not r > 0.0:
        raise ContractError(f"truncated_moment needs r > 0, got {r!r}")
    return pruitt_h(spec, 1.0 / r)


def _envelope_phi(density: RadialLevyDensity, rtol: float):
    d = density.d
    area = sphere_area(d)

    def phi_scalar(lam: float) -> float:
        if lam <= 0.0:
            return 0.0
        value = density.gaussian * lam
        if density.has_jumps:
            result = radial_integral(lambda s: -np.expm1(-s * s * lam) * density(s) * s ** (d - 1),
                                     scale=1.0 / np.sqrt(lam), breakpoints=density.all_breakpoints,
                                     rtol=rtol, atol=1e-300, label='Bernstein envelope')
            value += area * result.value
        return value

    def phi(lam):
        lam = np.asarray(lam, dtype=float)
        return np.vectorize(phi_scalar, otypes=[float])(lam)

    return phi


def bernstein_envelope(spec: ProcessSpec, rtol: Optional[float] = None) -> BernsteinFunction:
    """
    phi_env(l) = a l + int (1 - e^{-|z|^2 l}) nu(dz), a Bernstein function with
    1/(8(1+2d)) phi_env(r^2) <= psi*(r) <= 4 phi_env(r^2)
    """
    rtol = rtol or get_quadrature_config().radial_rtol
    density = _density(spec)
    return BernsteinFunction(
        phi=_envelope_phi(density, rtol),
        drift=density.gaussian,
        sampler='generic-none',
        params={'envelope_of': spec.name},
    )
