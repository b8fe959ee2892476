#!/usr/bin/env python3
"""
Process Catalog
===============

Isotropic unimodal Lévy processes handled by the toolkit, in two
representations:

- subordinate Brownian motion X_t = B_{T_t}: a Bernstein function phi and a
  dimension d, with psi(x) = phi(|x|^2) and B_t having char. function e^{-t|x|^2};
- unimodal triplet: Gaussian coefficient a (A = aI) and a radial Lévy
  density nu0, non-increasing on (0, inf).

Named members:
- stable(alpha), relativistic(alpha, m)                    [subordinate BM]
- truncated, tempered, lamperti, layered, log-perturbed,
  log-delta, gauss-log                                     [unimodal triplets]
- sbm-custom / unimodal-custom built from expression strings

Lévy densities carry normalization constant 1: every downstream check is a
bracket or a scale-covariant fit, so the constant does not matter.
"""

import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.special import gamma

from src.catalog.expressions import parse_expression
from src.catalog.geometry import sphere_area
from src.errors import DivergentIntegralError, ProfileInvariantError, QuadratureError, SpecError
from src.utils.quadrature import radial_integral

SAMPLER_TAGS = ('stable-exact', 'tempered-stable-rejection', 'generic-none')
SBM_KINDS = ('stable', 'relativistic', 'sbm-custom')
UNIMODAL_KINDS = ('truncated', 'tempered', 'lamperti', 'layered', 'log-perturbed', 'log-delta',
                  'gauss-log', 'unimodal-custom')
ALL_KINDS = SBM_KINDS + UNIMODAL_KINDS

CHECK_GRID = np.geomspace(1e-6, 1e6, 512)

ArrayFunc = Callable[[np.ndarray], np.ndarray]


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True, eq=False)
class RadialLevyDensity:
    """Radial Lévy profile nu0 in dimension d, with Gaussian coefficient a"""
    d: int
    profile: ArrayFunc
    gaussian: float = 0.0
    truncation: Optional[float] = None
    breakpoints: Tuple[float, ...] = ()
    has_jumps: bool = True

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        mask = s > 0.0
        if self.truncation is not None:
            mask &= s < self.truncation
        if self.has_jumps and np.any(mask):
            with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
                values = np.asarray(self.profile(s[mask]), dtype=float)
            out[mask] = np.where(np.isfinite(values), values, 0.0)
        return out

    @property
    def all_breakpoints(self) -> Tuple[float, ...]:
        points = set(self.breakpoints)
        if self.truncation is not None:
            points.add(self.truncation)
        return tuple(sorted(points))

    def tail_mass(self, r: float, rtol: float = 1e-8) -> float:
        """Lambda(r) = int_{|z| >= r} nu(dz)"""
        if not self.has_jumps:
            return 0.0
        d = self.d
        result = radial_integral(lambda s: self(s) * s ** (d - 1), lower=r, scale=r,
                                 breakpoints=self.all_breakpoints, rtol=rtol, atol=1e-300,
                                 label='Lévy tail mass')
        return sphere_area(d) * result.value

    def inner_moment(self, r: float, rtol: float = 1e-8) -> float:
        """int_{|z| < r} |z|^2 nu(dz)"""
        if not self.has_jumps:
            return 0.0
        d = self.d
        result = radial_integral(lambda s: self(s) * s ** (d + 1), lower=0.0, upper=r, scale=r,
                                 breakpoints=self.all_breakpoints, rtol=rtol, atol=1e-300,
                                 label='Lévy second moment')
        return sphere_area(d) * result.value


@dataclass(frozen=True, eq=False)
class BernsteinFunction:
    """Bernstein function phi with drift b and optional closed forms"""
    phi: ArrayFunc
    drift: float = 0.0
    potential_density: Optional[ArrayFunc] = None
    potential_cdf: Optional[ArrayFunc] = None
    levy_measure: Optional[ArrayFunc] = None
    sampler: str = 'generic-none'
    special: bool = False
    unbounded: bool = True
    params: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
            return np.asarray(self.phi(lam), dtype=float)


@dataclass(frozen=True, eq=False)
class SubordinateBM:
    bernstein: BernsteinFunction
    d: int


@dataclass(frozen=True, eq=False)
class UnimodalLevy:
    density: RadialLevyDensity

    @property
    def d(self) -> int:
        return self.density.d


class SubordinatedLevyDensity:
    """
    nu0(s) = int_0^inf g_u(s) mu(u) du for a subordinator Lévy density mu,
    tabulated once on a log grid and interpolated in log-log coordinates.
    """

    def __init__(self, levy_measure: ArrayFunc, d: int, s_min: float = 1e-8, s_max: float = 1e4,
                 points_per_decade: int = 40):
        self.levy_measure = levy_measure
        self.d = d
        decades = np.log10(s_max / s_min)
        self.grid = np.geomspace(s_min, s_max, int(decades * points_per_decade) + 1)
        self._log_values = None
        self._lock = threading.Lock()

    def _value(self, s: float) -> float:
        d = self.d

        def integrand(u):
            with np.errstate(over='ignore', under='ignore'):
                return (4.0 * np.pi * u) ** (-d / 2.0) * np.exp(-s * s / (4.0 * u)) * self.levy_measure(u)

        return radial_integral(integrand, scale=s * s, rtol=1e-7, atol=1e-300,
                               label='subordinated Lévy density').value

    def _table(self) -> np.ndarray:
        with self._lock:
            if self._log_values is None:
                values = np.array([self._value(s) for s in self.grid])
                self._log_values = np.log(np.maximum(values, 1e-300))
        return self._log_values

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        log_values = self._table()
        log_grid = np.log(self.grid)
        log_s = np.log(np.maximum(s, 1e-300))
        out = np.exp(np.interp(log_s, log_grid, log_values))
        below = s < self.grid[0]
        if np.any(below):
            slope = (log_values[1] - log_values[0]) / (log_grid[1] - log_grid[0])
            out[below] = np.exp(log_values[0] + slope * (log_s[below] - log_grid[0]))
        out[s > self.grid[-1]] = 0.0
        out[out <= 1e-299] = 0.0
        return out


@dataclass(frozen=True, eq=False)
class ProcessSpec:
    """A named process: subordinate BM or unimodal triplet"""
    name: str
    kind: str
    model: Union[SubordinateBM, UnimodalLevy]
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.model.d

    @property
    def is_sbm(self) -> bool:
        return isinstance(self.model, SubordinateBM)

    @property
    def bernstein(self) -> Optional[BernsteinFunction]:
        return self.model.bernstein if self.is_sbm else None

    @property
    def gaussian_coefficient(self) -> float:
        return self.model.bernstein.drift if self.is_sbm else self.model.density.gaussian

    @property
    def has_jumps(self) -> bool:
        return self.levy_density is not None and self.levy_density.has_jumps

    @property
    def document(self) -> Dict[str, Any]:
        return {'name': self.name, 'kind': self.kind, 'd': self.d, 'params': dict(self.params)}

    @cached_property
    def levy_density(self) -> Optional[RadialLevyDensity]:
        """Radial Lévy density of the process (None when it is not available)"""
        if not self.is_sbm:
            return self.model.density
        bernstein = self.model.bernstein
        d = self.d
        if self.kind == 'stable':
            alpha = bernstein.params['alpha']
            if alpha >= 2.0:
                return RadialLevyDensity(d=d, profile=_zero, gaussian=bernstein.drift, has_jumps=False)
            const = stable_density_constant(alpha, d)
            return RadialLevyDensity(d=d, profile=lambda s: const * s ** (-d - alpha), gaussian=0.0)
        if bernstein.levy_measure is None:
            return None
        return RadialLevyDensity(d=d, profile=SubordinatedLevyDensity(bernstein.levy_measure, d),
                                 gaussian=bernstein.drift)


def _zero(s):
    return np.zeros_like(np.asarray(s, dtype=float))


def stable_density_constant(alpha: float, d: int) -> float:
    """c with nu0(s) = c s^{-d-alpha} matching psi0(r) = r^alpha"""
    return float(alpha * 2.0 ** (alpha - 1.0) * gamma((d + alpha) / 2.0)
                 / (np.pi ** (d / 2.0) * gamma(1.0 - alpha / 2.0)))


# =============================================================================
# INVARIANT CHECKS
# =============================================================================

def check_profile(density: RadialLevyDensity, grid: np.ndarray = CHECK_GRID) -> np.ndarray:
    """
    Check nu0 is non-increasing on the grid and Lévy-integrable

    Returns:
        profile values on the grid

    Raises:
        ProfileInvariantError: carries the offending (s_i, s_{i+1}) pair
    """
    values = density(grid)
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        bad = int(np.argmax((values < 0.0) | ~np.isfinite(values)))
        raise ProfileInvariantError(f"nu0 is negative or non-finite at s={grid[bad]!r}",
                                    pair=(float(grid[bad]), float(grid[bad])))
    increase = values[1:] > values[:-1] * (1.0 + 1e-10) + 1e-300
    if np.any(increase):
        i = int(np.argmax(increase))
        raise ProfileInvariantError(
            f"nu0 increases between s={grid[i]!r} and s={grid[i + 1]!r}",
            pair=(float(grid[i]), float(grid[i + 1])))
    if density.has_jumps:
        try:
            total = density.inner_moment(1.0, rtol=1e-6) + density.tail_mass(1.0, rtol=1e-6)
        except (DivergentIntegralError, QuadratureError) as exc:
            raise ProfileInvariantError(f"int (1 ^ |z|^2) nu(dz) is not finite: {exc}") from exc
        if not np.isfinite(total):
            raise ProfileInvariantError("int (1 ^ |z|^2) nu(dz) is not finite")
    return values


def check_bernstein(bernstein: BernsteinFunction, grid: np.ndarray = CHECK_GRID) -> np.ndarray:
    """
    Check phi(0) >= 0, phi non-decreasing and phi(lam)/lam non-increasing on the grid

    Returns:
        phi values on the grid
    """
    at_zero = float(bernstein(np.array([0.0]))[0])
    if not at_zero >= 0.0:
        raise ProfileInvariantError(f"phi(0) = {at_zero!r} < 0", pair=(0.0, 0.0))
    values = bernstein(grid)
    if not np.all(np.isfinite(values)):
        raise ProfileInvariantError("phi is not finite on the check grid")
    tol = 1e-9
    decrease = values[1:] < values[:-1] * (1.0 - tol)
    if np.any(decrease):
        i = int(np.argmax(decrease))
        raise ProfileInvariantError(f"phi decreases between {grid[i]!r} and {grid[i + 1]!r}",
                                    pair=(float(grid[i]), float(grid[i + 1])))
    ratio = values / grid
    increase = ratio[1:] > ratio[:-1] * (1.0 + tol)
    if np.any(increase):
        i = int(np.argmax(increase))
        raise ProfileInvariantError(f"phi(lam)/lam increases between {grid[i]!r} and {grid[i + 1]!r}",
                                    pair=(float(grid[i]), float(grid[i + 1])))
    return values


# =============================================================================
# CONSTRUCTORS
# =============================================================================

def _require(condition: bool, message: str):
    if not condition:
        raise SpecError(message)


def _check_dimension(d) -> int:
    _require(isinstance(d, (int, np.integer)) and not isinstance(d, bool) and d >= 1,
             f"dimension must be an integer >= 1, got {d!r}")
    return int(d)


def _check_alpha(alpha, upper_inclusive: bool = False) -> float:
    alpha = float(alpha)
    inside = 0.0 < alpha <= 2.0 if upper_inclusive else 0.0 < alpha < 2.0
    bound = '(0, 2]' if upper_inclusive else '(0, 2)'
    _require(inside, f"alpha must lie in {bound}, got {alpha!r}")
    return alpha


def make_stable(alpha: float, d: int = 3, name: Optional[str] = None) -> ProcessSpec:
    """
    Isotropic alpha-stable process as the subordinate BM with phi(lam) = lam^(alpha/2)

    alpha = 2 gives the Brownian motion with psi(x) = |x|^2 (pure drift
    subordinator, no jumps).
    """
    alpha = _check_alpha(alpha, upper_inclusive=True)
    d = _check_dimension(d)
    half = alpha / 2.0

    if alpha == 2.0:
        bernstein = BernsteinFunction(
            phi=lambda lam: 1.0 * lam,
            drift=1.0,
            potential_density=lambda s: np.ones_like(s),
            potential_cdf=lambda r: 1.0 * r,
            sampler='stable-exact',
            special=True,
            params={'alpha': alpha},
        )
    else:
        gamma_half = float(gamma(half))
        gamma_cdf = float(gamma(half + 1.0))
        jump_const = half / float(gamma(1.0 - half))
        bernstein = BernsteinFunction(
            phi=lambda lam: lam ** half,
            potential_density=lambda s: s ** (half - 1.0) / gamma_half,
            potential_cdf=lambda r: r ** half / gamma_cdf,
            levy_measure=lambda u: jump_const * u ** (-1.0 - half),
            sampler='stable-exact',
            special=True,
            params={'alpha': alpha},
        )
    return ProcessSpec(name=name or f"stable-{alpha:g}", kind='stable',
                       model=SubordinateBM(bernstein=bernstein, d=d), params={'alpha': alpha})


def _relativistic(params: Dict[str, Any], d: int) -> SubordinateBM:
    alpha = _check_alpha(params.get('alpha', 1.0))
    mass = float(params.get('m', 1.0))
    _require(mass > 0.0, f"relativistic mass m must be > 0, got {mass!r}")
    half = alpha / 2.0
    shift = mass ** (1.0 / half)  # m^{2/alpha}
    jump_const = half / float(gamma(1.0 - half))
    bernstein = BernsteinFunction(
        phi=lambda lam: mass * np.expm1(half * np.log1p(lam / shift)),
        levy_measure=lambda u: jump_const * u ** (-1.0 - half) * np.exp(-shift * u),
        sampler='tempered-stable-rejection',
        special=True,
        params={'alpha': alpha, 'm': mass, 'shift': shift},
    )
    return SubordinateBM(bernstein=bernstein, d=d)


def _lamperti_profile(alpha: float, delta: float, d: int) -> ArrayFunc:
    def profile(s):
        s = np.asarray(s, dtype=float)
        log_expm1 = np.where(s < 30.0, np.log(np.expm1(np.minimum(s, 30.0))), s)
        return np.exp(np.log(s) + delta * s - (alpha + 1.0) * log_expm1 - d * np.log(s))
    return profile


def _unimodal(kind: str, params: Dict[str, Any], d: int) -> RadialLevyDensity:
    if kind == 'truncated':
        alpha = _check_alpha(params.get('alpha', 1.0))
        return RadialLevyDensity(d=d, profile=lambda s: s ** (-alpha - d), truncation=1.0)
    if kind == 'tempered':
        alpha = _check_alpha(params.get('alpha', 1.0))
        return RadialLevyDensity(d=d, profile=lambda s: s ** (-alpha - d) * np.exp(-s))
    if kind == 'lamperti':
        alpha = _check_alpha(params.get('alpha', 1.0))
        delta = float(params.get('delta', 0.0))
        _require(delta < alpha + 1.0, f"lamperti requires delta < alpha + 1, got delta={delta!r}")
        return RadialLevyDensity(d=d, profile=_lamperti_profile(alpha, delta, d))
    if kind == 'layered':
        alpha = _check_alpha(params.get('alpha', 1.5))
        alpha1 = _check_alpha(params.get('alpha1', 0.5))
        return RadialLevyDensity(
            d=d, profile=lambda s: np.where(s < 1.0, s ** (-alpha), s ** (-alpha1)) * s ** (-d),
            breakpoints=(1.0,))
    if kind == 'log-perturbed':
        gaussian = float(params.get('a', 0.0))
        _require(gaussian >= 0.0, "Gaussian coefficient a must be >= 0")
        return RadialLevyDensity(d=d, profile=lambda s: s ** (-d - 2.0) / np.log(2.0 + 1.0 / s) ** 2,
                                 gaussian=gaussian)
    if kind == 'log-delta':
        delta = float(params.get('delta', 0.5))
        _require(0.0 < delta < 1.0, f"log-delta requires 0 < delta < 1, got {delta!r}")
        return RadialLevyDensity(
            d=d, profile=lambda s: s ** (-2.0 - d) / np.log1p(s ** (-delta)) ** 2)
    if kind == 'gauss-log':
        return RadialLevyDensity(
            d=d, profile=lambda s: s ** (-d - 2.0) / np.log1p(1.0 / s) ** 2 * np.exp(-s * s),
            gaussian=1.0)
    if kind == 'unimodal-custom':
        _require('nu0' in params, "unimodal-custom requires params.nu0")
        profile = parse_expression(params['nu0'])
        gaussian = float(params.get('a', 0.0))
        _require(gaussian >= 0.0, "Gaussian coefficient a must be >= 0")
        truncation = params.get('truncation')
        breakpoints = tuple(float(b) for b in params.get('breakpoints', ()))
        return RadialLevyDensity(d=d, profile=profile, gaussian=gaussian,
                                 truncation=None if truncation is None else float(truncation),
                                 breakpoints=breakpoints)
    raise SpecError(f"Unknown unimodal kind '{kind}'")


def _sbm_custom(params: Dict[str, Any], d: int) -> SubordinateBM:
    _require('phi' in params, "sbm-custom requires params.phi")
    phi = parse_expression(params['phi'])
    optional = {key: parse_expression(params[key])
                for key in ('potential_density', 'potential_cdf', 'levy_measure') if key in params}
    drift = float(params.get('drift', 0.0))
    _require(drift >= 0.0, "drift b must be >= 0")
    bernstein = BernsteinFunction(
        phi=phi,
        drift=drift,
        sampler='generic-none',
        special=bool(params.get('special', False)),
        unbounded=bool(params.get('unbounded', True)),
        **optional,
    )
    return SubordinateBM(bernstein=bernstein, d=d)


def make_named(kind: str, params: Optional[Dict[str, Any]] = None, d: int = 3,
               name: Optional[str] = None, check: bool = True) -> ProcessSpec:
    """
    Build a catalog process by kind

    Args:
        kind: one of ALL_KINDS
        params: kind parameters (alpha, m, delta, alpha1, a, nu0, phi, ...)
        d: dimension (default 3)
        check: run the profile / Bernstein invariant checks

    Returns:
        ProcessSpec
    """
    params = dict(params or {})
    d = _check_dimension(d)
    if kind == 'stable':
        return make_stable(params.get('alpha', 1.0), d, name=name)
    if kind not in ALL_KINDS:
        raise SpecError(f"Unknown process kind '{kind}'. Known kinds: {', '.join(ALL_KINDS)}")

    if kind == 'relativistic':
        model = _relativistic(params, d)
    elif kind == 'sbm-custom':
        model = _sbm_custom(params, d)
    else:
        model = UnimodalLevy(density=_unimodal(kind, params, d))

    if check:
        if isinstance(model, SubordinateBM):
            check_bernstein(model.bernstein)
        else:
            check_profile(model.density)

    label = name or '-'.join([kind] + [f"{params[k]:g}" for k in sorted(params)
                                       if isinstance(params[k], (int, float)) and not isinstance(params[k], bool)])
    return ProcessSpec(name=label, kind=kind, model=model, params=params)


def default_catalog(d: int = 3) -> List[ProcessSpec]:
    """The verification zoo"""
    return [
        make_stable(1.0, d),
        make_stable(1.5, d),
        make_stable(2.0, d),
        make_named('relativistic', {'alpha': 1.0, 'm': 1.0}, d),
        make_named('truncated', {'alpha': 1.0}, d),
        make_named('tempered', {'alpha': 1.0}, d),
        make_named('lamperti', {'alpha': 1.0, 'delta': 0.5}, d),
        make_named('layered', {'alpha': 1.5, 'alpha1': 0.5}, d),
        make_named('log-perturbed', {}, d),
    ]
