"""
One-dimensional projection of a radial Lévy density.

nu1(z) = int_{R^{d-1}} nu0(sqrt(|w|^2 + z^2)) dw is the density of the first
coordinate marginal of the Lévy measure. With |w| = z sinh(u):

    nu1(z) = sigma_{d-2} z^{d-1} int_0^inf nu0(z cosh u) cosh(u) sinh(u)^{d-2} du

sigma_{d-2} being the area of the unit sphere in R^{d-1}. The u-integral is
smooth apart from the profile breakpoints b (at u = arccosh(b/z)), which become
panel edges. nu1 is tabulated once on a log grid and interpolated with a
monotone cubic in log-log coordinates, so power laws are reproduced exactly.
"""

import threading
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from src.catalog.geometry import sphere_area
from src.catalog.processes import CHECK_GRID, ProcessSpec, RadialLevyDensity
from src.config import get_quadrature_config
from src.errors import ContractError, ProfileInvariantError
from src.utils.quadrature import adaptive_panel_quadrature, gauss_legendre, panel_edges

Z_MIN, Z_MAX = 1e-16, 1e16
U_DECAY = 40.0


class ProjectedDensity:
    """Tabulated nu1 with derivative and tail mass T(z) = int_z^inf nu1"""

    def __init__(self, density: RadialLevyDensity, points_per_decade: Optional[int] = None,
                 rtol: Optional[float] = None):
        config = get_quadrature_config()
        self.density = density
        self.d = density.d
        self.rtol = rtol if rtol is not None else config.radial_rtol
        per_decade = points_per_decade or config.projection_points_per_decade
        decades = np.log10(Z_MAX / Z_MIN)
        self.grid = np.geomspace(Z_MIN, Z_MAX, int(round(decades * per_decade)) + 1)
        self.log_grid = np.log(self.grid)
        self._order = config.gauss_order
        self._lock = threading.Lock()
        self._interpolant = None
        self._slope_derivative = None
        self._tail_table = None
        self._log_values = None
        self.max_error = 0.0

    # -------------------------------------------------------------------------
    # table construction
    # -------------------------------------------------------------------------

    def _u_integral(self, z: float) -> float:
        d = self.d
        breaks = [np.arccosh(b / z) for b in self.density.all_breakpoints if b > z]
        upper = np.arccosh(max(1e4 / z, 1.0)) + U_DECAY
        edges = panel_edges(0.0, upper, breaks, per_unit=2.0)

        def integrand(u):
            log_cosh = u + np.log1p(np.exp(-2.0 * u)) - np.log(2.0)
            weight = log_cosh
            if d > 2:
                log_sinh = u + np.log1p(-np.exp(-2.0 * u)) - np.log(2.0)
                weight = weight + (d - 2) * log_sinh
            with np.errstate(over='ignore', under='ignore'):
                return self.density(z * np.exp(log_cosh)) * np.exp(weight)

        result = adaptive_panel_quadrature(integrand, edges, self._order, rtol=self.rtol,
                                           label=f"projected density at z={z!r}")
        if result.value > 0.0:
            self.max_error = max(self.max_error, result.error / result.value)
        return result.value

    def _build(self):
        if self.d == 1:
            values = self.density(self.grid)
        else:
            const = sphere_area(self.d - 1)
            integrals = np.array([self._u_integral(z) for z in self.grid])
            values = const * self.grid ** (self.d - 1) * integrals
        log_values = np.log(np.maximum(values, 1e-300))
        self._interpolant = PchipInterpolator(self.log_grid, log_values, extrapolate=False)
        self._slope_derivative = self._interpolant.derivative()
        self._log_values = log_values
        self._tail_table = self._build_tail()

    def _ensure(self):
        if self._interpolant is None:
            with self._lock:
                if self._interpolant is None:
                    self._build()

    def _segment_integrals(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """int_lo^hi nu1(z) dz per segment, Gauss–Legendre in log z"""
        x, w = gauss_legendre(8)
        a, b = np.log(lo), np.log(hi)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        t = mid[:, None] + half[:, None] * x[None, :]
        values = self._evaluate_log(t.ravel()).reshape(t.shape)
        return (values * np.exp(t) * w[None, :]).sum(axis=1) * half

    def _far_tail(self) -> float:
        slope = (self._log_values[-1] - self._log_values[-2]) / (self.log_grid[-1] - self.log_grid[-2])
        value = np.exp(self._log_values[-1])
        if value <= 1e-299 or not slope < -1.0:
            return 0.0
        return float(-self.grid[-1] * value / (slope + 1.0))

    def _build_tail(self) -> np.ndarray:
        segments = self._segment_integrals(self.grid[:-1], self.grid[1:])
        tail = np.empty_like(self.grid)
        tail[-1] = self._far_tail()
        tail[:-1] = tail[-1] + np.cumsum(segments[::-1])[::-1]
        return tail

    # -------------------------------------------------------------------------
    # evaluation
    # -------------------------------------------------------------------------

    def _evaluate_log(self, log_z: np.ndarray) -> np.ndarray:
        log_z = np.asarray(log_z, dtype=float)
        inside = self._interpolant(np.clip(log_z, self.log_grid[0], self.log_grid[-1]))
        out = np.exp(inside)
        below = log_z < self.log_grid[0]
        if np.any(below):
            slope = (self._log_values[1] - self._log_values[0]) / (self.log_grid[1] - self.log_grid[0])
            out[below] = np.exp(self._log_values[0] + slope * (log_z[below] - self.log_grid[0]))
        above = log_z > self.log_grid[-1]
        if np.any(above):
            slope = (self._log_values[-1] - self._log_values[-2]) / (self.log_grid[-1] - self.log_grid[-2])
            out[above] = np.exp(self._log_values[-1] + min(slope, 0.0) * (log_z[above] - self.log_grid[-1]))
        out[out <= 1e-299] = 0.0
        return out

    def __call__(self, z) -> np.ndarray:
        self._ensure()
        z = np.asarray(z, dtype=float)
        return self._evaluate_log(np.log(np.maximum(z, 1e-300)))

    def derivative(self, z) -> np.ndarray:
        """nu1'(z) from the log-log slope"""
        self._ensure()
        z = np.asarray(z, dtype=float)
        log_z = np.clip(np.log(z), self.log_grid[0], self.log_grid[-1])
        return self._slope_derivative(log_z) * self(z) / z

    def tail_mass(self, z) -> np.ndarray:
        """T(z) = int_z^inf nu1(t) dt"""
        self._ensure()
        z = np.atleast_1d(np.asarray(z, dtype=float))
        clipped = np.clip(z, self.grid[0], self.grid[-1])
        index = np.clip(np.searchsorted(self.grid, clipped, side='right'), 1, len(self.grid) - 1)
        next_point = self.grid[index]
        out = self._tail_table[index] + self._segment_integrals(clipped, next_point)
        below = z < self.grid[0]
        if np.any(below):
            lower = self._segment_integrals(z[below], np.full(below.sum(), self.grid[0]))
            out[below] = self._tail_table[0] + lower
        out[z > self.grid[-1]] = 0.0
        return out

    def check_monotone(self, grid: np.ndarray = CHECK_GRID) -> np.ndarray:
        values = self(grid)
        increase = values[1:] > values[:-1] * (1.0 + 1e-8) + 1e-300
        if np.any(increase):
            i = int(np.argmax(increase))
            raise ProfileInvariantError(f"nu1 increases between z={grid[i]!r} and z={grid[i + 1]!r}",
                                        pair=(float(grid[i]), float(grid[i + 1])))
        return values


def project_density_1d(spec: ProcessSpec) -> ProjectedDensity:
    """
    First-coordinate marginal density nu1 of a unimodal Lévy measure

    Raises:
        ContractError: d < 2 or no radial Lévy density available
        QuadratureError: the projection integral misses the tolerance
    """
    density = spec.levy_density if isinstance(spec, ProcessSpec) else spec
    if density is None:
        raise ContractError(f"process '{getattr(spec, 'name', spec)}' has no radial Lévy density")
    if density.d < 2:
        raise ContractError(f"projection needs d >= 2, got d={density.d}")
    return ProjectedDensity(density)
