"""
Panel Gauss–Legendre quadrature on logarithmic grids.

Radial integrands in this project span many decades (power-law singularities
at the origin, heavy or exponential tails), so every integral is taken in the
variable t = log s on panels of fixed log-width, with known breakpoints as
panel edges. Each panel is integrated with an order-16 rule and an embedded
order-8 rule; the summed difference is the reported error estimate.

Infinite or zero endpoints are truncated at ``scale * 10**(+-span)`` and the
remainder is added by a local power-law fit of the integrand. A power-law
exponent that makes the remainder infinite raises ``DivergentIntegralError``.

One-off scalar integrals go through ``adaptive_integral`` (QUADPACK) instead.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Tuple

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from src.errors import DivergentIntegralError, QuadratureError

ArrayFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    nodes: int


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the Gauss–Legendre rule on [-1, 1]"""
    nodes, weights = roots_legendre(order)
    return nodes, weights


def panel_edges(lo: float, hi: float, breakpoints: Iterable[float] = (), per_unit: float = 6.0) -> np.ndarray:
    """Uniform edges on [lo, hi] (at least one panel) merged with interior breakpoints"""
    count = max(1, int(np.ceil((hi - lo) * per_unit)))
    edges = np.linspace(lo, hi, count + 1)
    inner = [b for b in breakpoints if lo < b < hi]
    if inner:
        edges = np.union1d(edges, np.asarray(inner, dtype=float))
    return edges


def panel_rule(edges: np.ndarray, order: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre nodes/weights for the given panel edges"""
    x, w = gauss_legendre(order)
    a, b = edges[:-1], edges[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def panel_quadrature(func: ArrayFunc, edges: np.ndarray, order: int = 16) -> QuadratureResult:
    """Integrate ``func`` over the panels, with an embedded half-order error estimate"""
    edges = np.asarray(edges, dtype=float)
    n_panels = len(edges) - 1
    fine_nodes, fine_weights = panel_rule(edges, order)
    coarse_nodes, coarse_weights = panel_rule(edges, order // 2)
    fine = (func(fine_nodes) * fine_weights).reshape(n_panels, order).sum(axis=1)
    coarse = (func(coarse_nodes) * coarse_weights).reshape(n_panels, order // 2).sum(axis=1)
    return QuadratureResult(
        value=float(fine.sum()),
        error=float(np.abs(fine - coarse).sum()),
        nodes=fine_nodes.size + coarse_nodes.size,
    )


def adaptive_panel_quadrature(func: ArrayFunc, edges: np.ndarray, order: int = 16, rtol: float = 1e-8,
                              atol: float = 1e-300, max_rounds: int = 20,
                              label: str = 'panel quadrature') -> QuadratureResult:
    """
    Panel quadrature that bisects panels whose embedded error estimate is too large

    Raises:
        QuadratureError: still above tolerance after ``max_rounds`` bisections
    """
    edges = np.asarray(edges, dtype=float)
    x16, w16 = gauss_legendre(order)
    x8, w8 = gauss_legendre(order // 2)
    done_value, done_error, nodes = 0.0, 0.0, 0
    lo, hi = edges[:-1], edges[1:]

    for _ in range(max_rounds):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        fine = (func((mid[:, None] + half[:, None] * x16).ravel()).reshape(-1, order) * w16).sum(axis=1) * half
        coarse = (func((mid[:, None] + half[:, None] * x8).ravel()).reshape(-1, order // 2) * w8).sum(axis=1) * half
        nodes += lo.size * (order + order // 2)
        error = np.abs(fine - coarse)
        total = done_value + fine.sum()
        bad = error > np.maximum(0.1 * rtol * abs(total), atol / max(lo.size, 1))
        done_value += float(fine[~bad].sum())
        done_error += float(error[~bad].sum())
        if not np.any(bad):
            return QuadratureResult(value=done_value, error=done_error, nodes=nodes)
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])

    partial = done_value + float(fine[bad].sum())
    error = done_error + float(error[bad].sum())
    if error <= max(rtol * abs(partial), atol):
        return QuadratureResult(value=partial, error=error, nodes=nodes)
    raise QuadratureError(label, partial=partial, error=error)


def log_rule(lo: float, hi: float, breakpoints: Iterable[float] = (), per_decade: int = 6,
             order: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes s_j and weights w_j with sum w_j f(s_j) ~ int_lo^hi f(s) ds (0 < lo < hi)"""
    t_breaks = [np.log(b) for b in breakpoints if lo < b < hi]
    edges = panel_edges(np.log(lo), np.log(hi), t_breaks, per_unit=per_decade / np.log(10.0))
    t, w = panel_rule(edges, order)
    s = np.exp(t)
    return s, w * s


def log_quadrature(func: ArrayFunc, lo: float, hi: float, breakpoints: Iterable[float] = (),
                   per_decade: int = 6, order: int = 16) -> QuadratureResult:
    """int_lo^hi func(s) ds on log panels (0 < lo < hi)"""
    t_breaks = [np.log(b) for b in breakpoints if lo < b < hi]
    edges = panel_edges(np.log(lo), np.log(hi), t_breaks, per_unit=per_decade / np.log(10.0))

    def integrand(t):
        s = np.exp(t)
        return func(s) * s

    return panel_quadrature(integrand, edges, order)


def _power_law_slope(func: ArrayFunc, point: float, step: float) -> Tuple[float, float]:
    values = func(np.array([point, point * np.exp(step)]))
    f0, f1 = float(values[0]), float(values[1])
    if f0 <= 0.0 or f1 <= 0.0:
        return 0.0, np.nan
    return f0, np.log(f1 / f0) / step


def radial_integral(func: ArrayFunc, lower: float = 0.0, upper: float = np.inf, *,
                    scale: float = 1.0, breakpoints: Iterable[float] = (), rtol: float = 1e-8,
                    atol: float = 0.0, span: float = 14.0, per_decade: int = 6,
                    order: int = 16, label: str = 'radial integral') -> QuadratureResult:
    """
    int_lower^upper func(s) ds for a non-negative integrand on (0, inf)

    Args:
        func: vectorized non-negative integrand
        lower, upper: limits; 0 and inf are handled by power-law end corrections
        scale: characteristic size used to place truncation points
        breakpoints: known discontinuities or kinks, used as panel edges
        rtol, atol: tolerance on the embedded error estimate

    Returns:
        QuadratureResult

    Raises:
        DivergentIntegralError: the end behaviour is not integrable
        QuadratureError: the error estimate misses the tolerance
    """
    lo = lower if lower > 0.0 else scale * 10.0 ** (-span)
    if np.isfinite(upper):
        hi = upper
    else:
        hi = max(scale, lower) * 10.0 ** span
    if not hi > lo:
        return QuadratureResult(0.0, 0.0, 0)

    core = log_quadrature(func, lo, hi, breakpoints, per_decade, order)
    value, error = core.value, core.error

    if lower <= 0.0:
        f0, slope = _power_law_slope(func, lo, 0.5)
        if f0 > 0.0 and np.isfinite(slope):
            if slope <= -1.0:
                raise DivergentIntegralError(f"{label}: non-integrable at 0", partial=value, error=np.inf)
            value += lo * f0 / (slope + 1.0)

    if not np.isfinite(upper):
        f0, slope = _power_law_slope(func, hi, 0.5)
        if f0 > 0.0 and np.isfinite(slope):
            if slope >= -1.0:
                if hi * f0 > 1e-15 * abs(value):
                    raise DivergentIntegralError(f"{label}: non-integrable at infinity", partial=value,
                                                 error=np.inf)
            else:
                value += -hi * f0 / (slope + 1.0)

    if error > max(rtol * abs(value), atol):
        raise QuadratureError(label, partial=value, error=error)
    return QuadratureResult(value=float(value), error=float(error), nodes=core.nodes + 4)


def adaptive_integral(func: ArrayFunc, lower: float, upper: float, *, points: Iterable[float] = (),
                      rtol: float = 1e-8, atol: float = 0.0, limit: int = 200,
                      label: str = 'adaptive integral') -> QuadratureResult:
    """
    int_lower^upper func(s) ds by QUADPACK (``scipy.integrate.quad``)

    For scalar integrals off the vectorized paths. ``points`` are passed as
    breakpoints on finite intervals and ignored on infinite ones.

    Raises:
        QuadratureError: QUADPACK reports trouble and the error estimate misses the tolerance
    """
    def scalar(s):
        return float(np.atleast_1d(func(np.array([s], dtype=float)))[0])

    options = {}
    inner = sorted(p for p in points if lower < p < upper)
    if inner and np.isfinite(lower) and np.isfinite(upper):
        options['points'] = inner
    result = integrate.quad(scalar, lower, upper, epsabs=atol, epsrel=max(rtol, 1e-13), limit=limit,
                            full_output=1, **options)
    value, error, info = result[0], result[1], result[2]
    if len(result) > 3 and error > max(rtol * abs(value), atol):
        raise QuadratureError(label, partial=value, error=error)
    return QuadratureResult(value=float(value), error=float(error), nodes=int(info['neval']))
