"""
Exterior regions F of B_r (for exit-distribution indicators) and interior
targets A (for hitting problems).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.errors import ContractError

ANNULUS_OUTER = 4.0
EXTERIOR_CELL_BUDGET = 4096
# exit positions projected onto the sphere carry rounding error
BOUNDARY_RTOL = 1e-12


class ExteriorRegion:
    """A measurable subset of the complement of B_r, given by an indicator"""
    name = 'region'

    def contains(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


@dataclass(repr=False)
class HalfSpaceCap(ExteriorRegion):
    """{z : sign * z_axis > 0, |z| >= r}"""
    r: float
    axis: int = 0
    sign: float = 1.0

    @property
    def name(self) -> str:
        return f"cap{'+' if self.sign > 0 else '-'}{self.axis}"

    def contains(self, points):
        points = np.atleast_2d(points)
        outside = np.linalg.norm(points, axis=1) >= self.r * (1.0 - BOUNDARY_RTOL)
        return (self.sign * points[:, self.axis] > 0.0) & outside


@dataclass(repr=False)
class Shell(ExteriorRegion):
    """{z : k r <= |z| < (k + 1) r}, k >= 1"""
    r: float
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ContractError(f"shell index must be >= 1, got {self.k}")

    @property
    def name(self) -> str:
        return f"shell{self.k}"

    def contains(self, points):
        norms = np.linalg.norm(np.atleast_2d(points), axis=1)
        return (norms >= self.k * self.r * (1.0 - BOUNDARY_RTOL)) & (norms < (self.k + 1) * self.r)


@dataclass(repr=False)
class Tail(ExteriorRegion):
    """{z : |z| >= rho}"""
    rho: float

    @property
    def name(self) -> str:
        return f"tail{self.rho:g}"

    def contains(self, points):
        return np.linalg.norm(np.atleast_2d(points), axis=1) >= self.rho


@dataclass(repr=False)
class FullComplement(ExteriorRegion):
    r: float
    name = 'complement'

    def contains(self, points):
        return np.linalg.norm(np.atleast_2d(points), axis=1) >= self.r * (1.0 - BOUNDARY_RTOL)


@dataclass(frozen=True)
class BallTarget:
    """Closed ball A = {|z - center| <= radius}"""
    center: np.ndarray
    radius: float

    def contains(self, points) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.linalg.norm(points - np.asarray(self.center, dtype=float), axis=1) <= self.radius

    def inside(self, r0: float) -> bool:
        """A is contained in the closed ball of radius r0"""
        return float(np.linalg.norm(self.center)) + self.radius <= r0 * (1.0 + 1e-12)

    @property
    def d(self) -> int:
        return int(np.asarray(self.center).size)


class AnnulusPartition:
    """
    Cubic cells of [-4r, 4r]^d with centers in {r < |c| <= 4r}, plus the tail {|z| > 4r}

    Default side 8r / max(4, floor(4096^(1/d))) (r/2 in d = 3).
    """

    def __init__(self, d: int, r: float, side: Optional[float] = None):
        if side is None:
            side = 2.0 * ANNULUS_OUTER * r / max(4, int(np.floor(EXTERIOR_CELL_BUDGET ** (1.0 / d) + 1e-9)))
        self.d, self.r, self.side = d, r, side
        self.per_axis = int(round(2.0 * ANNULUS_OUTER * r / side))
        axis = -ANNULUS_OUTER * r + side * (np.arange(self.per_axis) + 0.5)
        mesh = np.stack(np.meshgrid(*([axis] * d), indexing='ij'), axis=-1).reshape(-1, d)
        norms = np.linalg.norm(mesh, axis=1)
        keep = (norms > r) & (norms <= ANNULUS_OUTER * r)
        self.centers = mesh[keep]
        self._lookup = np.full(mesh.shape[0], -1)
        self._lookup[np.flatnonzero(keep)] = np.arange(keep.sum())

    @property
    def n_cells(self) -> int:
        return int(self.centers.shape[0])

    @property
    def tail_label(self) -> int:
        return self.n_cells

    @property
    def volume(self) -> float:
        return self.side ** self.d

    def assign(self, points: np.ndarray) -> np.ndarray:
        """Cell row per point; ``tail_label`` for |z| > 4r, -1 when no cell holds the point"""
        points = np.atleast_2d(points)
        labels = np.full(points.shape[0], -1)
        norms = np.linalg.norm(points, axis=1)
        labels[norms > ANNULUS_OUTER * self.r] = self.tail_label
        index = np.floor((points + ANNULUS_OUTER * self.r) / self.side).astype(int)
        valid = np.all((index >= 0) & (index < self.per_axis), axis=1) & (labels < 0)
        flat = np.ravel_multi_index(index[valid].T, (self.per_axis,) * self.d)
        labels[valid] = self._lookup[flat]
        return labels

    def mirror(self) -> np.ndarray:
        """Row of the cell -Z for every cell Z"""
        return self.assign(-self.centers)
