"""
Simulation configuration and result records.

Exit events are stored columnar (``ExitBatch``) and expanded to
``ExitRecord`` objects on demand; occupation histograms keep per-block cell
times so batch-means standard errors are available downstream.
"""

from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.config import get_simulation_config
from src.errors import ContractError


@dataclass(frozen=True)
class PathConfig:
    """Discretization and replica settings of a simulation run"""
    dt: float = 1e-4
    eps: Optional[float] = None
    max_steps: int = 1_000_000
    seed: int = 0
    n_replicas: int = 100_000
    block_size: int = 2048
    workers: int = 1
    cell_fraction: float = 1.0 / 16.0

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ContractError(f"dt must be > 0, got {self.dt!r}")
        if self.eps is not None and not self.eps > 0.0:
            raise ContractError(f"eps must be > 0, got {self.eps!r}")
        if self.n_replicas < 1 or self.max_steps < 1 or self.block_size < 1 or self.workers < 1:
            raise ContractError("n_replicas, max_steps, block_size and workers must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ContractError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @classmethod
    def from_config(cls, **overrides) -> 'PathConfig':
        """Defaults from the active SimulationConfig, then ``overrides`` (None values ignored)"""
        simulation = get_simulation_config()
        values = {'dt': simulation.dt, 'eps': simulation.eps, 'max_steps': simulation.max_steps,
                  'n_replicas': simulation.n_replicas, 'block_size': simulation.block_size,
                  'workers': simulation.workers, 'cell_fraction': simulation.cell_fraction}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def cutoff(self, r: float) -> float:
        """Small-jump cutoff: eps, or min(0.01, r/100) when unset"""
        return self.eps if self.eps is not None else min(0.01, r / 100.0)

    def with_(self, **changes) -> 'PathConfig':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ExitRecord:
    tau: float
    exit_position: np.ndarray
    pre_exit_position: np.ndarray
    steps: int
    jumped: bool
    censored: bool = False


def _axis_names(d: int, prefix: str) -> List[str]:
    if d <= 3:
        return [f"{prefix}{axis}" for axis in 'xyz'[:d]]
    return [f"{prefix}{i}" for i in range(d)]


@dataclass
class ExitBatch:
    """First-exit events of N replicas, one row per replica"""
    r: float
    x0: np.ndarray
    taus: np.ndarray
    exit_positions: np.ndarray
    pre_exit_positions: np.ndarray
    steps: np.ndarray
    jumped: np.ndarray
    censored: np.ndarray
    hit: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.taus.size)

    @property
    def d(self) -> int:
        return int(self.exit_positions.shape[1])

    @property
    def completed(self) -> np.ndarray:
        return ~self.censored

    @property
    def n_censored(self) -> int:
        return int(self.censored.sum())

    @property
    def censoring_rate(self) -> float:
        return self.n_censored / self.n

    @property
    def mean_tau(self) -> float:
        """Mean exit time over uncensored replicas"""
        return float(self.taus[self.completed].mean())

    @property
    def tau_stderr(self) -> float:
        taus = self.taus[self.completed]
        return float(taus.std(ddof=1) / np.sqrt(taus.size)) if taus.size > 1 else float('nan')

    @property
    def jump_fraction(self) -> float:
        return float(self.jumped[self.completed].mean())

    def proportion(self, mask: np.ndarray) -> tuple:
        """(estimate, binomial stderr) of a per-replica indicator over uncensored replicas"""
        values = np.asarray(mask, dtype=bool)[self.completed]
        p = float(values.mean())
        return p, float(np.sqrt(max(p * (1.0 - p), 0.0) / values.size))

    def records(self) -> Iterator[ExitRecord]:
        for i in range(self.n):
            yield ExitRecord(tau=float(self.taus[i]), exit_position=self.exit_positions[i].copy(),
                             pre_exit_position=self.pre_exit_positions[i].copy(), steps=int(self.steps[i]),
                             jumped=bool(self.jumped[i]), censored=bool(self.censored[i]))

    def to_frame(self) -> pd.DataFrame:
        """exits schema: replica, tau, exit_x.., jumped (then steps, censored)"""
        frame = pd.DataFrame({'replica': np.arange(self.n), 'tau': self.taus})
        for i, name in enumerate(_axis_names(self.d, 'exit_')):
            frame[name] = self.exit_positions[:, i]
        frame['jumped'] = self.jumped
        frame['steps'] = self.steps
        frame['censored'] = self.censored
        return frame

    @classmethod
    def concat(cls, batches: Sequence['ExitBatch']) -> 'ExitBatch':
        first = batches[0]
        hits = None if first.hit is None else np.concatenate([batch.hit for batch in batches])
        return cls(r=first.r, x0=first.x0,
                   taus=np.concatenate([batch.taus for batch in batches]),
                   exit_positions=np.vstack([batch.exit_positions for batch in batches]),
                   pre_exit_positions=np.vstack([batch.pre_exit_positions for batch in batches]),
                   steps=np.concatenate([batch.steps for batch in batches]),
                   jumped=np.concatenate([batch.jumped for batch in batches]),
                   censored=np.concatenate([batch.censored for batch in batches]),
                   hit=hits)


@dataclass
class OccupationHistogram:
    """
    Time spent by N replicas in the cubic cells of B_r, divided by N

    Cell k (integer vector) covers [k h, (k + 1) h) coordinate-wise; only visited
    cells are stored. ``block_time[b, c]`` is the time of block b in cell c.
    """
    r: float
    x0: np.ndarray
    side: float
    index: np.ndarray
    block_time: np.ndarray
    block_counts: np.ndarray
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.block_counts.sum())

    @property
    def d(self) -> int:
        return int(self.index.shape[1])

    @property
    def centers(self) -> np.ndarray:
        return (self.index + 0.5) * self.side

    @property
    def cell_volume(self) -> float:
        return self.side ** self.d

    @property
    def mass(self) -> np.ndarray:
        return self.block_time.sum(axis=0) / self.n

    @property
    def total_mass(self) -> float:
        return float(self.block_time.sum() / self.n)

    @property
    def block_masses(self) -> np.ndarray:
        """Per-block occupation means, shape (blocks, cells)"""
        return self.block_time / self.block_counts[:, None]

    @property
    def block_weights(self) -> np.ndarray:
        return self.block_counts / self.n

    @property
    def stderr(self) -> np.ndarray:
        """Batch-means standard error per cell (NaN with a single block)"""
        blocks = self.block_counts.size
        if blocks < 2:
            return np.full(self.index.shape[0], np.nan)
        weights = self.block_weights
        deviations = self.block_masses - self.mass
        spread = (weights[:, None] * deviations ** 2).sum(axis=0) * blocks / (blocks - 1)
        return np.sqrt(spread / blocks)

    def cell_of(self, point) -> Optional[int]:
        """Row of the cell containing ``point`` (None when never visited)"""
        key = np.floor(np.asarray(point, dtype=float) / self.side).astype(int)
        rows = np.flatnonzero(np.all(self.index == key, axis=1))
        return int(rows[0]) if rows.size else None

    def to_frame(self) -> pd.DataFrame:
        """occupation schema: cell_index, cx.., mass (then stderr)"""
        frame = pd.DataFrame({'cell_index': np.arange(self.index.shape[0])})
        centers = self.centers
        for i, name in enumerate(_axis_names(self.d, 'c')):
            frame[name] = centers[:, i]
        frame['mass'] = self.mass
        frame['stderr'] = self.stderr
        return frame
