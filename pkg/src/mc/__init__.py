"""
Monte Carlo path simulation: increment samplers, first-exit batches,
harmonic and hitting estimators, and occupation histograms of B_r.
"""

from src.mc.records import ExitBatch, ExitRecord, OccupationHistogram, PathConfig
from src.mc.regions import (
    ANNULUS_OUTER,
    AnnulusPartition,
    BallTarget,
    ExteriorRegion,
    FullComplement,
    HalfSpaceCap,
    Shell,
    Tail,
)
from src.mc.samplers import (
    Increment,
    IncrementSampler,
    RadialJumpTable,
    increment_sampler,
    sample_increment,
    stable_subordinator,
    tempered_subordinator,
)
from src.mc.simulation import (
    HittingEstimate,
    PathSimulator,
    estimate_harmonic,
    estimate_hitting_before_exit,
    exit_tail_reference,
    exit_time_reference,
    occupation,
    relative_volume,
    simulate_exit,
)

__all__ = [
    'ANNULUS_OUTER', 'AnnulusPartition', 'BallTarget', 'ExitBatch', 'ExitRecord', 'ExteriorRegion',
    'FullComplement', 'HalfSpaceCap', 'HittingEstimate', 'Increment', 'IncrementSampler',
    'OccupationHistogram', 'PathConfig', 'PathSimulator', 'RadialJumpTable', 'Shell', 'Tail',
    'estimate_harmonic', 'estimate_hitting_before_exit', 'exit_tail_reference', 'exit_time_reference',
    'increment_sampler', 'occupation', 'relative_volume', 'sample_increment', 'simulate_exit',
    'stable_subordinator', 'tempered_subordinator',
]
