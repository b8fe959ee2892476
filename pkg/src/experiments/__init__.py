"""
Empirical verifications built on the Monte Carlo engine, and the analytic
inequality suite behind ``levy verify``.
"""

from src.experiments.base import VerificationExperiment
from src.experiments.exits import (
    ExitComparabilityExperiment,
    ExitTimeScalingExperiment,
    JumpProbabilityExperiment,
    exit_comparability,
    exit_time_scaling,
    jump_probability,
)
from src.experiments.green import GreenFunctionExperiment, green_function_bounds
from src.experiments.harmonic import HarnackExperiment, HolderExperiment, harnack_ratio, holder_exponent
from src.experiments.hitting import KrylovSafonovExperiment, krylov_safonov
from src.experiments.inequality_suite import InequalitySuite
from src.experiments.report import EXIT_CODES, FAIL, INCONCLUSIVE, PASS, ExperimentReport, combine_verdicts

# CLI name -> experiment class
EXPERIMENTS = {
    'harnack': HarnackExperiment,
    'ks': KrylovSafonovExperiment,
    'exitcomp': ExitComparabilityExperiment,
    'holder': HolderExperiment,
    'jump': JumpProbabilityExperiment,
    'exittime': ExitTimeScalingExperiment,
    'green': GreenFunctionExperiment,
}

__all__ = [
    'EXIT_CODES', 'EXPERIMENTS', 'FAIL', 'INCONCLUSIVE', 'PASS',
    'ExitComparabilityExperiment', 'ExitTimeScalingExperiment', 'ExperimentReport', 'GreenFunctionExperiment',
    'HarnackExperiment', 'HolderExperiment', 'InequalitySuite', 'JumpProbabilityExperiment',
    'KrylovSafonovExperiment', 'VerificationExperiment', 'combine_verdicts', 'exit_comparability',
    'exit_time_scaling', 'green_function_bounds', 'harnack_ratio', 'holder_exponent', 'jump_probability',
    'krylov_safonov',
]
