"""
Unified Configuration System for the Lévy Potential Toolkit
===========================================================

Centralized, environment-aware configuration for quadrature tolerances,
evaluation grids, path simulation and the verification experiments.

Usage:
    from src.config import get_config
    config = get_config('testing')  # or 'development', 'production'
"""

import os
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional


@dataclass(frozen=True)
class QuadratureConfig:
    """Numerical quadrature configuration"""
    psi_rtol: float = 1e-8
    kernel_rtol: float = 1e-6
    radial_rtol: float = 1e-8
    gauss_order: int = 16
    panels_per_decade: int = 6
    # Oscillatory integrals: periods summed before the tail formula, and the cap
    initial_periods: int = 64
    period_cap: int = 8192
    projection_points_per_decade: int = 64
    stehfest_order: int = 12


@dataclass(frozen=True)
class GridConfig:
    """Evaluation and checking grids"""
    envelope_points: int = 2048
    envelope_min: float = 1e-6
    envelope_max: float = 1e6
    check_points: int = 512
    ball_points: int = 33
    ball_min: float = 1e-2
    ball_max: float = 1e2
    # WLSC fitting
    beta_count: int = 64
    lambda_max: float = 1e4
    lambda_points_per_decade: int = 10
    scaling_floor: float = 1e-3
    # Subordinator inversion / Stieltjes partitions
    inversion_points: int = 513
    stieltjes_cells: int = 1024


@dataclass(frozen=True)
class SimulationConfig:
    """Monte Carlo path simulation defaults"""
    dt: float = 1e-4
    eps: Optional[float] = None  # None -> min(0.01, r/100)
    max_steps: int = 1_000_000
    n_replicas: int = 100_000
    block_size: int = 2048
    workers: int = 1
    cell_fraction: float = 1.0 / 16.0
    radial_table_points: int = 4096
    censoring_limit: float = 1e-3


@dataclass(frozen=True)
class ExperimentConfig:
    """Verification experiment settings"""
    sigma_rule: float = 3.0
    krylov_safonov_floor: float = 0.01
    harnack_spread_stable: float = 2.0
    harnack_spread_other: float = 3.0
    green_lower_factor: float = 2.0  # used when no certificate gives a usable L
    green_lower_eps: float = 0.5
    green_lower_factor_cap: float = 8.0
    holder_levels: int = 6
    axis_points: int = 7
    harnack_grid: int = 3
    exit_time_band: float = 10.0


@dataclass(frozen=True)
class LoggingConfig:
    """Logging configuration"""
    level: str = 'INFO'
    format: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    file_path: Optional[str] = None  # e.g. 'levy.log' under logs/


_SECTIONS = ('quadrature', 'grids', 'simulation', 'experiments', 'logging')


class Settings:
    """Main settings class that combines all configurations"""

    def __init__(self, environment: str = 'development'):
        self.environment = environment
        self.quadrature = QuadratureConfig()
        self.grids = GridConfig()
        self.simulation = self._get_simulation_config()
        self.experiments = ExperimentConfig()
        self.logging = self._get_logging_config()

        self._apply_overrides(self._load_local_overrides())

    def _get_simulation_config(self) -> SimulationConfig:
        """Environment-specific simulation defaults"""
        if self.environment == 'testing':
            return SimulationConfig(dt=1e-3, n_replicas=2000, block_size=512, max_steps=200_000)
        elif self.environment == 'production':
            return SimulationConfig(workers=int(os.getenv('LEVY_WORKERS', 4)))
        else:  # development
            return SimulationConfig()

    def _get_logging_config(self) -> LoggingConfig:
        if self.environment == 'production':
            return LoggingConfig(file_path=os.getenv('LEVY_LOG_FILE', 'levy.log'))
        if self.environment == 'testing':
            return LoggingConfig(level='WARNING')
        return LoggingConfig(file_path=os.getenv('LEVY_LOG_FILE'))

    @staticmethod
    def _load_local_overrides() -> Dict[str, Dict[str, Any]]:
        """Pick up LEVY_OVERRIDES from config_local.py when present"""
        try:
            from config_local import LEVY_OVERRIDES
            return dict(LEVY_OVERRIDES)
        except ImportError:
            return {}

    def _apply_overrides(self, overrides: Dict[str, Dict[str, Any]]):
        for section, values in overrides.items():
            if section not in _SECTIONS:
                raise KeyError(f"Unknown configuration section: {section}")
            setattr(self, section, replace(getattr(self, section), **values))

    def as_dict(self) -> Dict[str, Dict[str, Any]]:
        return {section: dict(getattr(self, section).__dict__) for section in _SECTIONS}


# Global settings instance
_settings: Optional[Settings] = None


def get_config(environment: str = None) -> Settings:
    """
    Get the global configuration instance

    Args:
        environment: 'development', 'testing', or 'production'

    Returns:
        Settings instance
    """
    global _settings

    if _settings is None or (environment and _settings.environment != environment):
        env = environment or os.getenv('LEVY_ENVIRONMENT', 'development')
        _settings = Settings(env)

    return _settings


def reset_config():
    """Reset the global configuration (useful for testing)"""
    global _settings
    _settings = None


def get_quadrature_config() -> QuadratureConfig:
    return get_config().quadrature


def get_grid_config() -> GridConfig:
    return get_config().grids


def get_simulation_config() -> SimulationConfig:
    return get_config().simulation


def get_experiment_config() -> ExperimentConfig:
    return get_config().experiments
