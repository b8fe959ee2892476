"""
Shared plumbing of the Monte Carlo verification experiments.
"""

from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from src.catalog.processes import ProcessSpec
from src.catalog.spec_io import spec_fingerprint
from src.config import get_experiment_config
from src.experiments.report import ExperimentReport
from src.mc.records import PathConfig
from src.mc.simulation import PathSimulator
from src.utils.logging_utils import setup_logger


class VerificationExperiment:
    """
    Base class: owns the simulator, the sigma rule and the report skeleton

    Subclasses implement ``run(**kwargs) -> ExperimentReport`` and draw a fresh
    stream index per simulated starting point through ``next_stream`` so every
    estimate in a report is independent and the whole report is reproducible.
    """
    name = 'experiment'

    def __init__(self, spec: ProcessSpec, config: Optional[PathConfig] = None):
        self.spec = spec
        self.d = spec.d
        self.config = config or PathConfig.from_config()
        self.settings = get_experiment_config()
        self.sigma = self.settings.sigma_rule
        self.simulator = PathSimulator(spec, self.config)
        self.logger = setup_logger(type(self).__name__)
        self._stream = 0
        self.green_factor = None

    def next_stream(self) -> int:
        self._stream += 1
        return self._stream

    def r0(self, r: float) -> float:
        """Radius of the inner ball: r / (2L + 1)"""
        if self.green_factor is None:
            self.green_factor = self.simulator.green_lower_factor()
        return self.green_factor.inner_radius(r)

    def axis_point(self, t: float, axis: int = 0) -> np.ndarray:
        point = np.zeros(self.d)
        point[axis] = t
        return point

    def report(self, tables: Dict[str, pd.DataFrame], verdict: str, notes: List[str],
               summary: Dict[str, Any], parameters: Dict[str, Any]) -> ExperimentReport:
        config = {'path': self.config.to_dict(), 'parameters': parameters,
                  'sigma_rule': self.sigma}
        if self.green_factor is not None:
            config['green_lower_factor'] = self.green_factor.to_dict()
        summary = dict(summary)
        summary['simulation'] = {key: self.simulator.stats[key] for key in sorted(self.simulator.stats)}
        icon = {'pass': '✅', 'fail': '❌'}.get(verdict, '⚠️')
        self.logger.info(f"{icon} {self.name} on '{self.spec.name}': {verdict}")
        return ExperimentReport(experiment=self.name, spec_fingerprint=spec_fingerprint(self.spec),
                                spec=self.spec.document, config=config, tables=tables, verdict=verdict,
                                notes=notes, summary=summary)


def combined_se(*errors) -> np.ndarray:
    return np.sqrt(sum(np.asarray(error, dtype=float) ** 2 for error in errors))
