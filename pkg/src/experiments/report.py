"""
Experiment reports.

A report is plain data: the spec fingerprint, the full run configuration, the
named result tables, a verdict and free-text notes. Serialization is
canonical (sorted keys, repr-exact floats, non-finite numbers as null) so an
identical run reproduces the report byte for byte.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

PASS = 'pass'
FAIL = 'fail'
INCONCLUSIVE = 'inconclusive'
VERDICTS = (PASS, FAIL, INCONCLUSIVE)

# CLI exit code per verdict
EXIT_CODES = {PASS: 0, FAIL: 2, INCONCLUSIVE: 3}


def _plain(value: Any) -> Any:
    """JSON-ready copy of ``value`` (numpy scalars unwrapped, NaN/inf -> None)"""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, pd.DataFrame):
        return table_payload('table', value)
    return str(value)


def table_payload(name: str, frame: pd.DataFrame) -> Dict[str, Any]:
    return {'name': name, 'columns': [str(column) for column in frame.columns],
            'rows': [_plain(list(row)) for row in frame.itertuples(index=False, name=None)]}


def combine_verdicts(verdicts: List[str]) -> str:
    """fail beats inconclusive beats pass"""
    if FAIL in verdicts:
        return FAIL
    if INCONCLUSIVE in verdicts or not verdicts:
        return INCONCLUSIVE
    return PASS


@dataclass
class ExperimentReport:
    experiment: str
    spec_fingerprint: str
    spec: Dict[str, Any]
    config: Dict[str, Any]
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    verdict: str = INCONCLUSIVE
    notes: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'experiment': self.experiment,
            'spec_fingerprint': self.spec_fingerprint,
            'spec': _plain(self.spec),
            'config': _plain(self.config),
            'tables': [table_payload(name, frame) for name, frame in self.tables.items()],
            'verdict': self.verdict,
            'notes': list(self.notes),
            'summary': _plain(self.summary),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n", encoding='utf-8')
        return path

    def table(self, name: str) -> Optional[pd.DataFrame]:
        return self.tables.get(name)
