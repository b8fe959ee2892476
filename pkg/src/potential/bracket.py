"""Two-sided bounds with an optional point estimate."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

BRACKET_RTOL = 1e-12


@dataclass
class PotentialBracket:
    lower: Optional[float]
    upper: Optional[float]
    estimate: Optional[float] = None
    constants_used: Dict[str, float] = field(default_factory=dict)
    method: str = 'bracket'
    notes: str = ''

    @property
    def violated(self) -> bool:
        """lower <= estimate <= upper fails (up to rounding), or lower > upper"""
        slack = BRACKET_RTOL
        if self.lower is not None and self.upper is not None and self.lower > self.upper * (1 + slack):
            return True
        if self.estimate is None or not np.isfinite(self.estimate):
            return False
        if self.lower is not None and self.estimate < self.lower * (1 - slack):
            return True
        if self.upper is not None and self.estimate > self.upper * (1 + slack):
            return True
        return False

    def row(self, at: float) -> Dict[str, Any]:
        """CSV row: r_or_x, lower, estimate, upper, violated, method"""
        return {'r_or_x': at, 'lower': self.lower, 'estimate': self.estimate, 'upper': self.upper,
                'violated': self.violated, 'method': self.method}
