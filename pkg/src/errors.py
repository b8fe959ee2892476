"""
Exception hierarchy for the toolkit.

Flagged numerical outcomes (clamped inversions, degenerate certificates,
violated brackets) are returned as values; the classes below are reserved for
conditions where no meaningful value exists.
"""

from typing import Optional, Tuple


class LevyToolkitError(Exception):
    """Base class for all toolkit errors"""


class SpecError(LevyToolkitError, ValueError):
    """Invalid process parameters, expression grammar or spec document"""


class ContractError(LevyToolkitError, ValueError):
    """An operation was called outside its documented preconditions"""


class UnsupportedSpecError(LevyToolkitError):
    """The requested computation is not available for this process"""


class SingularEvaluationError(LevyToolkitError, ValueError):
    """Evaluation point sits on a kernel singularity"""


class ProfileInvariantError(SpecError):
    """A monotonicity or integrability invariant failed on the check grid"""

    def __init__(self, message: str, pair: Optional[Tuple[float, float]] = None):
        super().__init__(message)
        self.pair = pair


class QuadratureError(LevyToolkitError):
    """Quadrature missed its tolerance; carries the partial value"""

    def __init__(self, message: str, partial: float = float('nan'), error: float = float('nan')):
        super().__init__(f"{message} (partial={partial!r}, error estimate={error!r})")
        self.partial = partial
        self.error = error


class DivergentIntegralError(QuadratureError):
    """The integral diverges (e.g. recurrent potential kernel)"""
