"""
Exception hierarchy for spatialtap

Every error carries the process exit code the CLI reports for it:

    2  configuration error
    3  data error
    4  numeric failure
"""

from typing import Optional


class SpatialTapError(Exception):
    """Base class for all spatialtap errors"""

    exit_code = 1


# ============================================================================
# Configuration (exit code 2)
# ============================================================================

class ConfigError(SpatialTapError, ValueError):
    """Invalid preset, framing, option value or unknown config key"""

    exit_code = 2


# ============================================================================
# Data (exit code 3)
# ============================================================================

class DataError(SpatialTapError):
    exit_code = 3


class GeometryError(DataError, ValueError):
    """Position outside the room, array/channel mismatch, model/dataset mismatch"""


class ConstraintInfeasibleError(DataError):
    """Rejection sampling gave up; `constraint` names what could not be met"""

    def __init__(self, constraint: str, attempts: int):
        super().__init__(f"could not satisfy '{constraint}' after {attempts} attempts")
        self.constraint = constraint
        self.attempts = attempts


class SampleRateError(DataError, ValueError):
    pass


class SignalLengthError(DataError, ValueError):
    pass


class UndefinedSNRError(DataError, ValueError):
    """A finite SNR was requested for a silent signal"""


class CorpusExhaustedError(DataError):
    pass


class ManifestError(DataError):
    pass


class ShapeError(DataError, ValueError):
    pass


class WorkspaceLockedError(DataError):
    pass


# ============================================================================
# Numeric (exit code 4)
# ============================================================================

class NumericError(SpatialTapError, ArithmeticError):
    exit_code = 4


class NumericInstabilityError(NumericError):
    """Recurrent state became non-finite"""


class DivergenceError(NumericError):
    """Training loss became non-finite"""

    def __init__(self, step: int, checkpoint_path: Optional[str] = None):
        msg = f"non-finite loss at step {step}"
        if checkpoint_path:
            msg += f"; last good checkpoint: {checkpoint_path}"
        super().__init__(msg)
        self.step = step
        self.checkpoint_path = checkpoint_path
