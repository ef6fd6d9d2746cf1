"""Exception hierarchy shared by the laboratory modules"""

from typing import Optional


class LabError(Exception):
    """Root of every error raised by the laboratory"""


class BasisMismatchError(LabError, ValueError):
    """Operands live on different bases or have the wrong mode count"""


class ParameterError(LabError, ValueError):
    """A precondition on physical or numerical parameters is violated"""


class NotHermitianError(ParameterError):
    """An operator expected to be Hermitian is not"""


class TruncationError(LabError):
    """A constructed state carries too much weight at the top of the cutoff"""

    def __init__(self, message: str, tail_weight: float, cutoff: int):
        super().__init__(message)
        self.tail_weight = tail_weight
        self.cutoff = cutoff


class DimensionLimitError(LabError):
    """A requested basis exceeds the configured resource limits"""

    def __init__(self, message: str, required: int, limit: Optional[int] = None):
        super().__init__(message)
        self.required = required
        self.limit = limit


class DecompositionError(LabError):
    """A state cannot be decomposed onto the squeezed-state candidates"""
