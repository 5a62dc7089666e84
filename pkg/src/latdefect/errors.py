"""Exception types shared across the package."""

from __future__ import annotations


class LatticeError(Exception):
    """Base class for every error raised by latdefect."""


class NotPrimitive(LatticeError, ValueError):
    pass


class ZeroVector(LatticeError, ValueError):
    pass


class NotUnimodular(LatticeError, ValueError):
    pass


class BudgetExhausted(LatticeError):
    """Enumeration stopped on its node budget; carries the unexpanded frontier."""

    def __init__(self, message: str, frontier=None, yielded: int = 0):
        super().__init__(message)
        self.frontier = frontier if frontier is not None else []
        self.yielded = yielded


class DivergenceSuspected(LatticeError):
    """Partial sums failed the Cauchy check; ``report`` holds the last SumReport."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class LevelTooDeep(LatticeError, ValueError):
    pass


class Uncertified(LatticeError):
    """Lattice search cap reached before the minimum of F could be certified."""

    def __init__(self, message: str, value=None):
        super().__init__(message)
        self.value = value


class VertexOutsideDisc(LatticeError):
    pass


class EdgeValidationFailed(LatticeError):
    def __init__(self, message: str, edge=None):
        super().__init__(message)
        self.edge = edge


class UnsupportedFormat(LatticeError, ValueError):
    pass


class VertexCheckFailed(LatticeError):
    """F at a solved vertex disagrees with its defect or misses one of its planes."""
