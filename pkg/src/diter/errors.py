"""Exception types shared across the package."""

from __future__ import annotations


class DiterError(Exception):
    """Base class for all errors raised by :mod:`diter`."""


class DimensionError(DiterError, ValueError):
    pass


class IndexOutOfRange(DiterError, IndexError):
    def __init__(self, index: int, n: int):
        super().__init__(f"node index {index} outside [1..{n}]")
        self.index = index
        self.n = n


class ZeroDiagonal(DiterError, ValueError):
    def __init__(self, i: int):
        super().__init__(f"diagonal entry a_{i}{i} is zero")
        self.i = i


class SingularDiagonal(DiterError, ValueError):
    def __init__(self, i: int):
        super().__init__(f"diagonal entry p_{i}{i} equals 1; cannot eliminate")
        self.i = i


class SingularMatrix(DiterError, ValueError):
    pass


class ParseError(DiterError, ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ConfigError(ParseError):
    pass


class NotConverged(DiterError, RuntimeError):
    """Raised when an iteration exhausts its budget above tolerance.

    ``payload`` carries whatever partial result the caller produced (a trace,
    a simulation result) so it can still be reported.
    """

    def __init__(self, steps: float, residual: float, payload=None):
        super().__init__(f"not converged after {steps} steps (residual {residual:.3e})")
        self.steps = steps
        self.residual = residual
        self.payload = payload


class OwnershipViolation(DiterError, RuntimeError):
    def __init__(self, worker: int, node: int):
        super().__init__(f"worker {worker} received an entry for node {node} it does not expect")
        self.worker = worker
        self.node = node


class UnknownExample(DiterError, KeyError):
    pass


class UnknownMethod(DiterError, KeyError):
    pass
