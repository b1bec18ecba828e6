"""Reference solvers: dense Gaussian elimination, Jacobi and Gauss-Seidel.

All traces are indexed by scalar-update count so methods that touch one node
per step and methods that touch all ``n`` nodes per sweep line up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from diter.engine import init_state, diffuse, make_strategy
from diter.errors import DimensionError, SingularMatrix
from diter.sparse import LinearSystem, SparseMatrix, to_a_form


@dataclass(frozen=True)
class TracePoint:
    sweep: int
    error: float
    updates: int


IterTrace = list[TracePoint]


def direct_solve(system: LinearSystem, pivot_tol: float = 1e-13) -> np.ndarray:
    """Gaussian elimination with partial pivoting on the dense matrix.

    P-form systems are converted to ``(I - P) X = B`` first.
    """
    system = to_a_form(system)
    a = system.matrix.to_dense()
    b = np.array(system.rhs, dtype=np.float64)
    n = a.shape[0]
    scale = np.abs(a).max() if n else 0.0
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) <= pivot_tol * max(scale, 1.0):
            raise SingularMatrix(f"no usable pivot in column {k + 1}")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        m = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(m, a[k, k:])
        b[k + 1 :] -= m * b[k]
    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


def _check(h, p: SparseMatrix, b) -> tuple[np.ndarray, np.ndarray]:
    h = np.asarray(h, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if h.shape != (p.n,) or b.shape != (p.n,):
        raise DimensionError(f"vectors must have length {p.n}")
    return h, b


def jacobi_sweep(h, p: SparseMatrix, b) -> np.ndarray:
    h, b = _check(h, p, b)
    out = np.empty(p.n)
    for i0 in range(p.n):
        cols, vals = p.row_arrays(i0)
        out[i0] = vals @ h[cols] + b[i0]
    return out


def gauss_seidel_sweep(h, p: SparseMatrix, b) -> np.ndarray:
    h, b = _check(h, p, b)
    out = h.copy()
    for i0 in range(p.n):
        cols, vals = p.row_arrays(i0)
        out[i0] = vals @ out[cols] + b[i0]
    return out


def _sweep_trace(sweep, system: LinearSystem, reference, sweeps: int, h0=None) -> IterTrace:
    p, b = system.matrix, system.rhs
    h = np.zeros(p.n) if h0 is None else np.array(h0, dtype=np.float64)
    trace = [TracePoint(0, float(np.abs(h - reference).sum()), 0)]
    for s in range(1, sweeps + 1):
        h = sweep(h, p, b)
        trace.append(TracePoint(s, float(np.abs(h - reference).sum()), s * p.n))
    return trace


def jacobi_trace(system: LinearSystem, reference, sweeps: int, h0=None) -> IterTrace:
    return _sweep_trace(jacobi_sweep, system, reference, sweeps, h0)


def gauss_seidel_trace(system: LinearSystem, reference, sweeps: int, h0=None) -> IterTrace:
    return _sweep_trace(gauss_seidel_sweep, system, reference, sweeps, h0)


def d_iteration_trace(system: LinearSystem, reference, sweeps: int, strategy: str = "cyclic") -> IterTrace:
    """Fluid diffusion from ``H = 0``, sampled every ``n`` diffusions."""
    p = system.matrix
    state = init_state(p, system.rhs)
    strat = make_strategy(strategy, range(1, p.n + 1))
    trace = [TracePoint(0, float(np.abs(state.H - reference).sum()), 0)]
    for s in range(1, sweeps + 1):
        for _ in range(p.n):
            diffuse(state, p, strat.next(state, p))
        trace.append(TracePoint(s, float(np.abs(state.H - reference).sum()), state.step))
    return trace
