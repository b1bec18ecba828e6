"""Sequential D-iteration.

Two equivalent state representations are provided:

* :class:`DiterState` keeps the history ``H`` and the fluid ``F`` and moves
  fluid node by node (:func:`diffuse`). ``H + F = B + P H`` holds after every
  step.
* :class:`HOnlyState` keeps ``H`` only and recomputes one entry from its row
  of ``P`` (:func:`update_h_line`). Applied cyclically this is a
  Gauss-Seidel sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from diter.errors import DimensionError, IndexOutOfRange, NotConverged, SingularDiagonal
from diter.sparse import LinearSystem, Partition, SparseMatrix

DEFAULT_MAX_STEPS = 10**6


@dataclass
class DiterState:
    H: np.ndarray
    F: np.ndarray
    B: np.ndarray
    step: int = 0


@dataclass
class HOnlyState:
    H: np.ndarray
    B: np.ndarray
    step: int = 0


State = Union[DiterState, HOnlyState]


@dataclass(frozen=True)
class DiagonalElimination:
    """Per-node factors ``1 / (1 - p_ii)`` applied to fluid arriving at node ``i``."""

    scale: dict[int, float] = field(default_factory=dict)

    def as_array(self, n: int) -> np.ndarray:
        s = np.ones(n)
        for i, factor in self.scale.items():
            s[i - 1] = factor
        return s

    def effective_matrix(self, p: SparseMatrix) -> SparseMatrix:
        """The zero-diagonal matrix with incoming weights rescaled explicitly."""
        return SparseMatrix.from_entries(
            p.n, [(i, j, v * self.scale.get(i, 1.0)) for i, j, v in p.entries()]
        )


def _vec(v, n: int | None = None) -> np.ndarray:
    a = np.array(v, dtype=np.float64)
    if a.ndim != 1 or (n is not None and a.size != n):
        raise DimensionError(f"expected a vector of length {n}, got shape {a.shape}")
    return a


def _index(p: SparseMatrix, i: int) -> int:
    if not 1 <= i <= p.n:
        raise IndexOutOfRange(i, p.n)
    return i - 1


def init_state(p: SparseMatrix, b, h0=None) -> DiterState:
    """Fluid state at step 0: ``H = 0`` and ``F = B``.

    With a starting guess ``h0`` the fluid is set to ``B + P h0 - h0`` so the
    conservation identity already holds.
    """
    b = _vec(b, p.n)
    if h0 is None:
        return DiterState(H=np.zeros(p.n), F=b.copy(), B=b)
    h = _vec(h0, p.n)
    return DiterState(H=h.copy(), F=b + p.matvec(h) - h, B=b)


def init_h_only(p: SparseMatrix, b, h0=None) -> HOnlyState:
    """History-only state, starting from ``H = B`` unless ``h0`` is given."""
    b = _vec(b, p.n)
    h = b.copy() if h0 is None else _vec(h0, p.n).copy()
    return HOnlyState(H=h, B=b)


def diffuse(state: DiterState, p: SparseMatrix, i: int, scale: np.ndarray | None = None) -> DiterState:
    """Diffuse the fluid held at node ``i`` (in place).

    ``scale`` holds per-node arrival factors produced by
    :func:`eliminate_diagonal`; ``None`` means all ones.
    """
    i0 = _index(p, i)
    f = state.F[i0]
    state.H[i0] += f
    state.F[i0] = 0.0
    if f != 0.0:
        rows, vals = p.col_arrays(i0)
        push = vals * f
        if scale is not None:
            push = push * scale[rows]
        state.F[rows] += push
    state.step += 1
    return state


def update_h_line(state: HOnlyState, p: SparseMatrix, i: int) -> HOnlyState:
    """``H_i <- L_i(P) . H + B_i`` (in place); other entries are untouched."""
    i0 = _index(p, i)
    cols, vals = p.row_arrays(i0)
    state.H[i0] = vals @ state.H[cols] + state.B[i0]
    state.step += 1
    return state


def eliminate_diagonal(p: SparseMatrix, b) -> tuple[SparseMatrix, np.ndarray, DiagonalElimination]:
    """Remove self-loops ``p_ii``.

    ``B_i`` becomes ``B_i / (1 - p_ii)``. Off-diagonal weights are kept as
    they are; the returned :class:`DiagonalElimination` records the factor
    that fluid arriving at ``i`` must be multiplied by.
    """
    b = _vec(b, p.n)
    diag = p.diagonal()
    scale: dict[int, float] = {}
    for i0 in np.flatnonzero(diag):
        if diag[i0] == 1.0:
            raise SingularDiagonal(int(i0) + 1)
        scale[int(i0) + 1] = 1.0 / (1.0 - diag[i0])
    if not scale:
        return p, b.copy(), DiagonalElimination()
    stripped = SparseMatrix.from_entries(p.n, [(i, j, v) for i, j, v in p.entries() if i != j])
    b_new = b.copy()
    for i, factor in scale.items():
        b_new[i - 1] *= factor
    return stripped, b_new, DiagonalElimination(scale)


def fluid_vector(state: State, p: SparseMatrix) -> np.ndarray:
    """Remaining fluid per node: ``F`` itself, or ``P H + B - H`` for H-only state."""
    if isinstance(state, DiterState):
        return state.F
    if state.H.size != p.n:
        raise DimensionError(f"state length {state.H.size} != {p.n}")
    return p.matvec(state.H) + state.B - state.H


def residual(state: State, p: SparseMatrix, part: Partition | None = None) -> tuple[np.ndarray, float]:
    """Per-worker L1 remaining fluid ``r_k`` and their total.

    Without a partition a single worker owning every node is assumed.
    """
    if part is None:
        part = Partition.single(p.n)
    if part.n != p.n:
        raise DimensionError(f"partition covers {part.n} nodes, matrix has {p.n}")
    fl = np.abs(fluid_vector(state, p))
    r_k = np.bincount(part.owner_array() - 1, weights=fl, minlength=part.k)
    return r_k, float(r_k.sum())


def error_upper_bound(r_total: float, margin: float | None) -> float | None:
    """L1 distance bound ``r_total / margin``; ``None`` when no margin exists."""
    if r_total < 0:
        raise ValueError("r_total must be non-negative")
    if margin is None:
        return None
    return r_total / margin


class SequenceStrategy:
    """Chooses the next node to update among ``nodes`` (1-based, ascending)."""

    kind = "abstract"

    def __init__(self, nodes):
        self.nodes = np.array(sorted(nodes), dtype=np.int64)
        if self.nodes.size == 0:
            raise ValueError("strategy over an empty node set")

    def next(self, state: State, p: SparseMatrix) -> int:
        raise NotImplementedError


class CyclicStrategy(SequenceStrategy):
    kind = "cyclic"

    def __init__(self, nodes):
        super().__init__(nodes)
        self.cursor = 0

    def next(self, state=None, p=None) -> int:
        i = int(self.nodes[self.cursor])
        self.cursor = (self.cursor + 1) % self.nodes.size
        return i


class GreedyStrategy(SequenceStrategy):
    """Largest absolute remaining fluid first; ties go to the smallest index."""

    kind = "greedy"

    def next(self, state: State, p: SparseMatrix) -> int:
        idx = self.nodes - 1
        if isinstance(state, DiterState):
            amounts = np.abs(state.F[idx])
        else:
            amounts = np.array([abs(_h_fluid(state, p, i0)) for i0 in idx])
        return int(self.nodes[int(np.argmax(amounts))])


def _h_fluid(state: HOnlyState, p: SparseMatrix, i0: int) -> float:
    cols, vals = p.row_arrays(i0)
    return vals @ state.H[cols] + state.B[i0] - state.H[i0]


def make_strategy(kind: str, nodes) -> SequenceStrategy:
    if kind == "cyclic":
        return CyclicStrategy(nodes)
    if kind == "greedy":
        return GreedyStrategy(nodes)
    raise ValueError(f"unknown sequence strategy {kind!r}")


def next_index(strategy: SequenceStrategy, state: State, p: SparseMatrix) -> int:
    return strategy.next(state, p)


def solve_sequential(
    system: LinearSystem,
    strategy: str | SequenceStrategy = "cyclic",
    tol: float = 1e-12,
    max_steps: int = DEFAULT_MAX_STEPS,
    h0=None,
    elimination: DiagonalElimination | None = None,
) -> tuple[np.ndarray, list[tuple[int, float]]]:
    """Run fluid diffusion until the total remaining fluid is at most ``tol``.

    Returns the final ``H`` and the trace ``[(step, r_total), ...]`` starting
    at step 0. Raises :class:`NotConverged` (with the trace as payload) after
    ``max_steps`` diffusions.
    """
    if system.form != "P":
        raise ValueError("solve_sequential expects a P-form system; see jacobi_split")
    p = system.matrix
    if isinstance(strategy, str):
        strategy = make_strategy(strategy, range(1, p.n + 1))
    scale = elimination.as_array(p.n) if elimination and elimination.scale else None
    state = init_state(p, system.rhs, h0)
    r = float(np.abs(state.F).sum())
    trace = [(0, r)]
    while r > tol:
        if state.step >= max_steps:
            raise NotConverged(state.step, r, payload=trace)
        diffuse(state, p, strategy.next(state, p), scale)
        r = float(np.abs(state.F).sum())
        trace.append((state.step, r))
    return state.H, trace
