"""Sparse matrices, partitions and linear systems.

All public indices are 1-based, matching the usual mathematical notation and
the Matrix Market convention. Arrays are stored 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from diter.errors import DimensionError, IndexOutOfRange, ZeroDiagonal


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class SparseMatrix:
    """Square sparse matrix with both row (CSR) and column (CSC) views.

    Entry ``(i, j, w)`` is the weight of the edge from node ``j`` to node
    ``i``. Duplicate triplets are summed, explicit zeros are dropped. Both
    views are built once at construction and never modified.
    """

    __slots__ = ("n", "_indptr", "_indices", "_data", "_cindptr", "_cindices", "_cdata")

    def __init__(self, n: int, rows: Sequence[int], cols: Sequence[int], vals: Sequence[float]):
        if n < 0:
            raise DimensionError(f"negative dimension {n}")
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise DimensionError("triplet arrays differ in length")
        for idx in (rows, cols):
            bad = (idx < 1) | (idx > n)
            if bad.any():
                raise IndexOutOfRange(int(idx[bad][0]), n)
        coo = sp.coo_array((vals, (rows - 1, cols - 1)), shape=(n, n))
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        csc = csr.tocsc()
        csc.sort_indices()
        self.n = n
        self._indptr = _frozen(csr.indptr.astype(np.int64))
        self._indices = _frozen(csr.indices.astype(np.int64))
        self._data = _frozen(csr.data.astype(np.float64))
        self._cindptr = _frozen(csc.indptr.astype(np.int64))
        self._cindices = _frozen(csc.indices.astype(np.int64))
        self._cdata = _frozen(csc.data.astype(np.float64))

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_entries(cls, n: int, entries: Iterable[tuple[int, int, float]]) -> SparseMatrix:
        entries = list(entries)
        if not entries:
            return cls(n, [], [], [])
        rows, cols, vals = zip(*entries)
        return cls(n, rows, cols, vals)

    @classmethod
    def from_dense(cls, dense) -> SparseMatrix:
        a = np.asarray(dense, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {a.shape}")
        r, c = np.nonzero(a)
        return cls(a.shape[0], r + 1, c + 1, a[r, c])

    @classmethod
    def zeros(cls, n: int) -> SparseMatrix:
        return cls(n, [], [], [])

    @classmethod
    def identity(cls, n: int) -> SparseMatrix:
        idx = np.arange(1, n + 1)
        return cls(n, idx, idx, np.ones(n))

    # -- access ------------------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self._data.size)

    def _check(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexOutOfRange(i, self.n)
        return i - 1

    def row_arrays(self, i0: int) -> tuple[np.ndarray, np.ndarray]:
        """0-based column indices and weights of row ``i0`` (0-based)."""
        s, e = self._indptr[i0], self._indptr[i0 + 1]
        return self._indices[s:e], self._data[s:e]

    def col_arrays(self, j0: int) -> tuple[np.ndarray, np.ndarray]:
        """0-based row indices and weights of column ``j0`` (0-based)."""
        s, e = self._cindptr[j0], self._cindptr[j0 + 1]
        return self._cindices[s:e], self._cdata[s:e]

    def row(self, i: int) -> list[tuple[int, float]]:
        cols, vals = self.row_arrays(self._check(i))
        return [(int(c) + 1, float(v)) for c, v in zip(cols, vals)]

    def column_entries(self, j: int) -> list[tuple[int, float]]:
        """All ``(i, p_ij)`` with ``p_ij != 0``, ascending ``i``."""
        rows, vals = self.col_arrays(self._check(j))
        return [(int(r) + 1, float(v)) for r, v in zip(rows, vals)]

    def row_dot(self, i: int, v: np.ndarray) -> float:
        """``sum_j p_ij * v_j`` over the stored entries of row ``i``."""
        i0 = self._check(i)
        if len(v) != self.n:
            raise DimensionError(f"vector length {len(v)} != {self.n}")
        cols, vals = self.row_arrays(i0)
        return float(vals @ v[cols])

    def entries(self) -> list[tuple[int, int, float]]:
        """Stored entries in row-major order, 1-based."""
        out = []
        for i0 in range(self.n):
            cols, vals = self.row_arrays(i0)
            out.extend((i0 + 1, int(c) + 1, float(v)) for c, v in zip(cols, vals))
        return out

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        for i0 in range(self.n):
            cols, vals = self.row_arrays(i0)
            hit = cols == i0
            if hit.any():
                d[i0] = vals[hit][0]
        return d

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.n,):
            raise DimensionError(f"vector length {v.shape} != ({self.n},)")
        return self.to_scipy() @ v

    def to_scipy(self) -> sp.csr_array:
        return sp.csr_array((self._data, self._indices, self._indptr), shape=(self.n, self.n))

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def column_abs_sums(self) -> np.ndarray:
        return np.array([np.abs(self.col_arrays(j)[1]).sum() for j in range(self.n)])

    def __sub__(self, other: SparseMatrix) -> SparseMatrix:
        if other.n != self.n:
            raise DimensionError(f"dimension mismatch {self.n} vs {other.n}")
        mine = self.entries()
        theirs = [(i, j, -v) for i, j, v in other.entries()]
        return SparseMatrix.from_entries(self.n, mine + theirs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.n == other.n and self.entries() == other.entries()

    def __hash__(self):
        return hash((self.n, tuple(self.entries())))

    def __repr__(self) -> str:
        return f"SparseMatrix(n={self.n}, nnz={self.nnz})"


@dataclass(frozen=True)
class Partition:
    """Assignment of nodes ``1..n`` to workers ``1..k``.

    ``owner[i - 1]`` is the worker owning node ``i``.
    """

    owner: tuple[int, ...]

    def __post_init__(self):
        owner = tuple(int(w) for w in self.owner)
        object.__setattr__(self, "owner", owner)
        if not owner:
            raise DimensionError("partition of an empty node set")
        k = max(owner)
        if min(owner) < 1:
            raise DimensionError("worker ids start at 1")
        missing = set(range(1, k + 1)) - set(owner)
        if missing:
            raise DimensionError(f"workers without nodes: {sorted(missing)}")

    @classmethod
    def single(cls, n: int) -> Partition:
        return cls((1,) * n)

    @classmethod
    def contiguous(cls, n: int, k: int) -> Partition:
        """Split ``1..n`` into ``k`` consecutive blocks of near-equal size."""
        if not 1 <= k <= n:
            raise DimensionError(f"cannot split {n} nodes across {k} workers")
        sizes = [n // k + (1 if w < n % k else 0) for w in range(k)]
        owner = []
        for w, size in enumerate(sizes, start=1):
            owner.extend([w] * size)
        return cls(tuple(owner))

    @property
    def n(self) -> int:
        return len(self.owner)

    @property
    def k(self) -> int:
        return max(self.owner)

    def members(self, worker: int) -> list[int]:
        return [i for i, w in enumerate(self.owner, start=1) if w == worker]

    def owner_of(self, i: int) -> int:
        return self.owner[i - 1]

    def owner_array(self) -> np.ndarray:
        """0-based array of 1-based worker ids, indexed by 0-based node."""
        return np.asarray(self.owner, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``A X = B`` (``form == "A"``) or ``X = P X + B`` (``form == "P"``)."""

    matrix: SparseMatrix
    rhs: np.ndarray
    form: str = "P"

    def __post_init__(self):
        if self.form not in ("A", "P"):
            raise ValueError(f"form must be 'A' or 'P', got {self.form!r}")
        rhs = np.array(self.rhs, dtype=np.float64)
        if rhs.shape != (self.matrix.n,):
            raise DimensionError(f"rhs length {rhs.shape} does not match n={self.matrix.n}")
        object.__setattr__(self, "rhs", _frozen(rhs))

    @property
    def n(self) -> int:
        return self.matrix.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearSystem):
            return NotImplemented
        return (
            self.form == other.form
            and self.matrix == other.matrix
            and np.array_equal(self.rhs, other.rhs)
        )


def jacobi_split(system: LinearSystem) -> LinearSystem:
    """Turn ``A X = B`` into ``X = P X + B'`` by dividing each row by its diagonal."""
    if system.form != "A":
        raise ValueError("jacobi_split expects an A-form system")
    a = system.matrix
    diag = a.diagonal()
    zero = np.flatnonzero(diag == 0)
    if zero.size:
        raise ZeroDiagonal(int(zero[0]) + 1)
    entries = [(i, j, -v / diag[i - 1]) for i, j, v in a.entries() if i != j]
    p = SparseMatrix.from_entries(a.n, entries)
    return LinearSystem(p, system.rhs / diag, form="P")


def to_a_form(system: LinearSystem) -> LinearSystem:
    """``X = P X + B`` rewritten as ``(I - P) X = B``."""
    if system.form == "A":
        return system
    p = system.matrix
    entries = [(i, i, 1.0) for i in range(1, p.n + 1)]
    entries += [(i, j, -v) for i, j, v in p.entries()]
    return LinearSystem(SparseMatrix.from_entries(p.n, entries), system.rhs, form="A")


def contraction_margin(p: SparseMatrix) -> float | None:
    """``min_i (1 - sum_j |p_ji|)``, or ``None`` when that is not positive.

    A positive margin turns the total residual into an L1 bound on the
    distance to the fixed point (see :func:`diter.engine.error_upper_bound`).
    """
    if p.n == 0:
        return None
    eps = float(1.0 - p.column_abs_sums().max())
    return eps if eps > 0 else None
