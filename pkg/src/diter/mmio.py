"""Matrix Market coordinate files and plain-text vectors."""

from __future__ import annotations

import io
from pathlib import Path
from typing import TextIO

import numpy as np

from diter.errors import DimensionError, ParseError
from diter.sparse import SparseMatrix

_HEADER = "%%MatrixMarket matrix coordinate real general"


def parse_matrix(text: str | TextIO) -> SparseMatrix:
    """Parse a real, general Matrix Market coordinate stream.

    Indices stay 1-based. Duplicate entries are summed and explicit zeros
    dropped, so the result may hold fewer entries than the size line
    announces.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    lines = iter(enumerate(stream, start=1))

    try:
        lineno, banner = next(lines)
    except StopIteration:
        raise ParseError(1, "empty input") from None
    tokens = banner.split()
    if len(tokens) != 5 or tokens[0].lower() != "%%matrixmarket":
        raise ParseError(lineno, "missing %%MatrixMarket banner")
    obj, fmt, field, symmetry = (t.lower() for t in tokens[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise ParseError(lineno, f"unsupported layout {obj} {fmt}")
    if field not in ("real", "integer", "double"):
        raise ParseError(lineno, f"unsupported field {field!r}")
    if symmetry != "general":
        raise ParseError(lineno, f"unsupported symmetry {symmetry!r}")

    size = None
    for lineno, line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise ParseError(lineno, "size line must hold 'rows cols nnz'")
        try:
            m, n, nnz = (int(p) for p in parts)
        except ValueError:
            raise ParseError(lineno, f"non-integer size line {stripped!r}") from None
        if m < 0 or n < 0 or nnz < 0:
            raise ParseError(lineno, "negative size")
        if m != n:
            raise DimensionError(f"line {lineno}: matrix is {m}x{n}, not square")
        size = (n, nnz)
        break
    if size is None:
        raise ParseError(lineno, "missing size line")
    n, nnz = size

    rows, cols, vals = [], [], []
    for lineno, line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise ParseError(lineno, "entry must hold 'row col value'")
        try:
            i, j = int(parts[0]), int(parts[1])
            v = float(parts[2])
        except ValueError:
            raise ParseError(lineno, f"malformed entry {stripped!r}") from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(lineno, f"index ({i}, {j}) outside 1..{n}")
        if not np.isfinite(v):
            raise ParseError(lineno, f"non-finite value {parts[2]!r}")
        if len(rows) == nnz:
            raise ParseError(lineno, f"more than {nnz} entries")
        rows.append(i)
        cols.append(j)
        vals.append(v)
    if len(rows) != nnz:
        raise ParseError(lineno, f"expected {nnz} entries, found {len(rows)}")
    return SparseMatrix(n, rows, cols, vals)


def serialize_matrix(m: SparseMatrix) -> str:
    out = [_HEADER, f"{m.n} {m.n} {m.nnz}"]
    out += [f"{i} {j} {v!r}" for i, j, v in m.entries()]
    return "\n".join(out) + "\n"


def read_matrix(path: str | Path) -> SparseMatrix:
    with open(path) as fh:
        return parse_matrix(fh)


def write_matrix(path: str | Path, m: SparseMatrix) -> None:
    Path(path).write_text(serialize_matrix(m))


def parse_vector(text: str | TextIO) -> np.ndarray:
    """One value per line; blank lines and lines starting with ``%`` or ``#`` are skipped."""
    stream = io.StringIO(text) if isinstance(text, str) else text
    values = []
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "%#":
            continue
        try:
            values.append(float(stripped))
        except ValueError:
            raise ParseError(lineno, f"not a number: {stripped!r}") from None
    return np.array(values, dtype=np.float64)


def serialize_vector(v) -> str:
    return "".join(f"{float(x)!r}\n" for x in v)


def read_vector(path: str | Path) -> np.ndarray:
    with open(path) as fh:
        return parse_vector(fh)


def write_vector(path: str | Path, v) -> None:
    Path(path).write_text(serialize_vector(v))
