"""The 4x4 example systems used throughout the experiments.

Every system has right-hand side ``(1, 1, 1, 1)``. ``A1`` is block diagonal
over ``{1, 2}`` and ``{3, 4}``; ``A2`` and ``A3`` couple the blocks; ``A`` and
``Aprime`` are the before/after pair of the live matrix-update experiment.
"""

from __future__ import annotations

import numpy as np

from diter.errors import UnknownExample
from diter.sparse import LinearSystem, SparseMatrix, jacobi_split

_MATRICES = {
    "A1": [[5, 3, 0, 0], [3, 7, 0, 0], [0, 0, 8, 4], [0, 0, 2, 3]],
    "A2": [[5, 3, 1, 1], [3, 7, 1, 0], [1, 1, 8, 4], [1, 1, 2, 3]],
    "A3": [[5, 3, 1, 1], [3, 7, 1, 1], [1, 1, 8, 4], [1, 1, 2, 3]],
    "A": [[5, 3, 0, 0], [3, 7, 0, 0], [0, 0, 8, 4], [0, 0, 2, 3]],
    "Aprime": [[5, 3, 0, 0], [3, 7, 0, 1], [0, 0, 8, 4], [0, 0, 2, 3]],
}

EXAMPLE_NAMES = tuple(_MATRICES)


def example(name: str) -> LinearSystem:
    """A-form system for a built-in example."""
    try:
        rows = _MATRICES[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; choose from {', '.join(EXAMPLE_NAMES)}") from None
    return LinearSystem(SparseMatrix.from_dense(rows), np.ones(4), form="A")


def example_p(name: str) -> LinearSystem:
    return jacobi_split(example(name))


def builtin_examples() -> dict[str, tuple[LinearSystem, LinearSystem]]:
    """``name -> (A-form, P-form)`` for every built-in example."""
    return {name: (example(name), example_p(name)) for name in EXAMPLE_NAMES}
