"""D-iteration: fluid-diffusion solver for ``X = P X + B`` and an
asynchronous multi-worker simulator built on it."""

from diter.baselines import direct_solve, gauss_seidel_sweep, jacobi_sweep
from diter.catalog import builtin_examples, example, example_p
from diter.engine import (
    DiagonalElimination,
    DiterState,
    HOnlyState,
    diffuse,
    eliminate_diagonal,
    error_upper_bound,
    init_h_only,
    init_state,
    residual,
    solve_sequential,
    update_h_line,
)
from diter.errors import *  # noqa: F401,F403
from diter.mmio import parse_matrix, parse_vector, serialize_matrix, serialize_vector
from diter.sparse import LinearSystem, Partition, SparseMatrix, contraction_margin, jacobi_split

__version__ = "0.1.0"
