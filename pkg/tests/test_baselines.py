from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diter.baselines import (
    d_iteration_trace,
    direct_solve,
    gauss_seidel_sweep,
    gauss_seidel_trace,
    jacobi_sweep,
    jacobi_trace,
)
from diter.catalog import example, example_p
from diter.engine import init_h_only, update_h_line
from diter.errors import DimensionError, SingularMatrix
from diter.sparse import LinearSystem, SparseMatrix

from conftest import A1_B_PRIME, A1_SOLUTION, as_float, block_inverse_2x2, random_system


def test_direct_solve_a1(a1, a1p):
    x = as_float(A1_SOLUTION)
    np.testing.assert_allclose(direct_solve(a1), x, atol=1e-15)
    np.testing.assert_allclose(direct_solve(a1p), x, atol=1e-15)


def test_direct_solve_a1_blocks_from_inverse():
    for block in ([[5, 3], [3, 7]], [[8, 4], [2, 3]]):
        expect = block_inverse_2x2(*block[0], *block[1], (1, 1))
        a = LinearSystem(SparseMatrix.from_dense(block), np.ones(2), form="A")
        np.testing.assert_allclose(direct_solve(a), as_float(expect), atol=1e-15)


def test_direct_solve_identity_and_singular():
    b = np.array([3.0, -1.0, 2.0])
    assert direct_solve(LinearSystem(SparseMatrix.identity(3), b, form="A")).tolist() == b.tolist()
    dup = LinearSystem(SparseMatrix.from_dense([[1, 2], [1, 2]]), np.ones(2), form="A")
    with pytest.raises(SingularMatrix):
        direct_solve(dup)


def test_direct_solve_needs_pivoting():
    a = LinearSystem(SparseMatrix.from_dense([[0, 1], [1, 0]]), np.array([2.0, 3.0]), form="A")
    assert direct_solve(a).tolist() == [3.0, 2.0]


@given(st.integers(1, 25), st.integers(0, 2**31 - 1))
def test_direct_solve_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=n)
    x = direct_solve(LinearSystem(SparseMatrix.from_dense(a), b, form="A"))
    np.testing.assert_allclose(x, np.linalg.solve(a, b), rtol=1e-9, atol=1e-12)


def test_jacobi_sweep_a1(a1p):
    bp = as_float(A1_B_PRIME)
    np.testing.assert_allclose(jacobi_sweep(np.zeros(4), a1p.matrix, a1p.rhs), bp, atol=1e-16)
    h = jacobi_sweep(bp, a1p.matrix, a1p.rhs)
    # -3/5 * 1/7 + 1/5
    assert h[0] == pytest.approx(4 / 35, abs=1e-16)
    with pytest.raises(DimensionError):
        jacobi_sweep(np.zeros(3), a1p.matrix, a1p.rhs)


def test_gauss_seidel_sweep_a1(a1p):
    h = gauss_seidel_sweep(np.zeros(4), a1p.matrix, a1p.rhs)
    expect = [Fraction(1, 5), Fraction(-3, 7) * Fraction(1, 5) + Fraction(1, 7),
              Fraction(1, 8), Fraction(-2, 3) * Fraction(1, 8) + Fraction(1, 3)]
    np.testing.assert_allclose(h, as_float(expect), atol=1e-16)


def test_sweeps_fix_the_solution(a1p):
    x = direct_solve(a1p)
    for sweep in (jacobi_sweep, gauss_seidel_sweep):
        np.testing.assert_allclose(sweep(x, a1p.matrix, a1p.rhs), x, atol=1e-15)


@given(st.integers(2, 20), st.integers(0, 2**31 - 1))
def test_gauss_seidel_is_cyclic_line_update(n, seed):
    rng = np.random.default_rng(seed)
    sys_ = random_system(rng, n)
    h = rng.normal(size=n)
    s = init_h_only(sys_.matrix, sys_.rhs, h)
    for _ in range(3):
        h = gauss_seidel_sweep(h, sys_.matrix, sys_.rhs)
        for i in range(1, n + 1):
            update_h_line(s, sys_.matrix, i)
        assert s.H.tolist() == h.tolist()


def test_traces_are_consistent(a1p):
    x = direct_solve(a1p)
    for trace in (jacobi_trace(a1p, x, 5), gauss_seidel_trace(a1p, x, 5), d_iteration_trace(a1p, x, 5)):
        assert [p.sweep for p in trace] == list(range(6))
        assert [p.updates for p in trace] == [4 * k for k in range(6)]
        assert trace[0].error == pytest.approx(np.abs(x).sum())


def test_greedy_not_worse_than_jacobi(small_name):
    sys_ = example_p(small_name)
    x = direct_solve(sys_)
    jac = jacobi_trace(sys_, x, 40)
    greedy = d_iteration_trace(sys_, x, 40, "greedy")
    for j, g in zip(jac, greedy):
        assert g.error <= j.error + 1e-15


def test_all_methods_converge(small_name):
    sys_ = example_p(small_name)
    x = direct_solve(example(small_name))
    for trace in (jacobi_trace(sys_, x, 400), gauss_seidel_trace(sys_, x, 400),
                  d_iteration_trace(sys_, x, 400), d_iteration_trace(sys_, x, 400, "greedy")):
        assert trace[-1].error <= 1e-10
