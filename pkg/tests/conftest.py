import sys
from fractions import Fraction

import hypothesis
import numpy as np
import pytest

from diter.catalog import example, example_p
from diter.sparse import LinearSystem, SparseMatrix

hypothesis.settings.register_profile("fast", max_examples=10)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.load_profile("default")


def block_inverse_2x2(a, b, c, d, rhs):
    """Exact solve of [[a, b], [c, d]] x = rhs with fractions."""
    det = Fraction(a * d - b * c)
    r1, r2 = rhs
    return (Fraction(d * r1 - b * r2) / det, Fraction(-c * r1 + a * r2) / det)


# A1 solved by hand, block by block: (2/13, 1/13, -1/16, 3/8)
A1_SOLUTION = block_inverse_2x2(5, 3, 3, 7, (1, 1)) + block_inverse_2x2(8, 4, 2, 3, (1, 1))
A1_P = [
    [0, Fraction(-3, 5), 0, 0],
    [Fraction(-3, 7), 0, 0, 0],
    [0, 0, 0, Fraction(-4, 8)],
    [0, 0, Fraction(-2, 3), 0],
]
A1_B_PRIME = (Fraction(1, 5), Fraction(1, 7), Fraction(1, 8), Fraction(1, 3))


def as_float(xs):
    return np.array([float(x) for x in xs])


def random_system(rng: np.random.Generator, n: int, density: float = 0.3, nonneg: bool = False,
                  diagonal: bool = False, radius: float = 0.9, axis: int = 1) -> LinearSystem:
    """Random sparse P with max absolute row sum ``radius`` (< 1), so rho(|P|) < 1.

    ``axis=0`` bounds column sums instead, which makes the fluid mass contract.
    """
    mask = rng.random((n, n)) < density
    if not diagonal:
        np.fill_diagonal(mask, False)
    vals = rng.uniform(0.1, 1.0, (n, n))
    if not nonneg:
        vals *= rng.choice([-1.0, 1.0], (n, n))
    p = np.where(mask, vals, 0.0)
    sums = np.abs(p).sum(axis=axis, keepdims=True)
    sums[sums == 0] = 1.0
    shape = (n, 1) if axis == 1 else (1, n)
    p = p / sums * radius * rng.uniform(0.5, 1.0, shape)
    b = rng.uniform(0.0, 1.0, n) if nonneg else rng.uniform(-1.0, 1.0, n)
    return LinearSystem(SparseMatrix.from_dense(p), b, form="P")


@pytest.fixture(params=["A1", "A2", "A3"])
def small_name(request):
    return request.param


@pytest.fixture
def a1():
    return example("A1")


@pytest.fixture
def a1p():
    return example_p("A1")


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.report(number))
