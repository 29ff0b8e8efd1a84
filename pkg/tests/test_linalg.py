import numpy as np
from hypothesis import given, settings, strategies as st

from equideform.linalg import FpMatrix, matmul_mod, nullspace, rank, rref, solve


def test_rank_small():
    assert rank([[1, 2], [2, 4]], 3) == 1
    assert rank([[1, 2], [2, 4]], 5) == 1
    assert rank([[1, 1], [1, 2]], 7) == 2
    assert rank(np.zeros((3, 4), dtype=np.int64), 2) == 0


def test_rref_pivots():
    R, piv = rref([[0, 2, 4], [1, 1, 1]], 5)
    assert piv == [0, 1]
    assert R.tolist() == [[1, 0, 4], [0, 1, 2]]


def test_solve_inconsistent_returns_none():
    assert solve([[1, 1], [1, 1]], [0, 1], 3) is None
    x = solve([[1, 1], [0, 1]], [2, 1], 3)
    assert x.tolist() == [1, 1]


def test_fp_matrix():
    M = FpMatrix(np.array([[1, 2], [3, 4]]), 5)
    assert M.rank() == 2
    assert (M @ M).entries.tolist() == [[2, 0], [0, 2]]


def test_matmul_large_prime_object_path():
    p = 2**31 - 1
    A = np.array([[p - 1, p - 2]], dtype=object)
    B = np.array([[p - 1], [p - 1]], dtype=object)
    assert matmul_mod(A, B, p).tolist() == [[(1 + 2) % p]]


@st.composite
def matrices(draw):
    p = draw(st.sampled_from([2, 3, 5, 13]))
    r = draw(st.integers(1, 6))
    c = draw(st.integers(1, 6))
    entries = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
    return p, np.array(entries, dtype=np.int64).reshape(r, c)


@settings(max_examples=80, deadline=None, derandomize=True)
@given(matrices())
def test_rank_nullity(data):
    p, A = data
    N = nullspace(A, p)
    assert rank(A, p) + N.shape[1] == A.shape[1]
    assert not ((A @ N) % p).any()


@settings(max_examples=80, deadline=None, derandomize=True)
@given(matrices(), st.data())
def test_solve_consistent_system(data, more):
    p, A = data
    x = np.array(more.draw(st.lists(st.integers(0, p - 1), min_size=A.shape[1], max_size=A.shape[1])))
    b = (A @ x) % p
    y = solve(A, b, p)
    assert y is not None and not (((A @ y) - b) % p).any()
