import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partition_linf.linalg import as_matrix, kernel_basis, rank_mod_p, row_reduce, span_rank

# --- Fixtures and Mocks ---

def _rank_by_enumeration(rows, p):
    """Size of the row space counted by brute force, as a power of p."""
    n = len(rows[0]) if rows else 0
    seen = set()
    for coeffs in np.ndindex(*([p] * len(rows))):
        v = tuple(sum(c * row[j] for c, row in zip(coeffs, rows)) % p for j in range(n))
        seen.add(v)
    size, r = len(seen), 0
    while size > 1:
        size //= p
        r += 1
    return r

# --- Test Cases ---

def test_identity_has_full_rank():
    """Tests rank(I_3) = 3 over F_2."""
    assert rank_mod_p(np.eye(3, dtype=int).astype(object), 2) == 3

def test_rank_depends_on_p():
    """Tests that [[1,1],[1,-1]] has rank 1 over F_2 and 2 over F_3."""
    A = as_matrix([[1, 1], [1, -1]], 2)
    assert rank_mod_p(A, 2) == 1
    assert rank_mod_p(as_matrix([[1, 1], [1, -1]], 3), 3) == 2

def test_empty_matrix():
    """Tests that a matrix without rows has rank 0 and a full kernel."""
    A = as_matrix([], 2, ncols=3)
    assert rank_mod_p(A, 2) == 0
    assert len(kernel_basis(A, 2)) == 3

def test_row_reduce_pivots():
    """Tests the pivot columns of a small echelon computation."""
    _, pivots = row_reduce(as_matrix([[0, 1, 1], [0, 1, 0]], 2), 2)
    assert pivots == [1, 2]

def test_kernel_vectors_are_annihilated():
    """Tests A x = 0 for every returned kernel vector and rank + nullity = n."""
    A = as_matrix([[1, 2, 0, 1], [2, 4, 1, 0]], 5)
    basis = kernel_basis(A, 5)
    assert len(basis) + rank_mod_p(A, 5) == 4
    for x in basis:
        assert all(v % 5 == 0 for v in A.dot(x))

def test_span_rank_of_sparse_vectors():
    """Tests that dependent sparse combinations are counted once."""
    vectors = [{"a": 1, "b": 1}, {"b": 1, "c": 1}, {"a": 1, "c": 1}]
    assert span_rank(vectors, 2) == 2
    assert span_rank(vectors, 3) == 3
    assert span_rank([], 2) == 0

@settings(derandomize=True, max_examples=40)
@given(st.lists(st.lists(st.integers(0, 1), min_size=3, max_size=3), min_size=1, max_size=4))
def test_rank_matches_enumeration_f2(rows):
    """Tests row reduction against counting the row space by brute force."""
    assert rank_mod_p(as_matrix(rows, 2), 2) == _rank_by_enumeration(rows, 2)
