"""
Dense linear algebra over F_p on numpy object arrays.

Matrices are small (desk-scale carriers), so plain Gaussian elimination with
Python-int entries is exact and fast enough.
"""

from typing import Dict, Hashable, List, Sequence, Tuple

import numpy as np

from shared_utils import setup_logging
from partition_linf.errors import ShapeError

logger = setup_logging(__name__)


def as_matrix(rows: Sequence[Sequence[int]], p: int, ncols: int = None) -> np.ndarray:
    """Object array of residues; `ncols` fixes the width when `rows` is empty."""
    if not rows:
        return np.zeros((0, ncols or 0), dtype=object)
    return np.array([[int(x) % p for x in row] for row in rows], dtype=object)


def row_reduce(A: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form mod p and the pivot columns."""
    A = np.array(A, dtype=object, copy=True) % p
    m, n = A.shape
    pivots: List[int] = []
    r = 0
    for c in range(n):
        pivot = None
        for i in range(r, m):
            if A[i, c] % p != 0:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != r:
            A[[r, pivot], :] = A[[pivot, r], :]
        inv = pow(int(A[r, c]), -1, p)
        A[r, :] = (A[r, :] * inv) % p
        for i in range(m):
            if i != r and A[i, c] % p != 0:
                f = A[i, c]
                A[i, :] = (A[i, :] - f * A[r, :]) % p
        pivots.append(c)
        r += 1
        if r == m:
            break
    return A, pivots


def rank_mod_p(A, p: int) -> int:
    A = np.array(A, dtype=object)
    if A.size == 0:
        return 0
    return len(row_reduce(A, p)[1])


def kernel_basis(A, p: int) -> List[np.ndarray]:
    """Basis of {x : A x = 0} over F_p."""
    A = np.array(A, dtype=object)
    if A.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {A.shape}")
    n = A.shape[1]
    if A.shape[0] == 0:
        return [np.array([1 if j == i else 0 for j in range(n)], dtype=object) for i in range(n)]
    R, pivots = row_reduce(A, p)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = np.zeros(n, dtype=object)
        x[f] = 1
        for row, c in enumerate(pivots):
            x[c] = (-R[row, f]) % p
        basis.append(x)
    return basis


def sparse_to_rows(vectors: Sequence[Dict[Hashable, int]], index: Dict[Hashable, int], p: int) -> np.ndarray:
    """Stacks sparse combinations as the rows of a dense matrix over the given key index."""
    A = np.zeros((len(vectors), len(index)), dtype=object)
    for i, vec in enumerate(vectors):
        for key, coeff in vec.items():
            A[i, index[key]] = coeff % p
    return A


def span_rank(vectors: Sequence[Dict[Hashable, int]], p: int) -> int:
    """Dimension of the span of sparse combinations."""
    keys = sorted({key for vec in vectors for key in vec}, key=repr)
    if not keys:
        return 0
    return rank_mod_p(sparse_to_rows(vectors, {k: i for i, k in enumerate(keys)}, p), p)
