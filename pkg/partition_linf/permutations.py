"""
Symmetric-group elements in 1-based one-line notation, with the operadic
block composition and its unique decomposition.

Positions index inputs: `block_compose(t, v, i)` puts the k positions
i..i+k-1 onto the consecutive values t(i)..t(i)+k-1. Precomposition
(`act_right`) permutes positions and commutes with block composition.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations as _itertools_permutations
from typing import List, Optional, Sequence, Tuple

from shared_utils import setup_logging
from partition_linf.errors import ShapeError
from partition_linf.scalars import PrimeField, Scalar, sign_power

logger = setup_logging(__name__)


@dataclass(frozen=True, order=True)
class Permutation:
    """A bijection of {1..n}; `images[j-1]` is the image of j."""

    images: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise ShapeError(f"{list(self.images)} is not a permutation in one-line notation")

    @classmethod
    def of(cls, *images: int) -> "Permutation":
        return cls(tuple(images))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, j: int) -> int:
        return self.images[j - 1]

    def to_json(self) -> List[int]:
        return list(self.images)

    def __repr__(self) -> str:
        return "[" + ",".join(map(str, self.images)) + "]"


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(1, n + 1)))


@lru_cache(maxsize=None)
def all_permutations(n: int) -> Tuple[Permutation, ...]:
    """S_n in lexicographic order of images."""
    return tuple(Permutation(images) for images in _itertools_permutations(range(1, n + 1)))


def compose(s: Permutation, t: Permutation) -> Permutation:
    """(s o t)(j) = s(t(j))."""
    if s.size != t.size:
        raise ShapeError(f"cannot compose permutations of sizes {s.size} and {t.size}")
    return Permutation(tuple(s(t(j)) for j in range(1, t.size + 1)))


def inverse(s: Permutation) -> Permutation:
    images = [0] * s.size
    for j, value in enumerate(s.images, start=1):
        images[value - 1] = j
    return Permutation(tuple(images))


def act_right(s: Permutation, rho: Permutation) -> Permutation:
    """Precomposition s o rho, the action on positions."""
    return compose(s, rho)


def inversions(s: Permutation) -> int:
    return sum(
        1
        for x in range(s.size)
        for y in range(x + 1, s.size)
        if s.images[x] > s.images[y]
    )


def sign(s: Permutation, field: PrimeField) -> Scalar:
    """(-1)^inversions reduced into F_p."""
    return field(sign_power(inversions(s), field.p))


def sequence_sign(values: Sequence[int]) -> Optional[int]:
    """
    Parity of a sequence that should be a permutation of {1..len}.

    Returns 0 or 1 (the number of inversions mod 2), or None when the values
    are not a permutation.
    """
    if sorted(values) != list(range(1, len(values) + 1)):
        return None
    return inversions(Permutation(tuple(values))) % 2


# ========================= BLOCK COMPOSITION =========================

def block_compose(t: Permutation, v: Permutation, i: int) -> Permutation:
    """
    t o_i v in S_{n+k-1}: position i of t is replaced by a block of k positions.

    Logic:
    - positions before the block keep t(j), shifted up by k-1 when t(j) > t(i);
    - block positions i..i+k-1 take the values t(i) + v(.) - 1;
    - positions after the block read t(j-k+1) with the same shift.
    """
    n, k = t.size, v.size
    if not 1 <= i <= n:
        raise ShapeError(f"slot {i} out of range for arity {n}")
    if k < 1:
        raise ShapeError("block composition needs k >= 1; use delete_position for corks")
    pivot = t(i)

    def shift(value: int) -> int:
        return value if value < pivot else value + k - 1

    images = []
    for j in range(1, n + k):
        if j < i:
            images.append(shift(t(j)))
        elif j <= i + k - 1:
            images.append(pivot + v(j - i + 1) - 1)
        else:
            images.append(shift(t(j - k + 1)))
    return Permutation(tuple(images))


def decompose_block(s: Permutation, n: int, k: int, i: int) -> Optional[Tuple[Permutation, Permutation]]:
    """
    The unique (t, v) with t o_i v = s, or None when s is not (n,k,i)-admissible.

    s admits a decomposition exactly when the block positions i..i+k-1 carry
    consecutive values.
    """
    if s.size != n + k - 1 or n < 1 or k < 1:
        raise ShapeError(f"dimension mismatch: |s|={s.size}, n={n}, k={k}")
    if not 1 <= i <= n:
        raise ShapeError(f"slot {i} out of range for arity {n}")
    block = s.images[i - 1:i + k - 1]
    low = min(block)
    if sorted(block) != list(range(low, low + k)):
        return None
    v = Permutation(tuple(value - low + 1 for value in block))

    def unshift(value: int) -> int:
        return value if value < low else value - k + 1

    outer = list(s.images[:i - 1]) + [low] + list(s.images[i + k - 1:])
    t = Permutation(tuple(low if j == i - 1 else unshift(value) for j, value in enumerate(outer)))
    return t, v


def delete_position(t: Permutation, i: int) -> Permutation:
    """t o_i () for the arity-0 unit: drop position i and renormalize the values."""
    if not 1 <= i <= t.size:
        raise ShapeError(f"slot {i} out of range for arity {t.size}")
    removed = t(i)
    return Permutation(tuple(
        value if value < removed else value - 1
        for j, value in enumerate(t.images, start=1)
        if j != i
    ))


def insert_position(s: Permutation, i: int) -> List[Permutation]:
    """
    Every t in S_{n+1} with delete_position(t, i) = s.

    There are n+1 of them, one for each value taken at position i; the
    decomposition against the arity-0 unit is not unique.
    """
    n = s.size
    if not 1 <= i <= n + 1:
        raise ShapeError(f"slot {i} out of range for arity {n + 1}")
    preimages = []
    for value in range(1, n + 2):
        rest = [x if x < value else x + 1 for x in s.images]
        preimages.append(Permutation(tuple(rest[:i - 1] + [value] + rest[i - 1:])))
    return preimages


if __name__ == "__main__":
    # Quick Test
    t, v = Permutation.of(2, 1), Permutation.of(2, 1)
    for slot in (1, 2):
        s = block_compose(t, v, slot)
        print(f"{t} o_{slot} {v} = {s} -> {decompose_block(s, 2, 2, slot)}")
