"""
Exact arithmetic in the prime field F_p and Koszul sign bookkeeping.

Sparse linear combinations throughout the package are plain dicts mapping a
hashable basis key to an int residue in [0, p); `add_term` keeps them free of
zero coefficients.
"""

from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, Iterator, Sequence, Tuple, TypeVar

from shared_utils import setup_logging
from partition_linf.errors import FieldError

logger = setup_logging(__name__)

K = TypeVar("K", bound=Hashable)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class PrimeField:
    """The prime field F_p; the modulus is checked by trial division."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not _is_prime(self.p):
            logger.error(f"Rejected modulus {self.p!r}: not a prime.")
            raise FieldError(f"p must be a prime integer, got {self.p!r}")

    def __call__(self, value: int) -> "Scalar":
        return Scalar(value % self.p, self.p)

    @property
    def zero(self) -> "Scalar":
        return Scalar(0, self.p)

    @property
    def one(self) -> "Scalar":
        return Scalar(1, self.p)

    def elements(self) -> Iterator["Scalar"]:
        for v in range(self.p):
            yield Scalar(v, self.p)


@dataclass(frozen=True)
class Scalar:
    """A residue in [0, p). Arithmetic with a different modulus raises FieldError."""

    value: int
    p: int

    def _check(self, other) -> "Scalar":
        if isinstance(other, int):
            return Scalar(other % self.p, self.p)
        if other.p != self.p:
            raise FieldError(f"mixed moduli: {self.p} and {other.p}")
        return other

    def __add__(self, other) -> "Scalar":
        other = self._check(other)
        return Scalar((self.value + other.value) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other) -> "Scalar":
        other = self._check(other)
        return Scalar((self.value - other.value) % self.p, self.p)

    def __mul__(self, other) -> "Scalar":
        other = self._check(other)
        return Scalar((self.value * other.value) % self.p, self.p)

    __rmul__ = __mul__

    def __neg__(self) -> "Scalar":
        return Scalar((-self.value) % self.p, self.p)

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise FieldError("division by zero")
        return Scalar(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other) -> "Scalar":
        return self * self._check(other).inverse()

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.value == other % self.p
        if isinstance(other, Scalar):
            return self.p == other.p and self.value == other.value
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.p))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.p})"


# ========================= SIGNS =========================

def sign_power(exponent: int, p: int) -> int:
    """(-1)^exponent as a residue mod p."""
    return 1 if exponent % 2 == 0 else (p - 1) % p


def koszul_sign(transpositions: Iterable[Tuple[int, int]], field: PrimeField) -> Scalar:
    """
    Sign of moving graded symbols past each other.

    Each pair (a, b) records one transposition of a degree-a symbol past a
    degree-b symbol; the result is (-1)^(sum of a*b). Always 1 at p = 2.
    """
    exponent = sum(a * b for a, b in transpositions)
    return field(sign_power(exponent, field.p))


def permutation_koszul_exponent(degrees: Sequence[int], order: Sequence[int]) -> int:
    """
    Exponent of the Koszul sign for reordering a word.

    `order[j]` is the (0-based) index of the original symbol placed at position j.
    Every inverted pair contributes the product of the two degrees.
    """
    exponent = 0
    for x in range(len(order)):
        for y in range(x + 1, len(order)):
            if order[x] > order[y]:
                exponent += degrees[order[x]] * degrees[order[y]]
    return exponent


# ========================= SPARSE COMBINATIONS =========================

def add_term(target: Dict[K, int], key: K, coeff: int, p: int) -> None:
    """Adds coeff * key into target, dropping the key if it cancels."""
    value = (target.get(key, 0) + coeff) % p
    if value:
        target[key] = value
    else:
        target.pop(key, None)


def add_into(target: Dict[K, int], source: Dict[K, int], p: int, scale: int = 1) -> None:
    for key, coeff in source.items():
        add_term(target, key, coeff * scale, p)


def scaled(source: Dict[K, int], scale: int, p: int) -> Dict[K, int]:
    out: Dict[K, int] = {}
    add_into(out, source, p, scale)
    return out
