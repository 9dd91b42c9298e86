"""
Barratt-Eccles tuples: the basis of E(n) and of its arity-wise dual E*(n).

A basis tuple (s_0, ..., s_r) has pairwise-distinct entries and degree r.
Linear combinations are dicts {BETuple: residue}. The dual differential
inserts a new permutation, its transpose deletes one; partial composition
walks lattice paths and partial decomposition is its transpose.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations as _itertools_permutations
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from shared_utils import setup_logging, get_insertion_range
from partition_linf.errors import ShapeError
from partition_linf.scalars import PrimeField, Scalar, add_term, sign_power
from partition_linf import permutations as perms
from partition_linf.permutations import Permutation

logger = setup_logging(__name__)

H, V = "H", "V"
LatticePath = Tuple[str, ...]


@dataclass(frozen=True, order=True)
class BETuple:
    """A tuple of pairwise-distinct permutations of one arity."""

    arity: int
    perms: Tuple[Permutation, ...]

    def __post_init__(self):
        if not self.perms:
            raise ShapeError("a Barratt-Eccles tuple needs at least one permutation")
        if any(s.size != self.arity for s in self.perms):
            raise ShapeError(f"all permutations of {self.perms} must have size {self.arity}")
        if len(set(self.perms)) != len(self.perms):
            raise ShapeError(f"entries of {self.perms} must be pairwise distinct")

    @classmethod
    def of(cls, arity: int, *images: Sequence[int]) -> "BETuple":
        return cls(arity, tuple(Permutation(tuple(x)) for x in images))

    @property
    def degree(self) -> int:
        return len(self.perms) - 1

    def to_json(self) -> dict:
        return {"arity": self.arity, "perms": [s.to_json() for s in self.perms]}

    @classmethod
    def from_json(cls, data: dict) -> "BETuple":
        return cls.of(int(data["arity"]), *data["perms"])

    def __repr__(self) -> str:
        return "(" + ",".join(map(repr, self.perms)) + ")"


# The arity-0 unit: the single element of S_0. Corks carry it implicitly.
CORK_LABEL = BETuple(0, (Permutation(()),))


def unit(n: int) -> BETuple:
    """The degree-0 tuple (id_n)."""
    return BETuple(n, (perms.identity(n),))


@lru_cache(maxsize=None)
def all_tuples(n: int, r: int) -> Tuple[BETuple, ...]:
    """Every basis tuple of arity n and degree r, in lexicographic order."""
    if r < 0:
        return ()
    return tuple(BETuple(n, entries) for entries in _itertools_permutations(perms.all_permutations(n), r + 1))


def act_left(sigma: Permutation, w: BETuple) -> BETuple:
    """sigma.w = (sigma s_0, ..., sigma s_r)."""
    return BETuple(w.arity, tuple(perms.compose(sigma, s) for s in w.perms))


def act_right(w: BETuple, rho: Permutation) -> BETuple:
    """w.rho = (s_0 rho, ..., s_r rho), the action on positions."""
    return BETuple(w.arity, tuple(perms.compose(s, rho) for s in w.perms))


def normalize(w: BETuple) -> Tuple[BETuple, Permutation]:
    """
    Returns (w.rho, rho) with rho = s_0^{-1}, so the first entry becomes the identity.
    """
    rho = perms.inverse(w.perms[0])
    return act_right(w, rho), rho


# ========================= DIFFERENTIALS =========================

def _resolve_mode(mode: Optional[str]) -> str:
    mode = mode or get_insertion_range()
    if mode not in ("full", "displayed"):
        raise ShapeError(f"unknown insertion range '{mode}'")
    return mode


@lru_cache(maxsize=None)
def _dual_differential(w: BETuple, p: int, mode: str) -> Tuple[Tuple[BETuple, int], ...]:
    out: Dict[BETuple, int] = {}
    r = w.degree
    last_spot = r + 1 if mode == "full" else r
    for sigma in perms.all_permutations(w.arity):
        if sigma in w.perms:
            continue
        for spot in range(last_spot + 1):
            entries = w.perms[:spot] + (sigma,) + w.perms[spot:]
            add_term(out, BETuple(w.arity, entries), sign_power(spot, p), p)
    return tuple(sorted(out.items()))


def dual_differential(w: BETuple, p: int, mode: Optional[str] = None) -> Dict[BETuple, int]:
    """
    d2(s_0..s_r) = sum over sigma not among the s_j and over spots i of (-1)^i (.., sigma at i, ..).

    Spots run over 0..r+1 in 'full' mode and 0..r in 'displayed' mode.
    """
    return dict(_dual_differential(w, p, _resolve_mode(mode)))


@lru_cache(maxsize=None)
def _be_differential(w: BETuple, p: int, mode: str) -> Tuple[Tuple[BETuple, int], ...]:
    out: Dict[BETuple, int] = {}
    r = w.degree
    if r == 0:
        return ()
    last_face = r if mode == "full" else r - 1
    for i in range(last_face + 1):
        add_term(out, BETuple(w.arity, w.perms[:i] + w.perms[i + 1:]), sign_power(i, p), p)
    return tuple(sorted(out.items()))


def be_differential(w: BETuple, p: int, mode: Optional[str] = None) -> Dict[BETuple, int]:
    """The transpose of dual_differential: alternating sum of faces (the last face omitted in 'displayed' mode)."""
    return dict(_be_differential(w, p, _resolve_mode(mode)))


def apply_linear(op, element: Dict, p: int, **kwargs) -> Dict:
    out: Dict = {}
    for key, coeff in element.items():
        for image, c in op(key, p, **kwargs).items():
            add_term(out, image, coeff * c, p)
    return out


# ========================= LATTICE PATHS =========================

def lattice_paths(a: int, b: int) -> Iterator[LatticePath]:
    """Monotone paths (0,0) -> (a,b) as words in H and V."""
    if a == 0 and b == 0:
        yield ()
        return
    if a > 0:
        for rest in lattice_paths(a - 1, b):
            yield (H,) + rest
    if b > 0:
        for rest in lattice_paths(a, b - 1):
            yield (V,) + rest


def lattice_sign_exponent(phi: LatticePath) -> int:
    """Number of (V before H) pairs: the inversions of the shuffle moving every H first."""
    seen_v = 0
    exponent = 0
    for step in phi:
        if step == V:
            seen_v += 1
        else:
            exponent += seen_v
    return exponent


def lattice_sign(phi: LatticePath, field: PrimeField) -> Scalar:
    return field(sign_power(lattice_sign_exponent(phi), field.p))


# ========================= COMPOSITION / DECOMPOSITION =========================

@lru_cache(maxsize=None)
def _partial_compose(x: BETuple, y: BETuple, i: int, p: int) -> Tuple[Tuple[BETuple, int], ...]:
    out: Dict[BETuple, int] = {}
    arity = x.arity + y.arity - 1
    for phi in lattice_paths(x.degree, y.degree):
        a = b = 0
        entries = [_compose_entry(x.perms[0], y.perms[0], i)]
        for step in phi:
            if step == H:
                a += 1
            else:
                b += 1
            entries.append(_compose_entry(x.perms[a], y.perms[b], i))
        if len(set(entries)) != len(entries):
            continue
        add_term(out, BETuple(arity, tuple(entries)), sign_power(lattice_sign_exponent(phi), p), p)
    return tuple(sorted(out.items()))


def _compose_entry(s: Permutation, t: Permutation, i: int) -> Permutation:
    if t.size == 0:
        return perms.delete_position(s, i)
    return perms.block_compose(s, t, i)


def partial_compose(x: BETuple, y: BETuple, i: int, p: int) -> Dict[BETuple, int]:
    """
    x o_i y: sum over lattice paths of the entrywise block compositions along the path.

    Tuples with a repeated entry are not basis elements and are dropped; this
    only happens when y is the arity-0 unit.
    """
    if not 1 <= i <= x.arity:
        raise ShapeError(f"slot {i} out of range for arity {x.arity}")
    return dict(_partial_compose(x, y, i, p))


@lru_cache(maxsize=None)
def _partial_decompose(w: BETuple, n: int, k: int, i: int, p: int) -> Tuple[Tuple[Tuple[BETuple, BETuple], int], ...]:
    pieces = [perms.decompose_block(s, n, k, i) for s in w.perms]
    if any(piece is None for piece in pieces):
        return ()
    out: Dict[Tuple[BETuple, BETuple], int] = {}
    for phi in product((H, V), repeat=w.degree):
        outer = [pieces[0][0]]
        inner = [pieces[0][1]]
        admissible = True
        for t, step in enumerate(phi):
            (o0, i0), (o1, i1) = pieces[t], pieces[t + 1]
            if step == H:
                if i0 != i1:
                    admissible = False
                    break
                outer.append(o1)
            else:
                if o0 != o1:
                    admissible = False
                    break
                inner.append(i1)
        if not admissible:
            continue
        if len(set(outer)) != len(outer) or len(set(inner)) != len(inner):
            continue
        key = (BETuple(n, tuple(outer)), BETuple(k, tuple(inner)))
        add_term(out, key, sign_power(lattice_sign_exponent(phi), p), p)
    return tuple(sorted(out.items()))


def partial_decompose(w: BETuple, n: int, k: int, i: int, p: int) -> Dict[Tuple[BETuple, BETuple], int]:
    """
    Delta_i^{n,k}: E*(n+k-1) -> E*(n) (x) E*(k) for k >= 1.

    Zero as soon as one entry has no (n,k,i) block decomposition; otherwise a
    signed sum over the lattice paths along which the tuple is admissible.
    """
    if w.arity != n + k - 1:
        raise ShapeError(f"arity mismatch: tuple of arity {w.arity} cannot split as ({n},{k})")
    if k < 1:
        raise ShapeError("use cork_decompose for the arity-0 factor")
    if not 1 <= i <= n:
        raise ShapeError(f"slot {i} out of range for arity {n}")
    return dict(_partial_decompose(w, n, k, i, p))


@lru_cache(maxsize=None)
def cork_decompose(w: BETuple, i: int) -> Tuple[BETuple, ...]:
    """
    Every x in E*(n+1) with x o_i (unit of arity 0) = w.

    Each entry has n+1 preimages; choices producing a repeated entry are dropped.
    """
    if not 1 <= i <= w.arity + 1:
        raise ShapeError(f"slot {i} out of range for arity {w.arity + 1}")
    choices = [perms.insert_position(s, i) for s in w.perms]
    found = []
    for entries in product(*choices):
        if len(set(entries)) == len(entries):
            found.append(BETuple(w.arity + 1, entries))
    return tuple(found)


# ========================= PAIRINGS & SIGN MAPS =========================

def pairing(x: BETuple, y: BETuple) -> int:
    """Kronecker pairing of basis tuples."""
    if x.arity != y.arity:
        raise ShapeError(f"cannot pair arities {x.arity} and {y.arity}")
    return 1 if x == y else 0


def pair_elements(a: Dict, b: Dict, p: int) -> int:
    """Bilinear extension of the pairing to sparse combinations."""
    return sum(coeff * b.get(key, 0) for key, coeff in a.items()) % p


def epsilon_s(w: BETuple, s: int, field: PrimeField) -> Scalar:
    """
    sign of (s_0(1), ..., s_{s-1}(1)) when it is a permutation of {1..s}, else 0.
    """
    if s < 1:
        raise ShapeError("epsilon_s is defined for s >= 1")
    if s > len(w.perms):
        raise ShapeError(f"epsilon_{s} needs at least {s} entries, tuple has {len(w.perms)}")
    parity = perms.sequence_sign([sigma(1) for sigma in w.perms[:s]])
    if parity is None:
        return field.zero
    return field(sign_power(parity, field.p))


# ========================= INVARIANT CHECKS =========================

def check_d_squared(max_arity: int, max_degree: int, p: int, mode: Optional[str] = None) -> List[BETuple]:
    """Tuples on which d2 o d2 does not vanish (empty list means PASS)."""
    failures = []
    for n in range(1, max_arity + 1):
        for r in range(max_degree + 1):
            for w in all_tuples(n, r):
                if apply_linear(dual_differential, dual_differential(w, p, mode), p, mode=mode):
                    failures.append(w)
    return failures


def check_adjointness(max_arity: int, max_degree: int, p: int, mode: Optional[str] = None) -> List[Tuple[BETuple, BETuple]]:
    """Pairs (x, y) with <be_differential(x), y> != <x, dual_differential(y)>."""
    failures = []
    for n in range(1, max_arity + 1):
        for r in range(1, max_degree + 1):
            for x in all_tuples(n, r):
                dx = be_differential(x, p, mode)
                for y in all_tuples(n, r - 1):
                    if dx.get(y, 0) != dual_differential(y, p, mode).get(x, 0):
                        failures.append((x, y))
    return failures


def check_duality(max_arity: int, max_degree: int, p: int) -> List[Tuple[BETuple, BETuple, int, BETuple]]:
    """
    Witnesses of <Delta_i(z), x (x) y> != <z, x o_i y> for n, k <= max_arity.
    """
    failures = []
    for n in range(1, max_arity + 1):
        for k in range(1, max_arity + 1):
            for i in range(1, n + 1):
                for a in range(max_degree + 1):
                    for b in range(max_degree + 1):
                        for x in all_tuples(n, a):
                            for y in all_tuples(k, b):
                                composed = partial_compose(x, y, i, p)
                                for z in all_tuples(n + k - 1, a + b):
                                    left = partial_decompose(z, n, k, i, p).get((x, y), 0)
                                    if left != composed.get(z, 0):
                                        failures.append((x, y, i, z))
    return failures


def coleibniz_defect(w: BETuple, n: int, k: int, i: int, p: int,
                     mode: Optional[str] = None, convention: str = "koszul") -> Dict[Tuple[BETuple, BETuple], int]:
    """
    Delta(d2 w) - (d2 (x) 1 + s 1 (x) d2) Delta(w), with s = (-1)^deg(x) under
    the 'koszul' convention and s = 1 under 'plain'.
    """
    out: Dict[Tuple[BETuple, BETuple], int] = {}
    for z, c in dual_differential(w, p, mode).items():
        for key, c2 in partial_decompose(z, n, k, i, p).items():
            add_term(out, key, c * c2, p)
    for (x, y), c in partial_decompose(w, n, k, i, p).items():
        for dx, c2 in dual_differential(x, p, mode).items():
            add_term(out, (dx, y), -c * c2, p)
        twist = sign_power(x.degree, p) if convention == "koszul" else 1
        for dy, c2 in dual_differential(y, p, mode).items():
            add_term(out, (x, dy), -c * c2 * twist, p)
    return out


def check_coleibniz(max_total_arity: int, max_degree: int, p: int,
                    mode: Optional[str] = None, convention: str = "koszul") -> List[Tuple[BETuple, int, int, int]]:
    """Witnesses (w, n, k, i) of a nonzero co-Leibniz defect with n, k >= 2."""
    failures = []
    for m in range(3, max_total_arity + 1):
        for n in range(2, m):
            k = m - n + 1
            for i in range(1, n + 1):
                for r in range(max_degree + 1):
                    for w in all_tuples(m, r):
                        if coleibniz_defect(w, n, k, i, p, mode, convention):
                            failures.append((w, n, k, i))
    return failures
