"""
Finite chain complexes over F_p, normalized chains of the standard simplices,
the point and interval coalgebra structure maps, and the abelian Dold-Kan side.

Faces of the standard n-simplex are named by their vertices: "a0", "a1",
"a01", "a012", ... A face of dimension k sits in degree k and
d(a_{v0..vk}) = sum_i (-1)^i a_{v0..^vi..vk}.

A structure map component is a map E(n) -> C^{(x) n} of the same degree as
the generator, stored as (label, word) -> coefficient.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from shared_utils import setup_logging, DEFAULT_CAP
from partition_linf.errors import CapExceededError, ShapeError
from partition_linf.scalars import PrimeField, add_into, add_term, permutation_koszul_exponent, sign_power
from partition_linf import barratt_eccles as be
from partition_linf.barratt_eccles import CORK_LABEL, BETuple, all_tuples, epsilon_s
from partition_linf.permutations import all_permutations, inverse
from partition_linf.linalg import rank_mod_p, sparse_to_rows
from partition_linf.algebra import Element, GradedModule, TruncatedAlgebra, elements_of_degree
from partition_linf.mc import UnionFind

logger = setup_logging(__name__)

Word = Tuple[str, ...]
Terms = Dict[Tuple[BETuple, Word], int]


# ========================= CHAIN COMPLEXES =========================

@dataclass
class ChainComplex:
    """A graded module with a degree -1 differential."""

    module: GradedModule
    p: int
    d: Dict[str, Element] = field(default_factory=dict)

    def __post_init__(self):
        PrimeField(self.p)
        reduced = {}
        for g, image in self.d.items():
            image = {h: c % self.p for h, c in image.items() if c % self.p}
            for h in image:
                if self.module.degree(h) != self.module.degree(g) - 1:
                    raise ShapeError(f"d({g}) = {h} does not lower the degree by one")
            if image:
                reduced[g] = image
        self.d = reduced

    def apply_d(self, element: Element) -> Element:
        out: Element = {}
        for g, c in element.items():
            add_into(out, self.d.get(g, {}), self.p, c)
        return out

    def is_complex(self) -> bool:
        return all(not self.apply_d(self.d.get(g, {})) for g in self.module.names)

    @property
    def degrees(self) -> List[int]:
        return sorted({deg for _, deg in self.module.basis})

    def rank_of_d(self, degree: int) -> int:
        """Rank of d restricted to the degree-`degree` part."""
        sources = self.module.names_of_degree(degree)
        targets = self.module.names_of_degree(degree - 1)
        if not sources or not targets:
            return 0
        index = {name: i for i, name in enumerate(targets)}
        return rank_mod_p(sparse_to_rows([self.d.get(g, {}) for g in sources], index, self.p), self.p)

    @classmethod
    def from_algebra(cls, alg: TruncatedAlgebra) -> "ChainComplex":
        """The underlying predifferential module of an algebra."""
        return cls(alg.module, alg.p, dict(alg.d))

    @classmethod
    def from_json(cls, data: dict) -> "ChainComplex":
        module = GradedModule(tuple((b["name"], b["degree"]) for b in data["basis"]))
        p = data.get("p", 2)
        d: Dict[str, Element] = {}
        for entry in data.get("d", []):
            add_term(d.setdefault(entry["from"], {}), entry["to"], entry["coeff"], p)
        return cls(module, p, d)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "basis": [{"name": name, "degree": degree} for name, degree in self.module.basis],
            "d": [
                {"from": g, "to": h, "coeff": c}
                for g in self.module.names if g in self.d
                for h, c in sorted(self.d[g].items())
            ],
        }


def homology(c: ChainComplex) -> Dict[int, int]:
    """
    dim H_k = dim C_k - rank d_k - rank d_{k+1} for every degree present.

    Raises:
        ShapeError: If d does not square to zero.
    """
    if not c.is_complex():
        logger.error("Homology requested for a module whose differential does not square to zero")
        raise ShapeError("d^2 != 0: homology is undefined")
    dims = {}
    for k in c.degrees:
        dims[k] = len(c.module.names_of_degree(k)) - c.rank_of_d(k) - c.rank_of_d(k + 1)
    return dims


# ========================= SIMPLICES =========================

def face_name(vertices: Sequence[int]) -> str:
    return "a" + "".join(str(v) for v in vertices)


@lru_cache(maxsize=None)
def simplex_chains(n: int, p: int = 2) -> ChainComplex:
    """Normalized chains on the standard n-simplex."""
    if not 0 <= n <= 9:
        raise ShapeError(f"simplex dimension {n} out of range")
    basis, d = [], {}
    for k in range(n + 1):
        for face in combinations(range(n + 1), k + 1):
            name = face_name(face)
            basis.append((name, k))
            if k:
                d[name] = {}
                for i in range(k + 1):
                    add_term(d[name], face_name(face[:i] + face[i + 1:]), sign_power(i, p), p)
    return ChainComplex(GradedModule(tuple(basis)), p, d)


def face_restriction(simplex_map: Dict[str, Element], n: int, i: int) -> Dict[str, Element]:
    """f o delta_i: the restriction of a map out of C(Delta^n) to the face missing vertex i."""
    shift = lambda v: v if v < i else v + 1
    out = {}
    for k in range(n):
        for face in combinations(range(n), k + 1):
            out[face_name(face)] = simplex_map[face_name(tuple(shift(v) for v in face))]
    return out


def _freeze(element: Element) -> Tuple[Tuple[str, int], ...]:
    return tuple(sorted(element.items()))


def dold_kan_gamma(V: ChainComplex, n: int, cap: int = DEFAULT_CAP) -> List[Dict[str, Element]]:
    """
    Every chain map C(Delta^n) -> V, n <= 2, as {face name: image}.

    Faces are assigned by increasing dimension; a candidate image x of a face
    is kept when d(x) equals the image of the face's boundary.
    """
    if not 0 <= n <= 2:
        raise ShapeError(f"only levels 0, 1 and 2 are available, got {n}")
    source = simplex_chains(n, V.p)
    faces = source.module.basis
    candidates = {k: elements_of_degree(V, k, cap) for _, k in faces}
    found: List[Dict[str, Element]] = []
    visited = 0

    def extend(partial: Dict[str, Element], position: int) -> None:
        nonlocal visited
        if position == len(faces):
            found.append(dict(partial))
            return
        name, k = faces[position]
        target: Element = {}
        for face, c in source.d.get(name, {}).items():
            add_into(target, partial[face], V.p, c)
        for x in candidates[k]:
            visited += 1
            if visited > cap:
                logger.error(f"Dold-Kan enumeration at level {n} exceeded cap {cap}")
                raise CapExceededError(f"Dold-Kan level {n}", visited, cap)
            if V.apply_d(x) == target:
                partial[name] = x
                extend(partial, position + 1)
                del partial[name]

    extend({}, 0)
    logger.info(f"Gamma(V)_{n} has {len(found)} simplices")
    return found


def gamma_components(V: ChainComplex, cap: int = DEFAULT_CAP) -> List[List[Element]]:
    """Path components of Gamma(V): vertices are 0-cycles, edges are 1-simplices."""
    vertices = [f["a0"] for f in dold_kan_gamma(V, 0, cap)]
    uf = UnionFind()
    for v in vertices:
        uf.find(_freeze(v))
    for f in dold_kan_gamma(V, 1, cap):
        uf.union(_freeze(f["a0"]), _freeze(f["a1"]))
    classes: Dict[tuple, List[Element]] = {}
    for v in vertices:
        classes.setdefault(uf.find(_freeze(v)), []).append(v)
    return list(classes.values())


# ========================= COALGEBRAS =========================

def _permuted_word(sigma, word: Word, degrees: Sequence[int], p: int) -> Tuple[Word, int]:
    """sigma^{-1} acting on tensor factors: (x_{sigma^-1(1)}, ..) with its Koszul sign."""
    order = [inverse(sigma)(j) - 1 for j in range(1, len(word) + 1)]
    return tuple(word[j] for j in order), sign_power(permutation_koszul_exponent(degrees, order), p)


@dataclass(frozen=True)
class PointCoalgebra:
    """Chains on a point: a0 goes to a0 (x) .. (x) a0 under every degree-0 label of arity != 1."""

    p: int = 2

    @property
    def chains(self) -> ChainComplex:
        return simplex_chains(0, self.p)

    def structure_map(self, generator: str, n: int, r: int) -> Terms:
        if generator != "a0":
            raise ShapeError(f"the point has no generator '{generator}'")
        return _vertex_terms("a0", n, r)


def _vertex_terms(name: str, n: int, r: int) -> Terms:
    if n == 1 or r != 0:
        return {}
    if n == 0:
        return {(CORK_LABEL, ()): 1}
    return {(w, (name,) * n): 1 for w in all_tuples(n, 0)}


@dataclass(frozen=True)
class IntervalCoalgebra:
    """Chains on the 1-simplex: a0, a1 in degree 0, a01 in degree 1, d(a01) = a1 - a0."""

    p: int = 2

    @property
    def chains(self) -> ChainComplex:
        return simplex_chains(1, self.p)

    def structure_map(self, generator: str, n: int, r: int) -> Terms:
        """
        For a0 and a1 the point component. For a01, with s = r + 1:
        sum over a + b = n - s, w in E(n)_{s-1} and sigma in S_n of
        eps_s(w) [c_n^{sigma.w} -> sigma^{-1}.(a01^s, a0^a, a1^b)].
        """
        if generator in ("a0", "a1"):
            return _vertex_terms(generator, n, r)
        if generator != "a01":
            raise ShapeError(f"the interval has no generator '{generator}'")
        return dict(_interval_terms(n, r, self.p))


@lru_cache(maxsize=None)
def _interval_terms(n: int, r: int, p: int) -> Tuple[Tuple[Tuple[BETuple, Word], int], ...]:
    s = r + 1
    if n < 2 or s > n:
        return ()
    field_p = PrimeField(p)
    out: Terms = {}
    for a in range(n - s + 1):
        word = ("a01",) * s + ("a0",) * a + ("a1",) * (n - s - a)
        degrees = [1 if g == "a01" else 0 for g in word]
        for w in all_tuples(n, r):
            eps = int(epsilon_s(w, s, field_p))
            if not eps:
                continue
            for sigma in all_permutations(n):
                moved, sign = _permuted_word(sigma, word, degrees, p)
                add_term(out, (be.act_left(sigma, w), moved), eps * sign, p)
    return tuple(sorted(out.items()))


def vertex_restriction(coalg: IntervalCoalgebra, vertex: str, n: int, r: int) -> Terms:
    """The a0 or a1 component renamed to the point generator."""
    return {(w, tuple("a0" for _ in word)): c for (w, word), c in coalg.structure_map(vertex, n, r).items()}


def _component(coalg, generator: str, u: BETuple) -> Dict[Word, int]:
    return {word: c for (w, word), c in coalg.structure_map(generator, u.arity, u.degree).items() if w == u}


def _word_differential(chains: ChainComplex, word: Word, p: int) -> Dict[Word, int]:
    out: Dict[Word, int] = {}
    prefix = 0
    for j, g in enumerate(word):
        sign = sign_power(prefix, p)
        for h, c in chains.d.get(g, {}).items():
            add_term(out, word[:j] + (h,) + word[j + 1:], c * sign, p)
        prefix += chains.module.degree(g)
    return out


def check_chain_map(coalg, max_arity: int = 3, max_degree: int = 2, mode: Optional[str] = None,
                    quiet: bool = True) -> List[dict]:
    """
    d o Delta(x) - (-1)^{|x|} Delta(x) o d_E = Delta(dx) on every label of arity 2..max_arity
    and degree <= max_degree, for every generator x; returns the residues.
    """
    p = coalg.p
    chains = coalg.chains
    failures = []
    labels = [u for n in range(2, max_arity + 1) for r in range(max_degree + 1) for u in all_tuples(n, r)]
    for x in chains.module.names:
        sign_x = sign_power(chains.module.degree(x), p)
        for u in tqdm(labels, desc=f"Chain map at {x}", disable=quiet):
            residue: Dict[Word, int] = {}
            for word, c in _component(coalg, x, u).items():
                add_into(residue, _word_differential(chains, word, p), p, c)
            for face, c in be.be_differential(u, p, mode).items():
                add_into(residue, _component(coalg, x, face), p, -sign_x * c)
            for y, c in chains.d.get(x, {}).items():
                add_into(residue, _component(coalg, y, u), p, -c)
            if residue:
                failures.append({
                    "check": "chain_map",
                    "identity": "d Delta(x) - (-1)^|x| Delta(x) d_E = Delta(d x)",
                    "witness": {"generator": x, "label": u.to_json(),
                                "residue": [{"word": list(word), "coeff": c} for word, c in sorted(residue.items())]},
                })
    if failures:
        logger.warning(f"Structure map fails the chain-map identity on {len(failures)} components")
    return failures


def terms_to_json(terms: Terms) -> List[dict]:
    return [{"label": w.to_json(), "word": list(word), "coeff": c} for (w, word), c in sorted(terms.items())]
