"""
Free truncated algebras and the cobar algebras of the point and the interval.

The carrier of a free algebra on a graded module is spanned by canonical
decorated trees (leaves carry generator names) of degree <= W and with at most
`max_leaves` leaves, corks included. Both bounds only grow under d and under
grafting, so dropping the trees outside them is a quotient.

The differential is d1 + d2 + d3:
  - d1 replaces one leaf by the image of its generator,
  - d2 inserts a permutation into one vertex label,
  - d3 splits one vertex along a partial decomposition (and, when curved,
    against the arity-0 unit, which produces a cork),
each passing the Koszul sign of the symbols in front of it in preorder.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from shared_utils import setup_logging, DEFAULT_CAP, DEFAULT_MAX_LEAVES
from partition_linf.errors import CapExceededError, ShapeError
from partition_linf.scalars import PrimeField, add_into, add_term, sign_power
from partition_linf import barratt_eccles as be
from partition_linf.barratt_eccles import BETuple, all_tuples, epsilon_s, unit
from partition_linf.trees import (
    CORK,
    Leaf,
    Node,
    Vertex,
    canonical_labels,
    canonicalize,
    enumerate_scrt,
    homological_degree,
    relabel,
    substitute,
    tree_name,
    tree_sort_key,
    tree_stats,
)
from partition_linf.algebra import (
    BINARY_ID,
    BINARY_SWAP,
    Element,
    GradedModule,
    TruncatedAlgebra,
    curvature_sign,
    elements_of_degree,
    eval_series,
    vertex_differential_terms,
)

logger = setup_logging(__name__)

Series = Dict[Node, int]


@dataclass
class FreeAlgebra:
    """A (quasi-)free truncated algebra with its carrier and differential as a sparse matrix."""

    generators: GradedModule
    p: int
    W: int
    max_leaves: int
    curved: bool
    mode: str
    generator_d: Dict[str, Series]
    carrier: List[Node] = field(default_factory=list)
    differential: Dict[Node, Series] = field(default_factory=dict)

    def leaf_degree(self, name: str) -> int:
        return self.generators.degree(name)

    def degree(self, t: Node) -> int:
        return homological_degree(t, self.leaf_degree)

    def keeps(self, t: Node) -> bool:
        stats = tree_stats(t)
        return stats.degree <= self.W and stats.leaves <= self.max_leaves and (self.curved or not stats.corks)

    def truncated(self, series: Series) -> Series:
        return {t: c for t, c in series.items() if self.keeps(t)}

    def apply_d(self, series: Series) -> Series:
        out: Series = {}
        for t, c in series.items():
            add_into(out, self.differential.get(t, {}), self.p, c)
        return out

    def canonical(self, raw: Node, coeff: int = 1) -> Series:
        """A raw decorated tree as a one-term series in canonical form (empty when truncated)."""
        tree, exponent = canonicalize(raw, self.leaf_degree)
        c = (coeff * sign_power(exponent, self.p)) % self.p
        return {tree: c} if c and self.keeps(tree) else {}

    def export(self) -> TruncatedAlgebra:
        """The carrier as a presented algebra whose corolla tables graft."""
        names = {t: tree_name(t) for t in self.carrier}
        if len(set(names.values())) != len(names):
            raise ShapeError("tree names collide; rename generators away from 'c0' and 'cN[...]' patterns")
        module = GradedModule(tuple((names[t], self.degree(t)) for t in self.carrier))
        rename = lambda series: {names[t]: c for t, c in series.items()}
        d = {names[t]: rename(image) for t, image in self.differential.items() if image}
        l0 = {names[CORK]: 1} if CORK in names else {}
        ops: Dict[BETuple, Dict[Tuple[str, ...], Element]] = {}
        for n in range(2, self.max_leaves + 1):
            tuples = [
                children for children in product(self.carrier, repeat=n)
                if sum(tree_stats(c).leaves for c in children) <= self.max_leaves
                and sum(tree_stats(c).degree for c in children) < self.W
            ]
            for r in range(self.W):
                for w in canonical_labels(n, r):
                    table = {
                        tuple(names[c] for c in children): {names[Vertex(w, children)]: 1}
                        for children in tuples
                        if r + 1 + sum(tree_stats(c).degree for c in children) <= self.W
                    }
                    if table:
                        ops[w] = table
        weights = {names[t]: tree_stats(t).leaves for t in self.carrier}
        generators = tuple(g for g in self.generators.names if Leaf(g) in names)
        logger.info(f"Exported a free algebra with {len(module)} basis trees and {len(ops)} operation labels")
        return TruncatedAlgebra(module, self.p, self.W, d, l0, ops, generators, (self.max_leaves, weights))


# ========================= CARRIER & DIFFERENTIAL =========================

def _carrier(fa: FreeAlgebra, cap: int, quiet: bool) -> List[Node]:
    names = fa.generators.names
    found = set()
    for n in range(fa.max_leaves + 1):
        if n and not names:
            break
        shapes = [t for t in enumerate_scrt(n, fa.W, cap=cap, quiet=True) if fa.keeps(t)]
        for shape in tqdm(shapes, desc=f"Decorating arity {n}", disable=quiet):
            for decoration in product(names, repeat=n):
                found.add(relabel(shape, lambda k: decoration[k - 1]))
                if len(found) > cap:
                    logger.error(f"Free carrier exceeded cap {cap}")
                    raise CapExceededError("free algebra carrier", len(found), cap)
    return sorted(found, key=lambda t: (tree_stats(t).degree, tree_stats(t).leaves, tree_sort_key(t)))


def _tree_d(fa: FreeAlgebra, t: Node, memo: Dict[Node, Series]) -> Series:
    if t in memo:
        return memo[t]
    out: Series = {}
    if isinstance(t, Leaf):
        out = fa.truncated(fa.generator_d.get(t.key, {}))
    elif isinstance(t, Vertex):
        children = t.children
        degrees = tuple(fa.degree(c) for c in children)
        for _, tree, c in vertex_differential_terms(t.label, degrees, fa.p, fa.curved, fa.mode):
            grown = substitute(tree, lambda leaf: children[leaf.key - 1])
            if fa.keeps(grown):
                add_term(out, grown, c, fa.p)
        for j, child in enumerate(children):
            sign = sign_power(t.label.degree + 1 + sum(degrees[:j]), fa.p)
            for image, c in _tree_d(fa, child, memo).items():
                grown = Vertex(t.label, children[:j] + (image,) + children[j + 1:])
                if fa.keeps(grown):
                    add_term(out, grown, c * sign, fa.p)
    memo[t] = out
    return out


def _assemble(fa: FreeAlgebra, cap: int, quiet: bool) -> FreeAlgebra:
    fa.carrier = _carrier(fa, cap, quiet)
    memo: Dict[Node, Series] = {}
    for t in tqdm(fa.carrier, desc="Assembling differential", disable=quiet):
        fa.differential[t] = _tree_d(fa, t, memo)
    logger.info(f"Free algebra: {len(fa.carrier)} carrier trees at W={fa.W}, at most {fa.max_leaves} leaves")
    return fa


def build_free(generators: GradedModule, W: int, p: int = 2, max_leaves: int = DEFAULT_MAX_LEAVES,
               d: Optional[Dict[str, Element]] = None, curved: bool = False, mode: Optional[str] = None,
               cap: int = DEFAULT_CAP, quiet: bool = True) -> FreeAlgebra:
    """
    The free truncated algebra on `generators` with linear generator differential `d`.

    Raises:
        CapExceededError: If the carrier grows beyond `cap`.
    """
    PrimeField(p)
    if W < 0 or max_leaves < 1:
        raise ShapeError("need W >= 0 and max_leaves >= 1")
    generator_d: Dict[str, Series] = {}
    for g, image in (d or {}).items():
        series: Series = {}
        for h, c in image.items():
            if generators.degree(h) != generators.degree(g) - 1:
                raise ShapeError(f"d({g}) = {h} does not lower the degree by one")
            add_term(series, Leaf(h), c, p)
        generator_d[g] = series
    fa = FreeAlgebra(generators, p, W, max_leaves, curved, be._resolve_mode(mode), generator_d)
    return _assemble(fa, cap, quiet)


def check_d_squared(fa: FreeAlgebra) -> List[dict]:
    """
    d^2(t) against -(l2[12](cork, t) + l2[21](cork, t)) on every carrier tree (against 0 when uncurved).

    Returns one failure per tree whose defect does not vanish.
    """
    failures = []
    for t in fa.carrier:
        defect = fa.apply_d(fa.differential[t])
        if fa.curved:
            for label in (BINARY_ID, BINARY_SWAP):
                for tree, c in fa.canonical(Vertex(label, (CORK, t))).items():
                    add_term(defect, tree, -c * curvature_sign(fa.p), fa.p)
        if defect:
            failures.append({
                "check": "d_squared",
                "identity": "d^2(t) = -(l2[12](l0,t) + l2[21](l0,t))" if fa.curved else "d^2(t) = 0",
                "witness": {"tree": tree_name(t),
                            "defect": {tree_name(s): c for s, c in sorted(defect.items(), key=lambda x: tree_name(x[0]))}},
            })
    if failures:
        logger.warning(f"d^2 identity fails on {len(failures)} carrier trees")
    return failures


def is_functorial_restriction(small: FreeAlgebra, large: FreeAlgebra) -> bool:
    """True when the carrier of `small` sits inside that of `large` and d agrees on it."""
    members = set(large.carrier)
    return all(t in members and large.differential[t] == small.differential[t] for t in small.carrier)


# ========================= COBAR ALGEBRAS =========================

def _corolla(w: BETuple, children: Sequence[Node]) -> Vertex:
    return Vertex(w, tuple(children))


def point_differential(W: int, max_leaves: int, p: int, name: str = "a0") -> Series:
    """d(a0) = -cork - sum_{n >= 2} c_n^{id}(a0, .., a0), truncated."""
    if W < 1:
        return {}
    out: Series = {CORK: (-1) % p}
    for n in range(2, max_leaves + 1):
        add_term(out, _corolla(unit(n), [Leaf(name)] * n), -1, p)
    return out


def interval_differential(W: int, max_leaves: int, p: int) -> Series:
    """
    d(a01) = a1 - a0 + sum over n >= 2, s + a + b = n, s >= 1, w in E(n)_{s-1}
    of eps_s(w) c_n^w(a01^s, a0^a, a1^b), canonicalized and truncated.
    """
    field_p = PrimeField(p)
    degree = {"a0": 0, "a1": 0, "a01": 1}.get
    out: Series = {Leaf("a1"): 1}
    add_term(out, Leaf("a0"), -1, p)
    for n in range(2, max_leaves + 1):
        for s in range(1, min(n, W) + 1):
            for a in range(n - s + 1):
                word = [Leaf("a01")] * s + [Leaf("a0")] * a + [Leaf("a1")] * (n - s - a)
                for w in all_tuples(n, s - 1):
                    eps = int(epsilon_s(w, s, field_p))
                    if not eps:
                        continue
                    tree, exponent = canonicalize(_corolla(w, word), degree)
                    add_term(out, tree, eps * sign_power(exponent, p), p)
    return out


def cobar_point(W: int, max_leaves: int = DEFAULT_MAX_LEAVES, p: int = 2, mode: Optional[str] = None,
                cap: int = DEFAULT_CAP, quiet: bool = True) -> FreeAlgebra:
    """The quasi-free curved algebra on one degree-0 generator a0."""
    generators = GradedModule((("a0", 0),))
    fa = FreeAlgebra(generators, p, W, max_leaves, True, be._resolve_mode(mode),
                     {"a0": point_differential(W, max_leaves, p)})
    return _assemble(fa, cap, quiet)


def cobar_interval(W: int, max_leaves: int = DEFAULT_MAX_LEAVES, p: int = 2, mode: Optional[str] = None,
                   cap: int = DEFAULT_CAP, quiet: bool = True) -> FreeAlgebra:
    """The quasi-free curved algebra on a0, a1 (degree 0) and a01 (degree 1)."""
    generators = GradedModule((("a0", 0), ("a1", 0), ("a01", 1)))
    generator_d = {
        "a0": point_differential(W, max_leaves, p, "a0"),
        "a1": point_differential(W, max_leaves, p, "a1"),
        "a01": interval_differential(W, max_leaves, p),
    }
    fa = FreeAlgebra(generators, p, W, max_leaves, True, be._resolve_mode(mode), generator_d)
    return _assemble(fa, cap, quiet)


def restrict_to_vertex(fa: FreeAlgebra, vertex: str) -> Dict[str, Series]:
    """d(a_i) of an interval cobar algebra with a_i renamed to a0: the point differential."""
    rename = lambda key: "a0" if key == vertex else key
    return {"a0": {relabel(t, rename): c for t, c in fa.generator_d[vertex].items()}}


# ========================= MORPHISMS =========================

def _budget(alg: TruncatedAlgebra, max_leaves: Optional[int]) -> int:
    return max(max_leaves or 0, alg.max_op_arity, 2)


def morphisms_from_point(alg: TruncatedAlgebra, max_leaves: Optional[int] = None,
                         cap: int = DEFAULT_CAP, quiet: bool = True) -> List[Element]:
    """
    Images of a0 under the algebra maps out of the point cobar algebra: the
    degree-0 elements alpha with d(alpha) = f(d a0).
    """
    series = point_differential(alg.W, _budget(alg, max_leaves), alg.p)
    series = {t: c for t, c in series.items() if tree_stats(t).degree <= alg.W}
    found = []
    for alpha in tqdm(elements_of_degree(alg, 0, cap), desc="Scanning point morphisms", disable=quiet):
        image = eval_series(alg, series, {"a0": alpha})
        add_into(image, alg.apply_d(alpha), alg.p, -1)
        if not image:
            found.append(alpha)
    logger.info(f"{len(found)} morphisms out of the point cobar algebra")
    return found


def morphisms_from_interval(alg: TruncatedAlgebra, max_leaves: Optional[int] = None,
                            cap: int = DEFAULT_CAP, quiet: bool = True) -> List[Tuple[Element, Element, Element]]:
    """
    Triples (alpha, beta, lambda) = images of (a0, a1, a01) under the algebra
    maps out of the interval cobar algebra.
    """
    budget = _budget(alg, max_leaves)
    points = morphisms_from_point(alg, budget, cap, quiet)
    series = {t: c for t, c in interval_differential(alg.W, budget, alg.p).items() if tree_stats(t).degree <= alg.W}
    lambdas = elements_of_degree(alg, 1, cap)
    if len(points) ** 2 * len(lambdas) > cap:
        raise CapExceededError("interval morphisms", len(points) ** 2 * len(lambdas), cap)
    found = []
    for alpha, beta in tqdm(list(product(points, repeat=2)), desc="Scanning interval morphisms", disable=quiet):
        for lam in lambdas:
            image = eval_series(alg, series, {"a0": alpha, "a1": beta, "a01": lam})
            add_into(image, alg.apply_d(lam), alg.p, -1)
            if not image:
                found.append((alpha, beta, lam))
    logger.info(f"{len(found)} morphisms out of the interval cobar algebra")
    return found
