"""
Symmetric corked rooted trees (SCRT).

A node is a Leaf (carrying an input index or a generator name), the Cork
(an unlabelled arity-0 vertex) or a Vertex with a BETuple label and as many
children as its arity (at least two).

Canonical form: at every vertex the first permutation of the label is the
identity. A vertex c^w(T_1..T_m) is identified with c^{w.rho}(T_rho(1)..T_rho(m))
up to the Koszul sign of the reordering, and rho = s_0^{-1} picks the
representative.
"""

import json
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Hashable, Iterator, List, Optional, Tuple, Union

from tqdm import tqdm

from shared_utils import setup_logging, DEFAULT_CAP
from partition_linf.errors import CapExceededError, ShapeError
from partition_linf.scalars import permutation_koszul_exponent
from partition_linf.barratt_eccles import BETuple, all_tuples, normalize

logger = setup_logging(__name__)


@dataclass(frozen=True)
class Leaf:
    key: Hashable


@dataclass(frozen=True)
class Cork:
    pass


@dataclass(frozen=True)
class Vertex:
    label: BETuple
    children: Tuple["Node", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ShapeError("a labelled vertex needs at least two children")
        if self.label.arity != len(self.children):
            raise ShapeError(
                f"label arity {self.label.arity} does not match {len(self.children)} children"
            )


Node = Union[Leaf, Cork, Vertex]
CORK = Cork()
TRIVIAL = Leaf(1)


# ========================= STATISTICS =========================

@dataclass(frozen=True)
class TreeStats:
    degree: int
    weight: int
    arity: int
    corks: int

    @property
    def leaves(self) -> int:
        """Non-cork leaves plus corks: the leaf budget used for truncation."""
        return self.arity + self.corks


@lru_cache(maxsize=None)
def tree_stats(t: Node) -> TreeStats:
    """deg = #corks + sum over vertices of (r_v + 1); weight counts corks as vertices."""
    if isinstance(t, Leaf):
        return TreeStats(0, 0, 1, 0)
    if isinstance(t, Cork):
        return TreeStats(1, 1, 0, 1)
    degree, weight, arity, corks = t.label.degree + 1, 1, 0, 0
    for child in t.children:
        s = tree_stats(child)
        degree += s.degree
        weight += s.weight
        arity += s.arity
        corks += s.corks
    return TreeStats(degree, weight, arity, corks)


def leaves(t: Node) -> List[Hashable]:
    """Leaf keys in depth-first, left-to-right order."""
    if isinstance(t, Leaf):
        return [t.key]
    if isinstance(t, Cork):
        return []
    out: List[Hashable] = []
    for child in t.children:
        out.extend(leaves(child))
    return out


def vertices(t: Node) -> Iterator[Vertex]:
    if isinstance(t, Vertex):
        yield t
        for child in t.children:
            yield from vertices(child)


# ========================= CANONICAL FORM =========================

def homological_degree(t: Node, leaf_degree: Callable[[Hashable], int]) -> int:
    """Sum of the leaf degrees minus the tree degree."""
    return sum(leaf_degree(k) for k in leaves(t)) - tree_stats(t).degree


def _zero_degree(_key: Hashable) -> int:
    return 0


def canonicalize(t: Node, leaf_degree: Callable[[Hashable], int] = _zero_degree) -> Tuple[Node, int]:
    """
    Returns (canonical tree, sign exponent).

    The sign exponent collects the Koszul signs of every child reordering,
    with children graded by their homological degree.
    """
    if not isinstance(t, Vertex):
        return t, 0
    exponent = 0
    children = []
    for child in t.children:
        c, e = canonicalize(child, leaf_degree)
        children.append(c)
        exponent += e
    label, rho = normalize(t.label)
    order = [rho(j) - 1 for j in range(1, label.arity + 1)]
    if rho.images != tuple(range(1, label.arity + 1)):
        degrees = [homological_degree(c, leaf_degree) for c in children]
        exponent += permutation_koszul_exponent(degrees, order)
    return Vertex(label, tuple(children[j] for j in order)), exponent


def is_canonical(t: Node) -> bool:
    return all(v.label.perms[0].images == tuple(range(1, v.label.arity + 1)) for v in vertices(t))


# ========================= GRAFTING =========================

def relabel(t: Node, mapping: Callable[[Hashable], Hashable]) -> Node:
    if isinstance(t, Leaf):
        return Leaf(mapping(t.key))
    if isinstance(t, Cork):
        return t
    return Vertex(t.label, tuple(relabel(c, mapping) for c in t.children))


def substitute(t: Node, replace: Callable[[Leaf], Optional[Node]]) -> Node:
    """Replaces each leaf for which `replace` returns a tree."""
    if isinstance(t, Leaf):
        new = replace(t)
        return t if new is None else new
    if isinstance(t, Cork):
        return t
    return Vertex(t.label, tuple(substitute(c, replace) for c in t.children))


def graft(outer: Node, inner: Node, leaf_position: int) -> Node:
    """
    outer o_j inner for trees whose leaves are labelled 1..arity.

    Leaf j of outer is replaced by inner (leaves shifted by j-1); the leaves
    of outer after j are shifted by arity(inner)-1.
    """
    if isinstance(outer, Cork):
        raise ShapeError("cannot graft onto a cork")
    n = tree_stats(outer).arity
    if not 1 <= leaf_position <= n:
        raise ShapeError(f"leaf {leaf_position} out of range for arity {n}")
    k = tree_stats(inner).arity
    shifted_inner = relabel(inner, lambda key: key + leaf_position - 1)

    def replace(leaf: Leaf) -> Node:
        if leaf.key == leaf_position:
            return shifted_inner
        if leaf.key > leaf_position:
            return Leaf(leaf.key + k - 1)
        return leaf

    return substitute(outer, replace)


# ========================= ENUMERATION =========================

def canonical_labels(m: int, r: int) -> Tuple[BETuple, ...]:
    """Labels (id, s_1, ..., s_r) of arity m."""
    return tuple(w for w in all_tuples(m, r) if w.perms[0].images == tuple(range(1, m + 1)))


@lru_cache(maxsize=None)
def _trees(labels: frozenset, budget: int, max_label_degree: int) -> Tuple[Tuple[Node, int], ...]:
    out: List[Tuple[Node, int]] = []
    if len(labels) == 1:
        out.append((Leaf(next(iter(labels))), 0))
    if not labels and budget >= 1:
        out.append((CORK, 1))
    for r in range(0, min(budget, max_label_degree + 1)):
        for children, used in _sequences(labels, budget - r - 1, 2, max_label_degree):
            for label in canonical_labels(len(children), r):
                out.append((Vertex(label, children), r + 1 + used))
    return tuple(out)


@lru_cache(maxsize=None)
def _sequences(labels: frozenset, budget: int, min_length: int,
               max_label_degree: int) -> Tuple[Tuple[Tuple[Node, ...], int], ...]:
    """Ordered child sequences splitting `labels` into (possibly empty) blocks."""
    out: List[Tuple[Tuple[Node, ...], int]] = []
    if min_length <= 0 and not labels:
        out.append(((), 0))
    ordered = sorted(labels)
    for size in range(len(ordered) + 1):
        for block in combinations(ordered, size):
            block_set = frozenset(block)
            for child, deg in _trees(block_set, budget, max_label_degree):
                for rest, used in _sequences(labels - block_set, budget - deg, min_length - 1, max_label_degree):
                    out.append(((child,) + rest, deg + used))
    return tuple(out)


@lru_cache(maxsize=None)
def _tree_counts(labels: frozenset, budget: int, max_label_degree: int) -> Tuple[Tuple[int, int], ...]:
    """(degree, number of trees) pairs for what _trees would build, without building it."""
    counts: Counter = Counter()
    if len(labels) == 1:
        counts[0] += 1
    if not labels and budget >= 1:
        counts[1] += 1
    for r in range(0, min(budget, max_label_degree + 1)):
        for (length, used), c in _sequence_counts(labels, budget - r - 1, 2, max_label_degree):
            counts[r + 1 + used] += c * len(canonical_labels(length, r))
    return tuple(sorted(counts.items()))


@lru_cache(maxsize=None)
def _sequence_counts(labels: frozenset, budget: int, min_length: int,
                     max_label_degree: int) -> Tuple[Tuple[Tuple[int, int], int], ...]:
    """((length, degree), number of sequences) pairs mirroring _sequences."""
    counts: Counter = Counter()
    if min_length <= 0 and not labels:
        counts[(0, 0)] += 1
    ordered = sorted(labels)
    for size in range(len(ordered) + 1):
        for block in combinations(ordered, size):
            block_set = frozenset(block)
            for deg, c in _tree_counts(block_set, budget, max_label_degree):
                for (length, used), c2 in _sequence_counts(labels - block_set, budget - deg, min_length - 1,
                                                           max_label_degree):
                    counts[(length + 1, deg + used)] += c * c2
    return tuple(sorted(counts.items()))


def count_scrt(arity: int, max_degree: int, max_label_degree: Optional[int] = None) -> int:
    """Number of trees enumerate_scrt(arity, max_degree) returns, computed from counts alone."""
    label_bound = max_degree if max_label_degree is None else max_label_degree
    return sum(c for _, c in _tree_counts(frozenset(range(1, arity + 1)), max_degree, label_bound))


def tree_sort_key(t: Node) -> str:
    return json.dumps(tree_to_json(t), sort_keys=True)


def enumerate_scrt(arity: int, max_degree: int, max_label_degree: Optional[int] = None,
                   cap: int = DEFAULT_CAP, quiet: bool = True) -> List[Node]:
    """
    Every canonical SCRT with leaves 1..arity and degree <= max_degree.

    Raises CapExceededError, before any tree is built, when the list would grow beyond `cap`.
    """
    if arity < 0 or max_degree < 0:
        raise ShapeError("arity and degree bound must be non-negative")
    label_bound = max_degree if max_label_degree is None else max_label_degree
    total = count_scrt(arity, max_degree, label_bound)
    if total > cap:
        logger.error(f"Tree enumeration for arity {arity}, degree <= {max_degree} needs {total} trees, above cap {cap}")
        raise CapExceededError("tree enumeration", total, cap)
    candidates = _trees(frozenset(range(1, arity + 1)), max_degree, label_bound)
    found: List[Node] = [tree for tree, _ in tqdm(candidates, desc="Enumerating trees", disable=quiet)]
    found.sort(key=lambda t: (tree_stats(t).degree, tree_sort_key(t)))
    logger.debug(f"Enumerated {len(found)} trees of arity {arity} and degree <= {max_degree}")
    return found


# ========================= JSON =========================

def tree_to_json(t: Node) -> dict:
    if isinstance(t, Leaf):
        return {"leaf": t.key}
    if isinstance(t, Cork):
        return {"cork": True}
    return {"label": t.label.to_json(), "children": [tree_to_json(c) for c in t.children]}


def tree_from_json(data: dict) -> Node:
    if data.get("cork"):
        return CORK
    if "leaf" in data:
        return Leaf(data["leaf"])
    if "label" in data and "children" in data:
        return Vertex(BETuple.from_json(data["label"]), tuple(tree_from_json(c) for c in data["children"]))
    raise ShapeError(f"malformed tree node: {data!r}")


def tree_name(t: Node) -> str:
    """Compact printable name, used as a basis name when a free algebra is exported."""
    if isinstance(t, Leaf):
        return str(t.key)
    if isinstance(t, Cork):
        return "c0"
    label = ";".join("".join(map(str, s.images)) for s in t.label.perms)
    return f"c{t.label.arity}[{label}](" + ",".join(tree_name(c) for c in t.children) + ")"
