"""
Maurer-Cartan elements, gauge witnesses and path components for truncated algebras over F_p.

The MC equation reads l0 + d(alpha) + sum_{n>=2} l_n^{id}(alpha, .., alpha) = 0.
lambda in degree 1 witnesses alpha ~ beta when

    d(lambda) = beta - alpha + sum_{n>=2} sum_{s+a+b=n, s>=1} sum_{w in E(n)_{s-1}}
                eps_s(w) l_n^w(lambda^s, alpha^a, beta^b).
"""

from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional

from tqdm import tqdm

from shared_utils import setup_logging, DEFAULT_CAP
from partition_linf.errors import CapExceededError, NotMaurerCartanError, ShapeError
from partition_linf.scalars import PrimeField, add_into
from partition_linf.barratt_eccles import all_tuples, epsilon_s, normalize, unit
from partition_linf.algebra import Element, TruncatedAlgebra, element_to_json, elements_of_degree

logger = setup_logging(__name__)


class UnionFind:
    """
    Disjoint sets over hashable keys with union by rank and path compression.

    >>> uf = UnionFind()
    >>> uf.union(1, 2)
    >>> uf.find(2)
    1
    """

    def __init__(self):
        self.parent = {}
        self.rank = Counter()

    def find(self, x):
        if x not in self.parent:
            self.parent[x] = x
        elif self.parent[x] != x:
            self.parent[x] = self.find(self.parent[x])
        return self.parent[x]

    def union(self, x, y):
        px = self.find(x)
        py = self.find(y)
        if px == py:
            return
        if self.rank[px] < self.rank[py]:
            px, py = py, px
        self.parent[py] = px
        if self.rank[px] == self.rank[py]:
            self.rank[px] += 1


def _key(element: Element) -> tuple:
    return tuple(sorted(element.items()))


def _require_degree(alg: TruncatedAlgebra, element: Element, degree: int, what: str) -> None:
    found = alg.module.element_degree(element)
    if found is not None and found != degree:
        raise ShapeError(f"{what} must have degree {degree}, got {found}")


# ========================= MAURER-CARTAN =========================

def mc_defect(alg: TruncatedAlgebra, alpha: Element) -> Element:
    """Left side of the MC equation; zero exactly on MC elements."""
    _require_degree(alg, alpha, 0, "alpha")
    out = dict(alg.l0)
    add_into(out, alg.apply_d(alpha), alg.p)
    for n in range(2, alg.max_op_arity + 1):
        add_into(out, alg.operation(unit(n), [alpha] * n), alg.p)
    return out


def is_mc(alg: TruncatedAlgebra, alpha: Element) -> bool:
    return not mc_defect(alg, alpha)


def enumerate_mc(alg: TruncatedAlgebra, cap: int = DEFAULT_CAP, quiet: bool = True) -> List[Element]:
    """Every MC element, in lexicographic order of coefficient vectors."""
    candidates = elements_of_degree(alg, 0, cap)
    found = [a for a in tqdm(candidates, desc="Scanning degree 0", disable=quiet) if is_mc(alg, a)]
    logger.info(f"{len(found)} Maurer-Cartan elements among {len(candidates)} candidates")
    return found


# ========================= GAUGE =========================

@dataclass(frozen=True)
class GaugeWitness:
    alpha: Element
    beta: Element
    lam: Element

    def to_json(self) -> dict:
        return {"alpha": element_to_json(self.alpha), "beta": element_to_json(self.beta),
                "lambda": element_to_json(self.lam)}


def gauge_defect(alg: TruncatedAlgebra, alpha: Element, beta: Element, lam: Element) -> Element:
    """d(lambda) minus the right side of the gauge equation."""
    _require_degree(alg, lam, 1, "lambda")
    field_p = PrimeField(alg.p)
    out = alg.apply_d(lam)
    add_into(out, beta, alg.p, -1)
    add_into(out, alpha, alg.p)
    if not lam:
        return out
    for n in range(2, alg.max_op_arity + 1):
        for s in range(1, min(n, alg.W) + 1):
            labels = [(w, int(epsilon_s(w, s, field_p))) for w in all_tuples(n, s - 1)]
            labels = [(w, eps) for w, eps in labels if eps and normalize(w)[0] in alg.ops]
            if not labels:
                continue
            for a in range(n - s + 1):
                inputs = [lam] * s + [alpha] * a + [beta] * (n - s - a)
                for w, eps in labels:
                    add_into(out, alg.operation(w, inputs), alg.p, -eps)
    return out


def check_gauge(alg: TruncatedAlgebra, witness: GaugeWitness) -> bool:
    """
    Raises:
        NotMaurerCartanError: If either endpoint fails the MC equation.
    """
    if not is_mc(alg, witness.alpha):
        raise NotMaurerCartanError("alpha")
    if not is_mc(alg, witness.beta):
        raise NotMaurerCartanError("beta")
    return not gauge_defect(alg, witness.alpha, witness.beta, witness.lam)


def search_gauge(alg: TruncatedAlgebra, alpha: Element, beta: Element, cap: int = DEFAULT_CAP,
                 lambdas: Optional[List[Element]] = None) -> Optional[GaugeWitness]:
    """The first degree-1 lambda, in lexicographic order, witnessing alpha ~ beta."""
    if lambdas is None:
        lambdas = elements_of_degree(alg, 1, cap)
    for lam in lambdas:
        witness = GaugeWitness(alpha, beta, lam)
        if check_gauge(alg, witness):
            return witness
    return None


# ========================= PATH COMPONENTS =========================

@dataclass
class Pi0Report:
    mc: List[Element]
    classes: List[List[Element]]
    witnesses: List[GaugeWitness] = field(default_factory=list)
    raw_symmetric: bool = True
    raw_transitive: bool = True

    def to_json(self, with_witnesses: bool = False) -> dict:
        payload = {
            "mc": [element_to_json(a) for a in self.mc],
            "pi0": [{"rep": element_to_json(c[0]), "size": len(c)} for c in self.classes],
            "raw_symmetric": self.raw_symmetric,
            "raw_transitive": self.raw_transitive,
        }
        if with_witnesses:
            payload["witnesses"] = [w.to_json() for w in self.witnesses]
        return payload


def pi0(alg: TruncatedAlgebra, cap: int = DEFAULT_CAP, quiet: bool = True) -> Pi0Report:
    """
    Classes of the equivalence closure of the witnessed gauge relation.

    Every ordered pair of MC elements is searched, so the raw relation can be
    tested for symmetry and transitivity before closing it up.
    """
    mc = enumerate_mc(alg, cap, quiet)
    lambdas = elements_of_degree(alg, 1, cap)
    work = len(mc) ** 2 * len(lambdas)
    if work > cap:
        logger.error(f"Gauge search needs {work} checks, above the cap of {cap}")
        raise CapExceededError("gauge search", work, cap)

    related: Dict[tuple, set] = {_key(a): set() for a in mc}
    witnesses = []
    uf = UnionFind()
    for a in mc:
        uf.find(_key(a))
    for alpha, beta in tqdm(list(product(mc, repeat=2)), desc="Searching gauge witnesses", disable=quiet):
        witness = search_gauge(alg, alpha, beta, cap, lambdas)
        if witness is None:
            continue
        related[_key(alpha)].add(_key(beta))
        uf.union(_key(alpha), _key(beta))
        if alpha != beta:
            witnesses.append(witness)

    raw_symmetric = all(x in related[y] for x in related for y in related[x])
    raw_transitive = all(z in related[x] for x in related for y in related[x] for z in related[y])
    if not (raw_symmetric and raw_transitive):
        logger.warning("Witnessed gauge relation is not an equivalence relation; reporting its closure")

    classes: Dict[tuple, List[Element]] = {}
    for a in mc:
        classes.setdefault(uf.find(_key(a)), []).append(a)
    logger.info(f"pi0 has {len(classes)} classes over {len(mc)} Maurer-Cartan elements")
    return Pi0Report(mc, list(classes.values()), witnesses, raw_symmetric, raw_transitive)
