"""
Weight-truncated curved partition L-infinity algebras presented by tables.

A presentation carries a graded basis, a degree -1 predifferential d, a
curvature l0 of degree -1 and, for every canonical corolla label w = (id, s_1,
.., s_r) of arity n >= 2 with r + 1 <= W, a sparse table for l_n^w. Absent
entries act by zero. Labels whose first permutation is not the identity are
rewritten on load through c^w(g_1..g_n) = +-c^{w.rho}(g_rho(1)..g_rho(n)),
rho = s_0^{-1}, so the tables only ever hold canonical labels.

Composite trees are evaluated recursively from the corolla tables; a tree of
degree > W evaluates to zero.
"""

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

import jsonschema
from tqdm import tqdm

from shared_utils import setup_logging, DEFAULT_CAP, ALGEBRA_SCHEMA
from partition_linf.errors import CapExceededError, PresentationError, ShapeError
from partition_linf.scalars import PrimeField, add_into, add_term, permutation_koszul_exponent, sign_power
from partition_linf import barratt_eccles as be
from partition_linf.barratt_eccles import BETuple
from partition_linf.permutations import all_permutations, inverse
from partition_linf.linalg import row_reduce, sparse_to_rows
from partition_linf.trees import CORK, Cork, Leaf, Node, Vertex, canonical_labels, canonicalize, tree_stats

logger = setup_logging(__name__)

Element = Dict[str, int]
OpTable = Dict[Tuple[str, ...], Element]

BINARY_ID = BETuple.of(2, (1, 2))
BINARY_SWAP = BETuple.of(2, (2, 1))


def curvature_sign(p: int) -> int:
    """Overall sign of l2[12](l0, -) + l2[21](l0, -) in d^2, as a residue: -1."""
    return -1 % p


# ========================= GRADED MODULE =========================

@dataclass(frozen=True)
class GradedModule:
    """An ordered basis of named vectors, each with a homological degree."""

    basis: Tuple[Tuple[str, int], ...]
    _degrees: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        degrees: Dict[str, int] = {}
        for name, degree in self.basis:
            if name in degrees:
                raise PresentationError(f"duplicate basis name '{name}'")
            degrees[name] = int(degree)
        object.__setattr__(self, "_degrees", degrees)

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.basis]

    def __contains__(self, name: str) -> bool:
        return name in self._degrees

    def __len__(self) -> int:
        return len(self.basis)

    def degree(self, name: str) -> int:
        try:
            return self._degrees[name]
        except KeyError:
            raise ShapeError(f"unknown basis name '{name}'") from None

    def names_of_degree(self, degree: int) -> List[str]:
        return [name for name, d in self.basis if d == degree]

    def element_degree(self, element: Element) -> Optional[int]:
        """Degree of a homogeneous element, None for zero; raises on mixed degrees."""
        degrees = {self.degree(name) for name in element}
        if len(degrees) > 1:
            raise ShapeError(f"element {element} is not homogeneous (degrees {sorted(degrees)})")
        return degrees.pop() if degrees else None


def basis_vector(name: str) -> Element:
    return {name: 1}


def element_to_json(element: Element) -> Dict[str, int]:
    return {name: element[name] for name in sorted(element)}


# ========================= PRESENTATION =========================

def _normalized_inputs(w: BETuple, inputs: Tuple[str, ...], degrees: Sequence[int]) -> Tuple[BETuple, Tuple[str, ...], int]:
    """(canonical label, reordered inputs, Koszul exponent) for l^w(inputs)."""
    label, rho = be.normalize(w)
    if label == w:
        return w, inputs, 0
    order = [rho(j) - 1 for j in range(1, w.arity + 1)]
    return label, tuple(inputs[j] for j in order), permutation_koszul_exponent(degrees, order)


@dataclass
class TruncatedAlgebra:
    """
    A nilpotent curved partition L-infinity algebra truncated at tree degree W.

    `filtration`, when present, is (bound, weights): every operation, d and
    l0 keep or raise the total weight, and weight above `bound` is zero. It
    only prunes input tuples in check_relations.
    """

    module: GradedModule
    p: int
    W: int
    d: Dict[str, Element] = field(default_factory=dict)
    l0: Element = field(default_factory=dict)
    ops: Dict[BETuple, OpTable] = field(default_factory=dict)
    generators: Optional[Tuple[str, ...]] = None
    filtration: Optional[Tuple[int, Dict[str, int]]] = None

    def __post_init__(self):
        PrimeField(self.p)
        if self.W < 0:
            raise ShapeError(f"truncation degree must be non-negative, got {self.W}")
        self.d = {g: {h: c % self.p for h, c in image.items() if c % self.p} for g, image in self.d.items()}
        self.d = {g: image for g, image in self.d.items() if image}
        self.l0 = {g: c % self.p for g, c in self.l0.items() if c % self.p}
        raw, self.ops = self.ops, {}
        for w, table in raw.items():
            if w.arity < 2:
                raise PresentationError(f"operation labels need arity >= 2, got {w.arity}")
            for inputs, out in table.items():
                self._add_entry(w, tuple(inputs), out)

    def _add_entry(self, w: BETuple, inputs: Tuple[str, ...], out: Element) -> None:
        if len(inputs) != w.arity:
            raise PresentationError(f"label {w} of arity {w.arity} given {len(inputs)} inputs")
        degrees = [self.module.degree(g) for g in inputs]
        label, inputs, exponent = _normalized_inputs(w, inputs, degrees)
        table = self.ops.setdefault(label, {})
        target = table.setdefault(inputs, {})
        add_into(target, out, self.p, sign_power(exponent, self.p))
        if not target:
            del table[inputs]
        if not table:
            del self.ops[label]

    @property
    def prime_field(self) -> PrimeField:
        return PrimeField(self.p)

    @property
    def max_op_arity(self) -> int:
        return max((w.arity for w in self.ops), default=0)

    # --- linear structure ---

    def apply_d(self, element: Element) -> Element:
        out: Element = {}
        for g, c in element.items():
            add_into(out, self.d.get(g, {}), self.p, c)
        return out

    def operation(self, w: BETuple, inputs: Sequence[Element]) -> Element:
        """l_n^w on elements, extended multilinearly; zero once the corolla degree exceeds W."""
        if len(inputs) != w.arity:
            raise ShapeError(f"label of arity {w.arity} applied to {len(inputs)} inputs")
        out: Element = {}
        if w.degree + 1 > self.W:
            return out
        for terms in product(*(sorted(x.items()) for x in inputs)):
            names = tuple(name for name, _ in terms)
            coeff = 1
            for _, c in terms:
                coeff *= c
            label, names, exponent = _normalized_inputs(w, names, [self.module.degree(g) for g in names])
            image = self.ops.get(label, {}).get(names)
            if image:
                add_into(out, image, self.p, coeff * sign_power(exponent, self.p))
        return out

    # --- serialization ---

    def to_json(self) -> dict:
        payload = {
            "schema": ALGEBRA_SCHEMA,
            "p": self.p,
            "W": self.W,
            "basis": [{"name": name, "degree": degree} for name, degree in self.module.basis],
            "d": [
                {"from": g, "to": h, "coeff": c}
                for g in self.module.names if g in self.d
                for h, c in sorted(self.d[g].items())
            ],
            "l0": element_to_json(self.l0),
            "ops": [
                {
                    "arity": w.arity,
                    "label": w.to_json(),
                    "table": [
                        {"inputs": list(inputs), "out": element_to_json(out)}
                        for inputs, out in sorted(self.ops[w].items())
                    ],
                }
                for w in sorted(self.ops)
            ],
        }
        if self.generators is not None:
            payload["generators"] = list(self.generators)
        if self.filtration is not None:
            bound, weights = self.filtration
            payload["filtration"] = {"bound": bound, "weights": {g: weights[g] for g in sorted(weights)}}
        return payload

    @classmethod
    def from_json(cls, data: dict) -> "TruncatedAlgebra":
        validator = jsonschema.Draft7Validator(PRESENTATION_SCHEMA)
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            first = errors[0]
            location = "/".join(str(x) for x in first.absolute_path) or "<root>"
            logger.error(f"Presentation rejected at {location}: {first.message}")
            raise PresentationError(first.message, location)
        module = GradedModule(tuple((b["name"], b["degree"]) for b in data["basis"]))
        _check_names(module, data)
        d: Dict[str, Element] = {}
        for entry in data.get("d", []):
            add_term(d.setdefault(entry["from"], {}), entry["to"], entry["coeff"], data["p"])
        ops: Dict[BETuple, OpTable] = {}
        for k, op in enumerate(data.get("ops", [])):
            try:
                label = BETuple.from_json(op["label"])
            except ShapeError as e:
                raise PresentationError(str(e), f"ops/{k}/label") from e
            if label.arity != op["arity"]:
                raise PresentationError(f"label arity {label.arity} differs from declared arity {op['arity']}", f"ops/{k}")
            table = ops.setdefault(label, {})
            for entry in op["table"]:
                out = table.setdefault(tuple(entry["inputs"]), {})
                add_into(out, entry["out"], data["p"])
        filtration = None
        if "filtration" in data:
            filtration = (data["filtration"]["bound"], dict(data["filtration"]["weights"]))
        generators = tuple(data["generators"]) if "generators" in data else None
        return cls(module, data["p"], data["W"], d, dict(data.get("l0", {})), ops, generators, filtration)

    @classmethod
    def from_text(cls, text: str) -> "TruncatedAlgebra":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise PresentationError(e.msg, f"line {e.lineno}, column {e.colno}") from e
        return cls.from_json(data)

    def truncate(self, W: int) -> "TruncatedAlgebra":
        """The quotient by W_{W+1}, presented on the basis vectors that stay independent."""
        if W > self.W:
            raise ShapeError(f"cannot truncate degree {self.W} to the larger degree {W}")
        if W == self.W:
            return self
        ideal = _filtration_spaces(self)[W + 1]
        index = {name: i for i, name in enumerate(self.module.names)}
        rows, pivots = _reduced_span(ideal, index, self.p)
        pivot_names = {self.module.names[c] for c in pivots}
        kept = [(name, deg) for name, deg in self.module.basis if name not in pivot_names]

        def project(element: Element) -> Element:
            out = dict(element)
            for row, c in zip(rows, pivots):
                coeff = out.get(self.module.names[c], 0)
                if coeff:
                    add_into(out, row, self.p, -coeff)
            return {g: c for g, c in out.items() if g not in pivot_names}

        kept_names = {name for name, _ in kept}
        ops = {
            w: {inputs: project(out) for inputs, out in table.items() if kept_names.issuperset(inputs)}
            for w, table in self.ops.items() if w.degree + 1 <= W
        }
        generators = None if self.generators is None else tuple(g for g in self.generators if g in kept_names)
        filtration = None
        if self.filtration is not None:
            bound, weights = self.filtration
            filtration = (bound, {g: c for g, c in weights.items() if g in kept_names})
        logger.info(f"Truncated to W={W}: {len(kept)} of {len(self.module)} basis vectors remain")
        return TruncatedAlgebra(
            GradedModule(tuple(kept)), self.p, W,
            {g: project(self.d[g]) for g in kept_names if g in self.d},
            project(self.l0), ops, generators, filtration,
        )


PRESENTATION_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["p", "W", "basis"],
    "properties": {
        "schema": {"const": ALGEBRA_SCHEMA},
        "p": {"type": "integer", "minimum": 2},
        "W": {"type": "integer", "minimum": 0},
        "basis": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "degree"],
                "properties": {"name": {"type": "string"}, "degree": {"type": "integer"}},
            },
        },
        "d": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to", "coeff"],
                "properties": {"from": {"type": "string"}, "to": {"type": "string"}, "coeff": {"type": "integer"}},
            },
        },
        "l0": {"type": "object", "additionalProperties": {"type": "integer"}},
        "ops": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["arity", "label", "table"],
                "properties": {
                    "arity": {"type": "integer", "minimum": 2},
                    "label": {
                        "type": "object",
                        "required": ["arity", "perms"],
                        "properties": {
                            "arity": {"type": "integer"},
                            "perms": {"type": "array", "minItems": 1, "items": {"type": "array", "items": {"type": "integer"}}},
                        },
                    },
                    "table": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["inputs", "out"],
                            "properties": {
                                "inputs": {"type": "array", "items": {"type": "string"}},
                                "out": {"type": "object", "additionalProperties": {"type": "integer"}},
                            },
                        },
                    },
                },
            },
        },
        "generators": {"type": "array", "items": {"type": "string"}},
        "filtration": {
            "type": "object",
            "required": ["bound", "weights"],
            "properties": {
                "bound": {"type": "integer", "minimum": 0},
                "weights": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
            },
        },
    },
}


def _check_names(module: GradedModule, data: dict) -> None:
    def need(name: str, location: str) -> None:
        if name not in module:
            raise PresentationError(f"unknown basis name '{name}'", location)

    for k, entry in enumerate(data.get("d", [])):
        need(entry["from"], f"d/{k}/from")
        need(entry["to"], f"d/{k}/to")
    for name in data.get("l0", {}):
        need(name, "l0")
    for k, op in enumerate(data.get("ops", [])):
        for m, entry in enumerate(op["table"]):
            for name in entry["inputs"]:
                need(name, f"ops/{k}/table/{m}/inputs")
            for name in entry["out"]:
                need(name, f"ops/{k}/table/{m}/out")
    for name in data.get("generators", []):
        need(name, "generators")


def elements_of_degree(alg, degree: int, cap: int = DEFAULT_CAP) -> List[Element]:
    """
    Every element of the given degree, in lexicographic order of coefficient vectors.

    Works for anything carrying a `module` and a prime `p`.
    """
    names = alg.module.names_of_degree(degree)
    size = alg.p ** len(names)
    if size > cap:
        logger.error(f"Degree {degree} has {size} elements, above the cap of {cap}")
        raise CapExceededError(f"elements of degree {degree}", size, cap)
    return [
        {g: c for g, c in zip(names, coeffs) if c}
        for coeffs in product(range(alg.p), repeat=len(names))
    ]


# ========================= EVALUATION =========================

def _evaluate(alg: TruncatedAlgebra, t: Node, leaf_value) -> Element:
    if isinstance(t, Leaf):
        return dict(leaf_value(t.key))
    if isinstance(t, Cork):
        return dict(alg.l0)
    children = [_evaluate(alg, c, leaf_value) for c in t.children]
    if any(not c for c in children):
        return {}
    return alg.operation(t.label, children)


def eval_tree(alg: TruncatedAlgebra, t: Node, inputs: Sequence[Element]) -> Element:
    """gamma(t; inputs) for a tree whose leaves are 1..arity; zero above degree W."""
    stats = tree_stats(t)
    if len(inputs) != stats.arity:
        raise ShapeError(f"tree of arity {stats.arity} given {len(inputs)} inputs")
    if stats.degree > alg.W:
        return {}
    return _evaluate(alg, t, lambda k: inputs[k - 1])


def eval_decorated(alg: TruncatedAlgebra, t: Node, assignment: Optional[Dict[Hashable, Element]] = None) -> Element:
    """
    gamma of a tree whose leaves carry names.

    Without `assignment` the names are basis names; with it, each leaf name is
    replaced by the assigned element (the image of a generator under a morphism).
    """
    if tree_stats(t).degree > alg.W:
        return {}

    def leaf_value(name: Hashable) -> Element:
        if assignment is not None:
            if name not in assignment:
                raise ShapeError(f"no value assigned to leaf '{name}'")
            return assignment[name]
        if name not in alg.module:
            raise ShapeError(f"leaf decoration '{name}' is not a basis name")
        return basis_vector(name)

    return _evaluate(alg, t, leaf_value)


def eval_series(alg: TruncatedAlgebra, series: Dict[Node, int],
                assignment: Optional[Dict[Hashable, Element]] = None) -> Element:
    """Sum of coefficient * gamma(tree) over a pre-truncated series of decorated trees."""
    out: Element = {}
    for t, coeff in series.items():
        if tree_stats(t).degree > alg.W:
            raise ShapeError(f"series term of degree {tree_stats(t).degree} exceeds W={alg.W}; truncate first")
        add_into(out, eval_decorated(alg, t, assignment), alg.p, coeff)
    return out


# ========================= COROLLA DIFFERENTIAL =========================

@lru_cache(maxsize=None)
def vertex_differential_terms(w: BETuple, degrees: Tuple[int, ...], p: int, curved: bool,
                              mode: str) -> Tuple[Tuple[tuple, Node, int], ...]:
    """
    d2 + d3 of the corolla c^w(1..n) as tagged, canonical trees on leaves 1..n.

    `degrees` are the homological degrees of whatever later replaces the leaves.
    Tags: ("insert",) for label insertions, ("split", n, q, i) for a partial
    decomposition with the inner vertex on input i, ("cork",) for decompositions
    against the arity-0 unit (slot 1, every preimage).

    Splits x o_i y carry -(-1)^{deg x} and cork terms -(-1)^{deg w}; the cork is
    the arity-0 case of a split. Both signs vanish at p = 2.
    """
    n = w.arity
    leaves = tuple(Leaf(k) for k in range(1, n + 1))
    leaf_degree = lambda k: degrees[k - 1]
    terms: List[Tuple[tuple, Node, int]] = []

    def emit(tag: tuple, raw: Node, coeff: int, exponent: int = 0) -> None:
        tree, e = canonicalize(raw, leaf_degree)
        terms.append((tag, tree, (coeff * sign_power(exponent + e, p)) % p))

    for w2, c in be.dual_differential(w, p, mode).items():
        emit(("insert",), Vertex(w2, leaves), c)
    for outer_arity in range(2, n):
        q = n - outer_arity + 1
        for i in range(1, outer_arity + 1):
            for (x, y), c in be.partial_decompose(w, outer_arity, q, i, p).items():
                inner = Vertex(y, leaves[i - 1:i - 1 + q])
                raw = Vertex(x, leaves[:i - 1] + (inner,) + leaves[i - 1 + q:])
                exponent = 1 + x.degree + (y.degree + 1) * sum(degrees[:i - 1])
                emit(("split", outer_arity, q, i), raw, c, exponent)
    if curved:
        for x in be.cork_decompose(w, 1):
            emit(("cork",), Vertex(x, (CORK,) + leaves), 1, 1 + w.degree)
    return tuple(t for t in terms if t[2])


def corolla_differential(w: BETuple, degrees: Sequence[int], p: int, curved: bool = True,
                         mode: Optional[str] = None) -> Dict[Node, int]:
    out: Dict[Node, int] = {}
    for _, tree, c in vertex_differential_terms(w, tuple(degrees), p, curved, be._resolve_mode(mode)):
        add_term(out, tree, c, p)
    return out


# ========================= CHECKS =========================

@dataclass
class ValidationReport:
    violations: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"status": "PASS" if self.passed else "FAIL", "violations": self.violations}


def check_degrees(alg: TruncatedAlgebra) -> List[dict]:
    out = []
    deg = alg.module.degree
    for g, image in sorted(alg.d.items()):
        for h in sorted(image):
            if deg(h) != deg(g) - 1:
                out.append({"check": "degree", "identity": "deg d(g) = deg g - 1", "witness": {"from": g, "to": h}})
    for h in sorted(alg.l0):
        if deg(h) != -1:
            out.append({"check": "degree", "identity": "deg l0 = -1", "witness": {"l0": h}})
    if alg.l0 and alg.W < 1:
        out.append({"check": "truncation", "identity": "l0 vanishes when W = 0", "witness": {"W": alg.W}})
    for w in sorted(alg.ops):
        if w.degree + 1 > alg.W:
            out.append({"check": "truncation", "identity": "no corolla above degree W",
                        "witness": {"label": w.to_json()}})
        for inputs, image in sorted(alg.ops[w].items()):
            expected = sum(deg(g) for g in inputs) - w.degree - 1
            for h in sorted(image):
                if deg(h) != expected:
                    out.append({"check": "degree", "identity": "deg l_n^w = -(r+1)",
                                "witness": {"label": w.to_json(), "inputs": list(inputs), "out": h}})
    return out


def check_curvature(alg: TruncatedAlgebra) -> List[dict]:
    """
    d^2(g) = -(l_2^{(12)}(l0, g) + l_2^{(21)}(l0, g)) on the generators (all basis vectors when none are listed).

    The sign is invisible at p = 2; at odd p it is the one the point cobar algebra satisfies.
    """
    out = []
    names = alg.generators if alg.generators is not None else alg.module.names
    l0 = alg.l0
    for g in names:
        x = basis_vector(g)
        lhs = alg.apply_d(alg.apply_d(x))
        rhs = alg.operation(BINARY_ID, [l0, x])
        add_into(rhs, alg.operation(BINARY_SWAP, [l0, x]), alg.p)
        defect = dict(lhs)
        add_into(defect, rhs, alg.p, -curvature_sign(alg.p))
        if defect:
            out.append({"check": "curvature", "identity": "d^2(g) = -(l2[12](l0,g) + l2[21](l0,g))",
                        "witness": {"generator": g, "defect": element_to_json(defect)}})
    if alg.apply_d(l0):
        out.append({"check": "curvature", "identity": "d(l0) = 0",
                    "witness": {"defect": element_to_json(alg.apply_d(l0))}})
    return out


def check_filtration(alg: TruncatedAlgebra) -> List[dict]:
    """The declared weights are respected by d, l0 and every table entry."""
    if alg.filtration is None:
        return []
    bound, weights = alg.filtration
    weight = lambda g: weights.get(g, 0)
    out = []

    def low(image: Element, floor: int) -> List[str]:
        return sorted(h for h in image if weight(h) < floor or weight(h) > bound)

    for g, image in sorted(alg.d.items()):
        for h in low(image, weight(g)):
            out.append({"check": "filtration", "identity": "d keeps weight", "witness": {"from": g, "to": h}})
    for h in low(alg.l0, 1):
        out.append({"check": "filtration", "identity": "l0 has weight >= 1", "witness": {"l0": h}})
    for w in sorted(alg.ops):
        for inputs, image in sorted(alg.ops[w].items()):
            for h in low(image, sum(weight(g) for g in inputs)):
                out.append({"check": "filtration", "identity": "operations keep weight",
                            "witness": {"label": w.to_json(), "inputs": list(inputs), "out": h}})
    return out


def _label_is_active(alg: TruncatedAlgebra, w: BETuple, p: int, mode: str, curved: bool) -> bool:
    """False when every table either side of the relation for w would read is absent."""
    present = lambda label: be.normalize(label)[0] in alg.ops
    if w in alg.ops or any(present(w2) for w2 in be.dual_differential(w, p, mode)):
        return True
    for outer_arity in range(2, w.arity):
        for i in range(1, outer_arity + 1):
            pairs = be.partial_decompose(w, outer_arity, w.arity - outer_arity + 1, i, p)
            if any(present(x) and present(y) for x, y in pairs):
                return True
    return curved and any(present(x) for x in be.cork_decompose(w, 1))


def check_relations(alg: TruncatedAlgebra, max_arity: Optional[int] = None, mode: Optional[str] = None,
                    cap: int = DEFAULT_CAP, quiet: bool = True) -> List[dict]:
    """
    Verifies d l^w - sum_j +-l^w(.., d g_j, ..) = l^{d2 w} + sum of split compositions + cork terms
    on every input tuple of basis vectors, for every canonical label with r + 1 <= W.

    Both sides drop trees of degree > W. Each failure lists the label, the inputs,
    the defect and the (outer arity, inner arity, slot) splits that contributed.
    """
    mode = be._resolve_mode(mode)
    p = alg.p
    failures: List[dict] = []
    if not alg.ops:
        return failures
    top = max_arity if max_arity is not None else 2 * alg.max_op_arity - 1
    names = alg.module.names
    deg = alg.module.degree
    bound, weights = alg.filtration if alg.filtration is not None else (None, {})
    if bound is not None and all(weights.get(g, 0) >= 1 for g in names):
        top = min(top, bound)
    curved = True
    work = []
    for n in range(2, top + 1):
        labels = [w for r in range(alg.W) for w in canonical_labels(n, r)
                  if _label_is_active(alg, w, p, mode, curved)]
        if not labels:
            continue
        for inputs in product(names, repeat=n):
            if bound is not None and sum(weights.get(g, 0) for g in inputs) > bound:
                continue
            work.append((labels, inputs))
            if len(work) > cap:
                logger.error(f"Relation check would visit more than {cap} input tuples")
                raise CapExceededError("relation check", len(work), cap)
    logger.info(f"Checking relations on {len(work)} input tuples up to arity {top}")
    for labels, inputs in tqdm(work, desc="Checking relations", disable=quiet):
        values = [basis_vector(g) for g in inputs]
        degrees = tuple(deg(g) for g in inputs)
        for w in labels:
            lhs = alg.apply_d(alg.operation(w, values))
            for j in range(len(inputs)):
                dg = alg.apply_d(values[j])
                if not dg:
                    continue
                exponent = w.degree + 1 + sum(degrees[:j])
                term = alg.operation(w, values[:j] + [dg] + values[j + 1:])
                add_into(lhs, term, p, -sign_power(exponent, p))
            defect = dict(lhs)
            contributions: Dict[tuple, Element] = {}
            for tag, tree, c in vertex_differential_terms(w, degrees, p, curved, mode):
                value = eval_tree(alg, tree, values)
                if value:
                    add_into(contributions.setdefault(tag, {}), value, p, c)
                    add_into(defect, value, p, -c)
            if defect:
                failures.append({
                    "check": "relations",
                    "identity": "d l^w - l^w d = l^{d2 w} + splits + cork terms",
                    "witness": {
                        "label": w.to_json(),
                        "inputs": list(inputs),
                        "defect": element_to_json(defect),
                        "splits": sorted(
                            [list(tag[1:]) for tag, v in contributions.items() if tag[0] == "split" and v]
                        ),
                    },
                })
    if failures:
        logger.warning(f"{len(failures)} relation violations found")
    return failures


def validate(alg: TruncatedAlgebra, max_arity: Optional[int] = None, mode: Optional[str] = None,
             cap: int = DEFAULT_CAP, quiet: bool = True) -> ValidationReport:
    """Degree constraints, truncation, the curvature condition and the relations."""
    report = ValidationReport()
    report.violations.extend(check_degrees(alg))
    report.violations.extend(check_filtration(alg))
    report.violations.extend(check_curvature(alg))
    report.violations.extend(check_relations(alg, max_arity, mode, cap, quiet))
    if report.passed:
        logger.info("Algebra presentation PASSES validation")
    else:
        logger.warning(f"Algebra presentation FAILS validation with {len(report.violations)} violations")
    return report


# ========================= QP-FILTRATION =========================

def _reduced_span(vectors: Sequence[Element], index: Dict[str, int], p: int) -> Tuple[List[Element], List[int]]:
    """RREF rows (as elements) and pivot columns of the span of `vectors`."""
    if not vectors:
        return [], []
    names = sorted(index, key=index.get)
    R, pivots = row_reduce(sparse_to_rows(vectors, index, p), p)
    rows = []
    for r in range(len(pivots)):
        rows.append({names[c]: int(R[r, c]) for c in range(len(names)) if R[r, c] % p})
    return rows, pivots


def _homogeneous_parts(alg: TruncatedAlgebra, element: Element) -> List[Element]:
    parts: Dict[int, Element] = {}
    for g, c in element.items():
        parts.setdefault(alg.module.degree(g), {})[g] = c
    return list(parts.values())


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _filtration_spaces(alg: TruncatedAlgebra, cap: int = DEFAULT_CAP) -> List[List[Element]]:
    """Spanning sets of W_0 .. W_{W+1}, each row-reduced."""
    index = {name: i for i, name in enumerate(alg.module.names)}
    exact: List[List[Element]] = [[basis_vector(g) for g in alg.module.names]]
    visited = 0
    for e in range(1, alg.W + 1):
        spanning: List[Element] = []
        if e == 1 and alg.l0:
            spanning.append(dict(alg.l0))
        for w in sorted(alg.ops):
            r = w.degree
            if r + 1 > e:
                continue
            for shape in _compositions(e - r - 1, w.arity):
                for choice in product(*(exact[s] for s in shape)):
                    visited += 1
                    if visited > cap:
                        logger.error(f"Filtration enumeration exceeded cap {cap}")
                        raise CapExceededError("filtration enumeration", visited, cap)
                    value = alg.operation(w, list(choice))
                    spanning.extend(_homogeneous_parts(alg, value))
        exact.append(_reduced_span(spanning, index, alg.p)[0])
    spaces: List[List[Element]] = []
    for delta in range(alg.W + 2):
        vectors = [v for e in range(delta, alg.W + 1) for v in exact[e]]
        spaces.append(_reduced_span(vectors, index, alg.p)[0])
    return spaces


@dataclass
class FiltrationReport:
    """Per delta: a reduced spanning set of W_delta and the dimensions of gr_delta per homological degree."""

    spans: List[List[Element]]
    graded: List[Dict[int, int]]
    d_stable: List[bool]
    graded_d_squared_zero: List[bool]

    def to_json(self) -> dict:
        return {
            "levels": [
                {
                    "delta": delta,
                    "dim": len(self.spans[delta]),
                    "graded": {str(k): v for k, v in sorted(self.graded[delta].items())} if delta < len(self.graded) else {},
                    "d_stable": self.d_stable[delta],
                }
                for delta in range(len(self.spans))
            ]
        }


def _dims_by_degree(alg: TruncatedAlgebra, span: List[Element]) -> Dict[int, int]:
    dims: Dict[int, int] = {}
    for v in span:
        degree = alg.module.element_degree(v)
        dims[degree] = dims.get(degree, 0) + 1
    return dims


def _in_span(alg: TruncatedAlgebra, span: List[Element], vector: Element, index: Dict[str, int]) -> bool:
    if not vector:
        return True
    return len(_reduced_span(span + [vector], index, alg.p)[0]) == len(span)


def qp_filtration(alg: TruncatedAlgebra, cap: int = DEFAULT_CAP) -> FiltrationReport:
    """
    W_delta = image of gamma on decorated trees of degree >= delta, for delta = 0..W+1.

    Also reports whether d preserves each W_delta and whether d^2 vanishes on gr_delta.
    """
    spaces = _filtration_spaces(alg, cap)
    index = {name: i for i, name in enumerate(alg.module.names)}
    graded: List[Dict[int, int]] = []
    for delta in range(alg.W + 1):
        upper, lower = _dims_by_degree(alg, spaces[delta]), _dims_by_degree(alg, spaces[delta + 1])
        graded.append({k: upper[k] - lower.get(k, 0) for k in upper if upper[k] - lower.get(k, 0)})
    d_stable, squared = [], []
    for delta in range(alg.W + 2):
        span = spaces[delta]
        d_stable.append(all(_in_span(alg, span, alg.apply_d(v), index) for v in span))
        below = spaces[delta + 1] if delta + 1 < len(spaces) else []
        squared.append(all(_in_span(alg, below, alg.apply_d(alg.apply_d(v)), index) for v in span))
    logger.debug(f"Filtration dimensions: {[len(s) for s in spaces]}")
    return FiltrationReport(spaces, graded, d_stable, squared)


# ========================= NORM MAP =========================

@dataclass(frozen=True)
class NormTerm:
    label: BETuple
    inputs: Tuple[Hashable, ...]
    coeff: int


def norm_map_corolla(w: BETuple, inputs: Sequence[Hashable], p: int = 2,
                     degrees: Optional[Sequence[int]] = None) -> List[NormTerm]:
    """
    N(c_n^w(g_1..g_n)) = sum over sigma in S_n of (c_n^{sigma.w}, g_{sigma^-1(1)} .. g_{sigma^-1(n)}).

    sigma.w is the left action (sigma s_0, .., sigma s_r); the Koszul sign of the
    reordering is included when degrees are given.
    """
    if len(inputs) != w.arity:
        raise ShapeError(f"label of arity {w.arity} given {len(inputs)} inputs")
    degrees = list(degrees) if degrees is not None else [0] * w.arity
    terms = []
    for sigma in all_permutations(w.arity):
        order = [inverse(sigma)(j) - 1 for j in range(1, w.arity + 1)]
        exponent = permutation_koszul_exponent(degrees, order)
        terms.append(NormTerm(be.act_left(sigma, w), tuple(inputs[j] for j in order), sign_power(exponent, p)))
    return terms
