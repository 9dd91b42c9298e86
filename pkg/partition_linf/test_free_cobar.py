import pytest

from shared_utils import CORPUS_PATH
from partition_linf.errors import CapExceededError, ShapeError
from partition_linf import barratt_eccles as be
from partition_linf.barratt_eccles import BETuple, unit
from partition_linf.trees import CORK, Leaf, Vertex, enumerate_scrt, relabel, tree_stats
from partition_linf.algebra import (
    GradedModule,
    TruncatedAlgebra,
    check_relations,
    corolla_differential,
    qp_filtration,
    validate,
)
from partition_linf.free_cobar import (
    build_free,
    check_d_squared,
    cobar_interval,
    cobar_point,
    is_functorial_restriction,
    morphisms_from_interval,
    morphisms_from_point,
    restrict_to_vertex,
)

ID2 = unit(2)

# --- Fixtures and Mocks ---

@pytest.fixture
def one_generator():
    """A single degree-0 generator x."""
    return GradedModule((("x", 0),))

@pytest.fixture
def two_generators():
    """x in degree 1 with d(x) = y in degree 0."""
    return GradedModule((("x", 1), ("y", 0)))

@pytest.fixture
def nilpotent():
    """x, y in degree 0, h in degree 1, z = l0 in degree -1, d(h) = y, l2(x, x) = z."""
    module = GradedModule((("x", 0), ("y", 0), ("h", 1), ("z", -1)))
    return TruncatedAlgebra(module, 2, 2, d={"h": {"y": 1}}, l0={"z": 1}, ops={ID2: {("x", "x"): {"z": 1}}})

def _pair(a, b, label=ID2):
    return Vertex(label, (a, b))

# --- Free algebras ---

def test_degree_zero_carrier_is_generators(two_generators):
    """Tests that W = 0 keeps only the generators, with d the generator differential."""
    fa = build_free(two_generators, 0, d={"x": {"y": 1}})
    assert set(fa.carrier) == {Leaf("x"), Leaf("y")}
    assert fa.differential[Leaf("x")] == {Leaf("y"): 1}
    assert fa.differential[Leaf("y")] == {}

def test_one_generator_curved_degree_one(one_generator):
    """Tests that W = 1 adds the binary and ternary identity corollas and the cork."""
    fa = build_free(one_generator, 1, max_leaves=3, curved=True)
    x = Leaf("x")
    assert set(fa.carrier) == {x, CORK, _pair(x, x), Vertex(unit(3), (x, x, x))}

def test_two_generators_uncurved_count():
    """Tests the six trees on x, y of degree <= 1 with at most two leaves."""
    fa = build_free(GradedModule((("x", 0), ("y", 0))), 1, max_leaves=2)
    assert len(fa.carrier) == 6
    assert CORK not in fa.carrier

@pytest.mark.parametrize("W, max_leaves", [(1, 3), (2, 2), (2, 3), (3, 2)])
def test_carrier_matches_tree_count(one_generator, W, max_leaves):
    """Tests the carrier size against decorated enumerations of canonical trees."""
    expected = set()
    for n in range(max_leaves + 1):
        for t in enumerate_scrt(n, W):
            if tree_stats(t).leaves <= max_leaves and not tree_stats(t).corks:
                expected.add(relabel(t, lambda k: "x"))
    assert set(build_free(one_generator, W, max_leaves=max_leaves).carrier) == expected

def test_empty_generators_give_zero_algebra():
    """Tests that the free uncurved algebra on nothing is zero."""
    fa = build_free(GradedModule(()), 2)
    assert fa.carrier == []
    assert fa.export().module.names == []

def test_generator_differential_must_lower_degree():
    """Tests that d must have degree -1 on generators."""
    module = GradedModule((("x", 0), ("y", 0)))
    with pytest.raises(ShapeError, match="lower the degree"):
        build_free(module, 1, d={"x": {"y": 1}})

def test_carrier_cap(one_generator):
    """Tests the carrier enumeration guard."""
    with pytest.raises(CapExceededError):
        build_free(one_generator, 3, max_leaves=3, curved=True, cap=5)

def test_uncurved_d_squared_one_generator(one_generator):
    """Tests d^2 = 0 exactly on the uncurved free algebra at W = 2."""
    assert check_d_squared(build_free(one_generator, 2, max_leaves=3)) == []

@pytest.mark.parametrize("p", [2, 3])
def test_uncurved_d_squared_with_generator_differential(two_generators, p):
    """Tests d^2 = 0 when d(x) = y is carried through the trees."""
    fa = build_free(two_generators, 2, p=p, max_leaves=3, d={"x": {"y": 1}})
    assert check_d_squared(fa) == []

def test_uncurved_d_squared_distinct_inputs_at_p3():
    """Tests d^2 = 0 over F_3 at W = 3, where c3(x, x, y) meets insertions at the outer vertex of a split."""
    fa = build_free(GradedModule((("x", 0), ("y", 0))), 3, p=3, max_leaves=3)
    assert check_d_squared(fa) == []

def test_functorial_in_generators():
    """Tests that adding a generator keeps the old carrier and its differential."""
    small = build_free(GradedModule((("x", 0),)), 2, max_leaves=3, curved=True)
    large = build_free(GradedModule((("x", 0), ("y", 0))), 2, max_leaves=3, curved=True)
    assert is_functorial_restriction(small, large)

# --- Cobar of the point ---

def test_point_degree_zero():
    """Tests that W = 0 leaves a0 closed."""
    fa = cobar_point(0)
    assert fa.generator_d["a0"] == {}
    assert fa.carrier == [Leaf("a0")]

def test_point_degree_one_differential():
    """Tests d(a0) = cork + c2(a0, a0) + c3(a0, a0, a0) over F_2 with three leaves."""
    a = Leaf("a0")
    fa = cobar_point(1, max_leaves=3)
    assert fa.differential[a] == {CORK: 1, _pair(a, a): 1, Vertex(unit(3), (a, a, a)): 1}

def test_point_signs_at_p3():
    """Tests that every term of d(a0) carries the minus sign."""
    fa = cobar_point(1, max_leaves=2, p=3)
    assert set(fa.generator_d["a0"].values()) == {2}

@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("W", [1, 2, 3])
def test_point_curvature_identity(W, p):
    """Tests d^2(t) = -(l2[12](cork, t) + l2[21](cork, t)) on every carrier tree."""
    assert check_d_squared(cobar_point(W, max_leaves=3, p=p)) == []

def test_point_d_squared_of_generator_at_p3():
    """Tests d^2(a0) = -c2(cork, a0) - c2(a0, cork) over F_3 at W = 2."""
    a = Leaf("a0")
    fa = cobar_point(2, max_leaves=3, p=3)
    assert fa.apply_d(fa.differential[a]) == {_pair(CORK, a): 2, _pair(a, CORK): 2}

def test_split_terms_carry_minus_sign_at_p3():
    """Tests that the two splits of the ternary identity corolla come with -1 over F_3."""
    leaves = [Leaf(k) for k in (1, 2, 3)]
    d = corolla_differential(unit(3), [0, 0, 0], p=3, curved=False)
    assert d[_pair(_pair(leaves[0], leaves[1]), leaves[2])] == 2
    assert d[_pair(leaves[0], _pair(leaves[1], leaves[2]))] == 2

def test_cork_terms_alternate_with_label_degree():
    """Tests that the cork term of a binary corolla is -1 in degree 0 and +1 in degree 1 over F_3."""
    cork_term = Vertex(unit(3), (CORK, Leaf(1), Leaf(2)))
    assert corolla_differential(ID2, [0, 0], p=3)[cork_term] == 2
    w = BETuple.of(2, (1, 2), (2, 1))
    lifted = [x for x in be.cork_decompose(w, 1) if x.perms[0] == unit(3).perms[0]]
    assert lifted
    assert corolla_differential(w, [0, 0], p=3)[Vertex(lifted[0], (CORK, Leaf(1), Leaf(2)))] == 1

@pytest.mark.parametrize("p", [2, 3])
def test_point_export_validates(p):
    """Tests that the exported cobar algebra passes every check of a presentation."""
    alg = cobar_point(2, max_leaves=3, p=p).export()
    assert alg.generators == ("a0",)
    assert alg.l0 == {"c0": 1}
    report = validate(alg)
    assert report.passed, report.violations

# --- Cobar of the interval ---

def test_interval_linear_part():
    """Tests that at W = 0 only a1 - a0 remains in d(a01)."""
    fa = cobar_interval(0, p=3)
    assert fa.generator_d["a01"] == {Leaf("a1"): 1, Leaf("a0"): 2}

def test_interval_binary_terms():
    """Tests the s = 1 binary terms c2(a01, a0) and c2(a01, a1) with coefficient +1."""
    fa = cobar_interval(1, max_leaves=2, p=3)
    d = fa.generator_d["a01"]
    assert d[_pair(Leaf("a01"), Leaf("a0"))] == 1
    assert d[_pair(Leaf("a01"), Leaf("a1"))] == 1

def test_interval_restricts_to_point():
    """Tests that each vertex restriction recovers the point differential."""
    interval = cobar_interval(2, max_leaves=3)
    point = cobar_point(2, max_leaves=3)
    assert restrict_to_vertex(interval, "a0") == point.generator_d
    assert restrict_to_vertex(interval, "a1") == point.generator_d

def test_interval_residue_is_reported():
    """Tests that d^2(a01) keeps c2(a0, a1) + c2(a1, a0) at W = 1 and nothing else fails."""
    failures = check_d_squared(cobar_interval(1, max_leaves=2))
    assert len(failures) == 1
    witness = failures[0]["witness"]
    assert witness["tree"] == "a01"
    assert witness["defect"] == {"c2[12](a0,a1)": 1, "c2[12](a1,a0)": 1}

# --- Cross-module consistency ---

def test_free_export_relations_pass():
    """Tests check_relations on a free uncurved algebra on two generators at W = 3."""
    alg = build_free(GradedModule((("x", 0), ("y", 0))), 3, max_leaves=2).export()
    assert check_relations(alg, max_arity=2) == []

@pytest.mark.slow
@pytest.mark.parametrize("curved", [False, True])
@pytest.mark.parametrize("basis, d", [
    ((("x", 0),), None),
    ((("x", 0), ("y", 1)), {"y": {"x": 1}}),
])
def test_free_export_relations_pass_at_three_leaves(basis, d, curved):
    """Tests every relation up to arity 3 on free algebras with at most two generators at W = 3."""
    alg = build_free(GradedModule(basis), 3, max_leaves=3, d=d, curved=curved).export()
    assert check_relations(alg, max_arity=3) == []

def test_free_export_with_differential_validates(two_generators):
    """Tests the full validation of a free algebra with a linear differential."""
    alg = build_free(two_generators, 2, max_leaves=2, d={"x": {"y": 1}}).export()
    assert validate(alg).passed

def test_shipped_free_algebra_matches_export(one_generator):
    """Tests that corpus/free_W2.json is the export of the free algebra on x at W = 2 and validates."""
    shipped = TruncatedAlgebra.from_text((CORPUS_PATH / "free_W2.json").read_text(encoding="utf-8"))
    exported = build_free(one_generator, 2, max_leaves=2).export()
    assert set(shipped.module.basis) == set(exported.module.basis)
    assert (shipped.d, shipped.l0, shipped.ops) == (exported.d, exported.l0, exported.ops)
    assert (shipped.generators, shipped.filtration) == (exported.generators, exported.filtration)
    assert validate(shipped).passed

def test_graded_pieces_count_trees(one_generator):
    """Tests that gr_delta of a free algebra has one dimension per tree of degree delta."""
    fa = build_free(one_generator, 2, max_leaves=3)
    report = qp_filtration(fa.export())
    for delta, graded in enumerate(report.graded):
        expected = sum(1 for t in fa.carrier if tree_stats(t).degree == delta)
        assert sum(graded.values()) == expected

def test_point_morphisms_are_mc_elements(nilpotent):
    """Tests that the maps out of the point cobar algebra send a0 to x or x + y."""
    assert morphisms_from_point(nilpotent) == [{"x": 1}, {"x": 1, "y": 1}]

def test_interval_morphisms_are_gauge_triples(nilpotent):
    """Tests the four triples: h connects x to x + y, and 0 connects each element to itself."""
    found = morphisms_from_interval(nilpotent)
    x, xy, h = {"x": 1}, {"x": 1, "y": 1}, {"h": 1}
    assert found == [(x, x, {}), (x, xy, h), (xy, x, h), (xy, xy, {})]
