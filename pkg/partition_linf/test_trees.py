import pytest
from itertools import product
from unittest.mock import patch

from partition_linf.errors import CapExceededError, ShapeError
from partition_linf.barratt_eccles import BETuple, all_tuples, unit
from partition_linf.trees import (
    CORK,
    TRIVIAL,
    Leaf,
    Vertex,
    canonical_labels,
    canonicalize,
    count_scrt,
    enumerate_scrt,
    graft,
    is_canonical,
    tree_from_json,
    tree_name,
    tree_stats,
    tree_to_json,
    vertices,
)

SWAP = (2, 1)

# --- Fixtures and Mocks ---

@pytest.fixture
def cork_corolla():
    """c_2^{(id,(21))}(cork, 1): one cork under a degree-1 binary vertex."""
    return Vertex(BETuple.of(2, (1, 2), SWAP), (CORK, Leaf(1)))

def _raw_trees(labels, budget):
    """Every tree (any label, any child order) on `labels` with degree <= budget."""
    out = set()
    if len(labels) == 1:
        out.add(Leaf(labels[0]))
    if not labels and budget >= 1:
        out.add(CORK)
    for r in range(budget):
        rest = budget - r - 1
        for m in range(2, len(labels) + rest + 1):
            for assignment in product(range(m), repeat=len(labels)):
                blocks = [tuple(x for x, a in zip(labels, assignment) if a == j) for j in range(m)]
                for children in _raw_children(blocks, rest):
                    for w in all_tuples(m, r):
                        out.add(Vertex(w, children))
    return out

def _raw_children(blocks, budget):
    if not blocks:
        yield ()
        return
    for first in _raw_trees(blocks[0], budget):
        for rest in _raw_children(blocks[1:], budget - tree_stats(first).degree):
            yield (first,) + rest

# --- Test Cases ---

def test_vertex_needs_two_children():
    """Tests that unary vertices are rejected."""
    with pytest.raises(ShapeError, match="at least two children"):
        Vertex(unit(1), (Leaf(1),))

def test_vertex_label_arity_must_match():
    """Tests that the label arity equals the number of children."""
    with pytest.raises(ShapeError, match="does not match"):
        Vertex(unit(3), (Leaf(1), Leaf(2)))

def test_trivial_tree_stats():
    """Tests that the single leaf has degree 0, weight 0, arity 1."""
    s = tree_stats(TRIVIAL)
    assert (s.degree, s.weight, s.arity) == (0, 0, 1)

@pytest.mark.parametrize("n", [2, 3, 4])
def test_corolla_stats(n):
    """Tests that a degree-0 corolla has degree 1, weight 1, arity n."""
    corolla = Vertex(unit(n), tuple(Leaf(j) for j in range(1, n + 1)))
    s = tree_stats(corolla)
    assert (s.degree, s.weight, s.arity) == (1, 1, n)

def test_cork_corolla_stats(cork_corolla):
    """Tests that one cork plus a degree-1 vertex gives (3, 2, 1)."""
    s = tree_stats(cork_corolla)
    assert (s.degree, s.weight, s.arity) == (3, 2, 1)
    assert s.corks == 1
    assert s.leaves == 2

def test_enumerate_trivial_only():
    """Tests that arity 1 and degree 0 admit only the trivial tree."""
    assert enumerate_scrt(1, 0) == [TRIVIAL]

def test_enumerate_two_binary_corollas():
    """Tests that arity 2 at degree <= 1 gives exactly c^{(id)} and c^{((21))}."""
    identity_corolla, _ = canonicalize(Vertex(unit(2), (Leaf(1), Leaf(2))))
    swapped_corolla, _ = canonicalize(Vertex(BETuple.of(2, SWAP), (Leaf(1), Leaf(2))))
    found = enumerate_scrt(2, 1)
    assert len(found) == 2
    assert set(found) == {identity_corolla, swapped_corolla}
    assert swapped_corolla == Vertex(unit(2), (Leaf(2), Leaf(1)))

@pytest.mark.parametrize("arity, max_degree", [(0, 3), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_enumeration_matches_brute_force(arity, max_degree):
    """Tests the enumeration against canonicalized raw trees (all labels, all orders)."""
    raw = _raw_trees(tuple(range(1, arity + 1)), max_degree)
    expected = {canonicalize(t)[0] for t in raw}
    found = enumerate_scrt(arity, max_degree)
    assert len(found) == len(set(found))
    assert set(found) == expected
    assert all(is_canonical(t) for t in found)

def test_enumeration_order_is_deterministic():
    """Tests that two calls return the same list, sorted by degree."""
    first = enumerate_scrt(2, 3)
    assert first == enumerate_scrt(2, 3)
    degrees = [tree_stats(t).degree for t in first]
    assert degrees == sorted(degrees)

def test_enumeration_closed_under_label_change():
    """Tests that replacing the root label by any canonical label of the same shape stays enumerated."""
    found = enumerate_scrt(3, 3)
    members = set(found)
    for tree in found:
        if not isinstance(tree, Vertex):
            continue
        for label in canonical_labels(tree.label.arity, tree.label.degree):
            assert Vertex(label, tree.children) in members

def test_enumeration_cap():
    """Tests that exceeding the cap raises CapExceededError."""
    with pytest.raises(CapExceededError, match="cap of 1"):
        enumerate_scrt(2, 2, cap=1)

@pytest.mark.parametrize("arity, max_degree", [(0, 3), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_count_matches_enumeration(arity, max_degree):
    """Tests that the counting pass agrees with the trees actually built."""
    assert count_scrt(arity, max_degree) == len(enumerate_scrt(arity, max_degree))

def test_enumeration_cap_trips_before_building():
    """Tests that an over-cap request reports the full count and never builds a tree."""
    needed = count_scrt(3, 3)
    with patch("partition_linf.trees._trees") as build:
        with pytest.raises(CapExceededError) as info:
            enumerate_scrt(3, 3, cap=needed - 1)
    assert info.value.needed == needed
    build.assert_not_called()

def test_graft_unit_and_counit():
    """Tests graft(trivial, t, 1) = t and graft(t, trivial, j) = t."""
    for t in enumerate_scrt(2, 2):
        assert graft(TRIVIAL, t, 1) == t
        for j in (1, 2):
            assert graft(t, TRIVIAL, j) == t

def test_graft_is_additive():
    """Tests degree and weight additivity and arity(outer)+arity(inner)-1."""
    for outer in enumerate_scrt(2, 2):
        for inner in enumerate_scrt(2, 1) + enumerate_scrt(0, 2):
            for j in (1, 2):
                g = graft(outer, inner, j)
                so, si, sg = tree_stats(outer), tree_stats(inner), tree_stats(g)
                assert sg.degree == so.degree + si.degree
                assert sg.weight == so.weight + si.weight
                assert sg.arity == so.arity + si.arity - 1

def test_graft_onto_cork_is_rejected():
    """Tests that a cork has no leaf to graft onto."""
    with pytest.raises(ShapeError, match="cork"):
        graft(CORK, TRIVIAL, 1)

def test_canonicalize_koszul_sign():
    """Tests that swapping two odd children flips the sign exponent, even ones do not."""
    raw = Vertex(BETuple.of(2, SWAP), (Leaf("a"), Leaf("b")))
    tree, exponent = canonicalize(raw, lambda key: 1)
    assert tree == Vertex(unit(2), (Leaf("b"), Leaf("a")))
    assert exponent % 2 == 1
    assert canonicalize(raw)[1] == 0

def test_canonicalize_is_idempotent():
    """Tests that canonical trees are fixed with exponent 0."""
    for t in enumerate_scrt(3, 2):
        assert canonicalize(t) == (t, 0)

def test_json_round_trip(cork_corolla):
    """Tests that the nested JSON encoding decodes to the same tree."""
    assert tree_from_json(tree_to_json(cork_corolla)) == cork_corolla
    assert tree_to_json(CORK) == {"cork": True}

def test_json_malformed_node():
    """Tests that an unknown node shape is a ShapeError."""
    with pytest.raises(ShapeError, match="malformed"):
        tree_from_json({"vertex": 3})

def test_tree_name():
    """Tests the compact printable name."""
    assert tree_name(Vertex(unit(2), (Leaf("x"), CORK))) == "c2[12](x,c0)"

def test_vertices_walk(cork_corolla):
    """Tests that corks are not reported as labelled vertices."""
    assert list(vertices(cork_corolla)) == [cork_corolla]
