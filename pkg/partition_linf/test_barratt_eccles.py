import pytest
from hypothesis import given, settings, strategies as st

from partition_linf.errors import ShapeError
from partition_linf.scalars import PrimeField
from partition_linf.permutations import Permutation, block_compose
from partition_linf.barratt_eccles import (
    BETuple,
    all_tuples,
    be_differential,
    check_adjointness,
    check_coleibniz,
    check_d_squared,
    check_duality,
    cork_decompose,
    dual_differential,
    epsilon_s,
    lattice_paths,
    lattice_sign,
    pair_elements,
    pairing,
    partial_compose,
    partial_decompose,
    unit,
)

ID2 = (1, 2)
SWAP = (2, 1)

# --- Fixtures and Mocks ---

@pytest.fixture
def f2():
    """The reference field, where every sign is 1."""
    return PrimeField(2)

@pytest.fixture
def f3():
    """F_3, used to see signs."""
    return PrimeField(3)

# --- Test Cases ---

def test_tuple_entries_must_be_distinct():
    """Tests that a repeated permutation is rejected."""
    with pytest.raises(ShapeError, match="pairwise distinct"):
        BETuple.of(2, ID2, SWAP, ID2)

def test_tuple_arity_must_match():
    """Tests that every entry has the declared arity."""
    with pytest.raises(ShapeError):
        BETuple.of(3, ID2)

def test_dual_differential_arity_one_vanishes():
    """Tests that S_1 offers nothing to insert."""
    assert dual_differential(unit(1), 2, "full") == {}

def test_dual_differential_on_identity_full():
    """Tests d2((id)) = ((21),id) + (id,(21)) over F_2."""
    assert dual_differential(unit(2), 2, "full") == {
        BETuple.of(2, SWAP, ID2): 1,
        BETuple.of(2, ID2, SWAP): 1,
    }

def test_dual_differential_on_identity_displayed():
    """Tests that the displayed range only inserts at spot 0 when r = 0."""
    assert dual_differential(unit(2), 2, "displayed") == {BETuple.of(2, SWAP, ID2): 1}

def test_dual_differential_signs(f3):
    """Tests the (-1)^spot signs over F_3."""
    d = dual_differential(unit(2), 3, "full")
    assert d[BETuple.of(2, SWAP, ID2)] == 1
    assert d[BETuple.of(2, ID2, SWAP)] == 2

@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("mode", ["full", "displayed"])
def test_d_squared_vanishes(p, mode):
    """Tests d2 o d2 = 0 on every tuple with n <= 3, r <= 2."""
    assert check_d_squared(3, 2, p, mode) == []

@pytest.mark.parametrize("mode", ["full", "displayed"])
def test_be_differential_is_transpose(mode):
    """Tests <be_differential(x), y> = <x, d2(y)> for n <= 3, r <= 2."""
    assert check_adjointness(3, 2, 3, mode) == []

def test_be_differential_degree_zero():
    """Tests that a degree-0 tuple has no faces."""
    assert be_differential(unit(3), 2, "full") == {}

def test_be_differential_squares_to_zero():
    """Tests that deleting twice cancels on degree-2 tuples of arity 3."""
    for w in all_tuples(3, 2):
        once = be_differential(w, 3, "full")
        twice = {}
        for face, c in once.items():
            for face2, c2 in be_differential(face, 3, "full").items():
                twice[face2] = (twice.get(face2, 0) + c * c2) % 3
        assert all(v == 0 for v in twice.values())

def test_lattice_paths_count():
    """Tests that there are binomial(a+b, a) paths."""
    assert len(list(lattice_paths(2, 2))) == 6
    assert list(lattice_paths(0, 0)) == [()]

def test_lattice_signs(f3):
    """Tests HH..VV -> +1, VH -> -1, VVH -> +1."""
    assert lattice_sign(("H", "H", "V", "V"), f3) == 1
    assert lattice_sign(("V", "H"), f3) == -1
    assert lattice_sign(("V", "V", "H"), f3) == 1

def test_compose_degree_zero_singletons():
    """Tests (s) o_i (v) = (s o_i v) through block composition."""
    s, v = Permutation.of(2, 1), Permutation.of(2, 1)
    for i in (1, 2):
        x, y = BETuple(2, (s,)), BETuple(2, (v,))
        assert partial_compose(x, y, i, 2) == {BETuple(3, (block_compose(s, v, i),)): 1}

def test_compose_identities():
    """Tests (id_n) o_i (id_k) = (id_{n+k-1})."""
    assert partial_compose(unit(2), unit(3), 2, 2) == {unit(4): 1}

def test_compose_degree_one_counts_paths():
    """Tests that two degree-1 tuples compose along the two (1,1) lattice paths."""
    x = BETuple.of(2, ID2, SWAP)
    y = BETuple.of(2, ID2, SWAP)
    assert len(partial_compose(x, y, 1, 2)) == 2

def test_decompose_identity():
    """Tests Delta_1^{2,2}((id_3)) = (id_2) (x) (id_2)."""
    assert partial_decompose(unit(3), 2, 2, 1, 2) == {(unit(2), unit(2)): 1}

def test_decompose_non_admissible_is_zero():
    """Tests that a tuple containing [1,3,2] has no (2,2,1) decomposition."""
    w = BETuple.of(3, (1, 2, 3), (1, 3, 2))
    assert partial_decompose(w, 2, 2, 1, 2) == {}

def test_decompose_arity_mismatch():
    """Tests that the arities must satisfy n + k - 1 = arity(w)."""
    with pytest.raises(ShapeError, match="arity mismatch"):
        partial_decompose(unit(3), 2, 3, 1, 2)

@pytest.mark.parametrize("p", [2, 3])
def test_duality_of_composition_and_decomposition(p):
    """Tests <Delta_i(z), x (x) y> = <z, x o_i y> for n, k <= 2, degrees <= 1."""
    assert check_duality(2, 1, p) == []

@pytest.mark.parametrize("mode", ["full", "displayed"])
def test_coleibniz_at_p2(mode):
    """Tests that decomposition commutes with d2 on arity-3 tuples of degree <= 2 over F_2."""
    assert check_coleibniz(3, 2, 2, mode) == []

def test_coleibniz_at_p3_needs_koszul_twist():
    """Tests that over F_3 the rule holds with (-1)^deg(x) on 1 (x) d2 and fails without it."""
    assert check_coleibniz(3, 2, 3, "full", "koszul") == []
    plain = check_coleibniz(3, 2, 3, "full", "plain")
    assert plain
    assert all(w.degree >= 1 for w, _, _, _ in plain)

def test_cork_decompose_has_n_plus_one_preimages():
    """Tests that (id_2) has three preimages against the arity-0 unit at slot 1."""
    found = cork_decompose(unit(2), 1)
    assert len(found) == 3
    assert all(x.arity == 3 for x in found)

def test_epsilon_values(f3):
    """Tests the three hand values of epsilon_s at n = 2."""
    assert epsilon_s(unit(2), 1, f3) == 1
    assert epsilon_s(BETuple.of(2, SWAP), 1, f3) == 0
    assert epsilon_s(BETuple.of(2, SWAP, ID2), 2, f3) == -1
    assert epsilon_s(BETuple.of(2, ID2, SWAP), 2, f3) == 1

def test_epsilon_needs_enough_entries(f3):
    """Tests that s may not exceed the tuple length."""
    with pytest.raises(ShapeError, match="at least 2 entries"):
        epsilon_s(unit(2), 2, f3)

def test_pairing_is_kronecker():
    """Tests <w,w> = 1 and <w,w'> = 0."""
    w, w2 = BETuple.of(2, ID2, SWAP), BETuple.of(2, SWAP, ID2)
    assert pairing(w, w) == 1
    assert pairing(w, w2) == 0
    with pytest.raises(ShapeError):
        pairing(unit(2), unit(3))

@settings(derandomize=True, max_examples=50)
@given(
    st.dictionaries(st.sampled_from(all_tuples(3, 1)), st.integers(1, 4), max_size=8),
    st.dictionaries(st.sampled_from(all_tuples(3, 1)), st.integers(1, 4), max_size=8),
)
def test_pairing_bilinear_extension(a, b):
    """Tests that the extended pairing equals the sum of matching coefficients mod 5."""
    expected = sum(a[key] * b[key] for key in a if key in b) % 5
    assert pair_elements(a, b, 5) == expected
