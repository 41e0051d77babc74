from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from strata import corpus
from strata.blowup import blowup_complex, element_degree, filtered_simplex
from strata.chains import tame_complex
from strata.duality import (
    NonOrientable,
    cap_element,
    cap_product,
    chain_boundary,
    coboundary_of,
    cup_product,
    duality_cone_homology,
    fundamental_cycle,
    intersection_product,
    orient,
    unit_cochain,
    verify_duality,
)

# every space here has at most 50 simplices
SMALL = ["cone-two-points", "circle", "S2", "susp-S1", "cone-S2", "wedge-S2-S2"]
SIMPLICES = [filtered_simplex([["a"], ["b", "c"], ["d"]], "s3"), filtered_simplex([["a"], [], ["b", "c"]], "s2")]


def space(key):
    if isinstance(key, int):
        return SIMPLICES[key]
    return corpus.get(key)


spaces = st.sampled_from(SMALL + [0, 1])
coeffs = st.integers(-3, 3)


@st.composite
def cochains(draw, fc, k=None):
    bc = blowup_complex(fc)
    if k is None:
        k = draw(st.sampled_from(sorted(d for d, els in bc.elements.items() if els)))
    els = bc.elements.get(k, [])
    chosen = draw(st.lists(st.sampled_from(els), max_size=6)) if els else []
    return k, {el: draw(coeffs) for el in chosen}


@st.composite
def chains(draw, fc):
    tc = tame_complex(fc)
    k = draw(st.sampled_from(sorted(tc.gens)))
    chosen = draw(st.lists(st.sampled_from(tc.gens[k]), max_size=6))
    return {s: draw(coeffs) for s in chosen}


def add(*terms):
    out = {}
    for sign, vec in terms:
        for key, v in vec.items():
            out[key] = out.get(key, 0) + sign * v
    return {key: v for key, v in out.items() if v}


def test_small_spaces_are_small():
    for key in SMALL + [0, 1]:
        assert len(space(key).simplex_set) <= 50


@given(spaces, st.data())
def test_cap_leibniz(key, data):
    fc = space(key)
    k, omega = data.draw(cochains(fc))
    xi = data.draw(chains(fc))
    lhs = chain_boundary(fc, cap_product(fc, omega, xi))
    rhs = add((1, cap_product(fc, coboundary_of(fc, omega), xi)),
              ((-1) ** k, cap_product(fc, omega, chain_boundary(fc, xi))))
    assert lhs == rhs


@given(spaces, st.data())
def test_cup_leibniz(key, data):
    fc = space(key)
    k, a = data.draw(cochains(fc))
    _, b = data.draw(cochains(fc))
    lhs = coboundary_of(fc, cup_product(fc, a, b))
    rhs = add((1, cup_product(fc, coboundary_of(fc, a), b)), ((-1) ** k, cup_product(fc, a, coboundary_of(fc, b))))
    assert lhs == rhs


@given(spaces, st.data())
def test_cap_is_a_module_action(key, data):
    fc = space(key)
    _, a = data.draw(cochains(fc))
    _, b = data.draw(cochains(fc))
    xi = data.draw(chains(fc))
    assert cap_product(fc, cup_product(fc, a, b), xi) == cap_product(fc, a, cap_product(fc, b, xi))


@given(spaces, st.data())
def test_unit(key, data):
    fc = space(key)
    one = unit_cochain(fc)
    _, a = data.draw(cochains(fc))
    xi = data.draw(chains(fc))
    assert coboundary_of(fc, one) == {}
    assert cup_product(fc, one, a) == {e: v for e, v in a.items() if v}
    assert cup_product(fc, a, one) == {e: v for e, v in a.items() if v}
    assert cap_product(fc, one, xi) == {s: v for s, v in xi.items() if v}


def test_cap_lowers_degree():
    fc = corpus.get("cone-S2")
    bc = blowup_complex(fc)
    for k, els in bc.elements.items():
        for el in els:
            for sigma in fc.simplices(3):
                r = cap_element(fc, el, sigma)
                if r is not None:
                    assert len(r[0]) - 1 == 3 - element_degree(fc, *el)


@pytest.mark.parametrize("name", ["S2", "T2", "susp-S1", "wedge-S2-S2", "RP3"])
def test_orientable_spaces_have_a_fundamental_cycle(name):
    fc = corpus.get(name)
    gamma = fundamental_cycle(fc)
    assert gamma.boundary(fc) == {}
    assert len(gamma.chain) == len(fc.simplices(fc.dim))


def test_projective_plane_is_not_orientable():
    fc = corpus.get("RP2")
    with pytest.raises(NonOrientable) as info:
        orient(fc)
    assert info.value.cycle
    gamma = fundamental_cycle(fc, ring="Z/2")
    assert all(v == 1 for v in gamma.chain.values())
    with pytest.raises(NonOrientable):
        intersection_product(fc, "zero", "zero", 1, 1, "Q")


def test_boundary_is_reported():
    with pytest.raises(ValueError, match="boundary"):
        fundamental_cycle(corpus.get("cone-S2"))


@pytest.mark.parametrize("name,p,ring", [("S2", "zero", "Z"), ("T2", "zero", "Z"), ("susp-S1", "zero", "Z"),
                                         ("susp-S1", "top", "Z/2"), ("wedge-S2-S2", "top", "Q"),
                                         ("RP2", "zero", "Z/2"), ("susp-RP2", "1", "Z/2")])
def test_duality_on_compact_spaces(name, p, ring):
    rep = verify_duality(corpus.get(name), p, ring)
    assert rep.ok, rep.as_json()
    assert all(g.is_zero for g in rep.cone_homology)


def test_duality_of_an_open_cone():
    fc = corpus.get("cone-S2")
    base = [v for v in fc.levels if v != "c"]
    for p in ("zero", "top"):
        rep = verify_duality(fc, p, "Z", removed=base)
        assert rep.ok, rep.as_json()


def test_cap_with_the_wrong_cycle_is_not_an_isomorphism():
    fc = corpus.get("S2")
    gamma = fundamental_cycle(fc)
    doubled = type(gamma)({s: 2 * v for s, v in gamma.chain.items()}, gamma.orientation)
    cone_h = duality_cone_homology(fc, "zero", "Z", gamma=doubled)
    assert any(not g.is_zero for g in cone_h)
    assert all(g.is_zero for g in duality_cone_homology(fc, "zero", "Q", gamma=doubled))


def test_torus_intersection_form():
    prod = intersection_product(corpus.get("T2"), "zero", "zero", 1, 1, "Q")
    assert prod.degrees == (1, 1, 0)
    m = [[prod.table[a][b][0] for b in range(2)] for a in range(2)]
    assert m[0][0] == 0 and m[1][1] == 0
    assert m[0][1] == -m[1][0] != 0


def test_projective_plane_lines_meet_in_a_point():
    prod = intersection_product(corpus.get("RP2"), "zero", "zero", 1, 1, "Z/2")
    assert prod.table == [[[1]]]


def test_sphere_fundamental_class_acts_as_a_unit():
    prod = intersection_product(corpus.get("S2"), "zero", "zero", 2, 2, "Q")
    (c,), = prod.table[0]
    # the basis representative is plus or minus the fundamental cycle
    assert c in (1, -1)
    point = intersection_product(corpus.get("S2"), "zero", "zero", 2, 0, "Q")
    assert point.table[0][0][0] in (Fraction(1), Fraction(-1))


def test_intersection_product_needs_a_field():
    with pytest.raises(ValueError):
        intersection_product(corpus.get("S2"), "zero", "zero", 2, 2, "Z")


def test_intersection_product_below_degree_zero_is_empty():
    prod = intersection_product(corpus.get("S2"), "zero", "zero", 0, 1, "Q")
    assert prod.degrees[2] < 0
    assert all(cell == [] for row in prod.table for cell in row)
