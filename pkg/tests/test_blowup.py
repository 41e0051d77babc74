import pytest
from hypothesis import given
from hypothesis import strategies as st

from strata import corpus
from strata.blowup import (
    blowup_cohomology,
    blowup_complex,
    coboundary,
    cochain_perverse_degree,
    compatibility_kernel,
    dual_complex_cohomology,
    element_degree,
    element_perverse_degree,
    filtered_simplex,
    local_blowup_complex,
)
from strata.complex import cone, realize
from strata.linalg import AbelianGroup, change_of_rings, homology, solve_integer

COHOMOLOGY_OF = {
    "circle": ["Z", "Z"],
    "S2": ["Z", "0", "Z"],
    "RP2": ["Z", "Z/2", "0"],
    "RP3": ["Z", "Z/2", "0", "Z"],
    "T2": ["Z", "Z^2", "Z"],
}
RINGS = ["Z", "Q", "Z/2", "Z/3"]
SMALL = [n for n in corpus.names() if corpus.ENTRIES[n].small]


def cohomology(name, ring):
    # integral homology through universal coefficients
    return change_of_rings([AbelianGroup.parse(g) for g in COHOMOLOGY_OF[name]], ring, cohomology=True)


@pytest.mark.parametrize("name", SMALL)
def test_coboundary_squares_to_zero(name):
    blowup_complex(corpus.get(name)).cochains.check()


def test_elements_of_a_cone_edge():
    fc = corpus.get("cone-two-points")
    bc = blowup_complex(fc)
    # vertex a: one element; edge (v, a): apex flag 0 or 1
    assert sorted(bc.elements[0]) == [(("a",), (1,)), (("b",), (1,)), (("v", "a"), (0,)), (("v", "b"), (0,))]
    assert element_degree(fc, ("v", "a"), (1,)) == 1
    assert coboundary(fc, ("v", "a"), (0,)) == {(("v", "a"), (1,)): -1}
    # the apex direction is the only way up from a base vertex
    assert coboundary(fc, ("a",), (1,)) == {(("v", "a"), (1,)): 1}


shapes = st.lists(st.integers(0, 2), min_size=1, max_size=4).filter(lambda s: s[-1] > 0 and sum(s) <= 5)


def layers_of(shape):
    out, k = [], 0
    for size in shape:
        out.append([f"v{k + j}" for j in range(size)])
        k += size
    return out


@given(shapes)
def test_local_blown_up_simplex_is_acyclic(shape):
    bc = local_blowup_complex(layers_of(shape))
    bc.cochains.check()
    n = len(shape) - 1
    assert [str(homology(bc.cochains, k)) for k in range(n + 2)] == ["Z"] + ["0"] * (n + 1)


@given(shapes)
def test_global_basis_solves_the_compatibility_equations(shape):
    fc = filtered_simplex(layers_of(shape))
    bc = blowup_complex(fc)
    for k in range(fc.dim + 1):
        coords, ker = compatibility_kernel(fc, k)
        assert ker.cols == len(bc.elements.get(k, []))
        pos = {c: j for j, c in enumerate(coords)}
        for el in bc.elements.get(k, []):
            # e_(tau, eps) is 1_(tau, eps) on every simplex containing tau
            vec = {j: 1 for (sigma, e), j in pos.items() if e == el}
            assert solve_integer(ker, vec) is not None


@pytest.mark.parametrize("name", ["cone-two-points", "susp-S1", "cone-S2"])
def test_compatibility_kernel_on_corpus(name):
    fc = corpus.get(name)
    bc = blowup_complex(fc)
    assert [compatibility_kernel(fc, k)[1].cols for k in range(fc.dim + 1)] == \
        [len(bc.elements.get(k, [])) for k in range(fc.dim + 1)]


def test_perverse_degrees_of_elements():
    fc = filtered_simplex([["a"], ["b", "c"], ["d"]])
    tau, eps = ("a", "b", "d"), (0, 0)
    # codim 2 (level 0): degree of the part above, |b| + |d| = 0 + 0
    assert cochain_perverse_degree(fc, tau, eps, 2) == 0
    assert cochain_perverse_degree(fc, tau, eps, 1) == 0
    assert cochain_perverse_degree(fc, tau, (1, 0), 2) == float("-inf")
    assert cochain_perverse_degree(fc, ("a", "b", "c", "d"), (0, 0), 2) == 1
    with pytest.raises(ValueError):
        cochain_perverse_degree(fc, tau, eps, 0)
    st0 = fc.stratum("S0.0")
    assert element_perverse_degree(fc, tau, eps, st0) == 0
    assert element_perverse_degree(fc, tau, (1, 0), st0) == float("-inf")


@pytest.mark.parametrize("name", sorted(COHOMOLOGY_OF))
@pytest.mark.parametrize("ring", RINGS)
def test_manifolds_give_ordinary_cohomology(name, ring):
    fc = corpus.get(name)
    for p in ("zero", "top"):
        assert blowup_cohomology(fc, p, ring) == cohomology(name, ring)


@pytest.mark.parametrize("link", ["circle", "S2", "RP2", "RP3"])
@pytest.mark.parametrize("ring", RINGS)
def test_cone_formula(link, ring):
    # the link's cohomology up to the apex value, zero above
    fc = cone(corpus.get(link))
    n = fc.dim
    lc = cohomology(link, ring)
    for p in range(-1, n):
        want = [lc[k] if k <= p and k < len(lc) else AbelianGroup() for k in range(n + 1)]
        assert blowup_cohomology(fc, str(p), ring) == want, p


@pytest.mark.parametrize("name", ["RP2-x-I", "cone-two-points-x-I"])
def test_product_with_an_interval(name):
    fc = corpus.get(name)
    base = fc.parent
    for p in ("zero", "top"):
        *low, top = blowup_cohomology(fc, realize(p, fc))
        assert low == blowup_cohomology(base, p)
        assert top.is_zero


@pytest.mark.parametrize("name", ["cone-S2", "cone-RP2", "susp-S1", "susp-RP2", "wedge-S2-S2"])
@pytest.mark.parametrize("ring", ["Z", "Q", "Z/2", "Z/4"])
def test_dual_complex_transpose_matches_universal_coefficients(name, ring):
    fc = corpus.get(name)
    for p in ("zero", "top"):
        assert dual_complex_cohomology(fc, p, ring, method="transpose") == dual_complex_cohomology(fc, p, ring)


@pytest.mark.parametrize("name", [n for n in SMALL if any(e.theory == "blowup" for e in corpus.expected(n))])
def test_corpus_expectations(name):
    fc = corpus.get(name)
    for e in corpus.expected(name):
        if e.theory == "blowup":
            spec = corpus.ENTRIES[name].perversities.get(e.perversity, e.perversity)
            assert [g.format(e.ring) for g in blowup_cohomology(fc, spec, e.ring)] == list(e.groups)
