import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors as sympy_invariant_factors

from strata.linalg import (
    AbelianGroup,
    CoefficientRing,
    NotAComplex,
    PresentedChainComplex,
    SparseIntMatrix,
    change_of_rings,
    determinant,
    homology,
    homology_basis,
    integer_kernel,
    invariant_factors,
    kernel_mod,
    mapping_cone,
    rank,
    relative_kernel,
    smith_normal_form,
    solve_integer,
    subcomplex_homology,
)


def random_sparse(rng, max_dim=30, density=0.2, values=(1, -1, 2, -2, 3, 5)):
    rows, cols = rng.randint(1, max_dim), rng.randint(1, max_dim)
    entries = {(i, j): rng.choice(values) for i in range(rows) for j in range(cols) if rng.random() < density}
    return SparseIntMatrix(rows, cols, entries)


def sympy_matrix(m):
    return Matrix(m.rows, m.cols, lambda i, j: m[i, j])


def divides_chain(d):
    return all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))


def check_snf_contract(m):
    snf = smith_normal_form(m)
    assert snf.U @ m @ snf.V == snf.D
    assert all(v == 0 for (i, j), v in snf.D.entries.items() if i != j)
    diag = snf.diagonal
    assert all(d > 0 for d in diag)
    assert divides_chain(diag)
    assert abs(determinant(snf.U)) == 1
    assert abs(determinant(snf.V)) == 1
    return diag


def test_snf_contract_on_a_thousand_random_sparse_matrices():
    rng = random.Random(20240611)
    for _ in range(1000):
        check_snf_contract(random_sparse(rng))


def test_unimodular_determinants_agree_with_sympy():
    rng = random.Random(5)
    for _ in range(20):
        m = random_sparse(rng, max_dim=12)
        snf = smith_normal_form(m)
        assert determinant(snf.U) == sympy_matrix(snf.U).det()
        assert determinant(snf.V) == sympy_matrix(snf.V).det()


@given(st.integers(1, 9), st.integers(1, 9), st.data())
def test_invariant_factors_match_sympy(rows, cols, data):
    vals = data.draw(st.lists(st.integers(-4, 4), min_size=rows * cols, max_size=rows * cols))
    m = SparseIntMatrix.from_dense([vals[i * cols:(i + 1) * cols] for i in range(rows)])
    ours = [d for d in invariant_factors(m.columns()) if d != 1]
    theirs = [abs(int(d)) for d in sympy_invariant_factors(sympy_matrix(m), domain=ZZ) if d not in (0, 1, -1)]
    assert sorted(ours) == sorted(theirs)
    snf = [d for d in smith_normal_form(m).diagonal if d != 1]
    assert snf == sorted(theirs)


@given(st.integers(1, 10), st.integers(1, 10), st.data())
def test_rank_over_q_and_gf_p_match_sympy(rows, cols, data):
    vals = data.draw(st.lists(st.integers(-3, 3), min_size=rows * cols, max_size=rows * cols))
    m = SparseIntMatrix.from_dense([vals[i * cols:(i + 1) * cols] for i in range(rows)])
    sm = sympy_matrix(m)
    assert rank(m.columns()) == sm.rank()
    mod3 = sm.applyfunc(lambda x: x % 3)
    # rank over GF(3) via row reduction modulo 3
    assert rank(m.columns(), 3) == _rank_mod(mod3, 3)


def _rank_mod(sm, p):
    rows = [[int(sm[i, j]) % p for j in range(sm.cols)] for i in range(sm.rows)]
    r = 0
    for c in range(sm.cols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_integer_kernel_is_saturated_basis(rows, cols, data):
    vals = data.draw(st.lists(st.integers(-3, 3), min_size=rows * cols, max_size=rows * cols))
    m = SparseIntMatrix.from_dense([vals[i * cols:(i + 1) * cols] for i in range(rows)])
    k = integer_kernel(m)
    assert (m @ k).is_zero()
    assert k.cols == cols - sympy_matrix(m).rank()
    if k.cols:
        # saturated: all invariant factors of the basis are 1
        assert all(d == 1 for d in smith_normal_form(k).diagonal)


def test_kernel_mod_p():
    m = SparseIntMatrix.from_dense([[1, 1], [1, 1]])
    assert integer_kernel(m).cols == 1
    m2 = SparseIntMatrix.from_dense([[2, 0], [0, 2]])
    assert integer_kernel(m2).cols == 0
    assert kernel_mod(m2, 2).cols == 2


def test_relative_kernel_is_the_lattice_not_its_saturation():
    m = SparseIntMatrix.identity(2)
    s = SparseIntMatrix.from_dense([[2], [0]])
    k = relative_kernel(m, s)
    # {x : x in span{(2, 0)}} has basis (2, 0); no multiple of (1, 0) below 2 lies in it
    assert k.cols == 1
    assert sorted(abs(v) for v in k.entries.values()) == [2]


def test_relative_kernel_contains_kernel():
    m = SparseIntMatrix.from_dense([[1, 1, 0], [0, 0, 1]])
    s = SparseIntMatrix.from_dense([[0], [1]])
    k = relative_kernel(m, s)
    assert k.cols == 2


def test_solve_integer():
    a = SparseIntMatrix.from_dense([[2, 0], [0, 3]])
    x = solve_integer(a, {0: 4, 1: 9})
    assert a.apply(x) == {0: 4, 1: 9}
    assert solve_integer(a, {0: 1}) is None


@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5),
       st.integers(-9, 9), st.integers(-9, 9))
def test_solve_integer_finds_solutions_when_they_exist(a, b, c, d, x0, x1):
    m = SparseIntMatrix.from_dense([[a, b], [c, d]])
    rhs = m.apply({0: x0, 1: x1})
    x = solve_integer(m, rhs)
    assert x is not None
    assert m.apply(x) == rhs


def test_ring_parsing():
    assert str(CoefficientRing.parse("Z")) == "Z"
    assert str(CoefficientRing.parse("QQ")) == "Q"
    assert CoefficientRing.parse("Z/4").modulus == 4
    assert CoefficientRing.parse("Z/5").is_field
    assert not CoefficientRing.parse("Z/6").is_field
    with pytest.raises(ValueError):
        CoefficientRing.parse("Z/1")
    with pytest.raises(ValueError):
        CoefficientRing.parse("R")


@pytest.mark.parametrize("text", ["0", "Z", "Z^3", "Z/2", "Z^2 + Z/2 + Z/4", "Z/2 + Z/6"])
def test_group_text_round_trip(text):
    assert str(AbelianGroup.parse(str(AbelianGroup.parse(text)))) == str(AbelianGroup.parse(text))


def test_group_canonical_form():
    assert AbelianGroup.from_orders(0, [2, 3]) == AbelianGroup(0, (6,))
    assert AbelianGroup.from_orders(1, [4, 2, 1]) == AbelianGroup(1, (2, 4))
    with pytest.raises(ValueError):
        AbelianGroup(0, (4, 2))


@pytest.mark.parametrize("ring,text", [("Q", "Q^2"), ("Z/2", "(Z/2)^2"), ("Z/4", "Z/4 + Z/2"), ("Z/3", "Z/3")])
def test_group_format_over_rings(ring, text):
    g = AbelianGroup.parse_over(text, ring)
    assert g.format(ring) == text


def chain_complex(diffs, dims):
    return PresentedChainComplex(dims, {k: SparseIntMatrix.from_dense(m, dims.get(k, 0)) if m else
                                        SparseIntMatrix(dims.get(k - 1, 0), dims.get(k, 0))
                                        for k, m in diffs.items()})


def rp2_cellular():
    # one cell per dimension, d_2 = 2, d_1 = 0
    return PresentedChainComplex({0: 1, 1: 1, 2: 1}, {1: SparseIntMatrix(1, 1), 2: SparseIntMatrix.from_dense([[2]])})


def test_homology_of_rp2_cell_complex():
    cx = rp2_cellular()
    assert [str(homology(cx, k, "Z")) for k in range(3)] == ["Z", "Z/2", "0"]
    assert [homology(cx, k, "Z/2").rank for k in range(3)] == [1, 1, 1]
    assert [homology(cx, k, "Q").rank for k in range(3)] == [1, 0, 0]
    assert [str(homology(cx, k, "Z/4")) for k in range(3)] == ["Z", "Z/2", "Z/2"]


def test_not_a_complex():
    cx = PresentedChainComplex({0: 1, 1: 1, 2: 1},
                               {1: SparseIntMatrix.from_dense([[1]]), 2: SparseIntMatrix.from_dense([[1]])})
    with pytest.raises(NotAComplex):
        homology(cx, 1)


def test_subcomplex_homology_with_allowed_generators():
    # interval [a, b] with only the edge and a allowed: {x : dx allowed}
    cx = PresentedChainComplex({0: 2, 1: 1}, {1: SparseIntMatrix.from_dense([[-1], [1]])})
    allowed = {0: [0], 1: [0]}
    # the edge has boundary b - a, not allowed, so the subcomplex is just a
    assert str(subcomplex_homology(cx, 0, CoefficientRing.parse("Z"), allowed)) == "Z"
    assert str(subcomplex_homology(cx, 1, CoefficientRing.parse("Z"), allowed)) == "0"


def test_mapping_cone_of_identity_is_acyclic():
    cx = rp2_cellular()
    ident = {k: SparseIntMatrix.identity(1) for k in range(3)}
    cone, _ = mapping_cone(cx, cx, ident)
    cone.check()
    assert all(homology(cone, k, "Z").is_zero for k in range(-1, 4))


def test_mapping_cone_of_zero_map_is_a_sum_of_shifts():
    cx = rp2_cellular()
    zero = {k: SparseIntMatrix(1, 1) for k in range(3)}
    cone, _ = mapping_cone(cx, cx, zero)
    # H_k(cone) = H_k(C) + H_(k-1)(C)
    assert [str(homology(cone, k, "Z")) for k in range(4)] == ["Z", "Z + Z/2", "Z/2", "0"]


def test_homology_basis_coordinates():
    cx = rp2_cellular()
    b = homology_basis(cx, 1, "Z/2")
    assert b.dimension == 1
    assert b.coordinates({0: 1}) == [1]
    assert b.coordinates({0: 2}) == [0]
    q = homology_basis(cx, 1, "Q")
    assert q.dimension == 0
    with pytest.raises(ValueError):
        homology_basis(cx, 1, "Z")


def test_homology_basis_of_a_circle():
    # circle with vertices 0,1,2 and edges 01, 12, 02
    d1 = SparseIntMatrix.from_dense([[-1, 0, -1], [1, -1, 0], [0, 1, 1]])
    cx = PresentedChainComplex({0: 3, 1: 3}, {1: d1})
    b = homology_basis(cx, 1, "Q")
    assert b.dimension == 1
    loop = {0: 1, 1: 1, 2: -1}
    c = b.coordinates(loop)
    assert c[0] != 0
    assert b.coordinates({0: 3, 1: 3, 2: -3}) == [3 * c[0]]
    assert isinstance(c[0], (int, Fraction))
    with pytest.raises(ValueError):
        b.coordinates({0: 1})


HOMOLOGY = {
    "RP3": ["Z", "Z/2", "0", "Z"],
    "T2": ["Z", "Z^2", "Z"],
    "lens": ["Z", "Z/6", "0", "Z"],
}


@pytest.mark.parametrize("name", sorted(HOMOLOGY))
@pytest.mark.parametrize("ring", ["Q", "Z/2", "Z/3", "Z/4"])
def test_change_of_rings_against_cellular_chains(name, ring):
    # a cellular complex with the given integral homology: Z^r cells with
    # diagonal differentials realise any list of groups
    groups = [AbelianGroup.parse(g) for g in HOMOLOGY[name]]
    dims, diffs = {}, {}
    for k, g in enumerate(groups):
        dims[k] = g.rank + len(g.torsion) + (len(groups[k - 1].torsion) if k else 0)
    for k in range(1, len(groups)):
        below = groups[k - 1]
        d = SparseIntMatrix(dims[k - 1], dims[k])
        entries = {}
        off_rows = below.rank
        off_cols = groups[k].rank + len(groups[k].torsion)
        for t, order in enumerate(below.torsion):
            entries[(off_rows + t, off_cols + t)] = order
        diffs[k] = SparseIntMatrix(dims[k - 1], dims[k], entries)
    cx = PresentedChainComplex(dims, diffs)
    assert [str(homology(cx, k, "Z")) for k in range(len(groups))] == HOMOLOGY[name]
    direct = [homology(cx, k, ring) for k in range(len(groups))]
    assert change_of_rings(groups, ring) == direct
    dual = PresentedChainComplex(dims, {k - 1: m.transpose() for k, m in diffs.items()}, step=+1)
    assert change_of_rings(groups, ring, cohomology=True) == [homology(dual, k, ring) for k in range(len(groups))]
