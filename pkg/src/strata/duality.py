"""Orientation, fundamental cycle, cup and cap products, and duality checks.

Cap product.  For a regular simplex sigma the cap of ``1_(F, eps)`` with
sigma is computed on the blow-up prism ``c Delta_0 x ... x c Delta_{n-1} x
Delta_n`` (apex last in each cone) as a factor-wise Alexander-Whitney cap,
then pushed to sigma by the blow-down map

    weight(b in Delta_i) = u_0(apex) * ... * u_{i-1}(apex) * u_i(b).

A factor contributes only when F_i is a front face of its cone; the result
is the join of the back faces, which is again a face of sigma.  The sign is
the Koszul sign of the factor caps times the degree of the blow-down on the
back cell, normalised so the whole prism maps to +sigma.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .blowup import Element, blowup_cohomology, blowup_complex, element_degree
from .chains import (
    _allowable as _simplex_allowable,
    _as_perversity,
    _inclusion_cone,
    borel_moore_ih,
    intersection_homology,
    tame_boundary,
    tame_complex,
)
from .complex import (
    FilteredComplex,
    Orientation,
    Perversity,
    PerversitySpec,
    Simplex,
    closed_star,
    make_perversity,
    open_star_complement,
    realize,
    stellar_near,
)
from .linalg import (
    AbelianGroup,
    CoefficientRing,
    PresentedChainComplex,
    HomologyBasis,
    SparseIntMatrix,
    _Echelon,
    homology_basis,
    mapping_cone,
    subcomplex_homology,
)

Chain = dict[Simplex, int]
Cochain = dict[Element, int]


class NonOrientable(ValueError):
    def __init__(self, message: str, cycle: list[Simplex] | None = None):
        super().__init__(message)
        self.cycle = cycle or []


# ---------------------------------------------------------------------------
# orientation and fundamental cycle


def _face_sign(s: Simplex, face: Simplex) -> int:
    for i, v in enumerate(s):
        if v not in face:
            return (-1) ** i
    raise ValueError("not a facet")


def orient(fc: FilteredComplex, ring="Z") -> Orientation:
    """Coherent signs on top simplices, propagated across regular
    codimension-one faces.  Faces lying in a single top simplex are treated
    as boundary.  Over Z/2 every sign is +1."""
    ring = CoefficientRing.parse(ring)
    n = fc.dim
    tops = fc.simplices(n)
    if ring.kind == "Z/m" and ring.modulus == 2:
        return Orientation({s: 1 for s in tops})
    adj: dict[Simplex, list[Simplex]] = {}
    for s in tops:
        for i in range(len(s)):
            f = s[:i] + s[i + 1:]
            if f and fc.is_regular(f):
                adj.setdefault(f, []).append(s)
    for f, ss in adj.items():
        if len(ss) > 2:
            raise NonOrientable(f"regular face {list(f)} lies in {len(ss)} top simplices", [f])
    signs: dict[Simplex, int] = {}
    parent: dict[Simplex, Simplex | None] = {}
    for root in tops:
        if root in signs:
            continue
        signs[root] = 1
        parent[root] = None
        stack = [root]
        while stack:
            s = stack.pop()
            for i in range(len(s)):
                f = s[:i] + s[i + 1:]
                for t in adj.get(f, ()):
                    if t == s:
                        continue
                    want = -signs[s] * _face_sign(s, f) * _face_sign(t, f)
                    if t not in signs:
                        signs[t] = want
                        parent[t] = s
                        stack.append(t)
                    elif signs[t] != want:
                        raise NonOrientable(
                            f"orientation reverses across {list(f)}",
                            _tree_path(parent, s) + _tree_path(parent, t)[::-1],
                        )
    return Orientation(signs)


def _tree_path(parent, s):
    out = []
    while s is not None:
        out.append(s)
        s = parent[s]
    return out


@dataclass
class FundamentalCycle:
    chain: Chain
    orientation: Orientation

    def boundary(self, fc: FilteredComplex) -> Chain:
        return chain_boundary(fc, self.chain)


def chain_boundary(fc: FilteredComplex, xi: Mapping[Simplex, int]) -> Chain:
    out: Chain = {}
    for s, c in xi.items():
        for f, v in tame_boundary(fc, s).items():
            out[f] = out.get(f, 0) + c * v
    return {f: v for f, v in out.items() if v}


def fundamental_cycle(fc: FilteredComplex, orientation: Orientation | None = None, ring="Z",
                      boundary_ok: bool = False) -> FundamentalCycle:
    """Sum of the signed top simplices.  Checks the cycle condition (mod 2
    over Z/2) unless ``boundary_ok``, and zero-perversity allowability."""
    ring = CoefficientRing.parse(ring)
    if orientation is None:
        orientation = orient(fc, ring)
    chain = {s: orientation[s] for s in fc.simplices(fc.dim)}
    zero = make_perversity(fc, PerversitySpec("zero"))
    bad = [s for s in chain if not _simplex_allowable(fc, s, zero)]
    if bad:
        raise ValueError(f"top simplex {list(bad[0])} is not 0-allowable")
    if not boundary_ok:
        d = chain_boundary(fc, chain)
        if ring.kind == "Z/m":
            d = {f: v for f, v in d.items() if v % ring.modulus}
        if d:
            raise ValueError(f"fundamental chain has boundary at {list(next(iter(d)))}")
    return FundamentalCycle(chain, orientation)


# ---------------------------------------------------------------------------
# blow-down degrees


def _det(rows: list[list[Fraction]]) -> Fraction:
    m = [r[:] for r in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                q = m[r][c] / m[c][c]
                m[r] = [a - q * b for a, b in zip(m[r], m[c])]
    return det


@lru_cache(maxsize=None)
def blowdown_degree(shape: tuple[int, ...]) -> int:
    """Orientation degree of the blow-down on the cell
    ``(B_0 * v) x ... x (B_{n-1} * v) x B_n`` onto ``B_0 * ... * B_n``,
    where ``shape`` lists the sizes of the B_i (B_n non-empty).

    Each factor simplex is oriented by its vertex order (B_i first, apex
    last) and parametrised by the weights of all but its first vertex; the
    join likewise.  The sign of the Jacobian at an interior point is the
    degree.
    """
    *cones, last = shape
    # local coordinates: (factor, vertex position) for all but position 0
    coords = []
    factor_sizes = [b + 1 for b in cones] + [last]
    for f, size in enumerate(factor_sizes):
        coords += [(f, j) for j in range(1, size)]
    point = {f: [Fraction(1, size)] * size for f, size in enumerate(factor_sizes)}

    def weight(f, j):
        return point[f][j]

    def dweight(f, j, c):
        cf, cj = c
        if cf != f:
            return Fraction(0)
        if j == cj:
            return Fraction(1)
        return Fraction(-1) if j == 0 else Fraction(0)

    # join vertices: (factor, position) for B-vertices, in order
    join = [(f, j) for f, b in enumerate(cones) for j in range(b)] + [(len(cones), j) for j in range(last)]
    outputs = join[1:]
    if len(outputs) != len(coords):
        raise ValueError(f"cell and join dimensions differ for shape {shape}")
    if not outputs:
        return 1

    def terms(f, j):
        # product factors of the join weight: apex weights of earlier cones, then own
        return [(g, factor_sizes[g] - 1) for g in range(f)] + [(f, j)]

    jac = []
    for f, j in outputs:
        ts = terms(f, j)
        row = []
        for c in coords:
            tot = Fraction(0)
            for k, t in enumerate(ts):
                d = dweight(*t, c)
                if d:
                    prod = d
                    for k2, t2 in enumerate(ts):
                        if k2 != k:
                            prod *= weight(*t2)
                    tot += prod
            row.append(tot)
        jac.append(row)
    det = _det(jac)
    if det == 0:
        raise ArithmeticError(f"degenerate blow-down on shape {shape}")
    return 1 if det > 0 else -1


def _aw_sign(p: int) -> int:
    return -1 if (p * (p + 1) // 2) % 2 else 1


# ---------------------------------------------------------------------------
# cap product


def cap_element(fc: FilteredComplex, el: Element, sigma: Simplex) -> tuple[Simplex, int] | None:
    """``1_(F, eps) cap sigma`` for the local element of sigma named by
    ``el``; returns (face, sign) or None when zero."""
    tau, eps = el
    n = fc.dim
    lay_s = fc.layers(sigma)
    lay_t = fc.layers(tau)
    back: list[tuple[str, ...]] = []
    cdeg: list[int] = []
    cdim: list[int] = []
    for i in range(n):
        d_i, f_i = lay_s[i], lay_t[i]
        cdim.append(len(d_i))
        if eps[i] == 1:
            if f_i != d_i:
                return None
            back.append(())
            cdeg.append(len(d_i))
        else:
            if not f_i or d_i[: len(f_i)] != f_i:
                return None
            back.append(d_i[len(f_i) - 1:])
            cdeg.append(len(f_i) - 1)
    d_n, f_n = lay_s[n], lay_t[n]
    if not f_n or d_n[: len(f_n)] != f_n:
        return None
    back.append(d_n[len(f_n) - 1:])
    cdeg.append(len(f_n) - 1)
    cdim.append(len(d_n) - 1)
    sign = 1
    for i in range(n + 1):
        sign *= _aw_sign(cdeg[i])
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            if (cdeg[j] * cdim[i]) % 2:
                sign = -sign
    sign *= blowdown_degree(tuple(len(b) for b in back))
    sign *= blowdown_degree(tuple(len(d) for d in lay_s))
    face = tuple(v for b in back for v in b)
    return face, sign


def cap_product(fc: FilteredComplex, omega: Mapping[Element, int], xi: Mapping[Simplex, int]) -> Chain:
    out: Chain = {}
    for sigma, c in xi.items():
        if not c:
            continue
        sset = set(sigma)
        for el, a in omega.items():
            if not a or not set(el[0]) <= sset:
                continue
            r = cap_element(fc, el, sigma)
            if r is not None:
                face, s = r
                out[face] = out.get(face, 0) + a * c * s
    return {f: v for f, v in out.items() if v}


def _cap_candidates(fc: FilteredComplex, sigma: Simplex):
    """Elements whose cap with sigma can be nonzero: front faces per layer."""
    n = fc.dim
    lay = fc.layers(sigma)
    options = []
    for i in range(n):
        d = lay[i]
        opts = [(d, 1)] + [(d[:k], 0) for k in range(1, len(d) + 1)]
        options.append(opts)
    last = [lay[n][:k] for k in range(1, len(lay[n]) + 1)]
    from itertools import product

    for combo in product(*options):
        for fn in last:
            tau = tuple(v for f, _ in combo for v in f) + fn
            yield (tau, tuple(e for _, e in combo))


# ---------------------------------------------------------------------------
# cup product


def _front_back_cup(fc: FilteredComplex, a: Element, b: Element) -> tuple[Element, int] | None:
    # a on front faces, b on back faces, factor by factor
    (ta, ea), (tb, eb) = a, b
    n = fc.dim
    la, lb = fc.layers(ta), fc.layers(tb)
    out_eps = []
    parts: list[tuple[str, ...]] = []
    da, db = [], []
    for i in range(n):
        f, g = la[i], lb[i]
        da.append(len(f) - 1 + ea[i])
        db.append(len(g) - 1 + eb[i])
        if ea[i] == 1:
            if g:
                return None
            parts.append(f)
            out_eps.append(1)
        else:
            if not g or f[-1] != g[0]:
                return None
            parts.append(f + g[1:])
            out_eps.append(eb[i])
    f, g = la[n], lb[n]
    if f[-1] != g[0]:
        return None
    parts.append(f + g[1:])
    da.append(len(f) - 1)
    db.append(len(g) - 1)
    tau = tuple(v for p in parts for v in p)
    if tau not in fc.simplex_set:
        return None
    sign = 1
    for i in range(n + 1):
        for j in range(i):
            if (da[i] * db[j]) % 2:
                sign = -sign
    return (tau, tuple(out_eps)), sign


def cup_elements(fc: FilteredComplex, a: Element, b: Element) -> tuple[Element, int] | None:
    """``a cup b``.  The cap evaluates on front faces, so ``b`` goes in front
    to make ``(a cup b) cap xi = a cap (b cap xi)`` hold on the nose."""
    r = _front_back_cup(fc, b, a)
    if r is None:
        return None
    el, sign = r
    if (element_degree(fc, *a) * element_degree(fc, *b)) % 2:
        sign = -sign
    return el, sign


def cup_product(fc: FilteredComplex, omega: Mapping[Element, int], eta: Mapping[Element, int]) -> Cochain:
    out: Cochain = {}
    for a, x in omega.items():
        if not x:
            continue
        for b, y in eta.items():
            if not y:
                continue
            r = cup_elements(fc, a, b)
            if r is not None:
                el, s = r
                out[el] = out.get(el, 0) + x * y * s
    return {k: v for k, v in out.items() if v}


def unit_cochain(fc: FilteredComplex) -> Cochain:
    return {el: 1 for el in blowup_complex(fc).elements.get(0, [])}


def coboundary_of(fc: FilteredComplex, omega: Mapping[Element, int]) -> Cochain:
    from .blowup import coboundary

    out: Cochain = {}
    for el, a in omega.items():
        for e2, c in coboundary(fc, *el).items():
            out[e2] = out.get(e2, 0) + a * c
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# the duality map as a chain map, and its mapping cone


def _cap_matrices(fc: FilteredComplex, chain: Mapping[Simplex, int], index: Mapping[int, Mapping[Simplex, int]],
                  dims: Mapping[int, int], shift: int = 0) -> dict[int, SparseIntMatrix]:
    """Matrices of omega -> omega cap chain from Ñ^k to chains of degree
    d - k (d = dimension of the chain), keyed by chain degree n - k."""
    bc = blowup_complex(fc)
    n = fc.dim
    cols_by_k: dict[int, list[dict[int, int]]] = {k: [{} for _ in els] for k, els in bc.elements.items()}
    for sigma, s in chain.items():
        for el in _cap_candidates(fc, sigma):
            j = bc.index.get(el)
            if j is None:
                continue
            r = cap_element(fc, el, sigma)
            if r is None:
                continue
            k = bc.degree_of(el)
            face, sign = r
            col = cols_by_k[k][j]
            row = index[len(face) - 1][face]
            col[row] = col.get(row, 0) + s * sign
    maps = {}
    for k, cols in cols_by_k.items():
        cols = [{i: v for i, v in c.items() if v} for c in cols]
        maps[n - k] = SparseIntMatrix.from_columns(dims.get(n - k - shift, 0), cols)
    return maps


def duality_chain_map(fc: FilteredComplex, gamma: FundamentalCycle) -> dict[int, SparseIntMatrix]:
    """Matrix of omega -> omega cap Gamma from Ñ^k (placed in chain degree
    n - k) to the tame chains in degree n - k."""
    tc = tame_complex(fc)
    return _cap_matrices(fc, gamma.chain, tc.index, tc.chains.dims)


def regraded_blowup(fc: FilteredComplex, p: Perversity) -> tuple[PresentedChainComplex, dict[int, list[int]]]:
    """Ñ^* as a chain complex with Ñ^k in degree n - k."""
    bc = blowup_complex(fc)
    n = fc.dim
    dims = {n - k: d for k, d in bc.cochains.dims.items()}
    diffs = {n - k: bc.cochains.out(k) for k in bc.cochains.dims}
    allowed = {n - k: v for k, v in bc.allowed(p).items()}
    return PresentedChainComplex(dims, diffs, step=-1), allowed


def duality_cone_homology(fc: FilteredComplex, p, ring="Z", gamma: FundamentalCycle | None = None,
                          frontier: set[Simplex] | None = None) -> list[AbelianGroup]:
    """Homology of the cone of (- cap Gamma) from p-allowable blown-up
    cochains to p-intersection chains.  All zero iff the map is a
    quasi-isomorphism.

    With a ``frontier`` (simplices of a boundary subcomplex containing the
    boundary of Gamma) the target is the relative complex, realised as the
    cone of the inclusion; the map then also has a component
    ``omega -> -(-1)^|omega| omega cap dGamma`` into the frontier chains.
    """
    ring = CoefficientRing.parse(ring)
    p = _as_perversity(fc, p)
    if gamma is None:
        gamma = fundamental_cycle(fc, ring=ring, boundary_ok=frontier is not None)
    src, src_allowed = regraded_blowup(fc, p)
    maps = duality_chain_map(fc, gamma)
    tc = tame_complex(fc)
    n = fc.dim
    if frontier:
        tgt, tgt_allowed = _inclusion_cone(fc, frontier, p)
        sub_index = {k: {s: i for i, s in enumerate(s for s in g if s in frontier)} for k, g in tc.gens.items()}
        sub_dims = {k: len(v) for k, v in sub_index.items()}
        dgamma = chain_boundary(fc, gamma.chain)
        if ring.kind == "Z/m":
            dgamma = {f: v for f, v in dgamma.items() if v % ring.modulus}
        outside = [f for f in dgamma if f not in frontier]
        if outside:
            raise ValueError(f"boundary of the fundamental chain leaves the frontier at {list(outside[0])}")
        hmaps = _cap_matrices(fc, dgamma, sub_index, sub_dims, shift=1)
        combined = {}
        for j, m in maps.items():
            k = n - j
            off = tgt.dim(j) - tc.chains.dim(j)
            entries = {(off + i, c): v for (i, c), v in m.entries.items()}
            sgn = (-1) ** (k + 1)
            for (i, c), v in hmaps.get(j, SparseIntMatrix(0, 0)).entries.items():
                entries[(i, c)] = sgn * v
            combined[j] = SparseIntMatrix(tgt.dim(j), m.cols, entries)
        maps = combined
    else:
        tgt, tgt_allowed = tc.chains, tc.allowed(p)
    cone, allowed = mapping_cone(src, tgt, maps, src_allowed, tgt_allowed)
    cone.check(ring.modulus if ring.kind == "Z/m" else None)
    return [subcomplex_homology(cone, k, ring, allowed) for k in range(-1, fc.dim + 2)]


@dataclass
class DualityReport:
    space: str
    perversity: str
    ring: str
    cohomology: list[AbelianGroup]
    homology: list[AbelianGroup]
    iso: list[bool]
    chain_level: bool | None = None
    cone_homology: list[AbelianGroup] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.iso) and self.chain_level is not False

    def as_json(self) -> dict:
        n = len(self.cohomology) - 1
        return {
            "space": self.space,
            "perversity": self.perversity,
            "ring": self.ring,
            "degrees": [
                {"k": k, "cohomology": str(self.cohomology[k]), "homology_n_minus_k": str(self.homology[n - k]),
                 "iso": self.iso[k]}
                for k in range(n + 1)
            ],
            "chain_level": self.chain_level,
            "ok": self.ok,
        }


def open_model(fc: FilteredComplex, removed: Sequence[str]) -> tuple[FilteredComplex, FilteredComplex, set[Simplex]]:
    """(refined X, compact core K, frontier simplices of K) for X minus the
    removed vertex set."""
    refined = stellar_near(fc, removed)
    core = open_star_complement(refined, removed)
    star = closed_star(refined, removed)
    frontier = {s for s in core.simplex_set if s in star}
    return refined, core, frontier


def verify_duality(fc: FilteredComplex, p, ring="Z", removed: Sequence[str] = (), chain_level: bool = True,
                   dual_complex: bool = False) -> DualityReport:
    """Compare H^k_p (blown-up, or the dual complex when ``dual_complex``)
    with the Borel-Moore groups in degree n - k."""
    ring = CoefficientRing.parse(ring)
    spec = p if isinstance(p, (PerversitySpec, str)) else None
    pname = str(p)
    removed = list(removed)
    if removed:
        refined, core, frontier = open_model(fc, removed)
        pk = realize(spec if spec is not None else p, core, source=fc)
        bm = borel_moore_ih(fc, removed, spec if spec is not None else p, ring)
        hom = bm.groups
    else:
        core, frontier = fc, set()
        pk = _as_perversity(fc, p)
        hom = intersection_homology(fc, pk, ring)
    if dual_complex:
        from .blowup import dual_complex_cohomology

        coh = dual_complex_cohomology(core, pk, ring)
    else:
        coh = blowup_cohomology(core, pk, ring)
    n = fc.dim
    iso = [coh[k] == hom[n - k] for k in range(n + 1)]
    verdict, cone_h = None, []
    if chain_level and not dual_complex:
        cone_h = duality_cone_homology(core, pk, ring, frontier=frontier or None)
        verdict = all(g.is_zero for g in cone_h)
    return DualityReport(fc.name, pname, str(ring), coh, hom, iso, verdict, cone_h)


# ---------------------------------------------------------------------------
# intersection product on a compact oriented space, over a field


class _Transport:
    """Explicit bases on both sides of omega -> omega cap Gamma."""

    def __init__(self, fc: FilteredComplex, p: Perversity, ring: CoefficientRing, gamma: FundamentalCycle):
        self.fc, self.p, self.ring, self.gamma = fc, p, ring, gamma
        self.bc = blowup_complex(fc)
        self.tc = tame_complex(fc)
        self._co: dict[int, HomologyBasis] = {}
        self._ho: dict[int, HomologyBasis] = {}

    def cobasis(self, k: int) -> HomologyBasis:
        if k not in self._co:
            self._co[k] = homology_basis(self.bc.cochains, k, self.ring, self.bc.allowed(self.p))
        return self._co[k]

    def hbasis(self, i: int) -> HomologyBasis:
        if i not in self._ho:
            self._ho[i] = homology_basis(self.tc.chains, i, self.ring, self.tc.allowed(self.p))
        return self._ho[i]

    def cochain(self, k: int, vec: Mapping[int, object]) -> Cochain:
        els = self.bc.elements.get(k, [])
        return {els[j]: v for j, v in vec.items() if v}

    def chain_vector(self, chain: Mapping[Simplex, object]) -> dict[int, object]:
        out: dict[int, object] = {}
        for s, v in chain.items():
            out[self.tc.index[len(s) - 1][s]] = v
        return out

    def class_of_cap(self, omega: Cochain, i: int) -> list:
        chain = cap_product(self.fc, omega, self.gamma.chain)
        return self.hbasis(i).coordinates(self.chain_vector(chain))

    def preimage(self, i: int, coords: Sequence) -> Cochain:
        """A p-allowable cocycle whose cap with Gamma represents the class."""
        k = self.fc.dim - i
        cob = self.cobasis(k)
        solver = _Echelon(self.ring.prime)
        for rep in cob.representatives:
            img = self.class_of_cap(self.cochain(k, rep), i)
            solver.insert({t: c for t, c in enumerate(img) if c})
        res, comb = solver.reduce({t: c for t, c in enumerate(coords) if c})
        if res:
            raise ValueError(f"duality is not onto in degree {i}")
        out: Cochain = {}
        for t, c in comb.items():
            for j, v in cob.representatives[t].items():
                el = self.bc.elements[k][j]
                out[el] = out.get(el, 0) + c * v
        if self.ring.prime:
            out = {e: v % self.ring.prime for e, v in out.items()}
        return {e: v for e, v in out.items() if v}


@dataclass
class IntersectionProduct:
    """Structure constants of H^p_i x H^q_j -> H^(p+q)_(i+j-n) in the
    bases ``left``, ``right`` and ``target`` (lists of cycle vectors)."""

    degrees: tuple[int, int, int]
    left: list[dict[int, int]]
    right: list[dict[int, int]]
    target: list[dict[int, int]]
    table: list[list[list]]

    def multiply(self, x: Sequence, y: Sequence) -> list:
        out = [0] * len(self.target)
        for a, xa in enumerate(x):
            for b, yb in enumerate(y):
                if xa and yb:
                    for c, v in enumerate(self.table[a][b]):
                        out[c] += xa * yb * v
        return out


def intersection_product(fc: FilteredComplex, p, q, i: int, j: int, ring="Q") -> IntersectionProduct:
    """``x pitchfork y = D(D^-1 x cup D^-1 y)`` on a compact orientable
    space over Q or Z/p."""
    ring = CoefficientRing.parse(ring)
    if not ring.is_field:
        raise ValueError("the intersection product is computed over a field")
    p, q = _as_perversity(fc, p), _as_perversity(fc, q)
    pq = p + q
    gamma = fundamental_cycle(fc, ring=ring)
    tp, tq, tpq = (_Transport(fc, r, ring, gamma) for r in (p, q, pq))
    n = fc.dim
    k = i + j - n
    left, right = tp.hbasis(i), tq.hbasis(j)
    target = tpq.hbasis(k) if k >= 0 else None
    pre_l = [tp.preimage(i, [int(t == a) for t in range(left.dimension)]) for a in range(left.dimension)]
    pre_r = [tq.preimage(j, [int(t == b) for t in range(right.dimension)]) for b in range(right.dimension)]
    table = []
    for a in range(left.dimension):
        row = []
        for b in range(right.dimension):
            if target is None:
                row.append([])
                continue
            prod = cup_product(fc, pre_l[a], pre_r[b])
            coords = tpq.class_of_cap(prod, k)
            if ring.prime:
                coords = [c % ring.prime for c in coords]
            row.append(coords)
        table.append(row)
    return IntersectionProduct((i, j, k), left.representatives, right.representatives,
                               target.representatives if target else [], table)
