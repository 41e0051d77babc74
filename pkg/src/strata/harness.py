"""Formula checkers and machine-readable reports.

Every check returns a ``CheckReport``: one row per degree (and per scanned
parameter) with the expected group, the computed group, where the
expectation comes from, and whether they agree.  A report passes iff every
row with an expectation passes.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import corpus
from .blowup import blowup_cohomology, blowup_complex, dual_complex_cohomology, restriction_matrix
from .chains import _inclusion_cone, borel_moore_ih, intersection_homology, tame_complex
from .complex import (
    FilteredComplex,
    PerversitySpec,
    closed_star,
    cone,
    open_star_complement,
    product_with_interval,
    realize,
    stellar_near,
    suspension,
)
from .duality import verify_duality
from .linalg import AbelianGroup, CoefficientRing, _Echelon, change_of_rings, homology_basis

THEORIES = ("ih", "bm", "blowup", "dual-complex")

# integral homology of the links used by the cone and product checks
KNOWN_HOMOLOGY = {
    "point": ("Z",),
    "S2": ("Z", "0", "Z"),
    "RP2": ("Z", "Z/2", "0"),
    "RP3": ("Z", "Z/2", "0", "Z"),
}


@dataclass
class CheckReport:
    check: str
    inputs: dict
    degrees: list[dict] = field(default_factory=list)
    ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(row["pass"] for row in self.degrees if "pass" in row)

    def add(self, k: int, computed, expected=None, provenance: str | None = None, **extra) -> dict:
        row = {"k": k, "expected": expected, "computed": computed, "provenance": provenance, **extra}
        if expected is not None:
            row["pass"] = expected == computed
        self.degrees.append(row)
        return row

    def as_json(self) -> dict:
        return {"check": self.check, "inputs": self.inputs, "degrees": self.degrees,
                "pass": self.passed, "ms": round(self.ms, 1)}

    def failures(self) -> list[dict]:
        return [row for row in self.degrees if row.get("pass") is False]


class _Timer:
    def __init__(self, report: CheckReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.ms = (time.perf_counter() - self.t0) * 1000
        return False


def _known(name: str, ring: CoefficientRing, cohomology: bool = False) -> list[AbelianGroup]:
    integral = [AbelianGroup.parse(g) for g in KNOWN_HOMOLOGY[name]]
    return change_of_rings(integral, ring, cohomology=cohomology)


def _spec(name: str, text: str) -> PerversitySpec:
    ent = corpus.ENTRIES.get(name)
    if ent is not None and text in ent.perversities:
        return ent.perversities[text]
    return PerversitySpec.parse(text)


def _apex_spec(fc: FilteredComplex, value: int, apex: str = "c") -> PerversitySpec:
    return PerversitySpec("explicit", {fc.stratum_of[apex]: value})


def _pool_map(fn: Callable, tasks: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _merge(check: str, inputs: dict, parts: Iterable[CheckReport]) -> CheckReport:
    parts = sorted(parts, key=lambda r: repr(r.inputs))
    rep = CheckReport(check, inputs)
    for part in parts:
        for row in part.degrees:
            rep.degrees.append({**part.inputs, **row})
        rep.ms += part.ms
    return rep


# ---------------------------------------------------------------------------
# compute


def groups(fc: FilteredComplex, theory: str, p, ring="Z", removed: Sequence[str] = ()) -> list[AbelianGroup]:
    """Groups by degree for one of the four theories."""
    ring = CoefficientRing.parse(ring)
    if theory == "ih":
        if removed:
            raise ValueError("ih is for compact spaces; use bm with --remove")
        return intersection_homology(fc, realize(p, fc), ring)
    if theory == "bm":
        return borel_moore_ih(fc, removed, p, ring).groups
    if theory in ("blowup", "dual-complex"):
        core = open_star_complement(stellar_near(fc, removed), removed) if removed else fc
        fn = blowup_cohomology if theory == "blowup" else dual_complex_cohomology
        return fn(core, realize(p, core, source=fc), ring)
    raise ValueError(f"unknown theory {theory!r}; expected one of {', '.join(THEORIES)}")


def compute(space: str, theory: str, perversity: str = "zero", ring: str = "Z",
            removed: Sequence[str] = ()) -> CheckReport:
    ent = corpus.ENTRIES.get(space)
    removed = tuple(removed) or (ent.removed if ent else ())
    fc = corpus.get(space)
    spec = _spec(space, perversity)
    r = CoefficientRing.parse(ring)
    rep = CheckReport("compute", {"space": space, "theory": theory, "perversity": str(spec), "ring": str(r),
                                  "removed": list(removed)})
    with _Timer(rep):
        for k, g in enumerate(groups(fc, theory, spec, r, removed)):
            rep.add(k, g.format(r))
    return rep


# ---------------------------------------------------------------------------
# cone formula for blown-up cohomology


def _cone_case(args) -> CheckReport:
    name, value, ring = args
    r = CoefficientRing.parse(ring)
    fc = cone(corpus.get(name))
    spec = _apex_spec(fc, value)
    rep = CheckReport("cone", {"link": name, "p(v)": value, "ring": str(r)})
    with _Timer(rep):
        base = _known(name, r, cohomology=True)
        got = blowup_cohomology(fc, realize(spec, fc), r)
        for k in range(fc.dim + 1):
            exp = base[k] if k <= value and k < len(base) else AbelianGroup()
            rep.add(k, got[k].format(r), exp.format(r), "PAPER")
    return rep


def check_cone(links: Sequence[str] = ("S2", "RP2", "RP3"), scan: tuple[int, int] | None = None,
               rings: Sequence[str] = ("Z", "Q", "Z/2"), jobs: int = 1) -> CheckReport:
    """H^k(cone on L) = H^k(L) for k <= p(v), 0 above."""
    tasks = []
    for name in links:
        dim_l = corpus.get(name).dim
        lo, hi = scan if scan else (-1, dim_l + 1)
        tasks += [(name, v, ring) for v in range(lo, hi + 1) for ring in rings]
    parts = _pool_map(_cone_case, tasks, jobs)
    return _merge("cone", {"links": list(links), "scan": scan, "rings": list(rings)}, parts)


# ---------------------------------------------------------------------------
# R-invariance


def strata_dependent(fc: FilteredComplex, variant: int) -> PerversitySpec:
    """Two perversities that are not functions of the codimension alone:
    alternate values over the singular strata in id order."""
    values = {}
    for j, st in enumerate(sorted(fc.singular_strata, key=lambda s: s.id)):
        top = st.codim - 2
        values[st.id] = (top if j % 2 == 0 else 0) if variant == 0 else (j % 3) - 1
    return PerversitySpec("explicit", values)


def _r_invariance_case(args) -> CheckReport:
    name, label, ring = args
    r = CoefficientRing.parse(ring)
    fc = corpus.get(name)
    if label in ("sd0", "sd1"):
        spec = strata_dependent(fc, int(label[-1]))
    else:
        spec = PerversitySpec.parse(label)
    rep = CheckReport("r-invariance", {"space": name, "perversity": str(spec), "ring": str(r)})
    with _Timer(rep):
        prod = product_with_interval(fc)
        here = blowup_cohomology(fc, realize(spec, fc), r)
        there = blowup_cohomology(prod, realize(spec, prod, source=fc), r)
        for k in range(prod.dim + 1):
            exp = here[k] if k < len(here) else AbelianGroup()
            rep.add(k, there[k].format(r), exp.format(r), "DERIVED")
    return rep


def check_r_invariance(spaces: Sequence[str] | None = None, perversities=("zero", "top", "sd0", "sd1"),
                       rings: Sequence[str] = ("Z",), jobs: int = 1) -> CheckReport:
    """H*(X x I) = H*(X); ``sd0``/``sd1`` are the strata-dependent perversities."""
    spaces = list(spaces) if spaces else [n for n in corpus.names() if not corpus.ENTRIES[n].removed]
    tasks = [(n, p, r) for n in spaces for p in perversities for r in rings]
    return _merge("r-invariance", {"spaces": spaces, "perversities": list(perversities), "rings": list(rings)},
                  _pool_map(_r_invariance_case, tasks, jobs))


# ---------------------------------------------------------------------------
# Borel-Moore product formulas


def _line_case(args) -> CheckReport:
    name, pname, ring = args
    r = CoefficientRing.parse(ring)
    fc = suspension(corpus.get(name))
    spec = PerversitySpec.parse(pname)
    rep = CheckReport("products", {"formula": "R x L", "link": name, "perversity": str(spec), "ring": str(r)})
    with _Timer(rep):
        res = borel_moore_ih(fc, ("N", "S"), spec, r, strict=False)
        base = _known(name, r)
        for k in range(fc.dim + 1):
            exp = base[k - 1] if 1 <= k <= len(base) else AbelianGroup()
            rep.add(k, res.groups[k].format(r), exp.format(r), "PAPER")
        rep.add(-1, res.stable, True, "DERIVED", what="stable")
    return rep


def _open_cone_case(args) -> CheckReport:
    name, value, ring = args
    r = CoefficientRing.parse(ring)
    link = corpus.get(name)
    fc = cone(link)
    spec = _apex_spec(fc, value)
    top = fc.dim - 2
    dual = top - value
    rep = CheckReport("products", {"formula": "open cone", "link": name, "p(v)": value, "Dp(v)": dual,
                                   "ring": str(r)})
    with _Timer(rep):
        res = borel_moore_ih(fc, tuple(link.levels), spec, r, strict=False)
        base = _known(name, r)
        for k in range(fc.dim + 1):
            if k <= dual + 1 or not 1 <= k <= len(base):
                exp = AbelianGroup()
            else:
                exp = base[k - 1]
            rep.add(k, res.groups[k].format(r), exp.format(r), "PAPER")
        rep.add(-1, res.stable, True, "DERIVED", what="stable")
    return rep


def check_products(rings: Sequence[str] = ("Z",), perversities=("zero", "top"),
                   lines: Sequence[str] = ("point", "RP2", "RP3"), cones: Sequence[str] = ("RP2",),
                   scan: tuple[int, int] | None = None, jobs: int = 1) -> CheckReport:
    """BM(R x L) = H(L) shifted by one, and the vanishing threshold on the
    open cone.  Rows with k = -1 record the subdivision-stability check."""
    tasks_l = [(n, p, r) for n in lines for p in perversities for r in rings]
    tasks_c = []
    for n in cones:
        dim_l = corpus.get(n).dim
        lo, hi = scan if scan else (-1, dim_l + 1)
        tasks_c += [(n, v, r) for v in range(lo, hi + 1) for r in rings]
    parts = _pool_map(_line_case, tasks_l, jobs) + _pool_map(_open_cone_case, tasks_c, jobs)
    return _merge("products", {"lines": list(lines), "cones": list(cones), "rings": list(rings)}, parts)


# ---------------------------------------------------------------------------
# Mayer-Vietoris


def default_covers(fc: FilteredComplex) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Two covers X = (X - A) u (X - B) with A, B disjoint vertex sets.

    The first removes a farthest pair of vertices (singular ones preferred);
    the second removes one vertex and two others, so V may be disconnected.
    """
    verts = sorted(fc.levels, key=fc.key)
    if len(verts) < 2:
        return []
    dist = _distances(fc)

    def score(u, w):
        return (dist[u].get(w, len(verts)), (fc.levels[u] < fc.dim) + (fc.levels[w] < fc.dim))

    pairs = [(u, w) for i, u in enumerate(verts) for w in verts[i + 1:]]
    u, w = max(pairs, key=lambda uw: score(*uw))
    covers = [((u,), (w,))]
    if len(verts) >= 4:
        a = verts[0]
        rest = [v for v in verts[1:]]
        far = sorted(rest, key=lambda v: (-dist[a].get(v, len(verts)), fc.key(v)))
        covers.append(((a,), tuple(sorted(far[:2], key=fc.key))))
    return covers


def _distances(fc: FilteredComplex) -> dict[str, dict[str, int]]:
    out = {}
    for v in fc.levels:
        seen = {v: 0}
        frontier = [v]
        while frontier:
            nxt = []
            for x in frontier:
                for y in fc.neighbors[x]:
                    if y not in seen:
                        seen[y] = seen[x] + 1
                        nxt.append(y)
            frontier = nxt
        out[v] = seen
    return out


def separate(fc: FilteredComplex, vertices: Sequence[str]) -> FilteredComplex:
    """Refine near each vertex in turn.  Afterwards no two of them are
    adjacent or share a neighbour, so their closed stars are disjoint cones."""
    for v in vertices:
        fc = stellar_near(fc, (v,))
    return fc


def _field_rank(columns: Sequence[Sequence], ring: CoefficientRing) -> int:
    ech = _Echelon(ring.prime)
    n = 0
    for col in columns:
        vec = {i: c for i, c in enumerate(col) if c}
        if vec and ech.reduce(vec)[0]:
            ech.insert(vec)
            n += 1
    return n


def _exactness(rep: CheckReport, label: str, k: int, dims: tuple[int, int, int, int],
               f_cols: list[list], g_cols: list[list], ring: CoefficientRing) -> int:
    """Record exactness of H(X) -> H(U) + H(V) -> H(UnV) at the middle;
    returns the alternating-sum contribution."""
    dx, du, dv, duv = dims
    rank_f = _field_rank(f_cols, ring)
    rank_g = _field_rank(g_cols, ring)
    gf_zero = True
    for col in f_cols:
        image = [0] * duv
        for j, c in enumerate(col):
            if c:
                for i, v in enumerate(g_cols[j]):
                    image[i] += c * v
        if any(x % ring.prime if ring.prime else x for x in image):
            gf_zero = False
    rep.add(k, {"dims": [dx, du, dv, duv], "rank_f": rank_f, "rank_g": rank_g, "gf_zero": gf_zero},
            "exact", "DERIVED", sequence=label)
    rep.degrees[-1]["pass"] = gf_zero and rank_f == du + dv - rank_g
    return dx - du - dv + duv


def _coords(basis, vec) -> list:
    return basis.coordinates(vec)


def _mv_homology(rep, fine, a, b, spec, root, ring):
    n = fine.dim
    p = realize(spec, fine, source=root)
    tc = tame_complex(fine)
    na, nb = closed_star(fine, a), closed_star(fine, b)
    nab = na | nb
    cones = {key: _inclusion_cone(fine, sup, p) for key, sup in (("U", na), ("V", nb), ("UV", nab))}
    subs = {key: {k: {s: i for i, s in enumerate(s for s in g if s in sup)} for k, g in tc.gens.items()}
            for key, sup in (("U", na), ("V", nb), ("UV", nab))}
    total = 0
    for k in range(n + 1):
        bx = homology_basis(tc.chains, k, ring, tc.allowed(p))
        bases = {key: homology_basis(cx, k, ring, allowed) for key, (cx, allowed) in cones.items()}

        def from_x(vec, key):
            # C(X) -> cone(C(N) -> C(X)): into the second summand
            off = len(subs[key].get(k - 1, {}))
            return {off + i: v for i, v in vec.items()}

        def to_uv(vec, key):
            # cone for N -> cone for N(A) u N(B): include the first summand
            src, dst = subs[key].get(k - 1, {}), subs["UV"].get(k - 1, {})
            gens = tc.gens.get(k - 1, [])
            inv = {i: s for s, i in src.items()}
            off_s, off_d = len(src), len(dst)
            out = {}
            for i, v in vec.items():
                j = dst[inv[i]] if i < off_s else off_d + (i - off_s)
                out[j] = out.get(j, 0) + v
            return out

        f_cols = [_coords(bases["U"], from_x(z, "U")) + _coords(bases["V"], from_x(z, "V"))
                  for z in bx.representatives]
        g_cols = [_coords(bases["UV"], to_uv(z, "U")) for z in bases["U"].representatives]
        g_cols += [[-c for c in _coords(bases["UV"], to_uv(z, "V"))] for z in bases["V"].representatives]
        dims = (bx.dimension, bases["U"].dimension, bases["V"].dimension, bases["UV"].dimension)
        total += (-1) ** k * _exactness(rep, "homology", k, dims, f_cols, g_cols, ring)
    rep.add(-1, total, 0, "DERIVED", sequence="homology", what="alternating sum")


def _mv_cohomology(rep, fine, a, b, spec, root, ring):
    n = fine.dim
    ku = open_star_complement(fine, a)
    kv = open_star_complement(fine, b)
    kuv = open_star_complement(fine, (*a, *b))
    cxs = {key: blowup_complex(c) for key, c in (("X", fine), ("U", ku), ("V", kv), ("UV", kuv))}
    perv = {key: realize(spec, c, source=root) for key, c in (("X", fine), ("U", ku), ("V", kv), ("UV", kuv))}
    total = 0
    for k in range(n + 1):
        bases = {key: homology_basis(bc.cochains, k, ring, bc.allowed(perv[key])) for key, bc in cxs.items()}
        mats = {(s, t): restriction_matrix(cxs[s], cxs[t], k) for s, t in (("X", "U"), ("X", "V"), ("U", "UV"),
                                                                            ("V", "UV"))}
        f_cols = [_coords(bases["U"], mats["X", "U"].apply(z)) + _coords(bases["V"], mats["X", "V"].apply(z))
                  for z in bases["X"].representatives]
        g_cols = [_coords(bases["UV"], mats["U", "UV"].apply(z)) for z in bases["U"].representatives]
        g_cols += [[-c for c in _coords(bases["UV"], mats["V", "UV"].apply(z))] for z in bases["V"].representatives]
        dims = tuple(bases[key].dimension for key in ("X", "U", "V", "UV"))
        total += (-1) ** k * _exactness(rep, "cohomology", k, dims, f_cols, g_cols, ring)
    rep.add(-1, total, 0, "DERIVED", sequence="cohomology", what="alternating sum")


def check_mv(space: str, cover: tuple[Sequence[str], Sequence[str]] | None = None, perversity: str = "zero",
             ring: str = "Q") -> CheckReport:
    """Exactness of the Mayer-Vietoris sequences of the cover
    X = (X - A) u (X - B) at H(U) + H(V), plus the alternating-rank identity,
    for Borel-Moore intersection homology and blown-up cohomology."""
    r = CoefficientRing.parse(ring)
    if not r.is_field:
        raise ValueError("the Mayer-Vietoris check needs a field")
    fc = corpus.get(space)
    if cover is None:
        covers = default_covers(fc)
        if not covers:
            raise ValueError(f"{space} has no two-set cover")
        cover = covers[0]
    a, b = tuple(cover[0]), tuple(cover[1])
    if set(a) & set(b):
        raise ValueError(f"A and B must be disjoint so that X - A and X - B cover X; both contain "
                         f"{sorted(set(a) & set(b))}")
    unknown = (set(a) | set(b)) - fc.levels.keys()
    if unknown:
        raise ValueError(f"unknown vertices {sorted(unknown)}")
    spec = _spec(space, perversity)
    rep = CheckReport("mv", {"space": space, "A": list(a), "B": list(b), "perversity": str(spec), "ring": str(r)})
    with _Timer(rep):
        fine = separate(fc, (*a, *b))
        _mv_homology(rep, fine, a, b, spec, fc, r)
        _mv_cohomology(rep, fine, a, b, spec, fc, r)
    return rep


def _mv_case(args) -> CheckReport:
    space, cover, perversity, ring = args
    return check_mv(space, cover, perversity, ring)


def check_mv_corpus(spaces: Sequence[str] | None = None, rings: Sequence[str] = ("Q", "Z/2"),
                    perversity: str = "zero", jobs: int = 1) -> CheckReport:
    spaces = list(spaces) if spaces else [n for n in corpus.names() if not corpus.ENTRIES[n].removed]
    tasks = [(s, c, perversity, r) for s in spaces for c in default_covers(corpus.get(s)) for r in rings]
    return _merge("mv", {"spaces": spaces, "rings": list(rings), "perversity": perversity},
                  _pool_map(_mv_case, tasks, jobs))


# ---------------------------------------------------------------------------
# duality


DUALITY_SPACES = ("S2", "S4", "T2", "susp-S1", "susp-RP3", "wedge-S2-S2", "cone-S2", "cone-RP3",
                  "susp-RP3-open")


def _duality_case(args) -> CheckReport:
    space, pname, ring, chain_level = args
    r = CoefficientRing.parse(ring)
    ent = corpus.ENTRIES[space]
    fc = corpus.get(space)
    spec = _spec(space, pname)
    removed = ent.removed
    if not removed and fc.singular_strata and any(v == "c" for v in fc.levels):
        # cone models: the open cone, i.e. the base removed
        removed = tuple(v for v in fc.levels if v != "c")
    rep = CheckReport("duality", {"space": space, "perversity": str(spec), "ring": str(r),
                                  "removed": list(removed) if len(removed) < 4 else f"{len(removed)} vertices"})
    with _Timer(rep):
        res = verify_duality(fc, spec, r, removed=removed, chain_level=chain_level)
        n = fc.dim
        for k in range(n + 1):
            rep.add(k, res.cohomology[k].format(r), res.homology[n - k].format(r), "PAPER")
        if res.chain_level is not None:
            rep.add(-1, res.chain_level, True, "PAPER", what="chain-level cone acyclic")
    return rep


def _duality_perversities(space: str) -> list[str]:
    base = ["zero", "top", "1"]
    return base + [f"dual:{p}" for p in base]


def check_duality(spaces: Sequence[str] = DUALITY_SPACES, perversities: Sequence[str] | None = None,
                  rings: Sequence[str] = ("Z", "Q", "Z/2"), chain_level: bool = True, jobs: int = 1) -> CheckReport:
    tasks = []
    for s in spaces:
        for p in (perversities or _duality_perversities(s)):
            for r in rings:
                tasks.append((s, p, r, chain_level))
    return _merge("duality", {"spaces": list(spaces), "rings": list(rings)}, _pool_map(_duality_case, tasks, jobs))


# ---------------------------------------------------------------------------
# the punctured suspension of RP^3


def check_example38() -> CheckReport:
    """SigmaRP^3 minus a regular point, constant perversity 1, over Z."""
    r = CoefficientRing.parse("Z")
    spec = PerversitySpec("constant", 1)
    rep = CheckReport("example38", {"space": "susp-RP3-minus-point", "perversity": str(spec), "ring": "Z"})
    with _Timer(rep):
        core = corpus.get("susp-RP3-minus-point")
        whole = corpus.get("susp-RP3")
        coh = blowup_cohomology(core, realize(spec, core), r)
        bm = borel_moore_ih(whole, (corpus.PUNCTURE,), spec, r, strict=False)
        dual = dual_complex_cohomology(core, realize(spec, core), r)
        n = whole.dim
        for k, g in enumerate(("Z", "0", "0", "Z/2", "0")):
            rep.add(k, str(coh[k]), g, "PAPER", group="blowup")
        for k, g in enumerate(("0", "Z/2", "0", "0", "Z")):
            rep.add(k, str(bm.groups[k]), g, "PAPER", group="bm")
        rep.add(-1, bm.stable, True, "DERIVED", group="bm", what="stable")
        for k, g in enumerate(("Z", "Z/2", "0", "0", "0")):
            rep.add(k, str(dual[k]), g, "PAPER", group="dual-complex")
        for k in range(n + 1):
            rep.add(k, coh[k] == bm.groups[n - k], True, "PAPER", group="blowup vs bm")
        rep.add(1, dual[1] != bm.groups[n - 1], True, "PAPER", group="dual-complex vs bm",
                what=f"{dual[1]} vs {bm.groups[n - 1]}")
        mismatch = [k for k in range(n + 1) if dual[k] != bm.groups[n - k]]
        rep.add(-1, mismatch, None, None, group="dual-complex vs bm", what="degrees without duality")
    return rep


CHECKS = {
    "cone": check_cone,
    "products": check_products,
    "r-invariance": check_r_invariance,
    "mv": check_mv_corpus,
    "duality": check_duality,
    "example38": check_example38,
}
