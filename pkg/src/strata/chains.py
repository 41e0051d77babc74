"""Tame intersection chains of a filtered simplicial complex.

The tame complex is the free module on regular simplices (those meeting the
top level) with the boundary that forgets non-regular faces.  A chain is
p-allowable when all simplices in it are, and an intersection chain is an
allowable chain with allowable boundary.  Homology of that subcomplex is
computed without ever forming its basis (see ``subcomplex_homology``).
"""

from __future__ import annotations

import os
from itertools import combinations
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .complex import (
    FilteredComplex,
    Perversity,
    PerversitySpec,
    Simplex,
    Stratum,
    closed_star,
    derived_near,
    make_perversity,
    stellar_near,
    realize,
)
from .linalg import (
    AbelianGroup,
    CoefficientRing,
    PresentedChainComplex,
    SparseIntMatrix,
    homology,
    mapping_cone,
    relative_kernel,
    solve_integer,
    subcomplex_homology,
)

NEG_INF = float("-inf")


def default_max_subdivisions() -> int:
    return int(os.environ.get("STRATA_MAX_SUBDIV", "3"))


# ---------------------------------------------------------------------------
# simplices


def join_decomposition(fc: FilteredComplex, s: Sequence[str]) -> list[Simplex]:
    return fc.layers(s)


def tame_boundary(fc: FilteredComplex, s: Sequence[str]) -> dict[Simplex, int]:
    s = fc.sort(s)
    if not fc.is_regular(s):
        raise ValueError(f"{list(s)} is not regular")
    out = {}
    if len(s) == 1:
        return out
    for i in range(len(s)):
        face = s[:i] + s[i + 1:]
        if fc.is_regular(face):
            out[face] = (-1) ** i
    return out


def perverse_degree(fc: FilteredComplex, s: Sequence[str]) -> list[float]:
    """``[||s||_0, ..., ||s||_n]``: entry i is the dimension of the face of
    ``s`` lying in X_{n-i} (``-inf`` when empty)."""
    n = fc.dim
    lv = sorted(fc.levels[v] for v in s)
    out = []
    for i in range(n + 1):
        c = sum(1 for l in lv if l <= n - i)
        out.append(c - 1 if c else NEG_INF)
    return out


def perverse_degree_along(fc: FilteredComplex, s: Sequence[str], st: Stratum) -> float:
    if not any(v in st.vertices for v in s):
        return NEG_INF
    return sum(1 for v in s if fc.levels[v] <= st.level) - 1


def _as_perversity(fc: FilteredComplex, p) -> Perversity:
    if isinstance(p, Perversity):
        ids = {st.id for st in fc.strata}
        if set(p.values) != ids:
            raise ValueError(f"perversity does not match the strata of {fc.name}")
        return p
    return make_perversity(fc, p)


def is_allowable(fc: FilteredComplex, s: Sequence[str], p) -> bool:
    p = _as_perversity(fc, p)
    return _allowable(fc, fc.sort(s), p)


def _allowable(fc: FilteredComplex, s: Simplex, p: Perversity) -> bool:
    d = len(s) - 1
    seen = set()
    count = 0
    for v in s:  # sorted by level, so count = vertices of level <= l(v)
        count += 1
        lv = fc.levels[v]
        if lv == fc.dim:
            break
        sid = fc.stratum_of[v]
        if sid in seen:
            continue
        seen.add(sid)
        # all vertices of this level come next; count them
        c = count + sum(1 for w in s[count:] if fc.levels[w] == lv)
        if c - 1 > d - (fc.dim - lv) + p.values[sid]:
            return False
    return True


# ---------------------------------------------------------------------------
# tame complex


@dataclass
class TameComplex:
    fc: FilteredComplex
    gens: dict[int, list[Simplex]]
    index: dict[int, dict[Simplex, int]]
    chains: PresentedChainComplex

    def allowed(self, p: Perversity, support: set[Simplex] | None = None) -> dict[int, list[int]]:
        out = {}
        for k, gens in self.gens.items():
            out[k] = [i for i, s in enumerate(gens)
                      if (support is None or s in support) and _allowable(self.fc, s, p)]
        return out


def tame_complex(fc: FilteredComplex) -> TameComplex:
    cached = fc.__dict__.get("_tame")
    if cached is not None:
        return cached
    gens = {k: [s for s in fc.simplices(k) if fc.is_regular(s)] for k in range(fc.top_dim + 1)}
    gens = {k: g for k, g in gens.items() if g}
    index = {k: {s: i for i, s in enumerate(g)} for k, g in gens.items()}
    diffs = {}
    for k, g in gens.items():
        if k == 0:
            continue
        rows = index.get(k - 1, {})
        cols = [{rows[f]: c for f, c in tame_boundary(fc, s).items()} for s in g]
        diffs[k] = SparseIntMatrix.from_columns(len(rows), cols)
    cx = PresentedChainComplex({k: len(g) for k, g in gens.items()}, diffs)
    tc = TameComplex(fc, gens, index, cx)
    fc.__dict__["_tame"] = tc
    return tc


# ---------------------------------------------------------------------------
# explicit presentation


@dataclass
class IntersectionComplexPresentation:
    """Basis of each C^p_k as columns over the allowable k-simplices, and the
    induced differentials in those bases."""

    simplices: dict[int, list[Simplex]]
    bases: dict[int, SparseIntMatrix]
    chains: PresentedChainComplex

    def chain(self, k: int, j: int) -> dict[Simplex, int]:
        col = self.bases[k].columns()[j]
        return {self.simplices[k][i]: v for i, v in col.items()}


def intersection_complex(fc: FilteredComplex, p) -> IntersectionComplexPresentation:
    """Explicit basis of the p-intersection chains (for small complexes)."""
    p = _as_perversity(fc, p)
    tc = tame_complex(fc)
    allowed = tc.allowed(p)
    simplices = {k: [tc.gens[k][i] for i in idx] for k, idx in allowed.items()}
    bases: dict[int, SparseIntMatrix] = {}
    for k, idx in allowed.items():
        if k == 0:
            bases[k] = SparseIntMatrix.identity(len(idx))
            continue
        d = tc.chains.out(k)
        rows = tc.chains.dim(k - 1)
        dcols = d.columns()
        m = SparseIntMatrix.from_columns(rows, [dcols[j] for j in idx])
        s = SparseIntMatrix.from_columns(rows, [{i: 1} for i in allowed.get(k - 1, [])])
        bases[k] = relative_kernel(m, s)
    diffs = {}
    for k in bases:
        if k == 0 or k - 1 not in bases:
            continue
        d = tc.chains.out(k).columns()
        pos_below = {j: t for t, j in enumerate(allowed[k - 1])}
        cols = []
        for vec in bases[k].columns():
            image: dict[int, int] = {}
            for t, c in vec.items():
                for i, v in d[allowed[k][t]].items():
                    image[i] = image.get(i, 0) + c * v
            # non-allowable faces cancel in the sum
            image = {pos_below[i]: v for i, v in image.items() if v}
            coeffs = solve_integer(bases[k - 1], image) if image else {}
            if coeffs is None:
                raise AssertionError("boundary of an intersection chain left the complex")
            cols.append(coeffs)
        diffs[k] = SparseIntMatrix.from_columns(bases[k - 1].cols, cols)
    cx = PresentedChainComplex({k: b.cols for k, b in bases.items()}, diffs)
    return IntersectionComplexPresentation(simplices, bases, cx)


# ---------------------------------------------------------------------------
# homology


def intersection_homology(fc: FilteredComplex, p, ring="Z", method: str = "direct") -> list[AbelianGroup]:
    """Groups in degrees 0..n.  ``method="presentation"`` goes through the
    explicit integral basis instead (slower; used as a cross-check).  It is
    limited to Z and Q: over Z/m the allowable chains are not the integral
    ones reduced mod m."""
    ring = CoefficientRing.parse(ring)
    p = _as_perversity(fc, p)
    if method == "presentation":
        if ring.kind == "Z/m":
            raise ValueError("the explicit presentation is integral; use method='direct' over Z/m")
        pres = intersection_complex(fc, p)
        return [homology(pres.chains, k, ring) for k in range(fc.dim + 1)]
    tc = tame_complex(fc)
    allowed = tc.allowed(p)
    return [subcomplex_homology(tc.chains, k, ring, allowed) for k in range(fc.dim + 1)]


def _inclusion_cone(fc: FilteredComplex, support: set[Simplex], p: Perversity):
    """Cone of C(N) -> C(X) where N is the set of simplices ``support``."""
    tc = tame_complex(fc)
    sub_gens = {k: [s for s in g if s in support] for k, g in tc.gens.items()}
    sub_index = {k: {s: i for i, s in enumerate(g)} for k, g in sub_gens.items()}
    diffs = {}
    for k, g in sub_gens.items():
        if k == 0 or not g:
            continue
        cols = [{sub_index[k - 1][f]: c for f, c in tame_boundary(fc, s).items()} for s in g]
        diffs[k] = SparseIntMatrix.from_columns(len(sub_gens.get(k - 1, [])), cols)
    sub = PresentedChainComplex({k: len(g) for k, g in sub_gens.items()}, diffs)
    incl = {k: SparseIntMatrix.from_columns(tc.chains.dim(k), [{tc.index[k][s]: 1} for s in g])
            for k, g in sub_gens.items()}
    sub_allowed = {k: [i for i, s in enumerate(g) if _allowable(fc, s, p)] for k, g in sub_gens.items()}
    return mapping_cone(sub, tc.chains, incl, sub_allowed, tc.allowed(p))


def relative_intersection_homology(fc: FilteredComplex, support: Iterable[Sequence[str]], p,
                                   ring="Z") -> list[AbelianGroup]:
    """Homology of C^p(X)/C^p(N); ``support`` lists simplices of N (faces are
    added automatically)."""
    ring = CoefficientRing.parse(ring)
    p = _as_perversity(fc, p)
    closed: set[Simplex] = set()
    for s in support:
        if not set(s) <= fc.levels.keys():
            raise ValueError(f"{list(s)} is not a simplex of {fc.name}")
        s = fc.sort(s)
        if s not in fc.simplex_set:
            raise ValueError(f"{list(s)} is not a simplex of {fc.name}")
        for r in range(1, len(s) + 1):
            closed.update(combinations(s, r))
    if not closed:
        return intersection_homology(fc, p, ring)
    cone_cx, allowed = _inclusion_cone(fc, closed, p)
    return [subcomplex_homology(cone_cx, k, ring, allowed) for k in range(fc.dim + 1)]


@dataclass
class BorelMooreResult:
    groups: list[AbelianGroup]
    stable: bool
    depth: int
    history: list[list[AbelianGroup]] = field(default_factory=list)

    def as_json(self) -> dict:
        return {
            "groups": [str(g) for g in self.groups],
            "stable": self.stable,
            "depth": self.depth,
            "history": [[str(g) for g in h] for h in self.history],
        }


class UnstableError(RuntimeError):
    def __init__(self, result: BorelMooreResult):
        super().__init__(f"Borel-Moore groups did not stabilize within {result.depth} subdivisions: "
                         + "; ".join(", ".join(map(str, h)) for h in result.history))
        self.result = result


def borel_moore_ih(fc: FilteredComplex, removed: Iterable[str], p, ring="Z",
                   max_depth: int | None = None, strict: bool = True,
                   subdivide: str = "stellar") -> BorelMooreResult:
    """Locally finite intersection homology of |fc| minus the full subcomplex
    on the vertex set ``removed``.

    The groups of the open complement are the relative groups of (X', N)
    where X' is subdivided near the removed set and N is its closed star.
    ``subdivide`` is ``"stellar"`` (split the edges leaving the set) or
    ``"derived"`` (derived subdivision near the set).  The computation is
    repeated after subdividing again; two consecutive depths must agree
    (up to ``max_depth``).
    """
    refine = {"stellar": stellar_near, "derived": derived_near}[subdivide]
    removed = list(removed)
    ring = CoefficientRing.parse(ring)
    if not removed:
        g = intersection_homology(fc, p, ring)
        return BorelMooreResult(g, True, 0, [g])
    if max_depth is None:
        max_depth = default_max_subdivisions()
    max_depth = max(max_depth, 2)
    source_p = p if isinstance(p, (PerversitySpec, str)) else _as_perversity(fc, p)
    history = []
    cur = fc
    for depth in range(1, max_depth + 1):
        cur = refine(cur, removed)
        pc = realize(source_p, cur, source=fc)
        nbhd = closed_star(cur, removed)
        history.append(relative_intersection_homology(cur, nbhd, pc, ring))
        if depth >= 2 and history[-1] == history[-2]:
            return BorelMooreResult(history[-1], True, depth, history)
    result = BorelMooreResult(history[-1], False, max_depth, history)
    if strict:
        raise UnstableError(result)
    return result
