"""Filtered simplicial complexes, their strata and perversities.

A filtered complex is a finite simplicial complex whose vertices carry a level
in ``0..n``.  The skeleton ``X_i`` is the full subcomplex on the vertices of
level at most ``i``; a simplex lies in ``X_i`` iff all its vertices do.
Simplices are always stored as tuples sorted by ``(level, id)``, which puts
the join decomposition ``Delta_0 * ... * Delta_n`` in order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

Simplex = tuple[str, ...]


class SchemaError(ValueError):
    """A JSON complex description does not follow the schema."""


class ComplexError(ValueError):
    pass


class FilteredComplex:
    """Finite simplicial complex with vertex levels (a filtered space of dim n).

    ``origin`` maps each vertex to a vertex of ``parent`` lying in the same
    stratum (or ``None`` for a vertex creating a new stratum, such as a cone
    apex).  It lets perversities follow a complex through generators.
    """

    def __init__(
        self,
        name: str,
        dim: int,
        levels: Mapping[str, int],
        simplices: Iterable[Iterable[str]],
        *,
        parent: "FilteredComplex | None" = None,
        origin: Mapping[str, str | None] | None = None,
    ):
        self.name = name
        self.dim = int(dim)
        self.levels: dict[str, int] = {str(v): int(l) for v, l in levels.items()}
        faces = []
        for s in simplices:
            s = frozenset(str(v) for v in s)
            if not s:
                continue
            missing = s - self.levels.keys()
            if missing:
                raise ComplexError(f"simplex uses unknown vertices {sorted(missing)}")
            faces.append(s)
        # keep only maximal simplices
        faces.sort(key=len, reverse=True)
        maximal: list[frozenset] = []
        for s in faces:
            if not any(s <= m for m in maximal):
                maximal.append(s)
        for v in self.levels:
            if not any(v in m for m in maximal):
                maximal.append(frozenset([v]))
        self.facets: tuple[Simplex, ...] = tuple(sorted(self.sort(m) for m in maximal))
        self.parent = parent
        self.origin = dict(origin) if origin is not None else None

    # -- ordering -----------------------------------------------------------

    def key(self, v: str) -> tuple[int, str]:
        return (self.levels[v], v)

    def sort(self, vs: Iterable[str]) -> Simplex:
        return tuple(sorted(vs, key=self.key))

    # -- combinatorics ------------------------------------------------------

    @property
    def vertices(self) -> list[str]:
        return sorted(self.levels, key=self.key)

    @cached_property
    def simplex_set(self) -> frozenset[Simplex]:
        out = set()
        for f in self.facets:
            for r in range(1, len(f) + 1):
                out.update(itertools.combinations(f, r))
        return frozenset(out)

    @cached_property
    def _by_dim(self) -> dict[int, list[Simplex]]:
        by: dict[int, list[Simplex]] = {}
        for s in self.simplex_set:
            by.setdefault(len(s) - 1, []).append(s)
        for k in by:
            by[k].sort(key=lambda s: [self.key(v) for v in s])
        return by

    def simplices(self, k: int) -> list[Simplex]:
        return self._by_dim.get(k, [])

    @property
    def top_dim(self) -> int:
        return max(self._by_dim) if self._by_dim else -1

    def f_vector(self) -> list[int]:
        return [len(self.simplices(k)) for k in range(self.top_dim + 1)]

    def __contains__(self, s) -> bool:
        return self.sort(s) in self.simplex_set

    def is_regular(self, s: Sequence[str]) -> bool:
        return any(self.levels[v] == self.dim for v in s)

    def layers(self, s: Sequence[str]) -> list[Simplex]:
        """Join decomposition (Delta_0, ..., Delta_n) of a simplex."""
        out: list[list[str]] = [[] for _ in range(self.dim + 1)]
        for v in self.sort(s):
            out[self.levels[v]].append(v)
        return [tuple(x) for x in out]

    @cached_property
    def neighbors(self) -> dict[str, frozenset[str]]:
        nb: dict[str, set[str]] = {v: set() for v in self.levels}
        for f in self.facets:
            for v in f:
                nb[v].update(f)
        return {v: frozenset(s - {v}) for v, s in nb.items()}

    def link_vertices(self, s: Sequence[str]) -> list[str]:
        """Vertices w not in s with s + w a simplex."""
        common = None
        for v in s:
            common = set(self.neighbors[v]) if common is None else common & self.neighbors[v]
        common = (common or set()) - set(s)
        return [w for w in common if self.sort((*s, w)) in self.simplex_set]

    def root(self) -> "FilteredComplex":
        c = self
        while c.parent is not None:
            c = c.parent
        return c

    # -- strata -------------------------------------------------------------

    @cached_property
    def strata(self) -> list["Stratum"]:
        return compute_strata(self)

    @cached_property
    def stratum_of(self) -> dict[str, str]:
        return {v: st.id for st in self.strata for v in st.vertices}

    def stratum(self, sid: str) -> "Stratum":
        for st in self.strata:
            if st.id == sid:
                return st
        raise KeyError(sid)

    @property
    def singular_strata(self) -> list["Stratum"]:
        return [s for s in self.strata if s.codim > 0]

    def __repr__(self) -> str:
        return f"FilteredComplex({self.name!r}, dim={self.dim}, f={self.f_vector()})"


@dataclass(frozen=True)
class Stratum:
    """A connected component of X_i minus X_{i-1}."""

    id: str
    level: int
    component: int
    codim: int
    vertices: frozenset[str]

    @property
    def dim(self) -> int:
        return self.level

    @property
    def regular(self) -> bool:
        return self.codim == 0

    def simplices(self, fc: FilteredComplex) -> list[Simplex]:
        """Open simplices of the stratum: max level is ``level`` and the top
        layer lies in this component."""
        return [
            s
            for s in fc.simplex_set
            if fc.levels[s[-1]] == self.level and s[-1] in self.vertices
        ]


def compute_strata(fc: FilteredComplex) -> list[Stratum]:
    """Components of X_i - X_{i-1}, found through edges of equal top level."""
    parent = {v: v for v in fc.levels}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for s in fc.simplices(1):
        a, b = s
        if fc.levels[a] == fc.levels[b]:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[str, set[str]] = {}
    for v in fc.levels:
        groups.setdefault(find(v), set()).add(v)
    by_level: dict[int, list[set[str]]] = {}
    for g in groups.values():
        lvl = fc.levels[next(iter(g))]
        by_level.setdefault(lvl, []).append(g)
    out = []
    for lvl in sorted(by_level):
        comps = sorted(by_level[lvl], key=min)
        for k, g in enumerate(comps):
            out.append(Stratum(f"S{lvl}.{k}", lvl, k, fc.dim - lvl, frozenset(g)))
    return out


# ---------------------------------------------------------------------------
# validation and pseudomanifold checks


@dataclass
class ValidationReport:
    ok: bool
    failures: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validate(fc: FilteredComplex) -> ValidationReport:
    failures = []
    if fc.dim < 0:
        failures.append(f"formal dimension {fc.dim} is negative")
    for v, l in fc.levels.items():
        if not 0 <= l <= fc.dim:
            failures.append(f"vertex {v}: level {l} outside 0..{fc.dim}")
    if not any(l == fc.dim for l in fc.levels.values()):
        failures.append(f"no vertex has level {fc.dim}: X_n minus X_(n-1) is empty")
    for f in fc.facets:
        if not fc.is_regular(f):
            failures.append(f"maximal simplex {list(f)} has no vertex of level {fc.dim}")
        if len(f) - 1 > fc.dim:
            failures.append(f"simplex {list(f)} has dimension above {fc.dim}")
    return ValidationReport(not failures, failures)


@dataclass
class PseudomanifoldReport:
    ok: bool
    failures: list[str] = field(default_factory=list)


def vertex_link(fc: FilteredComplex, v: str) -> tuple[FilteredComplex, list[str]]:
    """Simplicial link of ``v`` with re-indexed levels, plus anomalies.

    If every link vertex sits strictly above ``v`` the conical convention is
    used (level j becomes j - l(v) - 1, dimension n - l(v) - 1).  Otherwise
    ``v`` lies inside a positive-dimensional stratum (or is regular): the link
    is the full simplicial link of dimension n - 1, and a link vertex of
    level j gets level max(j, l(v)) - 1, since the open star of ``v`` never
    meets strata below its own.  A simplex of X_l(v) through ``v`` of
    dimension above l(v) is reported as an anomaly.
    """
    if v not in fc.levels:
        raise KeyError(v)
    lv = fc.levels[v]
    simplices = [tuple(w for w in f if w != v) for f in fc.facets if v in f]
    verts = sorted({w for s in simplices for w in s})
    anomalies: list[str] = []
    if all(fc.levels[w] > lv for w in verts):
        dim = fc.dim - lv - 1
        levels = {w: fc.levels[w] - lv - 1 for w in verts}
    else:
        dim = fc.dim - 1
        levels = {w: max(fc.levels[w], lv) - 1 for w in verts}
        for s in simplices:
            low = [w for w in s if fc.levels[w] <= lv]
            if len(low) > lv:
                anomalies.append(f"simplex {[v, *low]} of X_{lv} has dimension above {lv}")
                break
    origin = {w: w for w in verts}
    link = FilteredComplex(f"lk({v})", max(dim, 0), levels, [s for s in simplices if s], parent=fc, origin=origin)
    return link, anomalies


def pseudomanifold_check(fc: FilteredComplex, _depth: int = 0) -> PseudomanifoldReport:
    """Advisory combinatorial check: purity, regular codim-1 faces in exactly
    two top simplices, and the same recursively on vertex links."""
    failures = []
    n = fc.dim
    for f in fc.facets:
        if len(f) - 1 != n:
            failures.append(f"impure: maximal simplex {list(f)} has dimension {len(f) - 1} != {n}")
    if n >= 1:
        count: dict[Simplex, int] = {}
        for f in fc.simplices(n):
            for i in range(len(f)):
                face = f[:i] + f[i + 1:]
                count[face] = count.get(face, 0) + 1
        for face in fc.simplices(n - 1):
            if fc.is_regular(face) and count.get(face, 0) != 2:
                failures.append(f"regular face {list(face)} lies in {count.get(face, 0)} top simplices")
    if n >= 1 and not failures and _depth < 8:
        for v in fc.vertices:
            link, anomalies = vertex_link(fc, v)
            failures += [f"link of {v}: {a}" for a in anomalies]
            if link.dim >= 1 or link.facets:
                sub = pseudomanifold_check(link, _depth + 1)
                failures += [f"link of {v}: {m}" for m in sub.failures]
            if len(failures) > 20:
                break
    return PseudomanifoldReport(not failures, failures)


# ---------------------------------------------------------------------------
# generators


def _fresh(fc: FilteredComplex, base: str) -> str:
    name, k = base, 0
    while name in fc.levels:
        k += 1
        name = f"{base}{k}"
    return name


def cone(fc: FilteredComplex, apex: str = "c") -> FilteredComplex:
    """Closed cone with the conical filtration: apex at level 0, old levels + 1."""
    if not fc.levels:
        raise ComplexError("cone on an empty complex")
    a = _fresh(fc, apex)
    levels = {v: l + 1 for v, l in fc.levels.items()}
    levels[a] = 0
    simplices = [(a, *f) for f in fc.facets]
    origin = {v: v for v in fc.levels}
    origin[a] = None
    return FilteredComplex(f"c({fc.name})", fc.dim + 1, levels, simplices, parent=fc, origin=origin)


def suspension(fc: FilteredComplex, apices: tuple[str, str] = ("N", "S")) -> FilteredComplex:
    if not fc.levels:
        raise ComplexError("suspension of an empty complex")
    a = _fresh(fc, apices[0])
    b = _fresh(fc, apices[1])
    levels = {v: l + 1 for v, l in fc.levels.items()}
    levels[a] = levels[b] = 0
    simplices = [(x, *f) for f in fc.facets for x in (a, b)]
    origin = {v: v for v in fc.levels}
    origin[a] = origin[b] = None
    return FilteredComplex(f"S({fc.name})", fc.dim + 1, levels, simplices, parent=fc, origin=origin)


def product_with_interval(fc: FilteredComplex, subdivisions: int = 1) -> FilteredComplex:
    """Staircase triangulation of |fc| x [0,1] with ``subdivisions`` layers.

    Levels shift by one so codimensions are preserved; formal dim is n + 1.
    """
    if subdivisions < 1:
        raise ComplexError("need at least one interval cell")
    s = subdivisions

    def vid(v, j):
        return f"{v}@{j}"

    levels = {vid(v, j): l + 1 for v, l in fc.levels.items() for j in range(s + 1)}
    origin = {vid(v, j): v for v in fc.levels for j in range(s + 1)}
    simplices = []
    for f in fc.facets:
        for j in range(s):
            for i in range(len(f)):
                simplices.append([vid(v, j) for v in f[: i + 1]] + [vid(v, j + 1) for v in f[i:]])
    return FilteredComplex(f"{fc.name}xI", fc.dim + 1, levels, simplices, parent=fc, origin=origin)


def _bary_id(s: Simplex) -> str:
    return s[0] if len(s) == 1 else "b(" + "|".join(s) + ")"


def barycentric_subdivision(fc: FilteredComplex) -> FilteredComplex:
    """First barycentric subdivision; a barycenter takes the top level of its simplex."""
    levels, origin = {}, {}
    for s in fc.simplex_set:
        b = _bary_id(s)
        levels[b] = fc.levels[s[-1]]
        origin[b] = s[-1]
    simplices = []
    for f in fc.facets:
        for perm in itertools.permutations(f):
            simplices.append([_bary_id(fc.sort(perm[: i + 1])) for i in range(len(perm))])
    return FilteredComplex(f"Sd({fc.name})", fc.dim, levels, simplices, parent=fc, origin=origin)


def _stellar(facets: set[frozenset], ss: frozenset, b: str) -> set[frozenset]:
    """Stellar subdivision of the simplex ``ss`` at a new vertex ``b``."""
    out = set()
    for f in facets:
        if ss <= f:
            rest = f - ss
            for v in ss:
                out.add((ss - {v}) | rest | {b})
        else:
            out.add(f)
    return out


def derived_near(fc: FilteredComplex, vertices: Iterable[str]) -> FilteredComplex:
    """Derived subdivision of the simplices meeting ``vertices``.

    Stellar subdivision at the barycenter of every simplex that meets the
    given vertex set, in order of decreasing dimension.  Simplices away from
    the set are untouched; near it the result agrees with the first
    barycentric subdivision, so the closed star of the set is a derived
    neighbourhood.
    """
    a = set(vertices)
    targets = sorted((s for s in fc.simplex_set if a & set(s) and len(s) > 1), key=len, reverse=True)
    near = {frozenset(f) for f in fc.facets if a & set(f)}
    far = [f for f in fc.facets if not a & set(f)]
    levels = dict(fc.levels)
    origin: dict[str, str | None] = {v: v for v in fc.levels}
    for s in targets:
        b = _bary_id(s)
        levels[b] = fc.levels[s[-1]]
        origin[b] = s[-1]
        near = _stellar(near, frozenset(s), b)
    return FilteredComplex(f"dn({fc.name})", fc.dim, levels, [*near, *far], parent=fc, origin=origin)


def stellar_near(fc: FilteredComplex, vertices: Iterable[str]) -> FilteredComplex:
    """Subdivide every edge joining the vertex set to a vertex outside it.

    Afterwards no vertex of the set is adjacent to an old vertex outside it,
    and the closed star of the set is a smaller neighbourhood than before.
    Much cheaper than ``derived_near``; the Borel-Moore computation uses it.
    """
    a = set(vertices)
    edges = sorted(s for s in fc.simplices(1) if (s[0] in a) != (s[1] in a))
    near = {frozenset(f) for f in fc.facets if a & set(f)}
    far = [f for f in fc.facets if not a & set(f)]
    levels = dict(fc.levels)
    origin: dict[str, str | None] = {v: v for v in fc.levels}
    for e in edges:
        b = "m(" + "|".join(e) + ")"
        levels[b] = fc.levels[e[-1]]
        origin[b] = e[-1]
        near = _stellar(near, frozenset(e), b)
    return FilteredComplex(f"sn({fc.name})", fc.dim, levels, [*near, *far], parent=fc, origin=origin)


def open_star_complement(fc: FilteredComplex, vertices: Iterable[str]) -> FilteredComplex:
    """Subcomplex of the simplices with no vertex in the given set."""
    a = set(vertices)
    unknown = a - fc.levels.keys()
    if unknown:
        raise ComplexError(f"unknown vertices {sorted(unknown)}")
    faces = [tuple(v for v in f if v not in a) for f in fc.facets]
    faces = [f for f in faces if f]
    if not faces:
        raise ComplexError("open star complement is empty")
    levels = {v: l for v, l in fc.levels.items() if v not in a}
    return FilteredComplex(f"{fc.name}-st({','.join(sorted(a))})", fc.dim, levels, faces,
                           parent=fc, origin={v: v for v in levels})


def closed_star(fc: FilteredComplex, vertices: Iterable[str]) -> set[Simplex]:
    """All simplices meeting the vertex set, together with their faces."""
    a = set(vertices)
    out: set[Simplex] = set()
    for f in fc.facets:
        if a & set(f):
            for r in range(1, len(f) + 1):
                out.update(itertools.combinations(f, r))
    return out


def subcomplex(fc: FilteredComplex, simplices: Iterable[Sequence[str]], name: str = "") -> FilteredComplex:
    simplices = [fc.sort(s) for s in simplices]
    verts = {v for s in simplices for v in s}
    return FilteredComplex(name or f"sub({fc.name})", fc.dim, {v: fc.levels[v] for v in verts}, simplices,
                           parent=fc, origin={v: v for v in verts})


def relabel(fc: FilteredComplex, prefix: str) -> FilteredComplex:
    m = {v: f"{prefix}{v}" for v in fc.levels}
    return FilteredComplex(fc.name, fc.dim, {m[v]: l for v, l in fc.levels.items()},
                           [[m[v] for v in f] for f in fc.facets])


def trivially_filtered(name: str, facets: Iterable[Iterable], dim: int | None = None) -> FilteredComplex:
    """A complex with every vertex at the top level (a manifold model)."""
    facets = [[str(v) for v in f] for f in facets]
    if dim is None:
        dim = max(len(f) for f in facets) - 1
    verts = {v for f in facets for v in f}
    return FilteredComplex(name, dim, {v: dim for v in verts}, facets)


# ---------------------------------------------------------------------------
# perversities


@dataclass(frozen=True)
class PerversitySpec:
    """How to build a perversity on any complex: ``zero``, ``top``, ``gm``
    (data: list of values for codim 2, 3, ...), ``constant`` (data: int),
    ``explicit`` (data: {stratum id: value}) or ``dual`` (data: a spec)."""

    kind: str
    data: Any = None

    def as_json(self) -> dict:
        data = self.data.as_json() if isinstance(self.data, PerversitySpec) else self.data
        return {"kind": self.kind, "data": data}

    @classmethod
    def from_json(cls, obj: Mapping) -> "PerversitySpec":
        kind = obj["kind"]
        data = obj.get("data")
        if kind == "dual":
            data = cls.from_json(data)
        elif kind == "explicit":
            data = {str(k): int(v) for k, v in dict(data).items()}
        elif kind == "gm":
            data = tuple(int(x) for x in data)
        return cls(kind, data)

    @classmethod
    def parse(cls, text: str) -> "PerversitySpec":
        """CLI syntax: ``zero``, ``top``, ``1`` / ``const:1``, ``gm:0,1,1``,
        ``dual:<spec>``, ``S0.0=1,S0.1=2``."""
        t = text.strip()
        low = t.lower()
        if low in ("0", "zero"):
            return cls("zero")
        if low in ("t", "top"):
            return cls("top")
        if low.startswith("dual:"):
            return cls("dual", cls.parse(t[5:]))
        if low.startswith("const:") or low.startswith("constant:"):
            return cls("constant", int(t.split(":", 1)[1]))
        if low.startswith("gm:"):
            return cls("gm", tuple(int(x) for x in t[3:].split(",") if x))
        if "=" in t:
            return cls("explicit", {k.strip(): int(v) for k, v in (p.split("=") for p in t.split(","))})
        return cls("constant", int(t))

    def __str__(self) -> str:
        if self.kind in ("zero", "top"):
            return self.kind
        if self.kind == "dual":
            return f"D({self.data})"
        if self.kind == "explicit":
            return ",".join(f"{k}={v}" for k, v in sorted(self.data.items()))
        return f"{self.kind}:{self.data}"


ZERO = PerversitySpec("zero")
TOP = PerversitySpec("top")


def CONSTANT(c: int) -> PerversitySpec:
    return PerversitySpec("constant", c)


def DUAL(p: PerversitySpec) -> PerversitySpec:
    return PerversitySpec("dual", p)


class PerversityError(ValueError):
    pass


@dataclass(frozen=True)
class Perversity:
    """Integer value per stratum id, zero on regular strata."""

    values: Mapping[str, int]
    spec: PerversitySpec | None = None

    def __getitem__(self, sid: str) -> int:
        return self.values[sid]

    def at_vertex(self, fc: FilteredComplex, v: str) -> int:
        return self.values[fc.stratum_of[v]]

    def __add__(self, other: "Perversity") -> "Perversity":
        return Perversity({k: v + other.values[k] for k, v in self.values.items()})

    def __le__(self, other: "Perversity") -> bool:
        return all(v <= other.values[k] for k, v in self.values.items())

    def __str__(self) -> str:
        return str(self.spec) if self.spec else str(dict(self.values))


def make_perversity(fc: FilteredComplex, spec: PerversitySpec | str) -> Perversity:
    if isinstance(spec, str):
        spec = PerversitySpec.parse(spec)
    values: dict[str, int] = {}
    kind = spec.kind
    if kind == "dual":
        inner = make_perversity(fc, spec.data)
    for st in fc.strata:
        if st.regular:
            values[st.id] = 0
            if kind == "explicit" and spec.data.get(st.id, 0) != 0:
                raise PerversityError(f"perversity must vanish on regular stratum {st.id}")
            continue
        if kind == "zero":
            values[st.id] = 0
        elif kind == "top":
            values[st.id] = st.codim - 2
        elif kind == "constant":
            values[st.id] = int(spec.data)
        elif kind == "gm":
            seq = list(spec.data)
            if st.codim == 1:
                values[st.id] = 0
            elif st.codim - 2 < len(seq):
                values[st.id] = seq[st.codim - 2]
            else:
                values[st.id] = seq[-1] if seq else 0
        elif kind == "explicit":
            values[st.id] = int(spec.data.get(st.id, 0))
        elif kind == "dual":
            values[st.id] = st.codim - 2 - inner[st.id]
        else:
            raise PerversityError(f"unknown perversity kind {kind!r}")
    if kind == "explicit":
        unknown = set(spec.data) - set(values)
        if unknown:
            raise PerversityError(f"unknown stratum ids {sorted(unknown)}")
    return Perversity(values, spec)


def pullback(p: Perversity, parent: FilteredComplex, child: FilteredComplex,
             new_strata: Mapping[str, int] | None = None) -> Perversity:
    """Transport a perversity along ``child.origin`` (same-stratum vertices).

    Strata of the child that come from nowhere (cone apices) take their value
    from ``new_strata`` keyed by child stratum id.
    """
    c, chain = child, []
    while c is not None and c is not parent:
        chain.append(c)
        c = c.parent
    if c is None:
        raise ComplexError(f"{parent.name} is not an ancestor of {child.name}")
    values: dict[str, int] = {}
    for st in child.strata:
        if st.regular:
            values[st.id] = 0
            continue
        v: str | None = min(st.vertices)
        for cx in chain:
            v = cx.origin.get(v) if (cx.origin is not None and v is not None) else None
        if v is None:
            if new_strata is None or st.id not in new_strata:
                raise PerversityError(f"no value for new stratum {st.id} of {child.name}")
            values[st.id] = new_strata[st.id]
        else:
            values[st.id] = p.at_vertex(parent, v)
    return Perversity(values, None)


def realize(spec: PerversitySpec | Perversity, fc: FilteredComplex,
            source: FilteredComplex | None = None) -> Perversity:
    """A perversity on ``fc``: specs are re-evaluated, explicit values pulled
    back from ``source`` (an ancestor of ``fc``) when given."""
    if isinstance(spec, str):
        spec = PerversitySpec.parse(spec)
    if isinstance(spec, Perversity):
        if source is None or source is fc:
            return spec
        return pullback(spec, source, fc)
    if _has_explicit(spec) and source is not None and source is not fc:
        return pullback(make_perversity(source, spec), source, fc)
    return make_perversity(fc, spec)


def _has_explicit(spec: PerversitySpec) -> bool:
    if spec.kind == "explicit":
        return True
    return spec.kind == "dual" and _has_explicit(spec.data)


# ---------------------------------------------------------------------------
# orientation


@dataclass
class Orientation:
    """Sign per top simplex (canonical vertex order)."""

    signs: dict[Simplex, int]

    def __getitem__(self, s: Simplex) -> int:
        return self.signs[s]


# ---------------------------------------------------------------------------
# JSON


def to_json(fc: FilteredComplex, perversities: Mapping[str, PerversitySpec] | None = None,
            orientation: Orientation | None = None) -> dict:
    obj: dict[str, Any] = {
        "name": fc.name,
        "dimension": fc.dim,
        "vertices": [{"id": v, "level": fc.levels[v]} for v in fc.vertices],
        "simplices": [list(f) for f in fc.facets],
        "perversities": [{"name": k, **p.as_json()} for k, p in (perversities or {}).items()],
    }
    if orientation is not None:
        obj["orientation"] = [{"simplex": list(s), "sign": v} for s, v in sorted(orientation.signs.items())]
    return obj


def from_json(obj: Mapping) -> tuple[FilteredComplex, dict[str, PerversitySpec], Orientation | None]:
    def need(cond, where, msg):
        if not cond:
            raise SchemaError(f"field {where}: {msg}")

    need(isinstance(obj, Mapping), "<root>", "expected an object")
    for key, typ in (("name", str), ("dimension", int), ("vertices", list), ("simplices", list)):
        need(key in obj, key, "missing")
        need(isinstance(obj[key], typ) and not isinstance(obj[key], bool), key, f"expected {typ.__name__}")
    levels = {}
    for i, v in enumerate(obj["vertices"]):
        need(isinstance(v, Mapping) and "id" in v and "level" in v, f"vertices[{i}]", "needs id and level")
        need(isinstance(v["level"], int) and not isinstance(v["level"], bool), f"vertices[{i}].level",
             f"expected int, got {v['level']!r}")
        need(0 <= v["level"] <= obj["dimension"], f"vertices[{i}].level",
             f"level {v['level']} outside 0..{obj['dimension']}")
        levels[str(v["id"])] = v["level"]
    for i, s in enumerate(obj["simplices"]):
        need(isinstance(s, list) and s, f"simplices[{i}]", "expected a non-empty list of vertex ids")
        for j, v in enumerate(s):
            need(str(v) in levels, f"simplices[{i}][{j}]", f"unknown vertex {v!r}")
    fc = FilteredComplex(obj["name"], obj["dimension"], levels, obj["simplices"])
    strata_ids = {st.id for st in fc.strata}
    perv = {}
    for i, p in enumerate(obj.get("perversities", [])):
        need(isinstance(p, Mapping) and "name" in p and "kind" in p, f"perversities[{i}]", "needs name and kind")
        need(p["kind"] in ("gm", "constant", "explicit", "zero", "top", "dual"), f"perversities[{i}].kind",
             f"unknown kind {p['kind']!r}")
        try:
            spec = PerversitySpec.from_json(p)
        except (TypeError, ValueError, KeyError) as exc:
            raise SchemaError(f"field perversities[{i}].data: {exc}") from exc
        if spec.kind == "explicit":
            for sid in spec.data:
                need(sid in strata_ids, f"perversities[{i}].data", f"unknown stratum id {sid!r}")
        try:
            make_perversity(fc, spec)
        except PerversityError as exc:
            raise SchemaError(f"field perversities[{i}]: {exc}") from exc
        perv[p["name"]] = spec
    orientation = None
    if "orientation" in obj:
        signs = {}
        for i, o in enumerate(obj["orientation"]):
            need(o.get("sign") in (1, -1), f"orientation[{i}].sign", "expected +1 or -1")
            signs[fc.sort(str(v) for v in o["simplex"])] = o["sign"]
        orientation = Orientation(signs)
    return fc, perv, orientation


def save_json(path: str | Path, fc: FilteredComplex, perversities=None, orientation=None) -> None:
    Path(path).write_text(json.dumps(to_json(fc, perversities, orientation), indent=1))


def load_json(path: str | Path):
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return from_json(obj)
