"""Built-in filtered complexes."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from .complex import (
    FilteredComplex,
    PerversitySpec,
    cone,
    stellar_near,
    open_star_complement,
    product_with_interval,
    suspension,
    trivially_filtered,
)

RP2_FACETS = [
    (1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 6, 2),
    (2, 3, 5), (3, 4, 6), (4, 5, 2), (5, 6, 3), (6, 2, 4),
]

# 11 vertices, 41 tetrahedra; obtained from the antipodal quotient of the
# subdivided boundary of the 4-dimensional cross-polytope by edge contractions
RP3_FACETS = [
    (1, 2, 3, 4), (1, 2, 3, 8), (1, 2, 4, 5), (1, 2, 5, 9), (1, 2, 8, 9), (1, 3, 4, 6),
    (1, 3, 6, 7), (1, 3, 7, 8), (1, 4, 5, 10), (1, 4, 6, 10), (1, 5, 9, 10), (1, 6, 7, 11),
    (1, 6, 10, 11), (1, 7, 8, 11), (1, 8, 9, 11), (1, 9, 10, 11), (2, 3, 4, 11), (2, 3, 8, 10),
    (2, 3, 10, 11), (2, 4, 5, 11), (2, 5, 6, 9), (2, 5, 6, 11), (2, 6, 8, 9), (2, 6, 8, 10),
    (2, 6, 10, 11), (3, 4, 6, 9), (3, 4, 9, 11), (3, 5, 6, 7), (3, 5, 6, 9), (3, 5, 7, 10),
    (3, 5, 9, 10), (3, 7, 8, 10), (3, 9, 10, 11), (4, 5, 7, 10), (4, 5, 7, 11), (4, 6, 8, 9),
    (4, 6, 8, 10), (4, 7, 8, 10), (4, 7, 8, 11), (4, 8, 9, 11), (5, 6, 7, 11),
]

# Moebius' 7-vertex torus
TORUS_FACETS = [
    (1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3),
    (1, 2, 6), (2, 3, 7), (3, 4, 1), (4, 5, 2), (5, 6, 3), (6, 7, 4), (7, 1, 5),
]

# a regular vertex of the suspension of RP3, removed to get an open space
PUNCTURE = "1"


def _boundary_of_simplex(n: int) -> list[tuple[int, ...]]:
    verts = range(n + 2)
    return [tuple(v for v in verts if v != i) for i in verts]


def point() -> FilteredComplex:
    return FilteredComplex("point", 0, {"0": 0}, [["0"]])


def circle() -> FilteredComplex:
    return trivially_filtered("S1", [(0, 1), (1, 2), (0, 2)])


def sphere(n: int) -> FilteredComplex:
    return trivially_filtered(f"S{n}", _boundary_of_simplex(n))


def rp2() -> FilteredComplex:
    return trivially_filtered("RP2", RP2_FACETS)


def rp3() -> FilteredComplex:
    return trivially_filtered("RP3", RP3_FACETS)


def torus() -> FilteredComplex:
    return trivially_filtered("T2", TORUS_FACETS)


def cone_two_points() -> FilteredComplex:
    return FilteredComplex("cone-two-points", 1, {"v": 0, "a": 1, "b": 1}, [("v", "a"), ("v", "b")])


def wedge_of_spheres() -> FilteredComplex:
    """Two tetrahedron boundaries sharing a level-0 vertex."""
    levels = {"w": 0}
    facets = []
    for tag in "ab":
        verts = ["w"] + [f"{tag}{i}" for i in range(3)]
        for v in verts[1:]:
            levels[v] = 2
        facets += [[u for u in verts if u != x] for x in verts]
    return FilteredComplex("wedge-S2-S2", 2, levels, facets)


def susp_rp3() -> FilteredComplex:
    x = suspension(rp3())
    x.name = "susp-RP3"
    return x


def susp_rp3_model() -> FilteredComplex:
    """Suspension of RP3, subdivided near a regular vertex (used for the
    punctured space)."""
    x = stellar_near(susp_rp3(), [PUNCTURE])
    x.name = "susp-RP3-refined"
    return x


def susp_rp3_punctured() -> FilteredComplex:
    """Compact model of the suspension of RP3 minus a regular point: the
    complement of the open star of the point after subdividing near it."""
    x = open_star_complement(susp_rp3_model(), [PUNCTURE])
    x.name = "susp-RP3-minus-point"
    return x


def _named(fc: FilteredComplex, name: str) -> FilteredComplex:
    fc.name = name
    return fc


@dataclass
class CorpusEntry:
    name: str
    description: str
    build: Callable[[], FilteredComplex]
    perversities: dict[str, PerversitySpec] = field(default_factory=dict)
    removed: tuple[str, ...] = ()
    small: bool = True

    @property
    def recipe(self) -> str:
        return RECIPES.get(self.name, self.name)


_P_STD = {"zero": PerversitySpec("zero"), "top": PerversitySpec("top")}
_P_ONE = {"zero": PerversitySpec("zero"), "one": PerversitySpec("constant", 1),
          "top": PerversitySpec("top")}

RECIPES = {
    "point": "point()",
    "cone-two-points": "cone(two_points)",
    "circle": "sphere(1)",
    "S2": "sphere(2)",
    "S4": "sphere(4)",
    "T2": "torus()",
    "RP2": "rp2()",
    "RP3": "rp3()",
    "cone-S2": "cone(sphere(2))",
    "cone-RP2": "cone(rp2)",
    "cone-RP3": "cone(rp3)",
    "susp-S1": "suspension(sphere(1))",
    "susp-RP2": "suspension(rp2)",
    "susp-RP3": "suspension(rp3)",
    "susp-RP3-minus-point": f"open_star_complement(stellar_near(suspension(rp3), {PUNCTURE!r}))",
    "susp-RP3-open": f"suspension(rp3) minus vertex {PUNCTURE!r}",
    "wedge-S2-S2": "wedge(sphere(2), sphere(2))",
    "cone-two-points-x-I": "product(cone(two_points), interval)",
    "RP2-x-I": "product(rp2, interval)",
}

ENTRIES: dict[str, CorpusEntry] = {
    e.name: e
    for e in [
        CorpusEntry("point", "a single point", point),
        CorpusEntry("cone-two-points", "closed cone on two points, apex of codimension 1",
                    cone_two_points, {"zero": PerversitySpec("zero"), "minus-one": PerversitySpec("constant", -1)}),
        CorpusEntry("circle", "boundary of a triangle", circle),
        CorpusEntry("S2", "boundary of the tetrahedron", lambda: sphere(2)),
        CorpusEntry("S4", "boundary of the 5-simplex", lambda: sphere(4)),
        CorpusEntry("T2", "7-vertex torus", torus),
        CorpusEntry("RP2", "6-vertex projective plane", rp2),
        CorpusEntry("RP3", "11-vertex projective 3-space", rp3),
        CorpusEntry("cone-S2", "cone on the 2-sphere", lambda: _named(cone(sphere(2)), "cone-S2"), _P_STD),
        CorpusEntry("cone-RP2", "cone on the projective plane", lambda: _named(cone(rp2()), "cone-RP2"), _P_STD),
        CorpusEntry("cone-RP3", "cone on projective 3-space", lambda: _named(cone(rp3()), "cone-RP3"), _P_ONE),
        CorpusEntry("susp-S1", "suspension of a circle with singular poles",
                    lambda: _named(suspension(circle()), "susp-S1"), _P_STD),
        CorpusEntry("susp-RP2", "suspension of the projective plane",
                    lambda: _named(suspension(rp2()), "susp-RP2"), _P_STD),
        CorpusEntry("susp-RP3", "suspension of projective 3-space", susp_rp3, _P_ONE, small=False),
        CorpusEntry("susp-RP3-minus-point", "suspension of RP3 minus a regular point (compact model)",
                    susp_rp3_punctured, _P_ONE, small=False),
        CorpusEntry("susp-RP3-open", "suspension of RP3 with a regular vertex removed (Borel-Moore)",
                    susp_rp3, _P_ONE, removed=(PUNCTURE,), small=False),
        CorpusEntry("wedge-S2-S2", "two 2-spheres joined at a singular point", wedge_of_spheres, _P_STD),
        CorpusEntry("cone-two-points-x-I", "cone on two points times an interval",
                    lambda: _named(product_with_interval(cone_two_points()), "cone-two-points-x-I"),
                    {"zero": PerversitySpec("zero")}),
        CorpusEntry("RP2-x-I", "projective plane times an interval",
                    lambda: _named(product_with_interval(rp2()), "RP2-x-I")),
    ]
}


@dataclass(frozen=True)
class Expected:
    """A known answer: ``theory`` is ih, bm or blowup; groups by degree."""

    theory: str
    perversity: str
    ring: str
    groups: tuple[str, ...]
    provenance: str


def _e(theory, perversity, groups, provenance, ring="Z"):
    return Expected(theory, perversity, ring, tuple(groups.split()), provenance)


# TRIVIAL: classical homology of a manifold (all perversities agree).
# DERIVED: from the cone or suspension formulas for intersection homology.
# PAPER: stated in the source of the formulas being checked.
EXPECTED: dict[str, tuple[Expected, ...]] = {
    "point": (_e("ih", "zero", "Z", "TRIVIAL"),),
    "circle": (_e("ih", "zero", "Z Z", "TRIVIAL"),),
    "S2": (_e("ih", "zero", "Z 0 Z", "TRIVIAL"), _e("blowup", "zero", "Z 0 Z", "TRIVIAL")),
    "S4": (_e("ih", "zero", "Z 0 0 0 Z", "TRIVIAL"),),
    "T2": (_e("ih", "zero", "Z Z^2 Z", "TRIVIAL"), _e("blowup", "zero", "Z Z^2 Z", "TRIVIAL")),
    "RP2": (_e("ih", "zero", "Z Z/2 0", "TRIVIAL"), _e("blowup", "zero", "Z 0 Z/2", "TRIVIAL"),
            _e("ih", "zero", "Z/2 Z/2 Z/2", "TRIVIAL", "Z/2")),
    "RP3": (_e("ih", "zero", "Z Z/2 0 Z", "TRIVIAL"), _e("blowup", "zero", "Z 0 Z/2 Z", "TRIVIAL")),
    "cone-S2": (_e("ih", "zero", "Z 0 0 0", "DERIVED"), _e("ih", "top", "Z 0 0 0", "DERIVED")),
    "cone-RP2": (_e("ih", "zero", "Z Z/2 0 0", "DERIVED"), _e("ih", "top", "Z 0 0 0", "DERIVED")),
    "cone-RP3": (_e("ih", "zero", "Z Z/2 0 0 0", "DERIVED"), _e("ih", "one", "Z Z/2 0 0 0", "DERIVED"),
                 _e("ih", "top", "Z 0 0 0 0", "DERIVED"), _e("blowup", "one", "Z 0 0 0 0", "DERIVED"),
                 _e("blowup", "top", "Z 0 Z/2 0 0", "DERIVED")),
    "susp-S1": (_e("ih", "zero", "Z 0 Z", "DERIVED"), _e("ih", "top", "Z 0 Z", "DERIVED")),
    "susp-RP2": (_e("ih", "zero", "Z Z/2 0 0", "DERIVED"), _e("ih", "top", "Z 0 Z/2 0", "DERIVED")),
    "susp-RP3": (_e("ih", "one", "Z Z/2 0 0 Z", "DERIVED"), _e("ih", "top", "Z 0 Z/2 0 Z", "DERIVED")),
    "susp-RP3-minus-point": (_e("blowup", "one", "Z 0 0 Z/2 0", "PAPER"),),
    "susp-RP3-open": (_e("bm", "one", "0 Z/2 0 0 Z", "PAPER"),),
    "wedge-S2-S2": (_e("ih", "zero", "Z^2 0 Z^2", "DERIVED"), _e("ih", "top", "Z^2 0 Z^2", "DERIVED")),
    "cone-two-points": (_e("ih", "zero", "0 0", "DERIVED"), _e("ih", "minus-one", "Z^2 0", "DERIVED")),
    "cone-two-points-x-I": (_e("ih", "zero", "0 0 0", "DERIVED"),),
    "RP2-x-I": (_e("ih", "zero", "Z Z/2 0 0", "TRIVIAL"),),
}


def expected(name: str) -> tuple[Expected, ...]:
    return EXPECTED.get(name, ())


@lru_cache(maxsize=None)
def _cached(name: str) -> FilteredComplex:
    return ENTRIES[name].build()


def get(name: str) -> FilteredComplex:
    if name not in ENTRIES:
        raise KeyError(f"unknown corpus entry {name!r}; try one of {', '.join(ENTRIES)}")
    return _cached(name)


def names() -> list[str]:
    return list(ENTRIES)
