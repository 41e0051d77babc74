"""Blown-up intersection cochains.

For a regular simplex with join decomposition ``Delta_0 * ... * Delta_n``
the local blown-up complex is ``N(c Delta_0) x ... x N(c Delta_{n-1}) x
N(Delta_n)``, with basis ``1_(F, eps)``: a face ``F_i`` of each layer and a
flag ``eps_i`` saying whether the cone apex is used (``F_i`` empty forces the
apex).  Restricting to a face is coordinate projection, so a compatible
family over all regular simplices is determined by its coordinates on pairs
``(tau, eps)`` where ``tau = F_0 u ... u F_n`` is the support.  That gives a
global basis ``e_(tau, eps)`` without solving the compatibility equations;
``compatibility_kernel`` solves them anyway for cross-checking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .chains import NEG_INF, _as_perversity, intersection_complex, intersection_homology, tame_complex
from .complex import FilteredComplex, Perversity, Simplex, Stratum
from .linalg import (
    AbelianGroup,
    CoefficientRing,
    PresentedChainComplex,
    SparseIntMatrix,
    change_of_rings,
    homology,
    integer_kernel,
    subcomplex_homology,
)

Flags = tuple[int, ...]
Element = tuple[Simplex, Flags]


def element_degree(fc: FilteredComplex, tau: Simplex, eps: Flags) -> int:
    layers = fc.layers(tau)
    return sum(len(layers[i]) - 1 + eps[i] for i in range(fc.dim)) + len(layers[fc.dim]) - 1


def _flag_choices(fc: FilteredComplex, tau: Simplex) -> Iterable[Flags]:
    layers = fc.layers(tau)
    opts = [(0, 1) if layers[i] else (1,) for i in range(fc.dim)]
    return itertools.product(*opts)


def cochain_perverse_degree(fc: FilteredComplex, tau: Simplex, eps: Flags, ell: int) -> float:
    """Perverse degree of ``1_(F, eps)`` in codimension ``ell`` (1 <= ell <= n)."""
    n = fc.dim
    if not 1 <= ell <= n:
        raise ValueError(f"codimension {ell} outside 1..{n}")
    i = n - ell
    if eps[i] == 1:
        return NEG_INF
    layers = fc.layers(tau)
    return sum(len(layers[j]) - 1 + eps[j] for j in range(i + 1, n)) + len(layers[n]) - 1


def element_perverse_degree(fc: FilteredComplex, tau: Simplex, eps: Flags, st: Stratum) -> float:
    """Degree of the global element along a stratum.  Only simplices
    containing ``tau`` carry it, and such a simplex meets a singular stratum
    of level i with eps_i = 0 only through the layer F_i itself."""
    if st.regular:
        return 0
    i = st.level
    layer = fc.layers(tau)[i]
    if eps[i] == 1 or not layer or layer[0] not in st.vertices:
        return NEG_INF
    return cochain_perverse_degree(fc, tau, eps, fc.dim - i)


def _allowable(fc: FilteredComplex, tau: Simplex, eps: Flags, p: Perversity) -> bool:
    layers = fc.layers(tau)
    n = fc.dim
    tail = len(layers[n]) - 1
    for i in range(n - 1, -1, -1):
        if layers[i] and eps[i] == 0 and tail > p.values[fc.stratum_of[layers[i][0]]]:
            return False
        tail += len(layers[i]) - 1 + eps[i]
    return True


@dataclass
class BlowupComplex:
    fc: FilteredComplex
    elements: dict[int, list[Element]]
    index: dict[Element, int]
    cochains: PresentedChainComplex

    def allowed(self, p: Perversity) -> dict[int, list[int]]:
        return {k: [j for j, (t, e) in enumerate(els) if _allowable(self.fc, t, e, p)]
                for k, els in self.elements.items()}

    def degree_of(self, el: Element) -> int:
        return element_degree(self.fc, *el)

    def vector(self, cochain: Mapping[Element, int]) -> dict[int, dict[int, int]]:
        out: dict[int, dict[int, int]] = {}
        for el, c in cochain.items():
            if c:
                out.setdefault(self.degree_of(el), {})[self.index[el]] = c
        return out


def coboundary(fc: FilteredComplex, tau: Simplex, eps: Flags) -> dict[Element, int]:
    """d e_(tau, eps) in the global basis."""
    n = fc.dim
    layers = fc.layers(tau)
    degs = [len(layers[i]) - 1 + eps[i] for i in range(n)]
    koszul = [0] * (n + 1)
    for i in range(1, n + 1):
        koszul[i] = koszul[i - 1] + degs[i - 1]
    out: dict[Element, int] = {}
    for i in range(n):
        if layers[i] and eps[i] == 0:
            e2 = eps[:i] + (1,) + eps[i + 1:]
            out[(tau, e2)] = (-1) ** (koszul[i] + len(layers[i]))
    for w in fc.link_vertices(tau):
        i = fc.levels[w]
        pos = sum(1 for v in layers[i] if v < w)
        t2 = fc.sort((*tau, w))
        key = (t2, eps)
        out[key] = out.get(key, 0) + (-1) ** (koszul[i] + pos)
    return {k: v for k, v in out.items() if v}


def blowup_complex(fc: FilteredComplex) -> BlowupComplex:
    cached = fc.__dict__.get("_blowup")
    if cached is not None:
        return cached
    tc = tame_complex(fc)
    elements: dict[int, list[Element]] = {}
    for gens in tc.gens.values():
        for tau in gens:
            for eps in _flag_choices(fc, tau):
                elements.setdefault(element_degree(fc, tau, eps), []).append((tau, eps))
    index = {el: j for els in elements.values() for j, el in enumerate(els)}
    diffs = {}
    for k, els in elements.items():
        cols = []
        for tau, eps in els:
            cols.append({index[el]: c for el, c in coboundary(fc, tau, eps).items()})
        diffs[k] = SparseIntMatrix.from_columns(len(elements.get(k + 1, [])), cols)
    cx = PresentedChainComplex({k: len(v) for k, v in elements.items()}, diffs, step=+1)
    bc = BlowupComplex(fc, elements, index, cx)
    fc.__dict__["_blowup"] = bc
    return bc


global_blowup_complex = blowup_complex


def filtered_simplex(layers: Sequence[Sequence[str]], name: str = "simplex") -> FilteredComplex:
    """The simplex ``Delta_0 * ... * Delta_n`` as a filtered complex."""
    levels = {str(v): i for i, layer in enumerate(layers) for v in layer}
    if not layers or not layers[-1]:
        raise ValueError("the last layer must be non-empty")
    return FilteredComplex(name, len(layers) - 1, levels, [list(levels)])


def local_blowup_complex(layers: Sequence[Sequence[str]]) -> BlowupComplex:
    """Blown-up complex of one filtered simplex.  A compatible family over
    the faces of a simplex is determined by its value on the simplex, so this
    is the local complex itself."""
    return blowup_complex(filtered_simplex(layers))


def perverse_subcomplex(bc: BlowupComplex, p) -> tuple[PresentedChainComplex, dict[int, list[int]]]:
    """The ambient complex and the allowable generators; the p-intersection
    cochains are the cochains on allowable generators with allowable
    coboundary."""
    p = _as_perversity(bc.fc, p)
    return bc.cochains, bc.allowed(p)


def blowup_cohomology(fc: FilteredComplex, p, ring="Z") -> list[AbelianGroup]:
    ring = CoefficientRing.parse(ring)
    cx, allowed = perverse_subcomplex(blowup_complex(fc), p)
    return [subcomplex_homology(cx, k, ring, allowed) for k in range(fc.dim + 1)]


def restriction_matrix(big: BlowupComplex, small: BlowupComplex, k: int) -> SparseIntMatrix:
    """Restriction Ñ(X) -> Ñ(Y) in degree k for a subcomplex Y of X."""
    cols = []
    for el in big.elements.get(k, []):
        j = small.index.get(el)
        cols.append({j: 1} if j is not None and small.degree_of(el) == k else {})
    return SparseIntMatrix.from_columns(len(small.elements.get(k, [])), cols)


# ---------------------------------------------------------------------------
# cross-check: the global complex as a kernel of compatibility conditions


def compatibility_kernel(fc: FilteredComplex, k: int) -> tuple[list[tuple[Simplex, Element]], SparseIntMatrix]:
    """Kernel of (omega_sigma) -> (restriction of omega_sigma - omega_tau)
    over regular facets tau of regular sigma, in degree k.

    Coordinates are pairs (sigma, local basis element of sigma); local basis
    elements are named by their support and flags.  Small complexes only.
    """
    tc = tame_complex(fc)
    coords: list[tuple[Simplex, Element]] = []
    for gens in tc.gens.values():
        for sigma in gens:
            for tau in (t for r in range(1, len(sigma) + 1) for t in itertools.combinations(sigma, r)):
                if not fc.is_regular(tau):
                    continue
                for eps in _flag_choices_in(fc, sigma, tau):
                    if element_degree(fc, tau, eps) == k:
                        coords.append((sigma, (tau, eps)))
    pos = {c: j for j, c in enumerate(coords)}
    rows = []
    for gens in tc.gens.values():
        for sigma in gens:
            for i in range(len(sigma)):
                face = sigma[:i] + sigma[i + 1:]
                if not face or not fc.is_regular(face):
                    continue
                # elements supported off the face restrict to zero there
                for (s, el), j in pos.items():
                    if s == sigma and set(el[0]) <= set(face):
                        rows.append({j: 1, pos[(face, el)]: -1})
    m = SparseIntMatrix(len(rows), len(coords), {(r, j): v for r, row in enumerate(rows) for j, v in row.items()})
    return coords, integer_kernel(m)


def _flag_choices_in(fc: FilteredComplex, sigma: Simplex, tau: Simplex) -> Iterable[Flags]:
    # inside sigma, an empty layer of tau still forces the apex
    return _flag_choices(fc, tau)


# ---------------------------------------------------------------------------
# cohomology of the dual of the intersection chain complex


def dual_complex_cohomology(fc: FilteredComplex, p, ring="Z", method: str = "uct") -> list[AbelianGroup]:
    """Cohomology of Hom(C^p_*(X; Z), R).

    ``method="uct"`` applies universal coefficients to the integral
    intersection homology; ``method="transpose"`` builds the explicit chain
    basis and takes cohomology of the transposed differentials.
    """
    ring = CoefficientRing.parse(ring)
    if method == "transpose":
        pres = intersection_complex(fc, p)
        cx = pres.chains
        dual = PresentedChainComplex(dict(cx.dims), {k - 1: cx.out(k).transpose() for k in cx.dims if k >= 1},
                                     step=+1)
        return [homology(dual, k, ring) for k in range(fc.dim + 1)]
    return change_of_rings(intersection_homology(fc, p, "Z"), ring, cohomology=True)
