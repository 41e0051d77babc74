"""Exact sparse linear algebra over Z and its quotient/fraction rings.

Everything here works with Python integers, so there is no overflow.  Matrices
are kept sparse; the heavy lifting (ranks, invariant factors, kernels) is done
by pivoting on unit entries first, choosing the pivot with the smallest
fill-in, and only falling back to a dense Smith reduction for whatever
non-unit core is left over.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence


class NotAComplex(ValueError):
    """Raised when consecutive differentials do not compose to zero."""


# ---------------------------------------------------------------------------
# matrices


class SparseIntMatrix:
    """An integer matrix stored as ``{(row, col): value}`` with no zeros."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Mapping[tuple[int, int], int] | None = None):
        self.rows = rows
        self.cols = cols
        self.entries: dict[tuple[int, int], int] = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
            if v:
                self.entries[(i, j)] = int(v)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "SparseIntMatrix":
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if nrows else 0
        return cls(nrows, ncols, {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row) if v})

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Mapping[int, int]]) -> "SparseIntMatrix":
        return cls(rows, len(columns), {(i, j): v for j, col in enumerate(columns) for i, v in col.items()})

    @classmethod
    def identity(cls, n: int) -> "SparseIntMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseIntMatrix":
        return cls(rows, cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.entries.get(key, 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseIntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __repr__(self) -> str:
        return f"SparseIntMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def columns(self) -> list[dict[int, int]]:
        cols: list[dict[int, int]] = [{} for _ in range(self.cols)]
        for (i, j), v in self.entries.items():
            cols[j][i] = v
        return cols

    def transpose(self) -> "SparseIntMatrix":
        return SparseIntMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def __matmul__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        by_row: dict[int, list[tuple[int, int]]] = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, []).append((j, v))
        acc: dict[tuple[int, int], int] = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                acc[(i, j)] = acc.get((i, j), 0) + a * b
        return SparseIntMatrix(self.rows, other.cols, acc)

    def apply(self, vec: Mapping[int, int]) -> dict[int, int]:
        """Multiply by a sparse column vector."""
        cols = self._colmap()
        out: dict[int, int] = {}
        for j, x in vec.items():
            for i, v in cols.get(j, {}).items():
                out[i] = out.get(i, 0) + v * x
        return {i: v for i, v in out.items() if v}

    def _colmap(self) -> dict[int, dict[int, int]]:
        cols: dict[int, dict[int, int]] = {}
        for (i, j), v in self.entries.items():
            cols.setdefault(j, {})[i] = v
        return cols

    def is_zero(self) -> bool:
        return not self.entries

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SparseIntMatrix":
        rpos = {r: a for a, r in enumerate(rows)}
        cpos = {c: b for b, c in enumerate(cols)}
        return SparseIntMatrix(
            len(rows),
            len(cols),
            {(rpos[i], cpos[j]): v for (i, j), v in self.entries.items() if i in rpos and j in cpos},
        )


def determinant(m: SparseIntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    a = m.to_dense()
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


# ---------------------------------------------------------------------------
# rings and groups


@dataclass(frozen=True)
class CoefficientRing:
    """Z, Q or Z/m (m >= 2)."""

    kind: str
    modulus: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "Z/m"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == "Z/m" and self.modulus < 2:
            raise ValueError("Z/m needs m >= 2")

    @classmethod
    def parse(cls, text: str | "CoefficientRing") -> "CoefficientRing":
        if isinstance(text, CoefficientRing):
            return text
        t = text.strip().upper().replace("ZZ", "Z").replace("QQ", "Q")
        if t == "Z":
            return INTEGERS
        if t == "Q":
            return RATIONALS
        for prefix in ("Z/", "Z_", "ZMOD"):
            if t.startswith(prefix):
                return cls("Z/m", int(t[len(prefix):]))
        raise ValueError(f"cannot parse ring {text!r}")

    @property
    def is_field(self) -> bool:
        return self.kind == "Q" or (self.kind == "Z/m" and _is_prime(self.modulus))

    @property
    def prime(self) -> int | None:
        if self.kind == "Z/m" and _is_prime(self.modulus):
            return self.modulus
        return None

    def __str__(self) -> str:
        return self.kind if self.kind != "Z/m" else f"Z/{self.modulus}"


INTEGERS = CoefficientRing("Z")
RATIONALS = CoefficientRing("Q")


def MOD(m: int) -> CoefficientRing:
    return CoefficientRing("Z/m", m)


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    f = 2
    while f * f <= m:
        if m % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class AbelianGroup:
    """Isomorphism type R^rank + R/t_1 + ... with t_1 | t_2 | ...

    Over Z the torsion coefficients are the usual ones.  Over Z/m, ``rank``
    counts the free Z/m summands and ``torsion`` lists the proper cyclic
    summands Z/d (d | m, 1 < d < m).  Over a field ``torsion`` is empty.
    """

    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        t = tuple(self.torsion)
        if any(x < 2 for x in t):
            raise ValueError(f"torsion coefficients must be >= 2, got {t}")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"torsion coefficients must form a divisor chain, got {t}")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_orders(cls, rank: int, orders: Iterable[int]) -> "AbelianGroup":
        """Build from arbitrary cyclic orders (units dropped), canonicalised."""
        return cls(rank, tuple(x for x in divisor_chain([abs(o) for o in orders]) if x > 1))

    @classmethod
    def parse(cls, text: str) -> "AbelianGroup":
        """Inverse of ``str``: e.g. ``"Z^2 + Z/2"``, ``"0"``."""
        text = text.strip()
        if text in ("0", ""):
            return cls()
        rank, tors = 0, []
        for part in text.split("+"):
            part = part.strip()
            if "/" in part:
                tors.append(int(part.split("/")[1]))
            elif part.startswith("Z^"):
                rank += int(part[2:])
            elif part == "Z":
                rank += 1
            else:
                raise ValueError(f"cannot parse group {text!r}")
        return cls.from_orders(rank, tors)

    @property
    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def __str__(self) -> str:
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"

    def format(self, ring: "CoefficientRing | str | None" = None) -> str:
        """Like ``str`` but with the free summand named after the ring:
        ``Q^2``, ``Z/2``, ``(Z/4)^2 + Z/2``."""
        ring = CoefficientRing.parse(ring) if ring is not None else INTEGERS
        if ring.kind == "Z":
            return str(self)
        base = "Q" if ring.kind == "Q" else f"Z/{ring.modulus}"
        parts = []
        if self.rank == 1:
            parts.append(base)
        elif self.rank > 1:
            parts.append(f"{base}^{self.rank}" if ring.kind == "Q" else f"({base})^{self.rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"

    @classmethod
    def parse_over(cls, text: str, ring: "CoefficientRing | str") -> "AbelianGroup":
        """Inverse of ``format``."""
        ring = CoefficientRing.parse(ring)
        if ring.kind == "Z":
            return cls.parse(text)
        base = "Q" if ring.kind == "Q" else f"Z/{ring.modulus}"
        rank, tors = 0, []
        for part in text.split("+"):
            part = part.strip()
            if part in ("0", ""):
                continue
            if part == base:
                rank += 1
            elif part.startswith(f"{base}^") or part.startswith(f"({base})^"):
                rank += int(part.rsplit("^", 1)[1])
            elif part.startswith("Z/"):
                tors.append(int(part[2:]))
            else:
                raise ValueError(f"cannot parse {text!r} over {ring}")
        return cls.from_orders(rank, tors)

    def as_json(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion), "text": str(self)}


def divisor_chain(values: Iterable[int]) -> list[int]:
    """Invariant factors (ascending, divisor chain) of diag(values)."""
    vals = sorted(v for v in values if v != 1)
    if any(v == 0 for v in vals):
        raise ValueError("zero is not an invariant factor")
    # lcm/gcd swaps converge to the divisor chain
    n = len(vals)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = vals[i], vals[j]
            g = gcd(a, b)
            vals[i], vals[j] = g, a // g * b
    return [v for v in vals]


# ---------------------------------------------------------------------------
# Smith normal form with transforms (dense, for moderate sizes)


@dataclass
class SNFResult:
    U: SparseIntMatrix
    D: SparseIntMatrix
    V: SparseIntMatrix

    @property
    def diagonal(self) -> list[int]:
        n = min(self.D.rows, self.D.cols)
        return [self.D[i, i] for i in range(n) if self.D[i, i]]


def smith_normal_form(m: SparseIntMatrix) -> SNFResult:
    """U, D, V with U*M*V = D, U and V unimodular, d_1 | d_2 | ... > 0."""
    a = m.to_dense()
    nr, nc = m.rows, m.cols
    U = [[int(i == j) for j in range(nr)] for i in range(nr)]
    V = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        ra, rs = a[dst], a[src]
        for k in range(nc):
            if rs[k]:
                ra[k] += q * rs[k]
        ua, us = U[dst], U[src]
        for k in range(nr):
            if us[k]:
                ua[k] += q * us[k]

    def add_col(dst, src, q):  # col_dst += q * col_src
        for row in a:
            if row[src]:
                row[dst] += q * row[src]
        for row in V:
            if row[src]:
                row[dst] += q * row[src]

    t = 0
    while t < min(nr, nc):
        # pivot: smallest nonzero |entry| in the trailing block
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                v = a[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    if a[t][j]:
                        done = False
            if not done:
                # move the smallest remainder in row/column t to the pivot
                cands = [(abs(a[i][t]), i, t) for i in range(t, nr) if a[i][t]]
                cands += [(abs(a[t][j]), t, j) for j in range(t, nc) if a[t][j]]
                _, i, j = min(cands)
                if i != t:
                    swap_rows(t, i)
                if j != t:
                    swap_cols(t, j)
                continue
            # divisibility of the trailing block by the pivot
            bad = next(
                ((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return SNFResult(
        SparseIntMatrix.from_dense(U, nr),
        SparseIntMatrix.from_dense(a, nc),
        SparseIntMatrix.from_dense(V, nc),
    )


# ---------------------------------------------------------------------------
# sparse elimination: ranks and invariant factors without transforms


def _dense_invariant_factors(rows: list[list[int]]) -> list[int]:
    if not rows or not rows[0]:
        return []
    return smith_normal_form(SparseIntMatrix.from_dense(rows)).diagonal


def invariant_factors(columns: Sequence[Mapping[int, int]], prime: int | None = None) -> list[int]:
    """Nonzero invariant factors of the matrix with the given sparse columns.

    With ``prime`` set the computation is over GF(prime) and every factor is 1,
    so the length of the result is the rank.  Unit pivots are taken greedily
    (short columns first, shortest row within the column); the remaining
    non-unit core over Z is finished densely.
    """
    cols: dict[int, dict[int, int]] = {}
    rows: dict[int, dict[int, int]] = {}
    for j, col in enumerate(columns):
        c = {}
        for i, v in col.items():
            v = v % prime if prime else v
            if v:
                c[i] = v
        if c:
            cols[j] = c
            for i, v in c.items():
                rows.setdefault(i, {})[j] = v

    factors: list[int] = []

    def is_unit(v: int) -> bool:
        return bool(v) if prime else v in (1, -1)

    progress = True
    while progress and cols:
        progress = False
        for c in sorted(cols, key=lambda k: len(cols[k])):
            col = cols.get(c)
            if col is None:
                continue
            best_r, best_cost = None, None
            for r, v in col.items():
                if is_unit(v):
                    cost = len(rows[r])
                    if best_cost is None or cost < best_cost:
                        best_r, best_cost = r, cost
                        if cost == 1:
                            break
            if best_r is None:
                continue
            r = best_r
            piv = col[r]
            inv = pow(piv, -1, prime) if prime else piv
            # clear row r with column operations using column c
            for c2, v2 in list(rows[r].items()):
                if c2 == c:
                    continue
                f = v2 * inv
                col2 = cols[c2]
                for i, vi in col.items():
                    nv = col2.get(i, 0) - f * vi
                    if prime:
                        nv %= prime
                    if nv:
                        col2[i] = nv
                        rows[i][c2] = nv
                    else:
                        col2.pop(i, None)
                        rows[i].pop(c2, None)
                if not col2:
                    del cols[c2]
            for i in col:
                rows[i].pop(c, None)
                if not rows[i]:
                    del rows[i]
            del cols[c]
            factors.append(1)
            progress = True

    if cols:
        if prime:  # every nonzero entry is a unit, cannot get here
            raise AssertionError("leftover columns over a field")
        rlist = sorted(rows)
        rpos = {r: k for k, r in enumerate(rlist)}
        clist = sorted(cols)
        dense = [[0] * len(clist) for _ in rlist]
        for b, c in enumerate(clist):
            for r, v in cols[c].items():
                dense[rpos[r]][b] = v
        factors += _dense_invariant_factors(dense)
    return factors


def rank(columns: Sequence[Mapping[int, int]], prime: int | None = None) -> int:
    """Rank over Q (exact, via Z) or over GF(prime)."""
    if prime is None:
        # rank over Q equals rank mod any prime not dividing the nonzero factors;
        # the Z elimination is exact so use it directly.
        return len(invariant_factors(columns))
    return len(invariant_factors(columns, prime))


# ---------------------------------------------------------------------------
# kernels


def _column_echelon(
    columns: Sequence[Mapping[int, int]], prime: int | None = None
) -> tuple[list[dict[int, int]], list[dict[int, int]]]:
    """Unimodular column reduction.

    Returns ``(pivots, kernel)``: ``pivots`` are the nonzero reduced columns
    (a basis of the column lattice), ``kernel`` the transform vectors of the
    columns reduced to zero (a saturated basis of the integer kernel).
    """
    work: dict[int, dict[int, int]] = {}
    trans: dict[int, dict[int, int]] = {}
    rows: dict[int, set[int]] = {}
    for j, col in enumerate(columns):
        c = {}
        for i, v in col.items():
            v = v % prime if prime else v
            if v:
                c[i] = v
        work[j] = c
        trans[j] = {j: 1}
        for i in c:
            rows.setdefault(i, set()).add(j)

    def axpy(dst: int, src: int, q: int):
        """column dst -= q * column src (matrix and transform)."""
        d, s = work[dst], work[src]
        for i, v in s.items():
            nv = d.get(i, 0) - q * v
            if prime:
                nv %= prime
            if nv:
                if i not in d:
                    rows.setdefault(i, set()).add(dst)
                d[i] = nv
            elif i in d:
                del d[i]
                rows[i].discard(dst)
        td, ts = trans[dst], trans[src]
        for i, v in ts.items():
            nv = td.get(i, 0) - q * v
            if prime:
                nv %= prime
            if nv:
                td[i] = nv
            else:
                td.pop(i, None)

    pivots: list[dict[int, int]] = []
    heap = [(len(s), r) for r, s in rows.items()]
    heapq.heapify(heap)
    while heap:
        size, r = heapq.heappop(heap)
        active = rows.get(r)
        if not active:
            continue
        if len(active) != size:
            heapq.heappush(heap, (len(active), r))
            continue
        while True:
            active = rows[r]
            if len(active) <= 1:
                break
            p = min(active, key=lambda j: (abs(work[j][r]), len(work[j]), j))
            pv = work[p][r]
            for j in list(active):
                if j == p:
                    continue
                v = work[j][r]
                if prime:
                    q = v * pow(pv, -1, prime) % prime
                else:
                    q = v // pv
                    # round toward the nearest multiple to keep entries small
                    if abs(v - q * pv) * 2 > abs(pv):
                        q += 1
                axpy(j, p, q)
        if rows[r]:
            (p,) = rows[r]
            pivots.append(work[p])
            for i in work[p]:
                rows[i].discard(p)
            del work[p]
        del rows[r]
    kernel = [trans[j] for j in sorted(work)]
    return pivots, kernel


def integer_kernel(m: SparseIntMatrix) -> SparseIntMatrix:
    """Columns form a saturated Z-basis of {x : Mx = 0}."""
    _, ker = _column_echelon(m.columns())
    return SparseIntMatrix.from_columns(m.cols, ker)


def kernel_mod(m: SparseIntMatrix, prime: int) -> SparseIntMatrix:
    _, ker = _column_echelon(m.columns(), prime)
    return SparseIntMatrix.from_columns(m.cols, ker)


def lattice_basis(nrows: int, generators: Sequence[Mapping[int, int]]) -> SparseIntMatrix:
    """A basis (as columns) of the Z-lattice spanned by the generators."""
    piv, _ = _column_echelon(generators)
    return SparseIntMatrix.from_columns(nrows, piv)


def relative_kernel(m: SparseIntMatrix, s: SparseIntMatrix) -> SparseIntMatrix:
    """Columns generate {x : Mx in colspan_Z(S)}.

    The answer is a Z-basis of that lattice; it is saturated exactly when the
    column span of S is.
    """
    if m.rows != s.rows:
        raise ValueError(f"dimension mismatch: M has {m.rows} rows, S has {s.rows}")
    n = m.cols
    joint = m.columns() + [{i: -v for i, v in c.items()} for c in s.columns()]
    _, ker = _column_echelon(joint)
    proj = [{i: v for i, v in vec.items() if i < n} for vec in ker]
    return lattice_basis(n, [p for p in proj if p])


def solve_integer(a: SparseIntMatrix, b: Mapping[int, int]) -> dict[int, int] | None:
    """Some integer x with Ax = b, or None if there is none."""
    snf = smith_normal_form(a)
    ub = snf.U.apply(b)
    y: dict[int, int] = {}
    for i, v in ub.items():
        d = snf.D[i, i] if i < min(a.rows, a.cols) else 0
        if d == 0:
            return None
        if v % d:
            return None
        y[i] = v // d
    return snf.V.apply(y)


# ---------------------------------------------------------------------------
# chain complexes


@dataclass
class PresentedChainComplex:
    """Free graded module with integer differentials.

    ``diffs[k]`` is the matrix of the differential leaving degree ``k``; it
    lands in degree ``k - 1`` for a homological complex (``step=-1``) and in
    ``k + 1`` for a cohomological one (``step=+1``).
    """

    dims: dict[int, int]
    diffs: dict[int, SparseIntMatrix] = field(default_factory=dict)
    step: int = -1

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def out(self, k: int) -> SparseIntMatrix:
        d = self.diffs.get(k)
        if d is None:
            return SparseIntMatrix(self.dim(k + self.step), self.dim(k))
        return d

    def degrees(self) -> list[int]:
        return sorted(k for k, n in self.dims.items() if n)

    def check(self, modulus: int | None = None) -> None:
        """Raise NotAComplex unless d o d = 0 (modulo ``modulus`` if given)."""
        for k in self.dims:
            d = self.out(k)
            if d.shape != (self.dim(k + self.step), self.dim(k)):
                raise ValueError(f"differential out of degree {k} has shape {d.shape}")
            dd = self.out(k + self.step) @ d
            if any(v % modulus if modulus else v for v in dd.entries.values()):
                raise NotAComplex(f"d o d != 0 at degree {k}")


def subcomplex_homology(
    cx: PresentedChainComplex,
    k: int,
    ring: CoefficientRing,
    allowed: Mapping[int, Iterable[int]] | None = None,
) -> AbelianGroup:
    """Homology at ``k`` of {x in span(allowed) : dx in span(allowed)}.

    With ``allowed=None`` every generator is allowed and this is plain
    homology.  The computation never builds a basis of the subcomplex: the
    cycles are the kernel of d on the allowed generators (saturated), and the
    boundaries are d applied to a kernel basis of the "forbidden part" of the
    incoming differential.
    """
    ring = CoefficientRing.parse(ring)
    if ring.kind == "Z/m" and not ring.is_field:
        return _homology_mod_composite(cx, k, ring.modulus, allowed)
    prime = ring.prime

    def allowed_set(j: int) -> list[int]:
        if allowed is None:
            return list(range(cx.dim(j)))
        return sorted(set(allowed.get(j, ())))

    a_k = allowed_set(k)
    if not a_k:
        return AbelianGroup()
    out_cols = cx.out(k).columns()
    rank_out = rank([out_cols[j] for j in a_k], prime)

    j_in = k - cx.step
    a_in = allowed_set(j_in)
    in_cols = cx.out(j_in).columns() if cx.dim(j_in) else []
    good = set(a_k)
    kpos = {g: t for t, g in enumerate(a_k)}
    good_part: list[dict[int, int]] = []
    bad_part: list[dict[int, int]] = []
    for j in a_in:
        col = in_cols[j]
        good_part.append({kpos[i]: v for i, v in col.items() if i in good})
        bad_part.append({i: v for i, v in col.items() if i not in good})

    if prime is not None or ring.kind == "Q":
        # over a field: rank d|C = rank d|A - rank(forbidden part)
        off = len(a_k)
        full = [{**g, **{off + i: v for i, v in b.items()}} for g, b in zip(good_part, bad_part)]
        rank_b = rank(full, prime) - rank(bad_part, prime)
        return AbelianGroup(len(a_k) - rank_out - rank_b)

    # over Z: boundaries are generated by d(kernel of the forbidden part)
    dirty = [t for t, b in enumerate(bad_part) if b]
    gens = [good_part[t] for t, b in enumerate(bad_part) if not b]
    if dirty:
        _, ker = _column_echelon([bad_part[t] for t in dirty])
        for vec in ker:
            acc: dict[int, int] = {}
            for t, c in vec.items():
                for i, v in good_part[dirty[t]].items():
                    acc[i] = acc.get(i, 0) + c * v
            acc = {i: v for i, v in acc.items() if v}
            if acc:
                gens.append(acc)
    factors = invariant_factors(gens)
    free = len(a_k) - rank_out - len(factors)
    return AbelianGroup.from_orders(free, factors)


def _homology_mod_composite(cx, k, m, allowed) -> AbelianGroup:
    """Universal coefficients from the integral groups (composite m)."""
    here = subcomplex_homology(cx, k, INTEGERS, allowed)
    below = subcomplex_homology(cx, k + cx.step, INTEGERS, allowed)
    orders = [m] * here.rank + [gcd(t, m) for t in here.torsion] + [gcd(t, m) for t in below.torsion]
    orders = [o for o in orders if o > 1]
    full = sum(1 for o in orders if o == m)
    return AbelianGroup(full, tuple(divisor_chain([o for o in orders if o != m])))


def change_of_rings(integral: Sequence[AbelianGroup], ring: CoefficientRing | str,
                    cohomology: bool = False) -> list[AbelianGroup]:
    """Universal coefficients: groups over ``ring`` of a free chain complex
    from its integral homology (``cohomology=True`` for the dual complex)."""
    ring = CoefficientRing.parse(ring)
    out = []
    for k, here in enumerate(integral):
        below = integral[k - 1].torsion if k else ()
        if ring.kind == "Z":
            # H^k = Hom(H_k, Z) + Ext(H_(k-1), Z)
            out.append(AbelianGroup(here.rank, tuple(divisor_chain(below))) if cohomology else here)
        elif ring.kind == "Q":
            out.append(AbelianGroup(here.rank))
        else:
            # tensor/Tor and Hom/Ext with Z/m contribute the same cyclic orders
            m = ring.modulus
            orders = [m] * here.rank + [gcd(t, m) for t in (*here.torsion, *below)]
            orders = [o for o in orders if o > 1]
            out.append(AbelianGroup(sum(1 for o in orders if o == m),
                                    tuple(divisor_chain([o for o in orders if o != m]))))
    return out


def homology(cx: PresentedChainComplex, k: int, ring: CoefficientRing | str = INTEGERS) -> AbelianGroup:
    """ker d_k / im d_{k -/+ 1} in canonical form.  Raises NotAComplex."""
    cx.check()
    return subcomplex_homology(cx, k, CoefficientRing.parse(ring))


def mapping_cone(
    src: PresentedChainComplex,
    tgt: PresentedChainComplex,
    maps: Mapping[int, SparseIntMatrix],
    src_allowed: Mapping[int, Iterable[int]] | None = None,
    tgt_allowed: Mapping[int, Iterable[int]] | None = None,
) -> tuple[PresentedChainComplex, dict[int, list[int]] | None]:
    """Cone of a chain map f: src -> tgt, with cone_k = src_{k+step} + tgt_k
    and D(a, b) = (-d a, f a + d b).  Acyclic iff f is a quasi-isomorphism.

    Allowed generator sets are carried over to the two summands when given.
    """
    if src.step != tgt.step:
        raise ValueError("complexes run in different directions")
    step = src.step
    degrees = set(tgt.dims) | {k - step for k in src.dims}
    dims = {k: src.dim(k + step) + tgt.dim(k) for k in degrees}
    diffs: dict[int, SparseIntMatrix] = {}
    for k in degrees:
        a_deg = k + step
        off_row = src.dim(a_deg + step)
        off_col = src.dim(a_deg)
        entries: dict[tuple[int, int], int] = {}
        for (i, j), v in src.out(a_deg).entries.items():
            entries[(i, j)] = -v
        f = maps.get(a_deg)
        if f is not None:
            if f.shape != (tgt.dim(a_deg), src.dim(a_deg)):
                raise ValueError(f"chain map in degree {a_deg} has shape {f.shape}")
            for (i, j), v in f.entries.items():
                entries[(off_row + i, j)] = v
        for (i, j), v in tgt.out(k).entries.items():
            entries[(off_row + i, off_col + j)] = v
        diffs[k] = SparseIntMatrix(dims.get(k + step, 0), dims[k], entries)
    allowed = None
    if src_allowed is not None or tgt_allowed is not None:
        allowed = {}
        for k in degrees:
            a = list(src_allowed.get(k + step, ())) if src_allowed is not None else list(range(src.dim(k + step)))
            off = src.dim(k + step)
            b = tgt_allowed.get(k, ()) if tgt_allowed is not None else range(tgt.dim(k))
            allowed[k] = a + [off + j for j in b]
    return PresentedChainComplex(dims, diffs, step), allowed


# ---------------------------------------------------------------------------
# explicit homology bases over a field


class _Echelon:
    """Incremental echelon form over Q or GF(p).

    Every stored row is an integer vector with an integer relation
    ``row = sum_t comb_t * inserted_t`` (over Q no fractions are formed;
    rows are kept primitive).  Row supports start at their pivot.
    """

    def __init__(self, prime: int | None):
        self.prime = prime
        self.rows: dict[int, tuple[dict[int, int], dict[int, int]]] = {}
        self.count = 0

    def _reduce(self, vec: Mapping[int, int]) -> tuple[dict[int, int], dict[int, int], int]:
        """(residue, comb, scale) with scale * vec = residue + sum comb_t inserted_t."""
        p = self.prime
        scale = 1
        if p:
            v = {i: (Fraction(x).numerator * pow(Fraction(x).denominator, -1, p)) % p for i, x in vec.items()}
        else:
            # rational input: clear denominators and remember the factor
            for x in vec.values():
                if isinstance(x, Fraction):
                    scale = scale * x.denominator // gcd(scale, x.denominator)
            v = {i: int(x * scale) for i, x in vec.items()}
        v = {i: x for i, x in v.items() if x}
        comb: dict[int, int] = {}
        heap = list(v)
        heapq.heapify(heap)
        seen = set()
        while heap:
            piv = heapq.heappop(heap)
            if piv in seen:
                continue
            seen.add(piv)
            c = v.get(piv)
            if not c or piv not in self.rows:
                continue
            row, rcomb = self.rows[piv]
            r = row[piv]
            if p:
                a, b = 1, c * pow(r, -1, p) % p
            else:
                g = gcd(r, c)
                a, b = r // g, c // g
            if a != 1:
                for i in v:
                    v[i] *= a
                for t in comb:
                    comb[t] *= a
                scale *= a
            for i, x in row.items():
                nx = v.get(i, 0) - b * x
                if p:
                    nx %= p
                if nx:
                    if i not in v:
                        heapq.heappush(heap, i)
                    v[i] = nx
                else:
                    v.pop(i, None)
            for t, x in rcomb.items():
                nx = comb.get(t, 0) + b * x
                if p:
                    nx %= p
                if nx:
                    comb[t] = nx
                else:
                    comb.pop(t, None)
            if not p and a != 1:
                g = scale
                for x in v.values():
                    g = gcd(g, x)
                for x in comb.values():
                    g = gcd(g, x)
                if g > 1:
                    v = {i: x // g for i, x in v.items()}
                    comb = {t: x // g for t, x in comb.items()}
                    scale //= g
        return v, comb, scale

    def reduce(self, vec: Mapping[int, int]) -> tuple[dict[int, int], dict[int, object]]:
        """(residue, combination) with vec = residue / scale + sum c_t * inserted_t."""
        v, comb, scale = self._reduce(vec)
        if self.prime:
            return v, comb
        if scale == 1:
            return v, comb
        return v, {t: Fraction(x, scale) for t, x in comb.items()}

    def insert(self, vec: Mapping[int, int]) -> bool:
        """Add vec as inserted vector number ``count``; False if dependent."""
        res, comb, scale = self._reduce(vec)
        idx = self.count
        self.count += 1
        if not res:
            return False
        piv = min(res)
        rcomb = {t: -x for t, x in comb.items()}
        rcomb[idx] = rcomb.get(idx, 0) + scale
        if self.prime:
            p = self.prime
            inv = pow(res[piv], -1, p)
            res = {i: x * inv % p for i, x in res.items()}
            rcomb = {t: x * inv % p for t, x in rcomb.items() if x % p}
        else:
            g = 0
            for x in (*res.values(), *rcomb.values()):
                g = gcd(g, x)
            if res[piv] < 0:
                g = -g
            res = {i: x // g for i, x in res.items()}
            rcomb = {t: x // g for t, x in rcomb.items() if x}
        self.rows[piv] = (res, rcomb)
        return True


@dataclass
class HomologyBasis:
    """Cycle representatives of a basis of H_k over a field, and a way to
    read off the class of any cycle in that basis."""

    degree: int
    representatives: list[dict[int, int]]
    _echelon: _Echelon
    _n_boundaries: int

    @property
    def dimension(self) -> int:
        return len(self.representatives)

    def coordinates(self, cycle: Mapping[int, int]) -> list:
        """Coefficients of the class of ``cycle`` (must be a cycle of the
        subcomplex)."""
        res, comb = self._echelon.reduce(cycle)
        if res:
            raise ValueError("vector is not a cycle of the subcomplex")
        nb = self._n_boundaries
        out = [0] * len(self.representatives)
        for t, c in comb.items():
            if t >= nb:
                out[t - nb] = c
        return out


def homology_basis(
    cx: PresentedChainComplex,
    k: int,
    ring: CoefficientRing | str,
    allowed: Mapping[int, Iterable[int]] | None = None,
) -> HomologyBasis:
    """Basis of the homology at ``k`` of the allowed subcomplex (see
    ``subcomplex_homology``) over Q or Z/p, with integer representatives."""
    ring = CoefficientRing.parse(ring)
    if not ring.is_field:
        raise ValueError(f"explicit homology bases need a field, got {ring}")
    prime = ring.prime

    def allowed_set(j: int) -> list[int]:
        if allowed is None:
            return list(range(cx.dim(j)))
        return sorted(set(allowed.get(j, ())))

    a_k = allowed_set(k)
    out_cols = cx.out(k).columns()
    _, zk = _column_echelon([out_cols[j] for j in a_k], prime)
    cycles = [{a_k[t]: v for t, v in vec.items()} for vec in zk]

    j_in = k - cx.step
    a_in = allowed_set(j_in)
    in_cols = cx.out(j_in).columns() if cx.dim(j_in) else []
    good = set(a_k)
    bad = [{i: v for i, v in in_cols[j].items() if i not in good} for j in a_in]
    _, kin = _column_echelon(bad, prime)
    boundaries = []
    for vec in kin:
        acc: dict[int, int] = {}
        for t, c in vec.items():
            for i, v in in_cols[a_in[t]].items():
                acc[i] = acc.get(i, 0) + c * v
        acc = {i: v % prime if prime else v for i, v in acc.items()}
        acc = {i: v for i, v in acc.items() if v}
        if acc:
            boundaries.append(acc)

    # only independent vectors are inserted, so inserted indices are
    # boundaries first, then representatives
    ech = _Echelon(prime)
    nb = 0
    for b in boundaries:
        if ech.reduce(b)[0]:
            ech.insert(b)
            nb += 1
    reps: list[dict[int, int]] = []
    for z in cycles:
        if ech.reduce(z)[0]:
            ech.insert(z)
            reps.append(z)
    return HomologyBasis(k, reps, ech, nb)
