"""Exact integer linear algebra over Z.

Matrices act on row vectors from the right (``x -> x @ m``) and the composite
of ``f: A -> B`` and ``g: B -> C`` is written ``compose(f, g)``, applying ``f``
first.  All entries are Python ints, so nothing overflows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence


class LatticeError(ValueError):
    """Raised on shape mismatches and ill-defined homomorphisms."""


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    data: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise LatticeError(f"ragged matrix data for shape {self.rows}x{self.cols}")

    @classmethod
    def of(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        data = tuple(tuple(int(v) for v in r) for r in rows)
        if cols is None:
            if not data:
                raise LatticeError("column count required for a matrix with no rows")
            cols = len(data[0])
        return cls(len(data), cols, data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.data[ij[0]][ij[1]]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise LatticeError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.data)) if other.rows else [()] * other.cols
        data = tuple(
            tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.data
        )
        return IntMatrix(self.rows, other.cols, data)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise LatticeError(f"cannot add {self.shape} and {other.shape}")
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.data, other.data)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(tuple(-a for a in r) for r in self.data))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.data)) if self.rows else
                         tuple(() for _ in range(self.cols)))

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.data for v in r)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "IntMatrix":
        return IntMatrix(len(row_idx), len(col_idx), tuple(
            tuple(self.data[i][j] for j in col_idx) for i in row_idx))

    def row_vector(self, i: int) -> tuple[int, ...]:
        return self.data[i]


def vstack(mats: Sequence[IntMatrix], cols: int | None = None) -> IntMatrix:
    if cols is None:
        if not mats:
            raise LatticeError("vstack of nothing needs a column count")
        cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise LatticeError("vstack column mismatch")
    data = tuple(r for m in mats for r in m.data)
    return IntMatrix(len(data), cols, data)


def hstack(mats: Sequence[IntMatrix], rows: int | None = None) -> IntMatrix:
    if rows is None:
        if not mats:
            raise LatticeError("hstack of nothing needs a row count")
        rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise LatticeError("hstack row mismatch")
    data = tuple(tuple(v for m in mats for v in m.data[i]) for i in range(rows))
    return IntMatrix(rows, sum(m.cols for m in mats), data)


def block_diag(mats: Sequence[IntMatrix]) -> IntMatrix:
    rows = sum(m.rows for m in mats)
    cols = sum(m.cols for m in mats)
    out = [[0] * cols for _ in range(rows)]
    r0 = c0 = 0
    for m in mats:
        for i in range(m.rows):
            for j in range(m.cols):
                out[r0 + i][c0 + j] = m.data[i][j]
        r0 += m.rows
        c0 += m.cols
    return IntMatrix(rows, cols, tuple(map(tuple, out)))


def determinant(m: IntMatrix) -> int:
    """Bareiss fraction-free elimination; exact for any size."""
    if m.rows != m.cols:
        raise LatticeError("determinant of a non-square matrix")
    n = m.rows
    a = m.tolist()
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


# --------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SmithDecomposition:
    """``left @ source @ right == diag`` with unimodular ``left`` and ``right``.

    ``right_inv`` is carried along so that cokernel coordinates can be mapped
    back without a second inversion.
    """

    left: IntMatrix
    diag: IntMatrix
    right: IntMatrix
    source: IntMatrix
    right_inv: IntMatrix

    @cached_property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.diag[i, i] for i in range(min(self.diag.shape)))

    @cached_property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def smith_normal_form(m: IntMatrix) -> SmithDecomposition:
    """Diagonalize ``m`` by unimodular row and column operations.

    The pivot is the entry of least absolute value in the remaining block,
    ties going to the lowest (row, column) index, so the output is a pure
    function of the input.
    """
    nr, nc = m.shape
    a = m.tolist()
    left = [[int(i == j) for j in range(nr)] for i in range(nr)]
    right = [[int(i == j) for j in range(nc)] for i in range(nc)]
    rinv = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i, j):
        if i != j:
            a[i], a[j] = a[j], a[i]
            left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        if i != j:
            for r in a:
                r[i], r[j] = r[j], r[i]
            for r in right:
                r[i], r[j] = r[j], r[i]
            rinv[i], rinv[j] = rinv[j], rinv[i]

    def add_row(dst, src, q):  # row dst += q * row src
        if q:
            ra, rs = a[dst], a[src]
            for j in range(nc):
                ra[j] += q * rs[j]
            la, ls = left[dst], left[src]
            for j in range(nr):
                la[j] += q * ls[j]

    def add_col(dst, src, q):  # col dst += q * col src
        if q:
            for r in a:
                r[dst] += q * r[src]
            for r in right:
                r[dst] += q * r[src]
            ri, rd = rinv[src], rinv[dst]
            for j in range(nc):
                ri[j] -= q * rd[j]

    t = 0
    while t < min(nr, nc):
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                v = a[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            while True:
                # bring the smallest entry of row t / column t to the pivot
                cand = None
                for i in range(t, nr):
                    v = a[i][t]
                    if v and (cand is None or abs(v) < cand[0]):
                        cand = (abs(v), i, None)
                for j in range(t + 1, nc):
                    v = a[t][j]
                    if v and abs(v) < cand[0]:
                        cand = (abs(v), None, j)
                if cand[1] is not None:
                    swap_rows(t, cand[1])
                else:
                    swap_cols(t, cand[2])
                p = a[t][t]
                clean = True
                for i in range(t + 1, nr):
                    if a[i][t]:
                        add_row(i, t, -(a[i][t] // p))
                        clean = clean and a[i][t] == 0
                for j in range(t + 1, nc):
                    if a[t][j]:
                        add_col(j, t, -(a[t][j] // p))
                        clean = clean and a[t][j] == 0
                if clean:
                    break
            p = a[t][t]
            bad = next((i for i in range(t + 1, nr)
                        if any(a[i][j] % p for j in range(t + 1, nc))), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-v for v in a[t]]
            left[t] = [-v for v in left[t]]
        t += 1

    def mk(rows, c):
        return IntMatrix(len(rows), c, tuple(map(tuple, rows)))

    return SmithDecomposition(mk(left, nr), mk(a, nc), mk(right, nc), m, mk(rinv, nc))


def hermite_rows(rows: Iterable[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Returns a basis in echelon form with positive pivots and entries above
    each pivot reduced into ``[0, pivot)``; zero rows dropped.
    """
    a = [list(r) for r in rows if any(r)]
    out: list[list[int]] = []
    col = 0
    while a and col < ncols:
        nz = [r for r in a if r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            for r in nz[1:]:
                q = r[col] // p[col]
                for j in range(col, ncols):
                    r[j] -= q * p[j]
            nz = [p] + [r for r in nz[1:] if r[col]]
        piv = nz[0]
        if piv[col] < 0:
            piv[:] = [-v for v in piv]
        a = [r for r in a if r is not piv and any(r)]
        out.append(piv)
        col += 1
    for k, r in enumerate(out):
        c = next(j for j, v in enumerate(r) if v)
        for prev in out[:k]:
            q = prev[c] // r[c]
            if q:
                for j in range(c, ncols):
                    prev[j] -= q * r[j]
    return [tuple(r) for r in out]


def reduce_by_hermite(vec: Sequence[int], basis: Sequence[Sequence[int]]) -> tuple[int, ...]:
    v = list(vec)
    for r in basis:
        c = next(j for j, x in enumerate(r) if x)
        q = v[c] // r[c]
        if q:
            for j in range(c, len(v)):
                v[j] -= q * r[j]
    return tuple(v)


def lattice_contains(big: Sequence[Sequence[int]], small: Iterable[Sequence[int]], ncols: int) -> bool:
    """True iff every vector of ``small`` lies in the Z-span of ``big``."""
    h = hermite_rows(big, ncols)
    return all(not any(reduce_by_hermite(v, h)) for v in small)


def solve_left(m: IntMatrix, b: Sequence[int]) -> tuple[int, ...] | None:
    """An integer row vector ``x`` with ``x @ m == b``, or None."""
    s = smith_normal_form(m)
    bR = [sum(b[k] * s.right[k, j] for k in range(m.cols)) for j in range(m.cols)]
    y = [0] * m.rows
    for j, v in enumerate(bR):
        d = s.diag[j, j] if j < m.rows else 0
        if d == 0:
            if v:
                return None
        else:
            if v % d:
                return None
            y[j] = v // d
    return tuple(sum(y[i] * s.left[i, k] for i in range(m.rows)) for k in range(m.rows))


def nullspace_rows(m: IntMatrix) -> list[tuple[int, ...]]:
    """Hermite-reduced basis of ``{v : v @ m == 0}``."""
    s = smith_normal_form(m)
    raw = [s.left.row_vector(i) for i in range(s.rank, m.rows)]
    return hermite_rows(raw, m.rows)


# --------------------------------------------------------------------------
# groups and homomorphisms


@dataclass(frozen=True, eq=False)
class FgAbGroup:
    """``Z^ngens`` modulo the row span of ``relations``.

    The canonical form orders torsion generators first (ascending invariant
    factors) and free generators last.
    """

    ngens: int
    relations: IntMatrix
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.relations.cols != self.ngens:
            raise LatticeError("relation matrix width must equal ngens")

    @classmethod
    def free(cls, n: int) -> "FgAbGroup":
        return cls(n, IntMatrix.zeros(0, n))

    @classmethod
    def from_invariants(cls, torsion: Sequence[int], free_rank: int) -> "FgAbGroup":
        n = len(torsion) + free_rank
        rows = [[d if j == i else 0 for j in range(n)] for i, d in enumerate(torsion)]
        return cls(n, IntMatrix(len(rows), n, tuple(map(tuple, rows))))

    @cached_property
    def _snf(self) -> SmithDecomposition:
        return smith_normal_form(self.relations)

    @cached_property
    def _canon_columns(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        diag = self._snf.diagonal
        tors = tuple(j for j, d in enumerate(diag) if d > 1)
        free = tuple(j for j in range(self.ngens) if j >= len(diag) or diag[j] == 0)
        return tors, free

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        return tuple(self._snf.diagonal[j] for j in self._canon_columns[0])

    @cached_property
    def free_rank(self) -> int:
        return len(self._canon_columns[1])

    @property
    def invariants(self) -> tuple[tuple[int, ...], int]:
        return (self.invariant_factors, self.free_rank)

    @cached_property
    def moduli(self) -> tuple[int, ...]:
        """Order of each canonical generator, 0 meaning infinite."""
        return self.invariant_factors + (0,) * self.free_rank

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.invariant_factors

    def order(self) -> int | None:
        if self.free_rank:
            return None
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def is_canonical(self) -> bool:
        return self.relations.data == FgAbGroup.from_invariants(*self.invariants).relations.data

    def canonical(self) -> "FgAbGroup":
        return FgAbGroup.from_invariants(*self.invariants)

    @cached_property
    def to_canonical_matrix(self) -> IntMatrix:
        tors, free = self._canon_columns
        sel = tors + free
        return self._snf.right.submatrix(range(self.ngens), sel)

    @cached_property
    def from_canonical_matrix(self) -> IntMatrix:
        tors, free = self._canon_columns
        return self._snf.right_inv.submatrix(tors + free, range(self.ngens))

    def canonical_coords(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Reduced canonical coordinates; equal iff the classes are equal."""
        m = self.to_canonical_matrix
        out = []
        for j, d in enumerate(self.moduli):
            v = sum(vec[k] * m[k, j] for k in range(self.ngens))
            out.append(v % d if d else v)
        return tuple(out)

    def is_zero(self, vec: Sequence[int]) -> bool:
        return not any(self.canonical_coords(vec))

    def same_invariants(self, other: "FgAbGroup") -> bool:
        return self.invariants == other.invariants

    def __repr__(self):
        parts = [f"Z/{d}" for d in self.invariant_factors] + ["Z"] * self.free_rank
        return "FgAbGroup(" + (" + ".join(parts) or "0") + ")"


@dataclass(frozen=True, eq=False)
class GroupHom:
    """A homomorphism ``x -> x @ matrix`` on generator coordinates."""

    source: FgAbGroup
    target: FgAbGroup
    matrix: IntMatrix

    def __post_init__(self):
        if self.matrix.shape != (self.source.ngens, self.target.ngens):
            raise LatticeError(
                f"hom matrix shape {self.matrix.shape} does not match "
                f"{self.source.ngens}x{self.target.ngens}")

    @classmethod
    def zero(cls, source: FgAbGroup, target: FgAbGroup) -> "GroupHom":
        return cls(source, target, IntMatrix.zeros(source.ngens, target.ngens))

    @classmethod
    def identity(cls, g: FgAbGroup) -> "GroupHom":
        return cls(g, g, IntMatrix.identity(g.ngens))

    def apply(self, vec: Sequence[int]) -> tuple[int, ...]:
        m = self.matrix
        return tuple(sum(vec[i] * m[i, j] for i in range(m.rows)) for j in range(m.cols))

    def is_well_defined(self) -> bool:
        images = (self.source.relations @ self.matrix).data
        return lattice_contains(self.target.relations.data, images, self.target.ngens)

    def equals(self, other: "GroupHom") -> bool:
        """Equality as maps: matrices agree modulo target relations."""
        if self.matrix.shape != other.matrix.shape:
            return False
        diff = (self.matrix - other.matrix).data
        return lattice_contains(self.target.relations.data, diff, self.target.ngens)

    def is_zero(self) -> bool:
        return lattice_contains(self.target.relations.data, self.matrix.data, self.target.ngens)

    def image_lattice(self) -> list[tuple[int, ...]]:
        return list(self.matrix.data) + list(self.target.relations.data)

    def kernel_lattice(self) -> list[tuple[int, ...]]:
        """Generators of ``{x in Z^ngens : x @ matrix in relations}``."""
        n = self.source.ngens
        stacked = vstack([self.matrix, -self.target.relations], cols=self.target.ngens)
        ker = nullspace_rows(stacked)
        return hermite_rows([v[:n] for v in ker], n)

    def is_surjective(self) -> bool:
        n = self.target.ngens
        return lattice_contains(self.image_lattice(), IntMatrix.identity(n).data, n)

    def is_injective(self) -> bool:
        return lattice_contains(self.source.relations.data, self.kernel_lattice(), self.source.ngens)

    def is_isomorphism(self) -> bool:
        return self.is_surjective() and self.is_injective()

    def preimage(self, vec: Sequence[int]) -> tuple[int, ...] | None:
        """Some ``x`` with ``x @ matrix == vec`` modulo target relations."""
        stacked = vstack([self.matrix, self.target.relations], cols=self.target.ngens)
        sol = solve_left(stacked, vec)
        return None if sol is None else sol[: self.source.ngens]

    def inverse(self) -> "GroupHom":
        if not self.is_isomorphism():
            raise LatticeError("inverse of a non-isomorphism")
        rows = []
        for i in range(self.target.ngens):
            e = [int(i == j) for j in range(self.target.ngens)]
            rows.append(self.preimage(e))
        return GroupHom(self.target, self.source,
                        IntMatrix(len(rows), self.source.ngens, tuple(rows)))

    def __neg__(self) -> "GroupHom":
        return GroupHom(self.source, self.target, -self.matrix)

    def __add__(self, other: "GroupHom") -> "GroupHom":
        return GroupHom(self.source, self.target, self.matrix + other.matrix)


def compose(f: GroupHom, g: GroupHom) -> GroupHom:
    """``f`` followed by ``g``."""
    if f.target is not g.source and not (
            f.target.ngens == g.source.ngens
            and f.target.relations.data == g.source.relations.data):
        raise LatticeError("compose: middle groups differ")
    return GroupHom(f.source, g.target, f.matrix @ g.matrix)


def canonical_iso(g: FgAbGroup) -> GroupHom:
    return GroupHom(g, g.canonical(), g.to_canonical_matrix)


def from_canonical_iso(g: FgAbGroup) -> GroupHom:
    return GroupHom(g.canonical(), g, g.from_canonical_matrix)


def to_canonical_hom(f: GroupHom, source: FgAbGroup | None = None,
                     target: FgAbGroup | None = None) -> GroupHom:
    """``f`` rewritten between canonical presentations, torsion entries reduced."""
    src = source or f.source.canonical()
    tgt = target or f.target.canonical()
    m = f.source.from_canonical_matrix @ f.matrix @ f.target.to_canonical_matrix
    mods = tgt.moduli
    data = tuple(tuple(v % mods[j] if mods[j] else v for j, v in enumerate(r)) for r in m.data)
    return GroupHom(src, tgt, IntMatrix(m.rows, m.cols, data))


def cokernel(m: IntMatrix) -> tuple[FgAbGroup, GroupHom]:
    """``Z^cols / rowspan(m)`` with its projection from the free group."""
    g = FgAbGroup(m.cols, m)
    return g, GroupHom(FgAbGroup.free(m.cols), g, IntMatrix.identity(m.cols))


def kernel(m: IntMatrix) -> tuple[FgAbGroup, GroupHom]:
    """``{v : v @ m == 0}`` as a free group with its inclusion into ``Z^rows``."""
    basis = nullspace_rows(m)
    k = FgAbGroup.free(len(basis))
    return k, GroupHom(k, FgAbGroup.free(m.rows), IntMatrix(len(basis), m.rows, tuple(basis)))


def hom_cokernel(f: GroupHom) -> tuple[FgAbGroup, GroupHom]:
    """``target / image(f)`` with the quotient map."""
    rel = vstack([f.target.relations, f.matrix], cols=f.target.ngens)
    q = FgAbGroup(f.target.ngens, rel)
    return q, GroupHom(f.target, q, IntMatrix.identity(f.target.ngens))


def direct_sum(groups: Sequence[FgAbGroup]) -> FgAbGroup:
    n = sum(g.ngens for g in groups)
    if not groups:
        return FgAbGroup.free(0)
    return FgAbGroup(n, block_diag([g.relations for g in groups]))


def block_hom(source: FgAbGroup, target: FgAbGroup,
              blocks: Sequence[Sequence[IntMatrix | None]],
              src_parts: Sequence[FgAbGroup], tgt_parts: Sequence[FgAbGroup]) -> GroupHom:
    """Assemble a hom between direct sums from a grid of blocks (None = 0)."""
    rows = []
    for i, sp in enumerate(src_parts):
        row = [blocks[i][j] if blocks[i][j] is not None else IntMatrix.zeros(sp.ngens, tp.ngens)
               for j, tp in enumerate(tgt_parts)]
        rows.append(hstack(row, rows=sp.ngens) if row else IntMatrix.zeros(sp.ngens, 0))
    mat = vstack(rows, cols=target.ngens) if rows else IntMatrix.zeros(0, target.ngens)
    return GroupHom(source, target, mat)


def is_exact_at(f: GroupHom, g: GroupHom) -> bool:
    """Is ``image(f) == kernel(g)`` inside the common middle group?"""
    mid = f.target
    if mid.ngens != g.source.ngens or mid.relations.data != g.source.relations.data:
        raise LatticeError("is_exact_at: middle groups differ")
    n = mid.ngens
    im = f.image_lattice()
    ker = g.kernel_lattice()
    return lattice_contains(im, ker, n) and lattice_contains(ker, im, n)


# --------------------------------------------------------------------------
# diagrams


@dataclass(frozen=True)
class Diagram:
    """Objects plus structure maps ``(src index, tgt index, hom)``."""

    objects: tuple[FgAbGroup, ...]
    arrows: tuple[tuple[int, int, GroupHom], ...]


def certify_iso(a: Diagram, b: Diagram, candidate: Sequence[GroupHom]) -> bool:
    """Check that ``candidate`` is an isomorphism of diagrams ``a -> b``.

    Every component must be a well-defined isomorphism and every square
    formed with a pair of corresponding structure maps must commute.
    """
    if len(a.objects) != len(b.objects) or len(candidate) != len(a.objects):
        raise LatticeError("certify_iso: object count mismatch")
    if len(a.arrows) != len(b.arrows):
        raise LatticeError("certify_iso: arrow count mismatch")
    for ga, gb, phi in zip(a.objects, b.objects, candidate):
        if phi.matrix.shape != (ga.ngens, gb.ngens):
            return False
        phi = GroupHom(ga, gb, phi.matrix)
        if not (phi.is_well_defined() and phi.is_isomorphism()):
            return False
    for (i, j, fa), (i2, j2, fb) in zip(a.arrows, b.arrows):
        if (i, j) != (i2, j2):
            raise LatticeError("certify_iso: arrow endpoints differ")
        left = GroupHom(a.objects[i], b.objects[j], fa.matrix @ candidate[j].matrix)
        right = GroupHom(a.objects[i], b.objects[j], candidate[i].matrix @ fb.matrix)
        if not left.equals(right):
            return False
    return True


# --------------------------------------------------------------------------
# snake lemma


SLOT_NAMES = ("coker_U", "coker_Y", "coker_C", "ker_U", "ker_Y", "ker_C")


@dataclass(frozen=True)
class SixTermSequence:
    """coker U -> coker Y -> coker C -(0)-> ker U -> ker Y -> ker C -(index)-> coker U.

    ``maps[k]`` goes from ``groups[k]`` to ``groups[(k + 1) % 6]``; the slot
    order follows SLOT_NAMES.
    """

    groups: tuple[FgAbGroup, ...]
    maps: tuple[GroupHom, ...]

    def __getattr__(self, name):
        if name in SLOT_NAMES:
            return self.groups[SLOT_NAMES.index(name)]
        raise AttributeError(name)

    @property
    def exponential(self) -> GroupHom:
        return self.maps[2]

    @property
    def index_map(self) -> GroupHom:
        return self.maps[5]

    def exactness(self) -> list[bool]:
        return [is_exact_at(self.maps[k - 1], self.maps[k]) for k in range(6)]

    def is_exact(self) -> bool:
        return all(self.exactness())

    def diagram(self) -> Diagram:
        return Diagram(self.groups, tuple((k, (k + 1) % 6, f) for k, f in enumerate(self.maps)))


def _coords_in_basis(vectors: Sequence[Sequence[int]], basis: Sequence[Sequence[int]], n: int) -> IntMatrix:
    bm = IntMatrix(len(basis), n, tuple(tuple(b) for b in basis))
    rows = []
    for v in vectors:
        x = solve_left(bm, v)
        if x is None:
            raise LatticeError("vector outside the kernel lattice")
        rows.append(x)
    return IntMatrix(len(rows), len(basis), tuple(rows))


def connecting_data(dU: IntMatrix, dY: IntMatrix, dC: IntMatrix, blockYtoU: IntMatrix) -> SixTermSequence:
    """Six-term sequence of ``dY = [[dU, 0], [block, dC]]`` via the snake lemma.

    Kernels live on row indices, cokernels on column indices, so rectangular
    inputs (rows restricted to regular vertices) are allowed.
    """
    ru, cu = dU.shape
    rc, cc = dC.shape
    if dY.shape != (ru + rc, cu + cc) or blockYtoU.shape != (rc, cu):
        raise LatticeError("connecting_data: block shapes do not fit")
    if dY.submatrix(range(ru), range(cu)).data != dU.data \
            or dY.submatrix(range(ru, ru + rc), range(cu, cu + cc)).data != dC.data \
            or dY.submatrix(range(ru, ru + rc), range(cu)).data != blockYtoU.data \
            or not dY.submatrix(range(ru), range(cu, cu + cc)).is_zero():
        raise LatticeError("connecting_data: dY is not block lower-triangular with these blocks")
    coU, coY, coC = FgAbGroup(cu, dU), FgAbGroup(cu + cc, dY), FgAbGroup(cc, dC)
    bU, bY, bC = nullspace_rows(dU), nullspace_rows(dY), nullspace_rows(dC)
    kU, kY, kC = FgAbGroup.free(len(bU)), FgAbGroup.free(len(bY)), FgAbGroup.free(len(bC))
    iota = GroupHom(coU, coY, hstack([IntMatrix.identity(cu), IntMatrix.zeros(cu, cc)], rows=cu))
    pi = GroupHom(coY, coC, vstack([IntMatrix.zeros(cu, cc), IntMatrix.identity(cc)], cols=cc))
    exp = GroupHom.zero(coC, kU)
    iota_k = GroupHom(kU, kY, _coords_in_basis([tuple(v) + (0,) * rc for v in bU], bY, ru + rc))
    pi_k = GroupHom(kY, kC, _coords_in_basis([v[ru:] for v in bY], bC, rc))
    bCm = IntMatrix(len(bC), rc, tuple(bC))
    index = GroupHom(kC, coU, bCm @ blockYtoU)
    return SixTermSequence((coU, coY, coC, kU, kY, kC), (iota, pi, exp, iota_k, pi_k, index))


def lower_triangular(dU: IntMatrix, dC: IntMatrix, block: IntMatrix) -> IntMatrix:
    top = hstack([dU, IntMatrix.zeros(dU.rows, dC.cols)], rows=dU.rows)
    bottom = hstack([block, dC], rows=dC.rows)
    return vstack([top, bottom], cols=dU.cols + dC.cols)
