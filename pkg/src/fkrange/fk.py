"""Reduced filtered K-theory of a labeled graph.

Every group is presented on literal vertex coordinates: K0 over a set F of
points is ``Z^{V_F}`` modulo the rows of ``D'_F`` and K1 is the left kernel
of ``D'_F``.  Induced maps are then coordinate inclusions.
"""

from __future__ import annotations

from typing import Sequence

from .finspace import FiniteT0Space
from .graphcore import LabeledGraph, d_matrix, labeling_violations
from .rmod import (
    KINDS, ModuleError, ModuleIso, PartialModule, PointedRModule, RModule, exactness_report,
    verify_relations,
)
from .zlattice import (
    FgAbGroup, GroupHom, IntMatrix, SixTermSequence, block_hom, cokernel,
    connecting_data, direct_sum, is_exact_at, nullspace_rows, solve_left,
)


class SelfCheckError(RuntimeError):
    """An internal invariant failed; this indicates a bug, not bad input."""


def _require_valid(g: LabeledGraph):
    bad = labeling_violations(g)
    if bad:
        s, r = bad[0]
        raise ModuleError(f"edge from {s!r} to {r!r} goes against the order of labels")


def inclusion(small: Sequence[int], big: Sequence[int]) -> IntMatrix:
    """Coordinate inclusion ``Z^small -> Z^big`` for index lists with small in big."""
    pos = {v: k for k, v in enumerate(big)}
    rows = []
    for v in small:
        r = [0] * len(big)
        r[pos[v]] = 1
        rows.append(tuple(r))
    return IntMatrix(len(small), len(big), tuple(rows))


def k0_group(g: LabeledGraph, points: Sequence[str]) -> tuple[FgAbGroup, tuple[int, ...]]:
    """coker D'_F together with its column vertex indices."""
    d = d_matrix(g, points)
    return cokernel(d.matrix)[0], d.col_vertices


def k1_basis(g: LabeledGraph, points: Sequence[str]) -> tuple[list[tuple[int, ...]], tuple[int, ...]]:
    """A basis of ker D'_F (as row vectors over the regular rows) and those rows."""
    d = d_matrix(g, points)
    return nullspace_rows(d.matrix), d.row_vertices


def point_slots(g: LabeledGraph, x: str) -> PartialModule:
    """The three groups and their maps at ``x``, plus Mo(y) for the covers y of x."""
    sp = g.space
    out = PartialModule()
    bd = sp.open_boundary([x])
    up = sp.smallest_open([x])
    mdb, cols_bd = k0_group(g, bd)
    mo, cols_up = k0_group(g, up)
    basis, rows_x = k1_basis(g, [x])
    m1 = FgAbGroup.free(len(basis))
    out.groups.update({("M1", x): m1, ("Mdb", x): mdb, ("Mo", x): mo})
    # index map: a kernel vector over the regular rows of x, times D|rows x, cols bd
    blk = d_matrix(g, up).restrict(rows_x, cols_bd)
    bm = IntMatrix(len(basis), len(rows_x), tuple(basis)) if basis else IntMatrix.zeros(0, len(rows_x))
    out.delta[x] = GroupHom(m1, mdb, bm @ blk)
    out.iup[x] = GroupHom(mdb, mo, inclusion(cols_bd, cols_up))
    for y in sp.covers_of(x):
        moy, cols_y = k0_group(g, sp.smallest_open([y]))
        out.groups[("Mo", y)] = moy
        out.icov[(y, x)] = GroupHom(moy, mdb, inclusion(cols_y, cols_bd))
    return out


def compute_fk(g: LabeledGraph, self_check: bool = True) -> RModule:
    _require_valid(g)
    sp = g.space
    groups, delta, iup, icov = {}, {}, {}, {}
    for x in sp.points:
        p = point_slots(g, x)
        for k in KINDS:
            groups[(k, x)] = p.groups[(k, x)]
        delta.update(p.delta)
        iup.update(p.iup)
    for x in sp.points:
        for y in sp.covers_of(x):
            icov[(y, x)] = GroupHom(groups[("Mo", y)], groups[("Mdb", x)],
                                    inclusion(g.vertices_over(sp.smallest_open([y])),
                                              g.vertices_over(sp.open_boundary([x]))))
    m = RModule(sp, groups, delta, iup, icov)
    if self_check:
        for _, _, f, name in m.arrows():
            if not f.is_well_defined():
                raise SelfCheckError(f"{name} is not well defined")
        if not verify_relations(m):
            raise SelfCheckError("module relations fail on a computed module")
    return m


def unit_representatives(g: LabeledGraph) -> dict[str, tuple[int, ...]]:
    """Indicator of the vertices over x inside the coordinates of Mo(x)."""
    sp = g.space
    out = {}
    for x in sp.points:
        cols = g.vertices_over(sp.smallest_open([x]))
        own = set(g.vertices_over([x]))
        out[x] = tuple(int(v in own) for v in cols)
    return out


def unit_class(g: LabeledGraph, module: RModule | None = None,
               self_check: bool = True) -> PointedRModule:
    """The module with the class that maps to the all-ones vector in K0."""
    m = module or compute_fk(g, self_check)
    p = PointedRModule(m, unit_representatives(g))
    if self_check and not assembly_matches_k0(g, p):
        raise SelfCheckError("assembly map does not match K0 of the whole graph")
    return p


def assembly_to_k0(g: LabeledGraph, p: PointedRModule) -> GroupHom:
    """The map from the assembly cokernel to coker D'_X, by coordinate inclusion."""
    sp = g.space
    asm, offs = p.assembly
    k0, cols_all = k0_group(g, sp.points)
    blocks = []
    for x in sp.points:
        blocks.append(inclusion(g.vertices_over(sp.smallest_open([x])), cols_all))
    rows = [r for b in blocks for r in b.data]
    return GroupHom(asm, k0, IntMatrix(len(rows), len(cols_all), tuple(rows)))


def assembly_matches_k0(g: LabeledGraph, p: PointedRModule) -> bool:
    """The assembly map is an isomorphism taking the unit to the all-ones class."""
    f = assembly_to_k0(g, p)
    if not (f.is_well_defined() and f.is_isomorphism()):
        return False
    img = f.apply(p.unit_vector())
    ones = [1] * f.target.ngens
    return f.target.is_zero([a - b for a, b in zip(img, ones)])


# --------------------------------------------------------------------------
# six-term sequences and Mayer-Vietoris


def six_term(g: LabeledGraph, y: Sequence[str], u: Sequence[str],
             self_check: bool = True) -> tuple[SixTermSequence, dict]:
    """The six-term sequence of the ideal over ``u`` inside the subquotient over ``y``.

    Returns the sequence and the vertex orders used for rows and columns.
    """
    _require_valid(g)
    sp = g.space
    ys, us = set(y), set(u)
    if not sp.is_locally_closed(ys):
        raise ModuleError("Y must be locally closed")
    if not us <= ys or set(sp.smallest_open(us)) & ys != us:
        raise ModuleError("U must be an open subset of Y")
    cs = ys - us
    dy = d_matrix(g, ys)
    cu = [v for v in dy.col_vertices if g.labels[v] in us]
    cc = [v for v in dy.col_vertices if g.labels[v] in cs]
    ru = [v for v in dy.row_vertices if g.labels[v] in us]
    rc = [v for v in dy.row_vertices if g.labels[v] in cs]
    d_u = dy.restrict(ru, cu)
    d_c = dy.restrict(rc, cc)
    blk = dy.restrict(rc, cu)
    d_y = dy.restrict(ru + rc, cu + cc)
    seq = connecting_data(d_u, d_y, d_c, blk)
    if self_check:
        if not seq.is_exact():
            raise SelfCheckError("six-term sequence is not exact")
        if not seq.exponential.is_zero():
            raise SelfCheckError("exponential map is not zero")
    return seq, {"rows": ru + rc, "cols": cu + cc}


def mayer_vietoris_check(g: LabeledGraph, y: Sequence[str], cover: Sequence[Sequence[str]]) -> bool:
    """Exactness of ``sum K0(U_i & U_j) -> sum K0(U_i) -> K0(Y) -> 0``."""
    sp = g.space
    ys = set(y)
    if not sp.is_open(ys):
        raise ModuleError("Y must be open")
    cov = [tuple(sp._sorted(c)) for c in cover]
    for c in cov:
        if not sp.is_open(c) or not set(c) <= ys:
            raise ModuleError(f"cover member {list(c)} is not an open subset of Y")
    if set().union(*map(set, cov)) != ys:
        raise ModuleError("cover does not exhaust Y")
    gy, cols_y = k0_group(g, sp._sorted(ys))
    parts, cols = [], []
    for c in cov:
        gc, cc = k0_group(g, c)
        parts.append(gc)
        cols.append(cc)
    inter_parts, inter_cols, pairs = [], [], []
    for i in range(len(cov)):
        for j in range(i + 1, len(cov)):
            s = sp._sorted(set(cov[i]) & set(cov[j]))
            gi, ci = k0_group(g, s)
            inter_parts.append(gi)
            inter_cols.append(ci)
            pairs.append((i, j))
    mid = direct_sum(parts)
    src = direct_sum(inter_parts)
    blocks = []
    for (i, j), ci in zip(pairs, inter_cols):
        row = [None] * len(cov)
        row[i] = inclusion(ci, cols[i])
        row[j] = -inclusion(ci, cols[j])
        blocks.append(row)
    alpha = block_hom(src, mid, blocks, inter_parts, parts)
    beta = block_hom(mid, gy, [[inclusion(cc, cols_y)] for cc in cols], parts, [gy])
    return (alpha.is_well_defined() and beta.is_well_defined()
            and is_exact_at(alpha, beta) and beta.is_surjective())


def exactness_failures(m: RModule) -> list[str]:
    return [f"{name} at {x}" for x, name, ok in exactness_report(m) if not ok]


def permutation_iso(g: LabeledGraph, h: LabeledGraph, perm: Sequence[int],
                    mg: RModule, mh: RModule) -> ModuleIso:
    """The invariant isomorphism induced by a graph isomorphism.

    ``perm[k]`` is the vertex of ``g`` matched with vertex ``k`` of ``h``.
    """
    sp = g.space
    inv = {j: k for k, j in enumerate(perm)}
    maps = {}
    for x in sp.points:
        for kind, pts in (("Mdb", sp.open_boundary([x])), ("Mo", sp.smallest_open([x]))):
            cg = [inv[v] for v in g.vertices_over(pts)]
            maps[(kind, x)] = GroupHom(mg.groups[(kind, x)], mh.groups[(kind, x)],
                                       inclusion(cg, h.vertices_over(pts)))
        gb, grows = k1_basis(g, [x])
        hb, hrows = k1_basis(h, [x])
        rows = []
        hm = IntMatrix(len(hb), len(hrows), tuple(hb)) if hb else IntMatrix.zeros(0, len(hrows))
        for v in gb:
            moved = [0] * len(hrows)
            for k, r in enumerate(grows):
                moved[hrows.index(inv[r])] = v[k]
            c = solve_left(hm, moved)
            if c is None:
                raise ModuleError("vertex permutation does not match the kernels")
            rows.append(c)
        maps[("M1", x)] = GroupHom(mg.M1(x), mh.M1(x), IntMatrix(len(gb), len(hb), tuple(rows)))
    return ModuleIso(maps)
