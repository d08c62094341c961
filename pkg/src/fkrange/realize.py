"""Build labeled graphs whose invariant is a prescribed (pointed) R-module.

Points are added one open point at a time.  Each point gets a block-diagonal
matrix realizing its simple subquotient; the block joining it to its open
boundary is found by a bounded scan, and every accepted step is checked by
extending an explicit isomorphism.  The final certificate is recomputed from
scratch and verified independently of the search.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .finspace import FiniteT0Space
from .fk import compute_fk, inclusion, k0_group, k1_basis, point_slots, unit_class
from .graphcore import INF, LabeledGraph, d_matrix, random_graph, structural_predicates
from .rmod import (
    ModuleIso, PointedRModule, RModule, SearchStatus, exactness_report, point_extensions,
    range_check, unit_preserved, verify_module_iso,
)
from .zlattice import (
    FgAbGroup, GroupHom, IntMatrix, LatticeError, SixTermSequence, certify_iso, cokernel,
    connecting_data, hermite_rows, hom_cokernel, kernel, lower_triangular, solve_left, vstack,
)

DEFAULT_BUDGET = 8
DEFAULT_MAX_CANDIDATES = 4000


class RealizationError(Exception):
    """A realization could not be produced.

    ``kind`` is ``"precondition"``, ``"unsupported"`` or ``"budget"``.
    """

    def __init__(self, kind: str, message: str, point: str | None = None, partial=None):
        super().__init__(message)
        self.kind = kind
        self.point = point
        self.partial = partial


# --------------------------------------------------------------------------
# point blocks


@dataclass(frozen=True)
class PointBlock:
    """Vertices over one point and their matrix ``D`` (rows of singular vertices are infinite)."""

    k1_rank: int
    k0: tuple[tuple[int, ...], int]
    regular: tuple[bool, ...]
    d: tuple[tuple[int, ...], ...]  # regular rows only, all columns

    @property
    def size(self) -> int:
        return len(self.regular)

    @property
    def dprime(self) -> IntMatrix:
        return IntMatrix(len(self.d), self.size, self.d)

    def check(self) -> bool:
        coker = cokernel(self.dprime)[0]
        ker = kernel(self.dprime)[0]
        return coker.invariants == self.k0 and ker.ngens == self.k1_rank and self.size > 0


def realize_point(k1_rank: int, k0: FgAbGroup, allow_singular: bool = False) -> PointBlock:
    r = k0.free_rank
    if k1_rank > r or (k1_rank != r and not allow_singular):
        raise RealizationError(
            "precondition", f"K1 rank {k1_rank} does not fit K0 free rank {r}"
            + ("" if allow_singular else " (finite realization needs equality)"))
    blocks: list[list[list[int]]] = []
    regular: list[bool] = []
    for dinv in k0.invariant_factors:
        blocks.append([[dinv]])
        regular.append(True)
    for _ in range(k1_rank):
        blocks.append([[1, 1], [1, 1]])
        regular += [True, True]
    n_sing = r - k1_rank
    if not regular and not n_sing:
        blocks.append([[1]])
        regular.append(True)
    n = len(regular) + n_sing
    rows = []
    off = 0
    for b in blocks:
        for row in b:
            full = [0] * n
            full[off: off + len(row)] = row
            rows.append(tuple(full))
        off += len(b)
    regular += [False] * n_sing
    pb = PointBlock(k1_rank, k0.invariants, tuple(regular), tuple(rows))
    if not pb.check():
        raise LatticeError("point block does not realize its groups")
    return pb


# --------------------------------------------------------------------------
# connecting blocks


def scan_matrices(floor: IntMatrix, budget: int, max_candidates: int | None = None
                  ) -> Iterator[IntMatrix]:
    """Matrices ``Y >= floor`` with entries ``<= budget``.

    Ordered by total excess over the floor, then lexicographically.
    """
    r, c = floor.shape
    cells = r * c
    base = [floor[i, j] for i in range(r) for j in range(c)]
    slack = [budget - b for b in base]
    if any(s < 0 for s in slack):
        return
    count = 0

    def comps(total, k):
        if k == cells:
            if total == 0:
                yield ()
            return
        for v in range(min(total, slack[k]), -1, -1):
            for rest in comps(total - v, k + 1):
                yield (v,) + rest

    for total in range(sum(slack) + 1):
        for extra in comps(total, 0):
            flat = [b + e for b, e in zip(base, extra)]
            yield IntMatrix(r, c, tuple(tuple(flat[i * c:(i + 1) * c]) for i in range(r)))
            count += 1
            if max_candidates is not None and count >= max_candidates:
                return


@dataclass
class ConnectingResult:
    y: IntMatrix
    sequence: SixTermSequence
    isos: list  # six GroupHom, target slot -> realized slot
    candidates: int


class BudgetExhausted(RealizationError):
    def __init__(self, message, point=None, partial=None, candidates=0):
        super().__init__("budget", message, point, partial)
        self.candidates = candidates


def _lift_middle(f_t: GroupHom, g_t: GroupHom, f_n: GroupHom, g_n: GroupHom,
                 phi_left: GroupHom, phi_right: GroupHom) -> GroupHom | None:
    """An iso of middles for ``L -> M -> R -> 0`` rows given the outer isos.

    Generators of the target middle are split into a part coming from ``L``
    and lifts of generators of ``R``; torsion lifts are corrected so their
    order relations hold.
    """
    mid_t, mid_n = f_t.target, f_n.target
    q_t, q_n = hom_cokernel(f_t)[0], hom_cokernel(f_n)[0]
    # induced map on coker f: through R on both sides
    rows = []
    for i in range(mid_t.ngens):
        e = [int(i == j) for j in range(mid_t.ngens)]
        pre = g_n.preimage(phi_right.apply(g_t.apply(e)))
        if pre is None:
            return None
        rows.append(tuple(pre))
    psi = GroupHom(q_t, q_n, IntMatrix(mid_t.ngens, mid_n.ngens, tuple(rows)))
    lifts = q_t.from_canonical_matrix
    mods = q_t.moduli
    imgs = [list(psi.apply(lifts.row_vector(j))) for j in range(len(mods))]
    for j, dj in enumerate(mods):
        if not dj:
            continue
        b = f_t.preimage([dj * lifts[j, k] for k in range(mid_t.ngens)])
        want = f_n.apply(phi_left.apply(b))
        rhs = [w - dj * v for w, v in zip(want, imgs[j])]
        scaled = IntMatrix(f_n.matrix.rows, mid_n.ngens,
                           tuple(tuple(dj * v for v in r) for r in f_n.matrix.data))
        sol = solve_left(vstack([scaled, mid_n.relations], cols=mid_n.ngens), rhs)
        if sol is None:
            return None
        corr = f_n.apply(sol[: f_n.matrix.rows])
        imgs[j] = [v + c for v, c in zip(imgs[j], corr)]
    out = []
    for i in range(mid_t.ngens):
        e = [int(i == j) for j in range(mid_t.ngens)]
        c = [sum(e[k] * q_t.to_canonical_matrix[k, j] for k in range(mid_t.ngens)) for j in range(len(mods))]
        r = [e[k] - sum(c[j] * lifts[j, k] for j in range(len(mods))) for k in range(mid_t.ngens)]
        a = f_t.preimage(r)
        if a is None:
            return None
        base = f_n.apply(phi_left.apply(a))
        out.append(tuple(base[k] + sum(c[j] * imgs[j][k] for j in range(len(mods)))
                         for k in range(mid_n.ngens)))
    return GroupHom(mid_t, mid_n, IntMatrix(mid_t.ngens, mid_n.ngens, tuple(out)))


def _lift_kernel_middle(f_t: GroupHom, g_t: GroupHom, f_n: GroupHom, g_n: GroupHom,
                        phi_left: GroupHom, phi_right: GroupHom) -> GroupHom | None:
    """Same for ``0 -> L -> M -> R`` between free groups (g not necessarily onto)."""
    mid_t, mid_n = f_t.target, f_n.target
    n = mid_t.ngens
    img_basis = [tuple(r) for r in g_t.image_lattice() if any(r)]
    img_basis = hermite_rows(img_basis, g_t.target.ngens)
    lifts = []
    for b in img_basis:
        pre_t = g_t.preimage(b)
        pre_n = g_n.preimage(phi_right.apply(b))
        if pre_t is None or pre_n is None:
            return None
        lifts.append((pre_t, pre_n))
    basis_rows = [tuple(r) for r in f_t.matrix.data] + [p for p, _ in lifts]
    images = [f_n.apply(phi_left.apply([int(i == j) for j in range(f_t.source.ngens)]))
              for i in range(f_t.source.ngens)] + [q for _, q in lifts]
    if len(basis_rows) != n:
        return None
    bm = IntMatrix(n, n, tuple(basis_rows))
    out = []
    for i in range(n):
        coords = solve_left(bm, [int(i == j) for j in range(n)])
        if coords is None:
            return None
        out.append(tuple(sum(c * v[k] for c, v in zip(coords, images)) for k in range(mid_n.ngens)))
    return GroupHom(mid_t, mid_n, IntMatrix(n, mid_n.ngens, tuple(out)))


def find_connecting(a: IntMatrix, b: IntMatrix, target: SixTermSequence, end_isos: dict,
                    floor: IntMatrix | None = None, budget: int = DEFAULT_BUDGET,
                    max_candidates: int | None = DEFAULT_MAX_CANDIDATES) -> ConnectingResult:
    """Find ``Y`` so that ``[[a, 0], [Y, b]]`` realizes ``target``.

    ``end_isos`` maps the slot names ``coker_U``, ``coker_C``, ``ker_U`` and
    ``ker_C`` to isomorphisms from the target groups to those of ``a`` and
    ``b``.  Middle isomorphisms are built by lifting and every returned
    result passes ``certify_iso``.
    """
    cu, _ = cokernel(a)
    cc, _ = cokernel(b)
    ku, _ = kernel(a)
    kc, _ = kernel(b)
    mine = {"coker_U": cu, "coker_C": cc, "ker_U": ku, "ker_C": kc}
    for slot, grp in mine.items():
        f = end_isos[slot]
        if f.matrix.shape != (getattr(target, slot).ngens, grp.ngens) or not (
                f.is_well_defined() and f.is_isomorphism()):
            raise ValueError(f"end isomorphism for {slot} is not an isomorphism onto its group")
    if target.index_map.is_zero():
        ou, oy, oc = cu.order(), target.coker_Y.order(), cc.order()
        if None not in (ou, oy, oc) and oy != ou * oc:
            raise BudgetExhausted("middle group order cannot match the end groups", candidates=0)
    floor = floor if floor is not None else IntMatrix.zeros(b.rows, a.cols)
    if floor.shape != (b.rows, a.cols):
        raise ValueError("floor must have the shape of the connecting block")
    n = 0
    for y in scan_matrices(floor, budget, max_candidates):
        n += 1
        seq = connecting_data(a, lower_triangular(a, b, y), b, y)
        if seq.coker_Y.invariants != target.coker_Y.invariants:
            continue
        if seq.ker_Y.invariants != target.ker_Y.invariants:
            continue
        phi_y0 = _lift_middle(target.maps[0], target.maps[1], seq.maps[0], seq.maps[1],
                              end_isos["coker_U"], end_isos["coker_C"])
        phi_y1 = _lift_kernel_middle(target.maps[3], target.maps[4], seq.maps[3], seq.maps[4],
                                     end_isos["ker_U"], end_isos["ker_C"])
        if phi_y0 is None or phi_y1 is None:
            continue
        cand = [end_isos["coker_U"], phi_y0, end_isos["coker_C"],
                end_isos["ker_U"], phi_y1, end_isos["ker_C"]]
        if certify_iso(target.diagram(), seq.diagram(), cand):
            return ConnectingResult(y, seq, cand, n)
    raise BudgetExhausted(f"no connecting block found among {n} candidates (budget {budget})",
                          candidates=n)


# --------------------------------------------------------------------------
# module realization


@dataclass
class _Builder:
    """Graph under construction, kept in insertion order."""

    space: FiniteT0Space
    ids: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    rows: dict = field(default_factory=dict)  # vertex id -> {column id: value}; D entries
    singular: set = field(default_factory=set)

    def add(self, vid: str, label: str, singular: bool = False):
        self.ids.append(vid)
        self.labels.append(label)
        self.rows[vid] = {}
        if singular:
            self.singular.add(vid)

    def graph(self) -> LabeledGraph:
        sp = self.space
        idx = {v: i for i, v in enumerate(self.ids)}
        n = len(self.ids)
        mult = [[0] * n for _ in range(n)]
        for v in self.ids:
            i = idx[v]
            if v in self.singular:
                for j, w in enumerate(self.ids):
                    if sp.leq(self.labels[i], self.labels[j]):
                        mult[i][j] = INF
                continue
            for w, val in self.rows[v].items():
                mult[i][idx[w]] = val
            mult[i][i] += 1
        return LabeledGraph.build(sp, self.ids, self.labels, mult)

    def copy(self) -> "_Builder":
        return _Builder(self.space, list(self.ids), list(self.labels),
                        {k: dict(v) for k, v in self.rows.items()}, set(self.singular))


@dataclass
class RealizationCertificate:
    graph: LabeledGraph
    module: RModule
    fk_module: RModule
    iso: ModuleIso
    verified: bool
    predicates: dict
    stages: list
    unit_ok: bool | None = None

    def to_dict(self) -> dict:
        return {"verified": self.verified, "unit_preserved": self.unit_ok,
                "predicates": self.predicates,
                "stages": self.stages,
                "isomorphism": self.iso.to_dict(),
                "graph": self.graph.to_dict()}


def _check_module(m: RModule, unital: bool):
    rv = range_check(m)
    if not rv.exact:
        bad = [f"{name} at {x}" for x, name, ok in exactness_report(m) if not ok]
        raise RealizationError("precondition", "module is not exact: " + ", ".join(bad))
    bad = [x for x, ok in rv.k1_free.items() if not ok]
    if bad:
        raise RealizationError("precondition", f"M1 has torsion at {', '.join(bad)}")
    if unital:
        bad = [x for x, ok in rv.rank_leq.items() if not ok]
        if bad:
            raise RealizationError("precondition",
                                   f"rank of M1 exceeds rank of coker iup at {', '.join(bad)}")
    else:
        bad = [x for x, ok in rv.rank_equal.items() if not ok]
        if bad:
            raise RealizationError(
                "unsupported", "rank of M1 differs from rank of coker iup at "
                + ", ".join(bad) + "; a realization exists but needs an infinite graph")


def _realize_stages(mc: RModule, allow_singular: bool, budget: int, max_candidates: int,
                    order: Sequence[str] | None, search_budget: int = 2
                    ) -> tuple[_Builder, dict, list]:
    sp = mc.space
    bld = _Builder(sp)
    phi: dict = {}
    stages = []
    for x, _, _ in sp.open_point_sequence(order):
        k0x = hom_cokernel(mc.iup[x])[0]
        pb = realize_point(mc.M1(x).free_rank, k0x, allow_singular)
        new_ids = [f"{x}.{k}" for k in range(pb.size)]
        base = bld.copy()
        for vid, reg in zip(new_ids, pb.regular):
            base.add(vid, x, singular=not reg)
        reg_ids = [v for v, reg in zip(new_ids, pb.regular) if reg]
        for vid, row in zip(reg_ids, pb.d):
            for w, val in zip(new_ids, row):
                if val:
                    base.rows[vid][w] = val
        bd = sp.open_boundary([x])
        bd_ids = [v for v, lab in zip(bld.ids, bld.labels) if lab in bd]
        floor = IntMatrix.of([[1] * len(bd_ids) for _ in reg_ids], cols=len(bd_ids))
        target_mo = mc.Mo(x).invariants
        tried = 0
        accepted = None
        for y in scan_matrices(floor, budget, max_candidates):
            tried += 1
            trial = base.copy()
            for i, vid in enumerate(reg_ids):
                for j, w in enumerate(bd_ids):
                    if y[i, j]:
                        trial.rows[vid][w] = y[i, j]
            g = trial.graph()
            mo, _ = k0_group(g, sp.smallest_open([x]))
            if mo.invariants != target_mo:
                continue
            slots = point_slots(g, x)
            status = SearchStatus(node_limit=20_000)
            ext = next(point_extensions(mc, slots, phi, x, search_budget, status, first_only=True), None)
            if ext is None:
                continue
            accepted = (trial, ext, y)
            break
        if accepted is None:
            raise BudgetExhausted(
                f"no connecting block for point {x!r} among {tried} candidates (budget {budget})",
                point=x, partial=bld.graph() if bld.ids else None, candidates=tried)
        bld, ext, y = accepted
        phi.update(ext)
        stages.append({"point": x, "vertices": new_ids, "connecting_block": y.tolist(),
                       "candidates_tried": tried})
    return bld, phi, stages


def _finish(m: RModule, to_canon: ModuleIso, phi: dict, g: LabeledGraph, stages, self_check=True
            ) -> RealizationCertificate:
    fkm = compute_fk(g, self_check)
    # phi was built against partial graphs whose presentations agree with the final one
    maps = {}
    for s in m.slots():
        f = phi[s]
        tgt = fkm.groups[s]
        maps[s] = GroupHom(to_canon.maps[s].source, tgt, to_canon.maps[s].matrix @ f.matrix)
    iso = ModuleIso(maps)
    ok = verify_module_iso(m, fkm, iso)
    preds = structural_predicates(g)
    return RealizationCertificate(g, m, fkm, iso, ok, preds, stages)


def realize_module(m: RModule, budget: int = DEFAULT_BUDGET, order: Sequence[str] | None = None,
                   max_candidates: int = DEFAULT_MAX_CANDIDATES, self_check: bool = True
                   ) -> RealizationCertificate:
    """A finite graph with no singular vertices whose invariant is ``m``."""
    _check_module(m, unital=False)
    mc, to_canon = m.canonical()
    bld, phi, stages = _realize_stages(mc, False, budget, max_candidates, order)
    return _finish(m, to_canon, phi, bld.graph(), stages, self_check)


# --------------------------------------------------------------------------
# unital realization


def _transport(old: LabeledGraph, new: LabeledGraph, m_old: RModule, m_new: RModule) -> ModuleIso:
    """Identify the invariant of ``old`` with that of ``new`` when old's vertices
    sit inside new's and the added vertices only kill their own generators."""
    sp = old.space
    pos = {v: new.index[v] for v in old.vertices}
    maps = {}
    for x in sp.points:
        for kind, pts in (("Mdb", sp.open_boundary([x])), ("Mo", sp.smallest_open([x]))):
            oc = [pos[old.vertices[i]] for i in old.vertices_over(pts)]
            nc = new.vertices_over(pts)
            maps[(kind, x)] = GroupHom(m_old.groups[(kind, x)], m_new.groups[(kind, x)],
                                       inclusion(oc, nc))
        # kernel vectors extend by zero on the new rows
        ob, orows = k1_basis(old, [x])
        nb, nrows = k1_basis(new, [x])
        if not nb:
            maps[("M1", x)] = GroupHom(m_old.M1(x), m_new.M1(x), IntMatrix.zeros(len(ob), 0))
            continue
        nm = IntMatrix(len(nb), len(nrows), tuple(nb))
        rows = []
        for v in ob:
            ext = [0] * len(nrows)
            for k, r in enumerate(orows):
                ext[nrows.index(pos[old.vertices[r]])] = v[k]
            c = solve_left(nm, ext)
            if c is None:
                raise LatticeError("kernel vector does not extend")
            rows.append(c)
        maps[("M1", x)] = GroupHom(m_old.M1(x), m_new.M1(x), IntMatrix(len(ob), len(nb), tuple(rows)))
    return ModuleIso(maps)


def _nonneg_representative(g: LabeledGraph, vec: list[int], helper_of: dict) -> list[int]:
    """A nonnegative vector in the same class of coker D'_X."""
    d = d_matrix(g, g.space.points)
    cols = list(d.col_vertices)
    v = list(vec)
    for s, h in helper_of.items():
        i, j = cols.index(s), cols.index(h)
        if v[i] < 0:
            v[j] += -v[i]
            v[i] = 0
    for r, rv in zip(d.row_vertices, d.matrix.data):
        i = cols.index(r)
        if v[i] < 0:
            k = (-v[i] + rv[i] - 1) // rv[i]
            v = [a + k * b for a, b in zip(v, rv)]
    if any(c < 0 for c in v):
        raise LatticeError("could not make the unit correction nonnegative")
    return v


def realize_unital(p: PointedRModule, budget: int = DEFAULT_BUDGET,
                   order: Sequence[str] | None = None,
                   max_candidates: int = DEFAULT_MAX_CANDIDATES, self_check: bool = True
                   ) -> RealizationCertificate:
    """A finite graph, possibly with singular vertices, realizing ``p`` with its unit.

    The module is realized first; the unit is then moved into place by
    adding vertices whose generators are negatives of existing classes, which
    leaves the invariant unchanged while shifting the class of the sum of all
    vertex projections.
    """
    m = p.module
    _check_module(m, unital=True)
    pc, to_canon = p.canonical()
    mc = pc.module
    bld, phi, stages = _realize_stages(mc, True, budget, max_candidates, order)
    g0 = bld.graph()
    m0 = compute_fk(g0, self_check)
    phi0 = {s: GroupHom(mc.groups[s], m0.groups[s], phi[s].matrix) for s in mc.slots()}

    # helpers: a regular vertex h with e_h = -e_s for each singular s
    helper_of = {}
    for s in sorted(bld.singular, key=bld.ids.index):
        h = s + "h"
        bld.add(h, bld.labels[bld.ids.index(s)])
        bld.rows[h][h] = 1
        bld.rows[h][s] = 1
        helper_of[s] = h
    g1 = bld.graph()
    m1 = compute_fk(g1, self_check)
    tr01 = _transport(g0, g1, m0, m1)
    phi1 = {s: GroupHom(mc.groups[s], m1.groups[s], phi0[s].matrix @ tr01.maps[s].matrix)
            for s in mc.slots()}

    # where the target unit lands in K0 of the whole graph
    sp = mc.space
    d_all = d_matrix(g1, sp.points)
    cols = list(d_all.col_vertices)
    t = [0] * len(cols)
    for x in sp.points:
        v = phi1[("Mo", x)].apply(pc.unit[x])
        for k, vi in enumerate(g1.vertices_over(sp.smallest_open([x]))):
            t[cols.index(vi)] += v[k]
    want = [1 - a for a in t]  # class w with [1] - [w] = t
    w = _nonneg_representative(g1, want, {g1.index[s]: g1.index[h] for s, h in helper_of.items()})
    added = []
    for ci, c in zip(cols, w):
        if c <= 0:
            continue
        v = g1.vertices[ci]
        u = v + "u"
        bld.add(u, g1.labels[ci])
        bld.rows[u][u] = 1
        bld.rows[u][v] = c
        added.append(u)
    g2 = bld.graph()
    m2 = compute_fk(g2, self_check)
    tr12 = _transport(g1, g2, m1, m2)
    phi2 = {s: GroupHom(mc.groups[s], m2.groups[s], phi1[s].matrix @ tr12.maps[s].matrix)
            for s in mc.slots()}
    cert = _finish(m, to_canon, phi2, g2, stages, self_check)
    q = unit_class(g2, cert.fk_module, self_check)
    cert.unit_ok = unit_preserved(p, q, cert.iso)
    cert.verified = cert.verified and cert.unit_ok
    cert.stages.append({"unit_helpers": sorted(helper_of.values()), "unit_adjusters": added})
    return cert


def output_checks(cert: RealizationCertificate, finite: bool) -> dict:
    """Structural guarantees of a realization, each as a boolean."""
    p = cert.predicates
    out = {"two_loops": p["purely_infinite_sufficient"], "condition_K": p["condition_K"],
           "valid_labeling": p["valid_labeling"], "tight_sufficient": p["tight_sufficient"],
           "no_breaking_vertices": not p["breaking_vertices"]}
    if finite:
        out["cuntz_krieger"] = p["is_cuntz_krieger"]
    return out


# --------------------------------------------------------------------------
# random inputs


def _small(m: RModule, max_torsion: int, max_free: int) -> bool:
    for g in m.groups.values():
        o = 1
        for dd in g.invariant_factors:
            o *= dd
        if o > max_torsion or g.free_rank > max_free:
            return False
    return True


def random_module(space: FiniteT0Space, rng: random.Random, max_torsion: int = 6,
                  max_free: int = 1, max_tries: int = 500) -> RModule:
    """A random exact module satisfying the finite rank condition.

    Drawn as the invariant of a random graph and rewritten canonically, then
    filtered by group size.
    """
    for _ in range(max_tries):
        g = random_graph(space, rng, max_vertices=6, max_mult=4)
        m = compute_fk(g).canonical()[0]
        if _small(m, max_torsion, max_free):
            return m
    raise RuntimeError("no module within the size limits was drawn")


def random_pointed_module(space: FiniteT0Space, rng: random.Random, strict: bool = False,
                          max_torsion: int = 6, max_free: int = 1, max_tries: int = 500
                          ) -> PointedRModule:
    """A random pointed module; with ``strict`` some point has rank M1 < rank coker iup."""
    for _ in range(max_tries):
        g = random_graph(space, rng, max_vertices=6, max_mult=4,
                         singular_prob=0.35 if strict else 0.0)
        if strict and not any(not r for r in g.regular):
            continue
        base = unit_class(g)
        pc = base.canonical()[0]
        m = pc.module
        if not _small(m, max_torsion, max_free):
            continue
        rv = range_check(m)
        if strict and all(rv.rank_equal.values()):
            continue
        unit = {}
        for x in space.points:
            grp = m.Mo(x)
            unit[x] = tuple(rng.randrange(dd) if dd else rng.randint(-2, 2) for dd in grp.moduli)
        return PointedRModule(m, unit)
    raise RuntimeError("no pointed module within the size limits was drawn")
