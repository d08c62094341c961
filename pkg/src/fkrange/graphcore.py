"""Labeled directed graphs stored as edge multiplicities.

``multiplicity[v][w]`` counts edges from ``w`` to ``v`` (so row ``v`` lists
what ``v`` receives).  ``INF`` marks infinitely many edges.  Vertices carry a
label in a finite T0-space; a labeling is valid when every edge runs from a
larger-or-equal label to a smaller-or-equal one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .finspace import FiniteT0Space
from .zlattice import IntMatrix

INF = math.inf
MAX_LATTICE_VERTICES = 16


class GraphError(ValueError):
    pass


def _is_inf(m) -> bool:
    return m == INF


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    space: FiniteT0Space
    vertices: tuple[str, ...]
    labels: tuple[str, ...]
    multiplicity: tuple[tuple[int | float, ...], ...]

    def __post_init__(self):
        n = len(self.vertices)
        if len(set(self.vertices)) != n:
            raise GraphError("duplicate vertex ids")
        if len(self.labels) != n or len(self.multiplicity) != n \
                or any(len(r) != n for r in self.multiplicity):
            raise GraphError("multiplicity matrix must be square over the vertex list")
        for v, lab in zip(self.vertices, self.labels):
            if lab not in self.space.index:
                raise GraphError(f"vertex {v!r} has unknown label {lab!r}")
        for r in self.multiplicity:
            for m in r:
                if not (_is_inf(m) or (isinstance(m, int) and m >= 0)):
                    raise GraphError(f"bad multiplicity {m!r}")

    @classmethod
    def build(cls, space: FiniteT0Space, vertices: Sequence[str], labels: Sequence[str],
              multiplicity: Sequence[Sequence[int | float]], sort: bool = True) -> "LabeledGraph":
        """Construct a graph, reordering vertices by label rank then insertion order."""
        n = len(vertices)
        order = list(range(n))
        if sort:
            rank = space.rank
            for v, lab in zip(vertices, labels):
                if lab not in rank:
                    raise GraphError(f"vertex {v!r} has unknown label {lab!r}")
            order.sort(key=lambda i: (rank[labels[i]], i))
        mult = tuple(tuple(_norm(multiplicity[i][j]) for j in order) for i in order)
        return cls(space, tuple(str(vertices[i]) for i in order),
                   tuple(str(labels[i]) for i in order), mult)

    @classmethod
    def from_blocks(cls, space: FiniteT0Space, labels: Sequence[str],
                    d: Sequence[Sequence[int | float]], prefix: str = "v") -> "LabeledGraph":
        """Graph E(1 + D): adjacency multiplicities are D plus the identity."""
        n = len(labels)
        mult = [[(d[i][j] + (1 if i == j else 0)) if not _is_inf(d[i][j]) else INF
                 for j in range(n)] for i in range(n)]
        return cls.build(space, [f"{prefix}{i}" for i in range(n)], labels, mult)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        edges = []
        for i, v in enumerate(self.vertices):
            for j, w in enumerate(self.vertices):
                m = self.multiplicity[i][j]
                if m:
                    edges.append([v, w, "inf" if _is_inf(m) else m])
        return {"space": self.space.to_dict(),
                "vertices": [{"id": v, "label": l} for v, l in zip(self.vertices, self.labels)],
                "multiplicity": edges}

    @classmethod
    def from_dict(cls, d: dict, space: FiniteT0Space | None = None) -> "LabeledGraph":
        if space is None:
            sp = d.get("space")
            if sp is None:
                raise GraphError("graph file has no space and none was supplied")
            space = FiniteT0Space.from_dict(sp) if isinstance(sp, dict) else FiniteT0Space.load(sp)
        verts = [str(v["id"]) for v in d["vertices"]]
        labels = [str(v["label"]) for v in d["vertices"]]
        idx = {v: i for i, v in enumerate(verts)}
        mult = [[0] * len(verts) for _ in verts]
        for entry in d.get("multiplicity", []):
            v, w, m = entry
            if v not in idx or w not in idx:
                raise GraphError(f"multiplicity entry {entry!r} names an unknown vertex")
            mult[idx[v]][idx[w]] = _norm(m)
        return cls.build(space, verts, labels, mult)

    @classmethod
    def load(cls, path, space: FiniteT0Space | None = None) -> "LabeledGraph":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), space)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    # -- basic queries ------------------------------------------------------

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def vertices_over(self, points: Iterable[str]) -> list[int]:
        pts = set(points)
        return [i for i, lab in enumerate(self.labels) if lab in pts]

    def in_degree(self, i: int) -> int | float:
        return sum(self.multiplicity[i]) if not any(map(_is_inf, self.multiplicity[i])) else INF

    @cached_property
    def regular(self) -> tuple[bool, ...]:
        return tuple(0 < self.in_degree(i) < INF for i in range(len(self.vertices)))

    def is_finite(self) -> bool:
        return not any(_is_inf(m) for r in self.multiplicity for m in r)

    def out_neighbors(self, j: int) -> list[int]:
        return [i for i in range(len(self.vertices)) if self.multiplicity[i][j]]

    def permuted(self, perm: Sequence[int], rename: bool = True) -> "LabeledGraph":
        """Copy with vertex ``perm[k]`` placed k-th (ids optionally renamed)."""
        verts = [f"p{k}" if rename else self.vertices[perm[k]] for k in range(len(perm))]
        labels = [self.labels[p] for p in perm]
        mult = [[self.multiplicity[p][q] for q in perm] for p in perm]
        return LabeledGraph.build(self.space, verts, labels, mult, sort=False)


def _norm(m):
    if isinstance(m, str):
        if m.lower() in ("inf", "infinity", "∞"):
            return INF
        m = int(m)
    if isinstance(m, float):
        if math.isinf(m):
            return INF
        if m != int(m):
            raise GraphError(f"non-integral multiplicity {m!r}")
        m = int(m)
    if m < 0:
        raise GraphError(f"negative multiplicity {m!r}")
    return int(m)


@dataclass(frozen=True)
class DMatrix:
    """``D_F = A_F - 1`` on the vertices over ``F``; rows optionally regular only."""

    points: tuple[str, ...]
    row_vertices: tuple[int, ...]
    col_vertices: tuple[int, ...]
    matrix: IntMatrix

    def restrict(self, rows: Sequence[int], cols: Sequence[int]) -> IntMatrix:
        """``D_F|_rows^cols`` by vertex index."""
        ri = [self.row_vertices.index(v) for v in rows]
        ci = [self.col_vertices.index(v) for v in cols]
        return self.matrix.submatrix(ri, ci)


def d_matrix(g: LabeledGraph, points: Iterable[str], regular_rows_only: bool = True) -> DMatrix:
    pts = g.space._sorted(points)
    cols = g.vertices_over(pts)
    rows = [i for i in cols if g.regular[i]] if regular_rows_only else cols
    data = []
    for i in rows:
        r = []
        for j in cols:
            m = g.multiplicity[i][j]
            if _is_inf(m):
                raise GraphError(
                    f"infinite multiplicity into {g.vertices[i]!r}; use regular_rows_only")
            r.append(m - (1 if i == j else 0))
        data.append(tuple(r))
    return DMatrix(pts, tuple(rows), tuple(cols), IntMatrix(len(rows), len(cols), tuple(data)))


def labeling_violations(g: LabeledGraph) -> list[tuple[str, str]]:
    """Edges (source, range) whose source label is not >= the range label."""
    out = []
    sp = g.space
    for i in range(len(g.vertices)):
        for j in range(len(g.vertices)):
            if g.multiplicity[i][j] and not sp.leq(g.labels[i], g.labels[j]):
                out.append((g.vertices[j], g.vertices[i]))
    return out


def labeling_is_valid(g: LabeledGraph) -> bool:
    return not labeling_violations(g)


def labeling_is_valid_blockwise(g: LabeledGraph) -> bool:
    """Same predicate read off the D_X blocks: zero whenever row label is not <= column label."""
    sp = g.space
    for y in sp.points:
        for z in sp.points:
            if sp.leq(y, z):
                continue
            for i in g.vertices_over([y]):
                for j in g.vertices_over([z]):
                    if g.multiplicity[i][j]:
                        return False
    return True


def is_tight_sufficient(g: LabeledGraph) -> bool:
    """Every block of D_X from label y to a strictly larger label z is non-zero."""
    sp = g.space
    for y in sp.points:
        for z in sp.points:
            if sp.lt(y, z):
                rows, cols = g.vertices_over([y]), g.vertices_over([z])
                if not any(g.multiplicity[i][j] for i in rows for j in cols):
                    return False
    return True


def _first_return_count(g: LabeledGraph, v: int, cap: int = 2) -> int:
    """Number of return paths at ``v`` of positive length, capped at ``cap``."""
    n = len(g.vertices)
    m = g.multiplicity

    def mult(dst, src):
        x = m[dst][src]
        return cap if _is_inf(x) else min(x, cap)

    total = mult(v, v)
    others = [u for u in range(n) if u != v]
    # vertices reachable from v without passing v, and able to reach v likewise
    fwd = set()
    stack = [u for u in others if m[u][v]]
    while stack:
        u = stack.pop()
        if u in fwd:
            continue
        fwd.add(u)
        stack.extend(w for w in others if m[w][u] and w not in fwd)
    bwd = set()
    stack = [u for u in others if m[v][u]]
    while stack:
        u = stack.pop()
        if u in bwd:
            continue
        bwd.add(u)
        stack.extend(w for w in others if m[u][w] and w not in bwd)
    core = fwd & bwd
    if not core:
        return min(total, cap)
    # a cycle inside the core gives infinitely many return paths
    color = {}

    def has_cycle(u):
        color[u] = 1
        for w in core:
            if m[w][u]:
                if color.get(w) == 1 or (w not in color and has_cycle(w)):
                    return True
        color[u] = 2
        return False

    if any(u not in color and has_cycle(u) for u in sorted(core)):
        return cap
    # count paths in the DAG: ways[u] = number of paths u -> ... -> v
    ways: dict[int, int] = {}

    def count(u):
        if u in ways:
            return ways[u]
        c = mult(v, u)
        for w in core:
            if m[w][u]:
                c += mult(w, u) * count(w)
        ways[u] = min(c, cap)
        return ways[u]

    for u in core:
        if m[u][v]:
            total += mult(u, v) * count(u)
    return min(total, cap)


def on_cycle(g: LabeledGraph, v: int) -> bool:
    return _first_return_count(g, v, cap=1) >= 1


def condition_K(g: LabeledGraph) -> bool:
    return all(_first_return_count(g, v) >= 2 or not on_cycle(g, v)
               for v in range(len(g.vertices)))


def is_hereditary(g: LabeledGraph, h: set[int]) -> bool:
    # closed under taking sources of incoming edges
    return all(j in h for i in h for j in range(len(g.vertices)) if g.multiplicity[i][j])


def is_saturated(g: LabeledGraph, h: set[int]) -> bool:
    for v in range(len(g.vertices)):
        if v in h or not g.regular[v]:
            continue
        if all(j in h for j in range(len(g.vertices)) if g.multiplicity[v][j]):
            return False
    return True


def hereditary_saturated_sets(g: LabeledGraph) -> list[frozenset[int]]:
    n = len(g.vertices)
    if n > MAX_LATTICE_VERTICES:
        raise GraphError(f"lattice enumeration capped at {MAX_LATTICE_VERTICES} vertices, got {n}")
    out = []
    for mask in range(1 << n):
        h = {i for i in range(n) if mask >> i & 1}
        if is_hereditary(g, h) and is_saturated(g, h):
            out.append(frozenset(h))
    return out


def breaking_vertices(g: LabeledGraph, sets: Sequence[frozenset[int]] | None = None) -> list[tuple[str, frozenset[str]]]:
    """(vertex, H) pairs where the vertex breaks the hereditary saturated set H."""
    if sets is None:
        sets = hereditary_saturated_sets(g)
    out = []
    n = len(g.vertices)
    for h in sets:
        for v in range(n):
            row = g.multiplicity[v]
            inside = sum(row[j] for j in h)
            outside = sum(row[j] for j in range(n) if j not in h)
            if _is_inf(inside) and 0 < outside < INF:
                out.append((g.vertices[v], frozenset(g.vertices[j] for j in h)))
    return out


def supports_two_loops(g: LabeledGraph) -> bool:
    return all(_is_inf(g.multiplicity[i][i]) or g.multiplicity[i][i] >= 2
               for i in range(len(g.vertices)))


def has_sources(g: LabeledGraph) -> bool:
    """A source receives no edges."""
    return any(not any(g.multiplicity[i]) for i in range(len(g.vertices)))


def is_cuntz_krieger(g: LabeledGraph) -> bool:
    return g.is_finite() and not has_sources(g)


def structural_predicates(g: LabeledGraph) -> dict:
    sets = hereditary_saturated_sets(g)
    return {
        "hereditary_saturated_lattice": [sorted(g.vertices[i] for i in h) for h in sets],
        "breaking_vertices": [(v, sorted(h)) for v, h in breaking_vertices(g, sets)],
        "purely_infinite_sufficient": supports_two_loops(g),
        "is_cuntz_krieger": is_cuntz_krieger(g),
        "condition_K": condition_K(g),
        "valid_labeling": labeling_is_valid(g),
        "tight_sufficient": is_tight_sufficient(g),
    }


def graph_report(g: LabeledGraph, lattice: bool = True) -> dict:
    rep = {
        "vertices": len(g.vertices),
        "labeling_valid": labeling_is_valid(g),
        "labeling_violations": [list(e) for e in labeling_violations(g)],
        "tight_sufficient": "tight" if is_tight_sufficient(g) else "unknown",
        "condition_K": condition_K(g),
        "purely_infinite_sufficient": supports_two_loops(g),
        "is_cuntz_krieger": is_cuntz_krieger(g),
        "singular_vertices": [v for v, r in zip(g.vertices, g.regular) if not r],
    }
    if lattice and len(g.vertices) <= MAX_LATTICE_VERTICES:
        sp = structural_predicates(g)
        rep["hereditary_saturated_sets"] = len(sp["hereditary_saturated_lattice"])
        rep["breaking_vertices"] = sp["breaking_vertices"]
    return rep


def find_label_permutation(g: LabeledGraph, h: LabeledGraph) -> list[int] | None:
    """A bijection ``perm`` with ``h`` vertex k corresponding to ``g`` vertex perm[k].

    Backtracking over label-preserving assignments; intended for the small
    graphs this package handles.
    """
    n = len(g.vertices)
    if n != len(h.vertices) or sorted(g.labels) != sorted(h.labels):
        return None
    perm: list[int] = []
    used = [False] * n

    def ok(k):
        j = perm[k]
        for k2 in range(k + 1):
            j2 = perm[k2]
            if h.multiplicity[k][k2] != g.multiplicity[j][j2] or \
                    h.multiplicity[k2][k] != g.multiplicity[j2][j]:
                return False
        return True

    def go(k):
        if k == n:
            return True
        for j in range(n):
            if not used[j] and g.labels[j] == h.labels[k]:
                used[j] = True
                perm.append(j)
                if ok(k) and go(k + 1):
                    return True
                perm.pop()
                used[j] = False
        return False

    return perm if go(0) else None


def random_graph(space: FiniteT0Space, rng, max_vertices: int = 6, max_mult: int = 4,
                 per_point: tuple[int, int] = (1, 2), tight: bool = True,
                 singular_prob: float = 0.0) -> LabeledGraph:
    """A random valid labeled graph in which every vertex supports two loops.

    With ``tight`` every block between comparable labels gets a nonzero entry.
    ``singular_prob`` turns vertices into infinite receivers.
    """
    pts = list(space.linear_extension())
    counts = [rng.randint(*per_point) for _ in pts]
    while sum(counts) > max_vertices and max(counts) > 1:
        counts[counts.index(max(counts))] -= 1
    labels = [p for p, c in zip(pts, counts) for _ in range(c)]
    n = len(labels)
    sing = [rng.random() < singular_prob for _ in range(n)]
    mult = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            li, lj = labels[i], labels[j]
            if sing[i] and space.leq(li, lj):
                mult[i][j] = INF
            elif i == j:
                mult[i][j] = rng.randint(2, max(2, max_mult))
            elif li == lj:
                mult[i][j] = rng.randint(0, 2)
            elif space.lt(li, lj):
                mult[i][j] = rng.randint(0, min(2, max_mult))
    if tight:
        for y in space.points:
            for z in space.points:
                if not space.lt(y, z):
                    continue
                rows = [i for i in range(n) if labels[i] == y]
                cols = [j for j in range(n) if labels[j] == z]
                if rows and cols and not any(mult[i][j] for i in rows for j in cols):
                    mult[rng.choice(rows)][rng.choice(cols)] = 1
    return LabeledGraph.build(space, [f"v{i}" for i in range(n)], labels, mult)
