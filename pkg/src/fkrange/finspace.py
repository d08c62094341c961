"""Finite T0-spaces presented by their cover relation.

``y -> x`` means ``x < y`` with nothing strictly between.  Closed sets are
down-sets of the specialization order and open sets are up-sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

MAX_POINTS = 8


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteT0Space:
    points: tuple[str, ...]
    covers: frozenset[tuple[str, str]]

    def __post_init__(self):
        pts = set(self.points)
        if len(pts) != len(self.points):
            raise SpaceError("duplicate point identifiers")
        if len(self.points) > MAX_POINTS:
            raise SpaceError(f"at most {MAX_POINTS} points supported, got {len(self.points)}")
        for y, x in self.covers:
            if y not in pts or x not in pts:
                raise SpaceError(f"cover ({y!r}, {x!r}) names an unknown point")
            if y == x:
                raise SpaceError(f"cover ({y!r}, {x!r}) is a self-loop")
        # acyclicity: the closure must be antisymmetric
        for x in self.points:
            if x in self._above_strict[x]:
                raise SpaceError(f"cover relation has a cycle through {x!r}")
        for y, x in sorted(self.covers):
            for z in self.points:
                if z in self._above_strict[x] and y in self._above_strict[z]:
                    raise SpaceError(
                        f"cover ({y!r}, {x!r}) is transitively redundant: witness {z!r} "
                        f"satisfies {x!r} < {z!r} < {y!r}")

    @classmethod
    def build(cls, points: Sequence[str], covers: Iterable[Sequence[str]]) -> "FiniteT0Space":
        return cls(tuple(str(p) for p in points), frozenset((str(y), str(x)) for y, x in covers))

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteT0Space":
        return cls.build(d["points"], d.get("covers", []))

    @classmethod
    def load(cls, path) -> "FiniteT0Space":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {"points": list(self.points),
                "covers": [list(c) for c in sorted(self.covers, key=self._cover_key)]}

    def _cover_key(self, c):
        return (self.index[c[0]], self.index[c[1]])

    @cached_property
    def index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def _above_strict(self) -> dict[str, frozenset[str]]:
        up = {p: set() for p in self.points}
        for y, x in self.covers:
            up[x].add(y)
        # transitive closure by repeated expansion; at most MAX_POINTS rounds
        changed = True
        guard = 0
        while changed and guard <= len(self.points) + 1:
            changed = False
            guard += 1
            for p in self.points:
                new = set(up[p])
                for q in up[p]:
                    new |= up[q]
                if new != up[p]:
                    up[p] = new
                    changed = True
        return {p: frozenset(s) for p, s in up.items()}

    def _check(self, *pts: str):
        for p in pts:
            if p not in self.index:
                raise SpaceError(f"unknown point {p!r}")

    def leq(self, x: str, y: str) -> bool:
        self._check(x, y)
        return x == y or y in self._above_strict[x]

    def lt(self, x: str, y: str) -> bool:
        return x != y and self.leq(x, y)

    def covers_of(self, x: str) -> list[str]:
        """Points y with y -> x, in point order."""
        self._check(x)
        return [y for y in self.points if (y, x) in self.covers]

    def covered_by(self, y: str) -> list[str]:
        self._check(y)
        return [x for x in self.points if (y, x) in self.covers]

    def _sorted(self, s: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(set(s), key=self.index.__getitem__))

    # -- open/closed calculus --------------------------------------------

    def smallest_open(self, s: Iterable[str]) -> tuple[str, ...]:
        s = set(s)
        return self._sorted(s | {y for x in s for y in self._above_strict[x]})

    def closure(self, s: Iterable[str]) -> tuple[str, ...]:
        s = set(s)
        return self._sorted(p for p in self.points if p in s or self._above_strict[p] & s)

    def open_boundary(self, s: Iterable[str]) -> tuple[str, ...]:
        s = set(s)
        return self._sorted(set(self.smallest_open(s)) - s)

    def closed_boundary(self, s: Iterable[str]) -> tuple[str, ...]:
        s = set(s)
        return self._sorted(set(self.closure(s)) - s)

    def is_open(self, s: Iterable[str]) -> bool:
        s = set(s)
        return set(self.smallest_open(s)) == s

    def is_closed(self, s: Iterable[str]) -> bool:
        s = set(s)
        return set(self.closure(s)) == s

    def is_locally_closed(self, s: Iterable[str]) -> bool:
        # U \ V with U the smallest open containing s and V = U \ s
        s = set(s)
        u = set(self.smallest_open(s))
        return self.is_open(u - s)

    def closed_points(self) -> tuple[str, ...]:
        return self._sorted(p for p in self.points if not any(
            p in self._above_strict[q] for q in self.points))

    def open_points(self, within: Iterable[str] | None = None) -> tuple[str, ...]:
        """Points open in the subspace ``within``: maximal elements there."""
        w = set(self.points if within is None else within)
        return self._sorted(p for p in w if not (self._above_strict[p] & w))

    def opens(self) -> list[tuple[str, ...]]:
        out = []
        n = len(self.points)
        for mask in range(1 << n):
            s = {self.points[i] for i in range(n) if mask >> i & 1}
            if self.is_open(s):
                out.append(self._sorted(s))
        return out

    def linear_extension(self) -> tuple[str, ...]:
        """Points ordered so that larger points come first (open points first)."""
        return tuple(x for x, _, _ in self.open_point_sequence())

    @cached_property
    def rank(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.linear_extension())}

    # -- paths --------------------------------------------------------------

    def paths(self, y: str, x: str) -> list[tuple[str, ...]]:
        """All sequences (x = z1, ..., zn = y) with z_{k+1} -> z_k."""
        self._check(x, y)
        out: list[tuple[str, ...]] = []

        def walk(prefix):
            last = prefix[-1]
            if last == y:
                out.append(tuple(prefix))
                return
            for z in self.covers_of(last):
                if self.leq(z, y):
                    walk(prefix + [z])

        if self.leq(x, y):
            walk([x])
        return out

    def double_paths(self, x: str) -> list[tuple[tuple[str, ...], tuple[str, ...], str]]:
        """Unordered pairs of distinct paths into ``x`` from a common start."""
        out = []
        for s in self.points:
            if s == x or not self.leq(x, s):
                continue
            for p, q in combinations(self.paths(s, x), 2):
                out.append((p, q, s))
        return out

    def inf_set(self, x: str, x2: str) -> tuple[str, ...]:
        self._check(x, x2)
        return self._sorted(y for y in self.points if (y, x) in self.covers and (y, x2) in self.covers)

    def open_point_sequence(self, order: Sequence[str] | None = None
                            ) -> list[tuple[str, tuple[str, ...], tuple[str, ...]]]:
        """Add one open point of the complement at a time.

        Returns ``(x_k, U_k, C_k)`` where ``C_k`` is the largest subset of
        ``U_k`` closed in the whole space.  By default the candidate with the
        lowest identifier is chosen; ``order`` supplies a preference list.
        """
        pref = sorted(self.points) if order is None else list(order)
        if sorted(pref) != sorted(self.points):
            raise SpaceError("order must list every point exactly once")
        u: set[str] = set()
        out = []
        closed = self.closed_points()
        while len(u) < len(self.points):
            cand = set(self.open_points(set(self.points) - u))
            x = next(p for p in pref if p in cand)
            u.add(x)
            outside = set()
            for y in closed:
                if y not in u:
                    outside |= set(self.smallest_open([y]))
            c = self._sorted(set(self.points) - outside)
            out.append((x, self._sorted(u), c))
        return out

    def is_valid_order(self, order: Sequence[str]) -> bool:
        seen: set[str] = set()
        for x in order:
            if self._above_strict[x] - seen:
                return False
            seen.add(x)
        return True


def chain(n: int) -> FiniteT0Space:
    """Points "1".."n" with k+1 -> k."""
    pts = [str(i) for i in range(1, n + 1)]
    return FiniteT0Space.build(pts, [(pts[i + 1], pts[i]) for i in range(n - 1)])


def diamond() -> FiniteT0Space:
    """Top t above two middles above a bottom b."""
    return FiniteT0Space.build(["t", "m1", "m2", "b"],
                               [("t", "m1"), ("t", "m2"), ("m1", "b"), ("m2", "b")])


def antichain(n: int) -> FiniteT0Space:
    return FiniteT0Space.build([f"a{i}" for i in range(1, n + 1)], [])


def all_labeled_spaces(n: int) -> list[FiniteT0Space]:
    """Every T0 structure on points "0".."n-1" (labeled, not up to isomorphism)."""
    pts = [str(i) for i in range(n)]
    pairs = [(a, b) for a in pts for b in pts if a != b]
    out = []
    seen = set()
    for mask in range(1 << len(pairs)):
        cov = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        try:
            sp = FiniteT0Space.build(pts, cov)
        except SpaceError:
            continue
        key = frozenset(sp.covers)
        if key not in seen:
            seen.add(key)
            out.append(sp)
    return out
