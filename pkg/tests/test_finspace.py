import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fkrange.finspace import (
    FiniteT0Space, SpaceError, all_labeled_spaces, antichain, chain, diamond,
)

SMALL_SPACES = [s for n in range(1, 4) for s in all_labeled_spaces(n)]


def test_leq_examples():
    c = chain(2)
    assert c.leq("1", "1")
    assert c.leq("1", "2") and not c.leq("2", "1")
    a = antichain(2)
    assert not a.leq("a1", "a2") and not a.leq("a2", "a1")


def test_unknown_point():
    with pytest.raises(SpaceError):
        chain(2).leq("1", "9")


def test_rejects_cycles_and_redundant_covers():
    with pytest.raises(SpaceError, match="cycle"):
        FiniteT0Space.build(["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(SpaceError, match="witness '2'"):
        FiniteT0Space.build(["1", "2", "3"], [("2", "1"), ("3", "2"), ("3", "1")])
    with pytest.raises(SpaceError, match="at most"):
        FiniteT0Space.build([str(i) for i in range(9)], [])


def test_open_boundary_is_union_over_covers():
    for sp in SMALL_SPACES + [diamond(), chain(4)]:
        for x in sp.points:
            union = set()
            for y in sp.covers_of(x):
                union |= set(sp.smallest_open([y]))
            assert set(sp.open_boundary([x])) == union


def test_covers_are_minimal_points_of_boundary():
    for sp in SMALL_SPACES + [diamond()]:
        for x in sp.points:
            bd = sp.open_boundary([x])
            minimal = {y for y in bd if not any(sp.lt(z, y) for z in bd)}
            assert minimal == set(sp.covers_of(x))


def test_closure_and_open_examples():
    c = chain(3)
    assert c.closure(["1"]) == ("1",)
    assert c.smallest_open(c.points) == c.points
    assert c.smallest_open(["2"]) == ("2", "3")
    assert c.closure(["2"]) == ("1", "2")
    assert c.closed_boundary(["2"]) == ("1",)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SMALL_SPACES + [diamond()]), st.data())
def test_closure_operators_idempotent_monotone(sp, data):
    s = data.draw(st.sets(st.sampled_from(sp.points)))
    t = s | data.draw(st.sets(st.sampled_from(sp.points)))
    for op in (sp.closure, sp.smallest_open):
        assert op(op(s)) == op(s)
        assert set(op(s)) <= set(op(t))
    # order reversal swaps the two operators
    rev = FiniteT0Space.build(sp.points, [(x, y) for y, x in sp.covers])
    assert set(rev.closure(s)) == set(sp.smallest_open(s))


def test_paths_examples():
    c = chain(2)
    assert c.paths("2", "1") == [("1", "2")]
    assert c.paths("1", "1") == [("1",)]
    assert c.paths("1", "2") == []
    assert len(diamond().paths("t", "b")) == 2


def test_paths_match_transitive_closure():
    for sp in SMALL_SPACES + [diamond()]:
        # Warshall closure computed independently of the space's own
        rel = {(x, x) for x in sp.points} | {(x, y) for y, x in sp.covers}
        for k in sp.points:
            for i in sp.points:
                for j in sp.points:
                    if (i, k) in rel and (k, j) in rel:
                        rel.add((i, j))
        for x in sp.points:
            for y in sp.points:
                assert bool(sp.paths(y, x)) == ((x, y) in rel) == sp.leq(x, y)


def test_double_paths():
    assert chain(3).double_paths("1") == []
    assert antichain(2).double_paths("a1") == []
    dps = diamond().double_paths("b")
    assert len(dps) == 1
    p, q, s = dps[0]
    assert s == "t" and {p[1], q[1]} == {"m1", "m2"}


def test_inf_set():
    c = chain(2)
    assert c.inf_set("1", "1") == ("2",)
    assert diamond().inf_set("m1", "m2") == ("t",)
    assert antichain(2).inf_set("a1", "a2") == ()


def test_open_point_sequence_examples():
    one = chain(1)
    assert one.open_point_sequence() == [("1", ("1",), ("1",))]
    c = chain(2)
    assert c.open_point_sequence() == [("2", ("2",), ()), ("1", ("1", "2"), ("1", "2"))]
    a = antichain(2)
    assert all(u == cc for _, u, cc in a.open_point_sequence())


def test_open_point_sequence_properties():
    for sp in SMALL_SPACES + [diamond()]:
        seen = set()
        for x, u, c in sp.open_point_sequence():
            assert x in sp.open_points(set(sp.points) - seen)
            seen.add(x)
            assert set(u) == seen and sp.is_open(u)
            largest = {p for p in u if set(sp.closure([p])) <= set(u)}
            assert sp.is_closed(c) and set(c) == largest


def test_lowest_identifier_rule():
    sp = FiniteT0Space.build(["z", "a"], [])
    assert sp.linear_extension() == ("a", "z")


def test_json_roundtrip(tmp_path):
    d = diamond()
    p = tmp_path / "s.json"
    p.write_text(json.dumps(d.to_dict()))
    assert FiniteT0Space.load(p) == d


def test_locally_closed():
    c = chain(3)
    assert c.is_locally_closed(["2"])
    assert not c.is_locally_closed(["1", "3"])
    assert all(c.is_locally_closed(o) for o in c.opens())
