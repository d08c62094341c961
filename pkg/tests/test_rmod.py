import json
import random

import pytest

from fkrange.finspace import chain, diamond
from fkrange.fk import compute_fk, unit_class
from fkrange.graphcore import LabeledGraph, random_graph
from fkrange.rmod import (
    ModuleError, PointedRModule, RModule, exactness_report, find_isomorphism, identity_iso,
    is_exact, module_invariants, negation_iso, pointed_compare, range_check,
    refute_by_invariants, unit_preserved, verify_module_iso, verify_relations,
)

POINT = chain(1)


def loops(n):
    return LabeledGraph.build(POINT, ["v"], ["1"], [[n]])


def point_module(m1, mdb, mo, delta, iup):
    d = {"space": POINT.to_dict(), "points": {"1": {
        "M1": m1, "Mdb": mdb, "Mo": mo, "delta": delta, "iup": iup, "icov": {}}}}
    return RModule.from_dict(d)


def chain_graph():
    return LabeledGraph.from_blocks(chain(2), ["2", "1"], [[2, 0], [1, 3]])


def diamond_graph():
    sp = diamond()
    labels = list(sp.points)
    ds = [2, 3, 5, 7]
    d = [[ds[i] if i == j else int(sp.leq(labels[i], labels[j])) for j in range(4)]
         for i in range(4)]
    return LabeledGraph.from_blocks(sp, labels, d)


def test_torsion_in_odd_group_out_of_range():
    m = point_module({"torsion": [2]}, {}, {}, [[]], [])
    v = range_check(m)
    assert not v.k1_free["1"]
    assert not v.finite_realizable and not v.unital_realizable


def test_rank_excess_out_of_range():
    m = point_module({"free_rank": 1}, {}, {"torsion": [5]}, [[]], [])
    v = range_check(m)
    assert v.exact and v.k1_free["1"]
    assert v.k1_rank["1"] == 1 and v.quotient_rank["1"] == 0
    assert not v.finite_realizable and not v.unital_realizable
    assert v.to_dict()["countable_realization_exists"]


def test_unital_allows_smaller_odd_rank():
    m = point_module({}, {}, {"free_rank": 1}, [], [])
    v = range_check(m)
    assert v.unital_realizable and not v.finite_realizable


def test_computed_modules_pass_relations():
    for g in (loops(4), chain_graph(), diamond_graph()):
        m = compute_fk(g)
        assert verify_relations(m) and is_exact(m)


def test_perturbed_diamond_breaks_relations():
    m = compute_fk(diamond_graph())
    d = m.to_dict()
    x = m.space.closed_points()[0]
    broken = False
    for y in m.space.covers_of(x):
        e = json.loads(json.dumps(d))
        rows = e["points"][x]["icov"][y]
        e["points"][x]["icov"][y] = [[2 * c for c in r] for r in rows]
        p = RModule.from_dict(e)
        if not verify_relations(p):
            broken = True
    assert broken


def test_enlarged_boundary_breaks_exactness():
    m = compute_fk(chain_graph())
    d = m.to_dict()
    assert d["points"]["1"]["Mdb"] == {"torsion": [2], "free_rank": 0}
    assert d["points"]["1"]["Mo"] == {"torsion": [6], "free_rank": 0}
    d["points"]["1"]["Mdb"] = {"torsion": [4], "free_rank": 0}
    d["points"]["1"]["icov"]["2"] = [[2]]
    d["points"]["1"]["iup"] = [[3]]
    p = RModule.from_dict(d)
    assert all(f.is_well_defined() for _, _, f, _ in p.arrows())
    assert not is_exact(p)
    assert ("1", "covers-onto", False) in exactness_report(p)


def test_bad_matrix_shape():
    m = compute_fk(chain_graph())
    d = m.to_dict()
    d["points"]["1"]["iup"] = [[1, 2]]
    with pytest.raises(ModuleError):
        RModule.from_dict(d)


def test_json_roundtrip():
    m = compute_fk(diamond_graph())
    back = RModule.from_dict(json.loads(m.dumps()))
    cm, _ = m.canonical()
    assert verify_module_iso(cm, back, identity_iso(cm))
    p = unit_class(diamond_graph())
    q = PointedRModule.from_dict(json.loads(json.dumps(p.to_dict())))
    cp, iso = p.canonical()
    assert unit_preserved(p, cp, iso)
    assert cp.unit == q.unit


def test_identity_and_negation():
    m = compute_fk(diamond_graph())
    assert verify_module_iso(m, m, identity_iso(m))
    assert verify_module_iso(m, m, negation_iso(m))
    v = find_isomorphism(m, m)
    assert v.kind == "iso" and verify_module_iso(m, m, v.iso)


def test_different_invariants():
    a, b = compute_fk(loops(3)), compute_fk(loops(4))
    v = find_isomorphism(a, b)
    assert v.kind == "not_isomorphic"
    assert "Z/2" in v.reason and "Z/3" in v.reason
    assert refute_by_invariants(a, a) is None


def test_permuted_presentation_found_at_budget_one():
    rng = random.Random(8)
    for sp in (chain(2), chain(3), diamond()):
        for _ in range(5):
            g = random_graph(sp, rng)
            perm = list(range(len(g.vertices)))
            rng.shuffle(perm)
            m, n = compute_fk(g), compute_fk(g.permuted(perm))
            v = find_isomorphism(m, n, budget=1)
            assert v.kind == "iso" and verify_module_iso(m, n, v.iso)


def test_search_is_symmetric():
    rng = random.Random(3)
    sp = chain(2)
    graphs = [random_graph(sp, rng) for _ in range(6)]
    mods = [compute_fk(g) for g in graphs]
    for a in mods:
        for b in mods:
            assert find_isomorphism(a, b).kind == find_isomorphism(b, a).kind


def test_invariants_listed_per_slot():
    inv = dict(module_invariants(compute_fk(loops(6))))
    assert inv["Mo(1)"] == ((5,), 0)
    assert inv["coker iup(1)"] == ((5,), 0)
    assert inv["M1(1)"] == ((), 0)


def test_pointed_units():
    m = compute_fk(loops(6))
    one = PointedRModule(m, {"1": (1,)})
    two = PointedRModule(m, {"1": (2,)})
    zero = PointedRModule(m, {"1": (0,)})
    assert pointed_compare(one, zero).kind == "not_isomorphic"
    v = pointed_compare(one, two)
    assert v.kind == "iso" and unit_preserved(one, two, v.iso)
    minus = PointedRModule(m, {"1": (-1,)})
    assert unit_preserved(one, minus, negation_iso(m))
    assert not unit_preserved(one, two, identity_iso(m))


def test_pointed_from_dict_needs_unit():
    d = compute_fk(loops(3)).to_dict()
    with pytest.raises(ModuleError):
        PointedRModule.from_dict(d)
