import itertools
import json
import random

import pytest

from fkrange.finspace import chain, diamond
from fkrange.fk import compute_fk, unit_class
from fkrange.graphcore import LabeledGraph
from fkrange.realize import (
    BudgetExhausted, RealizationError, find_connecting, output_checks, random_module,
    random_pointed_module, realize_module, realize_point, realize_unital, scan_matrices,
)
from fkrange.rmod import (
    PointedRModule, RModule, find_isomorphism, unit_preserved, verify_module_iso,
)
from fkrange.zlattice import FgAbGroup, GroupHom, IntMatrix, connecting_data, lower_triangular

POINT = chain(1)


def loops(n):
    return LabeledGraph.build(POINT, ["v"], ["1"], [[n]])


def point_module(m1, mdb, mo, delta, iup):
    d = {"space": POINT.to_dict(), "points": {"1": {
        "M1": m1, "Mdb": mdb, "Mo": mo, "delta": delta, "iup": iup, "icov": {}}}}
    return RModule.from_dict(d)


@pytest.mark.parametrize("tors,free,k1,size", [
    ((), 0, 0, 1),
    ((5,), 0, 0, 1),
    ((2, 4), 0, 0, 2),
    ((), 1, 1, 2),
    ((3,), 2, 2, 5),
])
def test_realize_point(tors, free, k1, size):
    pb = realize_point(k1, FgAbGroup.from_invariants(tors, free))
    assert pb.check() and pb.size == size and all(pb.regular)


def test_realize_point_singular():
    pb = realize_point(0, FgAbGroup.from_invariants((), 2), allow_singular=True)
    assert pb.check() and pb.regular.count(False) == 2
    with pytest.raises(RealizationError) as e:
        realize_point(0, FgAbGroup.free(1))
    assert e.value.kind == "precondition"
    with pytest.raises(RealizationError):
        realize_point(2, FgAbGroup.free(1), allow_singular=True)


def test_scan_order():
    got = [m.tolist() for m in scan_matrices(IntMatrix.of([[1, 0]]), 2)]
    assert got[0] == [[1, 0]]
    assert got[1:3] == [[[2, 0]], [[1, 1]]]
    assert len(got) == 6
    assert len(list(scan_matrices(IntMatrix.of([[0, 0]]), 3, max_candidates=4))) == 4


def _target(a, b, y):
    a, b, y = IntMatrix.of(a), IntMatrix.of(b), IntMatrix.of(y)
    return a, b, connecting_data(a, lower_triangular(a, b, y), b, y)


def _identity_ends(t):
    return {s: GroupHom.identity(getattr(t, s)) for s in ("coker_U", "coker_C", "ker_U", "ker_C")}


def test_connecting_split():
    a, b, t = _target([[2]], [[2]], [[0]])
    r = find_connecting(a, b, t, _identity_ends(t))
    assert r.y.tolist() == [[0]] and r.candidates == 1
    assert r.sequence.coker_Y.invariants == ((2, 2), 0)


def test_connecting_nonsplit():
    a, b, t = _target([[2]], [[2]], [[1]])
    assert t.coker_Y.invariants == ((4,), 0)
    r = find_connecting(a, b, t, _identity_ends(t))
    assert r.y[0, 0] % 2 == 1


def test_connecting_with_floor():
    a, b, t = _target([[2]], [[3]], [[1]])
    r = find_connecting(a, b, t, _identity_ends(t), floor=IntMatrix.of([[1]]))
    assert r.y.tolist() == [[1]]
    assert r.sequence.coker_Y.invariants == ((6,), 0)


def test_connecting_budget_exhausted():
    a, b, t = _target([[2]], [[2]], [[1]])
    with pytest.raises(BudgetExhausted) as e:
        find_connecting(a, b, t, _identity_ends(t), budget=0)
    assert e.value.candidates == 1 and e.value.kind == "budget"


def test_connecting_rejects_bad_end_iso():
    a, b, t = _target([[2]], [[3]], [[0]])
    ends = _identity_ends(t)
    ends["coker_C"] = GroupHom(t.coker_C, t.coker_C, IntMatrix.of([[3]]))
    with pytest.raises(ValueError):
        find_connecting(a, b, t, ends)


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_realize_one_point(n):
    m = compute_fk(loops(n))
    cert = realize_module(m)
    assert cert.verified and verify_module_iso(m, cert.fk_module, cert.iso)
    assert all(output_checks(cert, finite=True).values())


def test_realize_chain_example():
    g = LabeledGraph.from_blocks(chain(2), ["2", "1"], [[2, 0], [1, 3]])
    m = compute_fk(g)
    cert = realize_module(m)
    assert cert.verified and all(output_checks(cert, finite=True).values())
    json.dumps(cert.to_dict())


def test_unsupported_rank():
    m = point_module({}, {}, {"free_rank": 1}, [], [])
    with pytest.raises(RealizationError) as e:
        realize_module(m)
    assert e.value.kind == "unsupported"


def test_torsion_precondition():
    m = point_module({"torsion": [2]}, {}, {}, [[]], [])
    with pytest.raises(RealizationError) as e:
        realize_module(m)
    assert e.value.kind == "precondition"


@pytest.mark.parametrize("n,u", [(4, 0), (4, 2), (6, 0), (6, 3)])
def test_realize_unital_torsion_units(n, u):
    m = compute_fk(loops(n))
    p = PointedRModule(m, {"1": (u,)})
    cert = realize_unital(p)
    assert cert.verified and cert.unit_ok
    q = unit_class(cert.graph, cert.fk_module)
    assert unit_preserved(p, q, cert.iso)
    assert all(output_checks(cert, finite=False).values())


def test_realize_unital_free_strict():
    m = point_module({}, {}, {"free_rank": 1}, [], [])
    for u in (-2, 0, 1, 3):
        cert = realize_unital(PointedRModule(m, {"1": (u,)}))
        assert cert.verified and cert.unit_ok
        assert not all(cert.graph.regular)


def test_deterministic():
    rng = random.Random(21)
    m = random_module(diamond(), rng)
    a, b = realize_module(m), realize_module(m)
    assert a.graph.to_dict() == b.graph.to_dict()


def test_alternate_order_gives_isomorphic_output():
    rng = random.Random(13)
    sp = diamond()
    orders = [o for o in itertools.permutations(sp.points) if sp.is_valid_order(o)]
    assert len(orders) >= 2
    m = random_module(sp, rng)
    first = realize_module(m, order=orders[0])
    second = realize_module(m, order=orders[-1])
    assert first.verified and second.verified
    v = find_isomorphism(first.fk_module, second.fk_module)
    assert v.kind == "iso"


def test_random_pointed_strict():
    rng = random.Random(5)
    p = random_pointed_module(chain(2), rng, strict=True)
    cert = realize_unital(p)
    assert cert.verified and cert.unit_ok
