"""Command-line front end.

Exit codes: 0 success or definite verdict, 1 internal error, 2 invalid input
or unmet precondition, 3 unknown verdict or exhausted search budget.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from pathlib import Path

from . import finspace
from .finspace import FiniteT0Space, SpaceError
from .fk import SelfCheckError, compute_fk, permutation_iso, unit_class
from .graphcore import (
    GraphError, LabeledGraph, find_label_permutation, graph_report, is_cuntz_krieger,
    is_tight_sufficient, labeling_violations, random_graph, supports_two_loops,
)
from .realize import (
    DEFAULT_BUDGET, RealizationError, output_checks, realize_module, realize_unital,
)
from .rmod import (
    ModuleError, PointedRModule, RModule, cover_isomorphism_holds, exactness_report,
    find_isomorphism, range_check, refute_by_invariants, verify_module_iso, verify_relations,
)
from .zlattice import LatticeError

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2, 3
DEFAULT_SEED = 0
SEARCH_BUDGET = 2

BUILTIN_SPACES = {
    "point": lambda: finspace.chain(1),
    "chain2": lambda: finspace.chain(2),
    "chain3": lambda: finspace.chain(3),
    "diamond": finspace.diamond,
    "antichain2": lambda: finspace.antichain(2),
}


class InputError(Exception):
    pass


# -- file handling -----------------------------------------------------------


def _sha(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_space(arg: str | None) -> FiniteT0Space | None:
    if arg is None:
        return None
    if arg in BUILTIN_SPACES and not os.path.exists(arg):
        return BUILTIN_SPACES[arg]()
    try:
        return FiniteT0Space.from_dict(_read_json(arg))
    except (KeyError, TypeError) as exc:
        raise InputError(f"{arg}: malformed space file ({exc})") from None


def load_graph(path: str, space: FiniteT0Space | None) -> LabeledGraph:
    d = _read_json(path)
    if space is None and isinstance(d.get("space"), str):
        base = Path(path).parent
        space = load_space(str(base / d["space"]))
    try:
        return LabeledGraph.from_dict(d, space)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (GraphError, SpaceError)):
            raise
        raise InputError(f"{path}: malformed graph file ({exc})") from None


def load_module(path: str, space: FiniteT0Space | None, unital: bool):
    d = _read_json(path)
    try:
        if unital:
            return PointedRModule.from_dict(d, space)
        return RModule.from_dict(d, space)
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: malformed module file (missing or bad entry {exc})") from None


def _write(path: str, data: dict):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _require_valid_labels(g: LabeledGraph, path: str):
    bad = labeling_violations(g)
    if bad:
        s, r = bad[0]
        raise InputError(f"{path}: edge from {s!r} to {r!r} goes against the order of labels "
                         f"({len(bad)} such edge{'s' if len(bad) > 1 else ''})")


# -- commands ----------------------------------------------------------------


def cmd_fk(args, report):
    sp = load_space(args.space)
    g = load_graph(args.graph, sp)
    report["inputs"][args.graph] = _sha(args.graph)
    _require_valid_labels(g, args.graph)
    check = not args.no_self_check
    m = compute_fk(g, check)
    if args.unital:
        p = unit_class(g, m, check)
        out = p.to_dict()
        report["verdicts"]["unit_class"] = list(p.unit_class())
    else:
        out = m.to_dict()
    if args.check:
        rv = range_check(m)
        report["verdicts"]["exact"] = rv.exact
        report["verdicts"]["range"] = rv.to_dict()
    report["verdicts"]["groups"] = {
        f"{k}({x})": _fmt_group(m.groups[(k, x)]) for k, x in m.slots()}
    if args.output:
        _write(args.output, out)
        report["outputs"] = [args.output]
    else:
        report["module"] = out
    return EXIT_OK


def _fmt_group(g) -> str:
    parts = [f"Z/{d}" for d in g.invariant_factors] + ["Z"] * g.free_rank
    return " + ".join(parts) or "0"


def _scope(g: LabeledGraph) -> str | None:
    if not is_cuntz_krieger(g):
        return "not a Cuntz-Krieger graph (needs finitely many edges and no sources)"
    if not supports_two_loops(g):
        return "some vertex does not support two loops"
    if not is_tight_sufficient(g):
        return "tightness criterion fails (a block between comparable labels is zero)"
    return None


def cmd_classify(args, report):
    sp = load_space(args.space)
    ga = load_graph(args.graph_a, sp)
    gb = load_graph(args.graph_b, sp or ga.space)
    for p in (args.graph_a, args.graph_b):
        report["inputs"][p] = _sha(p)
    _require_valid_labels(ga, args.graph_a)
    _require_valid_labels(gb, args.graph_b)
    if ga.space.points != gb.space.points or ga.space.covers != gb.space.covers:
        raise InputError("the two graphs are labeled over different spaces")
    for name, g in ((args.graph_a, ga), (args.graph_b, gb)):
        why = _scope(g)
        if why:
            report["verdicts"] = {"verdict": "out-of-theorem-scope", "graph": name,
                                  "failing_predicate": why}
            return EXIT_INPUT
    check = not args.no_self_check
    ma, mb = compute_fk(ga, check), compute_fk(gb, check)
    hint = None
    perm = find_label_permutation(ga, gb)
    if perm is not None:
        hint = permutation_iso(ga, gb, perm, ma, mb)
    budget = args.budget if args.budget is not None else SEARCH_BUDGET
    res = find_isomorphism(ma, mb, budget, witness_hint=hint)
    out = {"verdict": "unknown", "witness": None, "refuting_invariant": None}
    if res.kind == "iso":
        if not verify_module_iso(ma, mb, res.iso):
            raise SelfCheckError("witness failed independent verification")
        out["verdict"] = "stably_isomorphic"
        out["witness"] = res.iso.to_dict()
    elif res.kind == "not_isomorphic":
        exhaustive = (res.reason or "").startswith("exhaustive")
        if not exhaustive and refute_by_invariants(ma, mb) is None:
            raise SelfCheckError("refuting invariant failed re-verification")
        out["verdict"] = "distinct"
        out["refuting_invariant"] = res.reason
    else:
        out["reason"] = res.reason
    report["verdicts"] = out
    return EXIT_UNKNOWN if out["verdict"] == "unknown" else EXIT_OK


def cmd_realize(args, report):
    sp = load_space(args.space)
    mod = load_module(args.module, sp, args.unital)
    report["inputs"][args.module] = _sha(args.module)
    budget = args.budget if args.budget is not None else DEFAULT_BUDGET
    check = not args.no_self_check
    try:
        if args.unital:
            cert = realize_unital(mod, budget, self_check=check)
        else:
            cert = realize_module(mod, budget, self_check=check)
    except RealizationError as exc:
        report["verdicts"] = {"realized": False, "reason": exc.kind, "message": str(exc),
                              "point": exc.point}
        if exc.kind == "budget":
            return EXIT_UNKNOWN
        if exc.kind == "unsupported":
            report["verdicts"]["verdict"] = "unsupported"
        return EXIT_INPUT
    if not cert.verified:
        raise SelfCheckError("realization certificate failed verification")
    report["verdicts"] = {"realized": True, "certificate_verified": True,
                          "vertices": len(cert.graph.vertices),
                          "checks": output_checks(cert, finite=not args.unital),
                          "singular_vertices": [v for v, r in zip(cert.graph.vertices, cert.graph.regular)
                                                if not r]}
    if args.unital:
        report["verdicts"]["unit_preserved"] = cert.unit_ok
    outputs = []
    if args.output:
        _write(args.output, cert.graph.to_dict())
        outputs.append(args.output)
    else:
        report["graph"] = cert.graph.to_dict()
    if args.certificate:
        _write(args.certificate, cert.to_dict())
        outputs.append(args.certificate)
    report["outputs"] = outputs
    return EXIT_OK


def cmd_check_module(args, report):
    sp = load_space(args.space)
    mod = load_module(args.module, sp, args.unital)
    report["inputs"][args.module] = _sha(args.module)
    m = mod.module if args.unital else mod
    rel = verify_relations(m)
    ex = exactness_report(m)
    rv = range_check(m)
    failing = [f"{name} at {x}" for x, name, ok in ex if not ok]
    report["verdicts"] = {
        "relations": rel, "exact": not failing, "failing_sequences": failing,
        "range": rv.to_dict(),
        "cover_isomorphisms": [{"cover": [y, x], "isomorphism": ok}
                               for y, x, ok in cover_isomorphism_holds(m)],
    }
    if args.unital:
        report["verdicts"]["unit_class"] = list(mod.unit_class())
    ok = rel and not failing and all(rv.k1_free.values())
    return EXIT_OK if ok else EXIT_INPUT


def cmd_check_graph(args, report):
    sp = load_space(args.space)
    g = load_graph(args.graph, sp)
    report["inputs"][args.graph] = _sha(args.graph)
    rep = graph_report(g)
    report["verdicts"] = rep
    return EXIT_OK if rep["labeling_valid"] else EXIT_INPUT


def cmd_roundtrip(args, report):
    sp = load_space(args.space or "chain2")
    rng = random.Random(args.seed)
    budget = args.budget if args.budget is not None else DEFAULT_BUDGET
    check = not args.no_self_check
    counts = {"certified": 0, "budget_exhausted": 0, "certificate_failed": 0}
    entries = []
    for i in range(args.count):
        g = random_graph(sp, rng, singular_prob=0.3 if args.unital else 0.0)
        try:
            if args.unital:
                cert = realize_unital(unit_class(g, self_check=check), budget, self_check=check)
            else:
                cert = realize_module(compute_fk(g, check), budget, self_check=check)
        except RealizationError as exc:
            if exc.kind != "budget":
                raise
            counts["budget_exhausted"] += 1
            entries.append({"index": i, "status": "budget_exhausted", "message": str(exc)})
            continue
        key = "certified" if cert.verified else "certificate_failed"
        counts[key] += 1
        entries.append({"index": i, "status": key, "vertices": len(cert.graph.vertices)})
    report["verdicts"] = {"space": sp.to_dict(), "count": args.count, **counts, "entries": entries}
    if counts["certificate_failed"]:
        return EXIT_INTERNAL
    return EXIT_UNKNOWN if counts["budget_exhausted"] else EXIT_OK


# -- argument parsing ----------------------------------------------------------


def _common(defaults: bool) -> argparse.ArgumentParser:
    # defaults only on the top-level parser so flags work before or after the subcommand
    sup = None if defaults else argparse.SUPPRESS
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--space", default=sup, help="space file (or builtin: %s)" % ", ".join(BUILTIN_SPACES))
    p.add_argument("--budget", type=int, default=sup,
                   help=f"search bound (realize default {DEFAULT_BUDGET}, classify default {SEARCH_BUDGET})")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED if defaults else sup)
    p.add_argument("--no-self-check", action="store_true", default=False if defaults else sup,
                   help="skip internal exactness and relation checks")
    p.add_argument("--json", action="store_true", default=False if defaults else sup,
                   help="print the run report as JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fkrange", parents=[_common(True)],
        description="Filtered K-theory of labeled graphs over finite T0-spaces.")
    sub = ap.add_subparsers(dest="command", required=True)
    common = _common(False)

    p = sub.add_parser("fk", parents=[common], help="compute the invariant of a graph")
    p.add_argument("graph")
    p.add_argument("--unital", action="store_true", help="include the unit class")
    p.add_argument("--check", action="store_true", help="run exactness and range checks")
    p.add_argument("-o", "--output", help="write the module file here")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("classify", parents=[common], help="compare two graphs up to stable isomorphism")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("realize", parents=[common], help="build a graph with a given invariant")
    p.add_argument("module")
    p.add_argument("--unital", action="store_true", help="module file carries a unit")
    p.add_argument("-o", "--output", help="write the graph file here")
    p.add_argument("--certificate", help="write the certificate file here")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("check-module", parents=[common], help="relations, exactness and range conditions")
    p.add_argument("module")
    p.add_argument("--unital", action="store_true")
    p.set_defaults(func=cmd_check_module)

    p = sub.add_parser("check-graph", parents=[common], help="structural predicates of a graph")
    p.add_argument("graph")
    p.set_defaults(func=cmd_check_graph)

    p = sub.add_parser("roundtrip", parents=[common], help="realize invariants of random graphs")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--unital", action="store_true")
    p.set_defaults(func=cmd_roundtrip)
    return ap


def _print_human(report: dict, out):
    print(f"command: {report['command']} (seed {report['seed']})", file=out)
    for path, h in report["inputs"].items():
        print(f"input {path}: sha256 {h[:16]}", file=out)
    v = report.get("verdicts", {})
    for k, val in v.items():
        if isinstance(val, (dict, list)) and k not in ("groups",):
            val = json.dumps(val, sort_keys=True)
        if k == "groups":
            for slot, grp in val.items():
                print(f"  {slot} = {grp}", file=out)
            continue
        print(f"{k}: {val}", file=out)
    if "error" in report:
        print(f"error: {report['error']}", file=out)
    for key in ("module", "graph"):
        if key in report:
            print(json.dumps(report[key], indent=2, sort_keys=True), file=out)
    print(f"elapsed: {report['timings']['total_s']:.3f}s", file=out)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    report = {"command": args.command, "seed": args.seed, "inputs": {}, "verdicts": {},
              "timings": {}}
    t0 = time.perf_counter()
    try:
        code = args.func(args, report)
    except (InputError, SpaceError, GraphError, ModuleError) as exc:
        report["error"] = str(exc)
        code = EXIT_INPUT
    except (SelfCheckError, LatticeError) as exc:
        report["error"] = f"internal: {exc}"
        code = EXIT_INTERNAL
    report["exit_code"] = code
    report["timings"]["total_s"] = time.perf_counter() - t0
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        _print_human(report, sys.stdout if code in (EXIT_OK, EXIT_UNKNOWN) else sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
