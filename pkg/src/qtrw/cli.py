"""Command-line front end for .qtrs system files.

Exit codes: 0 = success / check passed, 1 = failure / error, 2 = analysis
inconclusive under the given budget.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .quantale import INF, Value
from .term import Term, term_key
from .qtrs import (
    RewriteSystem,
    confluence_report,
    critical_pairs,
    join_check,
    one_step,
    strongly_closed_check,
    term_graph,
)
from .graded import (
    GradedSystem,
    balanced_check,
    degree_at_position,
    degree_of_variable,
    graded_one_step,
    orthogonality_check,
)
from .search import (
    BUDGET_EXHAUSTED,
    EXACT,
    UNREACHABLE,
    UPPER_BOUND,
    SearchBudget,
    convertibility_distance,
    normalize,
    reduction_distance,
    valley_distance,
)
from .dsl import DslError, parse_system, parse_term
from .term import Variable, positions, subterm_at


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_system(fh.read())


def _base(sysm) -> RewriteSystem:
    return sysm.system if isinstance(sysm, GradedSystem) else sysm


def _parse_weight_arg(text: str) -> Value:
    if text == "inf":
        return INF
    return Fraction(text)


def _budget(args) -> SearchBudget:
    return SearchBudget(
        max_expanded=args.max_expanded,
        max_depth=args.max_depth,
        weight_cutoff=(None if args.weight_cutoff is None
                       else _parse_weight_arg(args.weight_cutoff)),
        max_term_size=args.max_term_size,
    )


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-expanded", type=int, default=20000)
    p.add_argument("--max-depth", type=int, default=50)
    p.add_argument("--weight-cutoff", default=None)
    p.add_argument("--max-term-size", type=int, default=None)


def _cmd_rewrite(args) -> int:
    sysm = _load(args.file)
    base = _base(sysm)
    t = parse_term(args.term, base.signature)
    stepper = graded_one_step if isinstance(sysm, GradedSystem) else one_step
    if args.steps:
        out = []
        cur = t
        for _ in range(args.steps):
            steps = stepper(sysm, cur)
            if not steps:
                break
            step = min(steps, key=lambda s: (len(s.position), s.position,
                                             s.rule_id))
            out.append(step)
            cur = step.target
        if args.json:
            print(json.dumps([
                {"rule": s.rule_id, "position": list(s.position),
                 "weight": str(s.weight), "target": term_key(s.target)}
                for s in out]))
        else:
            for s in out:
                print(f"-[{s.weight}]-> {s.target}   ({s.rule_id} at"
                      f" {list(s.position)})")
            print(f"result: {cur}")
        return 0
    steps = stepper(sysm, t)
    if args.json:
        print(json.dumps([
            {"rule": s.rule_id, "position": list(s.position),
             "weight": str(s.weight), "target": term_key(s.target)}
            for s in steps]))
    else:
        for s in steps:
            print(f"-[{s.weight}]-> {s.target}   ({s.rule_id} at"
                  f" {list(s.position)})")
        if not steps:
            print("normal form")
    return 0


def _cmd_distance(args) -> int:
    sysm = _load(args.file)
    base = _base(sysm)
    s = parse_term(args.source, base.signature)
    t = parse_term(args.target, base.signature)
    fn = {"directed": reduction_distance,
          "convert": convertibility_distance,
          "valley": valley_distance}[args.mode]
    ans = fn(sysm, s, t, _budget(args))
    if args.json:
        print(ans.to_json())
    else:
        val = "-" if ans.value is None else str(ans.value)
        print(f"{ans.kind} {val} ({len(ans.witness)} steps,"
              f" {ans.expanded} expanded)")
    if ans.kind in (EXACT, UPPER_BOUND):
        return 0
    if ans.kind == UNREACHABLE:
        return 1
    return 2


def _cmd_critical_pairs(args) -> int:
    sysm = _load(args.file)
    base = _base(sysm)
    grid = (tuple(Fraction(g) for g in args.grid.split())
            if args.grid else None)
    peaks = critical_pairs(base, grid=grid)
    if args.json:
        print(json.dumps([
            {"source": term_key(p.source),
             "left": term_key(p.left[0]), "left_weight": str(p.left[1]),
             "right": term_key(p.right[0]), "right_weight": str(p.right[1]),
             "position": list(p.position),
             "inner_rule": p.inner_rule, "outer_rule": p.outer_rule}
            for p in peaks]))
    else:
        for p in peaks:
            print(f"{p.left[0]} <-[{p.left[1]}]- {p.source}"
                  f" -[{p.right[1]}]-> {p.right[0]}"
                  f"   ({p.inner_rule} at {list(p.position)} / {p.outer_rule})")
        print(f"{len(peaks)} critical pair(s)")
    return 0


def _cmd_check(args) -> int:
    sysm = _load(args.file)
    base = _base(sysm)
    gsys = sysm if isinstance(sysm, GradedSystem) else GradedSystem(base)
    seeds = [parse_term(s, base.signature) for s in (args.seed or [])]
    result: Dict[str, object]
    code: int

    if args.what == "local-confluence":
        peaks = critical_pairs(base)
        verdicts = [join_check(base, p, args.depth) for p in peaks]
        joinable = sum(v.kind == "joinable" for v in verdicts)
        result = {"peaks": len(peaks), "joinable": joinable}
        code = 0 if joinable == len(peaks) else 2
    elif args.what == "strong-closure":
        peaks = critical_pairs(base)
        verdicts = [strongly_closed_check(base, p, args.depth) for p in peaks]
        closed = sum(v.holds for v in verdicts)
        result = {"peaks": len(peaks), "strongly_closed": closed}
        code = 0 if closed == len(peaks) else 1
    elif args.what == "orthogonal":
        ok, evidence = orthogonality_check(gsys)
        result = {"orthogonal": ok, **{k: (list(v) if isinstance(v, tuple)
                                           else v)
                                       for k, v in evidence.items()}}
        code = 0 if ok else 1
    elif args.what == "balanced":
        entries = balanced_check(gsys)
        bad = [e for e in entries if not e.balanced]
        result = {
            "rules_checked": len(entries),
            "unbalanced": [
                {"rule": e.rule_id, "variable": e.variable,
                 "lhs": str(e.lhs_degree), "rhs": str(e.rhs_degree)}
                for e in bad],
            "sampled": any(e.sampled for e in entries),
        }
        code = 0 if not bad else 1
    elif args.what == "sn-probe":
        if not seeds:
            print("sn-probe needs at least one --seed term", file=_sys.stderr)
            return 2
        rel, exhausted = term_graph(base, seeds, args.max_terms)
        if not rel.strongly_normalizing_check():
            result = {"sn": "cycle found"}
            code = 1
        elif exhausted:
            result = {"sn": "passes on explored", "terms": len(rel.carrier)}
            code = 0
        else:
            result = {"sn": "inconclusive (truncated)",
                      "terms": len(rel.carrier)}
            code = 2
    elif args.what == "confluence-report":
        report = confluence_report(base, seeds, depth_budget=args.depth,
                                   sn_max_terms=args.max_terms)
        result = {"certificate": report.certificate,
                  "evidence": {k: (list(v) if isinstance(v, tuple) else v)
                               for k, v in report.evidence.items()}}
        code = 0 if report.certificate != "inconclusive" else 2
    else:  # pragma: no cover - argparse restricts choices
        return 1

    if args.json:
        print(json.dumps(result))
    else:
        for k, v in result.items():
            print(f"{k}: {v}")
        print({0: "pass", 1: "fail", 2: "inconclusive"}[code])
    return code


def _cmd_graph(args) -> int:
    sysm = _load(args.file)
    base = _base(sysm)
    t = parse_term(args.term, base.signature)
    stepper = graded_one_step if isinstance(sysm, GradedSystem) else one_step
    q = base.quantale
    nodes: Dict[str, Term] = {term_key(t): t}
    edges: Dict[Tuple[str, str], Value] = {}
    frontier = [t]
    for _ in range(args.depth):
        nxt: List[Term] = []
        for term in frontier:
            for step in stepper(sysm, term):
                sk, tk = term_key(term), term_key(step.target)
                if tk not in nodes:
                    nodes[tk] = step.target
                    nxt.append(step.target)
                old = edges.get((sk, tk))
                edges[(sk, tk)] = (step.weight if old is None
                                   else q.join2(old, step.weight))
        frontier = nxt
    from .qrel import FiniteQRel
    rel = FiniteQRel.make(sorted(nodes), edges, q)
    if args.dot:
        print(rel.to_dot(name="rewriting"))
    else:
        print(rel.to_text())
    return 0


def _cmd_degree(args) -> int:
    sysm = _load(args.file)
    base = _base(sysm)
    gsys = sysm if isinstance(sysm, GradedSystem) else GradedSystem(base)
    t = parse_term(args.term, base.signature)
    sig = gsys.signature
    occ = [p for p in positions(t)
           if isinstance(subterm_at(t, p), Variable)
           and subterm_at(t, p).name == args.var]
    rows = [(p, degree_at_position(sig, t, p)) for p in occ]
    total = degree_of_variable(sig, t, args.var)
    if args.json:
        print(json.dumps({
            "variable": args.var,
            "positions": [{"position": list(p), "degree": str(d)}
                          for p, d in rows],
            "degree": str(total)}))
    else:
        for p, d in rows:
            print(f"position {list(p)}: {d}")
        print(f"degree of {args.var}: {total}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qtrw",
        description="Quantitative term rewriting: rewrite, measure, certify.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rewrite", help="enumerate or trace rewrite steps")
    p.add_argument("file")
    p.add_argument("term")
    p.add_argument("--steps", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_rewrite)

    p = sub.add_parser("distance", help="distance queries between two terms")
    p.add_argument("file")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--mode", choices=["directed", "convert", "valley"],
                   default="convert")
    _add_budget_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_distance)

    p = sub.add_parser("critical-pairs", help="enumerate critical peaks")
    p.add_argument("file")
    p.add_argument("--grid", default=None,
                   help="space-separated rationals overriding the file grid")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_critical_pairs)

    p = sub.add_parser("check", help="run a confluence/structure analysis")
    p.add_argument("file")
    p.add_argument("--what", required=True, choices=[
        "local-confluence", "strong-closure", "orthogonal", "balanced",
        "sn-probe", "confluence-report"])
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--max-terms", type=int, default=2000)
    p.add_argument("--seed", action="append")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("graph", help="export the bounded reduction graph")
    p.add_argument("file")
    p.add_argument("term")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--dot", action="store_true")
    p.set_defaults(fn=_cmd_graph)

    p = sub.add_parser("degree", help="variable sensitivity report")
    p.add_argument("file")
    p.add_argument("term")
    p.add_argument("var")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_degree)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (DslError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
