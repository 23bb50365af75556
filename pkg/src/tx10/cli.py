"""Command-line front end: run, explore, check, hb, bisim, laws.

Exit status: 0 when everything requested holds, 1 when a property or law
verdict fails (the witness is printed), 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from .bisim import BisimGame, replay, weak_bisim
from .explore import CHECKS, TX10, Resilient, check_invariants, explore
from .hb import check_hbi, happens_before
from .heap import GlobalHeap, digest
from .laws import law_suite, report_lines
from .parser import ParseError, parse_program
from .resilient import FailurePolicy, run_trace_res, unlimited
from .step import Done, Running, StepLimit, run_trace, trace_records
from .syntax import erase_labels, show


class UsageError(Exception):
    pass


def _emit(out, records, as_json):
    for rec in records:
        if as_json:
            out.write(json.dumps(rec) + "\n")
        elif isinstance(rec, str):
            out.write(rec + "\n")
        else:
            out.write(" | ".join(f"{k}={v}" for k, v in rec.items()) + "\n")


def _read(path, dynamic=False):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}")
    return parse_program(text, allow_dynamic=dynamic)


def _place_list(text):
    try:
        return frozenset(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad place list {text!r}")


def _schedule(text):
    if text is None:
        return None
    out = []
    for item in text.split(","):
        try:
            i, q = item.split(":")
            out.append((int(i), int(q)))
        except ValueError:
            raise UsageError(f"bad schedule entry {item!r}; expected STEP:PLACE")
    return tuple(out)


def _policy(args):
    candidates = (_place_list(args.fail_places) if args.fail_places
                  else frozenset(range(1, args.places)))
    if 0 in candidates:
        raise UsageError("place 0 never fails")
    if any(q >= args.places for q in candidates):
        raise UsageError("failure candidate outside the configured places")
    return FailurePolicy(args.max_failures, candidates, _schedule(args.fail_schedule))


def _semantics(args):
    # failure options are validated even when they do not apply
    policy = _policy(args)
    if args.semantics == "tx10":
        return TX10
    return Resilient(policy)


def _check_places(program, places):
    from .syntax import AtSimple, At, DynAt, subterms
    for t in subterms(program):
        if isinstance(t, (At, AtSimple, DynAt)) and t.place >= places:
            raise UsageError(f"program uses place {t.place} but only {places} places exist")


# ------------------------------------------------------------------ commands

def cmd_run(args, out):
    program = _read(args.file)
    _check_places(program, args.places)
    sem = _semantics(args)
    policy = "deterministic-first" if args.policy == "deterministic" else "seeded-random"
    try:
        g0 = GlobalHeap.empty(args.places)
        if sem.resilient:
            trace = run_trace_res(program, g0, sem.fp, successors=sem.successors,
                                  policy=policy, seed=args.seed, max_steps=args.max_steps)
        else:
            trace = run_trace(program, g0, policy, args.seed, args.max_steps,
                              successors=sem.successors)
    except StepLimit as err:
        _emit(out, [{"kind": "error", "message": str(err)}], args.json)
        return 1
    recs = trace_records(trace, resilient=sem.resilient)
    if args.json:
        recs = [{"kind": "step", **r} for r in recs]
    final = trace.final
    last = trace.steps[-1].label if trace.steps else None
    summary = {"kind": "final", "status": "done" if isinstance(final, Done) else "running",
               "steps": len(trace.steps), "label": last.kind if last else "-",
               "exc": (last.exc if last else None) or "-", "heap": digest(final.heap)}
    _emit(out, recs + [summary], args.json)
    return 0


def cmd_explore(args, out):
    program = _read(args.file)
    _check_places(program, args.places)
    sem = _semantics(args)
    lts = explore(program, GlobalHeap.empty(args.places), sem, args.depth, args.max_nodes)
    finals = sorted({digest(k.heap) for k in lts.nodes if isinstance(k, Done)})
    stats = {"kind": "lts", "semantics": sem.name, **lts.stats(),
             "budgetHit": lts.budget_hit, "outcomes": len(finals)}
    _emit(out, [stats] + [{"kind": "outcome", "heap": h} for h in finals], args.json)
    return 0


def cmd_check(args, out):
    program = _read(args.file)
    _check_places(program, args.places)
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    if props == ["all"]:
        props = list(CHECKS)
    unknown = [p for p in props if p not in CHECKS]
    if unknown:
        raise UsageError(f"unknown property {unknown[0]!r}; choose from {', '.join(CHECKS)}")
    sem = _semantics(args)
    lts = explore(program, GlobalHeap.empty(args.places), sem, args.depth, args.max_nodes)
    results = check_invariants(lts, props, sem)
    if args.json:
        _emit(out, [{"kind": "check", "name": r.name, "ok": r.ok, "examined": r.examined,
                     "boundedOnly": r.bounded_only, "witness": r.witness} for r in results],
              True)
    else:
        _emit(out, [f"# semantics={sem.name} nodes={len(lts.nodes)} edges={len(lts.edges)}"]
              + [r.line() for r in results], False)
    return 0 if all(r.ok for r in results) else 1


def cmd_hb(args, out):
    program = _read(args.file)
    _check_places(program, args.places)
    if args.compare:
        fp = FailurePolicy(args.max_failures,
                           _place_list(args.fail_places) if args.fail_places
                           else frozenset(range(1, args.places)))
        v = check_hbi(program, args.places, fp, args.depth)
        if args.json:
            _emit(out, [{"kind": "hbi", "equal": v.equal,
                         "onlyTx10": sorted(v.only_tx10),
                         "onlyResilient": sorted(v.only_resilient),
                         "boundedOnly": v.bound_hit}], True)
        else:
            _emit(out, v.lines(), False)
        return 0 if v.equal else 1
    sem = _semantics(args)
    rel = happens_before(program, sem, args.places, args.depth)
    if args.json:
        _emit(out, [{"kind": "hb", "before": a, "after": b} for a, b in sorted(rel.pairs)],
              True)
    else:
        _emit(out, [f"# semantics={sem.name} labels={len(rel.labels)}"
                    + (" bounded-only" if rel.bound_hit else "")] + rel.lines(), False)
    return 0


def cmd_bisim(args, out):
    s1, s2 = _read(args.file1, dynamic=True), _read(args.file2, dynamic=True)
    for s in (s1, s2):
        _check_places(s, args.places)
    resilient = args.semantics == "resilient"
    sem = Resilient(unlimited(args.places)) if resilient else TX10
    game = BisimGame(resilient, args.places)
    g = GlobalHeap.empty(args.places)
    k1, k2 = Running(erase_labels(s1), g), Running(erase_labels(s2), g)
    v = weak_bisim(k1, k2, sem, args.depth, args.places, game=game)
    if v.distinguished:
        ok = replay(k1, k2, v.witness, game)
        if args.json:
            _emit(out, [{"kind": "bisim", "verdict": str(v), "replayed": ok,
                         "witness": v.witness.lines()}], True)
        else:
            _emit(out, [f"{show(s1)} vs {show(s2)}"] + v.lines() + [f"replayed={ok}"], False)
        return 1
    if args.json:
        _emit(out, [{"kind": "bisim", "verdict": str(v)}], True)
    else:
        _emit(out, [f"{show(s1)} vs {show(s2)}", str(v)], False)
    return 0


def cmd_laws(args, out):
    numbers = None
    if args.law:
        numbers = set(args.law)
    results = law_suite(args.semantics, args.depth, numbers)
    if args.json:
        _emit(out, [{"kind": "law", "law": r.law.name, "calculus": r.law.calculus,
                     "side": r.law.side, "expected": "==" if r.law.equiv else "!=",
                     "verdict": r.verdict, "refuted": len(r.refuted),
                     "instances": len(r.instances), "ok": r.ok} for r in results], True)
    else:
        _emit(out, report_lines(results, args.semantics, args.depth), False)
    return 0 if all(r.ok for r in results) else 1


# -------------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(prog="tx10", description=__doc__.splitlines()[0])
    ap.add_argument("--json", action="store_true", help="one JSON record per line")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, depth=40):
        p.add_argument("--semantics", choices=("tx10", "resilient"), default="tx10")
        p.add_argument("--places", type=int, default=3)
        p.add_argument("--depth", type=int, default=depth)
        p.add_argument("--max-failures", type=int, default=1)
        p.add_argument("--fail-places", default=None, help="comma-separated places")
        p.add_argument("--fail-schedule", default=None, help="STEP:PLACE,...")
        p.add_argument("--max-nodes", type=int, default=200_000)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("run", help="run one trace")
    p.add_argument("file")
    common(p)
    p.add_argument("--policy", choices=("deterministic", "random"), default="deterministic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("explore", help="explore every interleaving")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_explore)

    p = sub.add_parser("check", help="check invariants on the explored LTS")
    p.add_argument("file")
    common(p)
    p.add_argument("--props", required=True, help="comma-separated checks or 'all'")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("hb", help="happens-before relation")
    p.add_argument("file")
    common(p)
    p.add_argument("--compare", action="store_true",
                   help="compare the failure-free and resilient relations")
    p.set_defaults(fn=cmd_hb)

    p = sub.add_parser("bisim", help="bounded weak bisimilarity of two statements")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--semantics", choices=("tx10", "resilient"), default="tx10")
    p.add_argument("--places", type=int, default=3)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(fn=cmd_bisim)

    p = sub.add_parser("laws", help="check the equational laws")
    p.add_argument("--semantics", choices=("tx10", "resilient"), default="tx10")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--law", type=int, action="append", help="restrict to a law number")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(fn=cmd_laws)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "places", 1) < 1:
            raise UsageError("--places must be at least 1")
        return args.fn(args, out)
    except (UsageError, ParseError) as err:
        sys.stderr.write(f"tx10: error: {err}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
