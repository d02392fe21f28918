"""Command line front end.

Subcommands
-----------
``first``        compute the FIRST pair set of a grammar file
``follow``       compute the FOLLOW pair set
``string-first`` FIRST of a category string, on demand
``validate``     static checks only
``bench``        naive versus active instrumentation on one or more files

Exit codes: 0 success; 2 usage; 3 unreadable input or syntax errors;
4 validation errors; 5 iteration/pair guard exceeded; 6 unknown category
in ``string-first``.  Diagnostics go to stderr as ``file:line:col:
severity: message``; with ``--format json`` the result document on stdout
is byte-stable for identical inputs and flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from importlib import resources

from . import firstfollow as ff
from . import grammar as gm

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INVALID = 4
EXIT_LIMIT = 5
EXIT_QUERY = 6


class _Failure(Exception):
    def __init__(self, code, messages):
        self.code = code
        self.messages = messages
        super().__init__("; ".join(messages))


def fixture_path(name: str) -> str:
    """Path of a bundled grammar (fig1.gr, cf-intro.gr, agr.gr, guard.gr,
    bench13.gr, bench21.gr)."""
    return str(resources.files("featflow") / "fixtures" / name)


# ---------------------------------------------------------------------------
# loading

def _load(path: str, args) -> gm.Grammar:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise _Failure(EXIT_INPUT, [f"{path}: cannot read: {exc.strerror or exc}"])
    try:
        g = gm.parse_grammar(text, name=path)
    except gm.GrammarSyntaxError as exc:
        raise _Failure(
            EXIT_INPUT, [f"{path}:{i.line}:{i.col}: error: {i.message}" for i in exc.issues]
        )
    if getattr(args, "restrictor", None) is not None:
        try:
            g = g.with_restrictor(gm.parse_restrictor(args.restrictor))
        except ValueError as exc:
            raise _Failure(EXIT_USAGE, [f"--restrictor: {exc}"])
    overrides = {}
    if getattr(args, "max_iterations", None):
        overrides["max_iterations"] = args.max_iterations
    if getattr(args, "max_pairs", None):
        overrides["max_pairs"] = args.max_pairs
    return replace(g, **overrides) if overrides else g


def _diagnose(g: gm.Grammar) -> list:
    lines = []
    for d in gm.validate(g):
        line = g.rule(d.rule_id).line if d.rule_id is not None else 1
        where = f"rule {d.rule_id}: " if d.rule_id is not None else ""
        lines.append((d.severity, f"{g.name}:{line}:1: {d.severity}: {where}{d.message}"))
    return lines


def _validated(path: str, args) -> tuple:
    g = _load(path, args)
    diags = _diagnose(g)
    for _, text in diags:
        print(text, file=sys.stderr)
    if any(sev == "error" for sev, _ in diags):
        raise _Failure(EXIT_INVALID, [f"{path}: validation failed"])
    return g, diags


# ---------------------------------------------------------------------------
# documents

def _pair_json(p: ff.Pair) -> dict:
    if p.is_epsilon:
        rendered = gm.format_roots(p.lhs)
        return {"lhs": rendered, "rhs": None, "epsilon": True}
    rendered = gm.format_roots([*p.lhs, p.rhs])
    return {"lhs": rendered[:-1], "rhs": rendered[-1], "epsilon": False}


def _stats_json(stats: ff.RunStats) -> list:
    return [
        {
            "iteration": row.iteration,
            "considered": round(row.considered, 3),
            "total": row.total,
            "attempts": row.attempts,
            "additions": row.additions,
        }
        for row in stats.rows
    ]


def _document(g: gm.Grammar, function: str, mode: str, pairs, stats, diags, extra=None) -> dict:
    doc = {
        "grammar": {
            "file": g.name,
            "rules": len(g.rules),
            "restrictor": sorted(".".join(p) for p in g.restrictor),
        },
        "function": function,
        "mode": mode,
        "limits": {"max_iterations": g.max_iterations, "max_pairs": g.max_pairs},
        "pairs": [_pair_json(p) for p in pairs],
        "diagnostics": [{"severity": sev, "message": text} for sev, text in diags],
    }
    if stats is not None:
        doc["stats"] = _stats_json(stats)
    if extra:
        doc.update(extra)
    return doc


def _emit(doc: dict, args) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False))
        return
    g = doc["grammar"]
    phi = ", ".join(g["restrictor"]) if g["restrictor"] else "(empty)"
    print(f"grammar: {g['file']}  rules: {g['rules']}  restrictor: {phi}")
    header = f"function: {doc['function']}  mode: {doc['mode']}"
    if "string" in doc:
        header += f"  string: {doc['string']}"
    print(header)
    print(f"pairs ({len(doc['pairs'])}):")
    for p in doc["pairs"]:
        rhs = "ε" if p["epsilon"] else p["rhs"]
        print(f"  ({' '.join(p['lhs'])} , {rhs})")
    if "stats" in doc:
        print("stats:")
        print("  iter  considered  total  attempts  additions")
        for row in doc["stats"]:
            print(
                f"  {row['iteration']:>4}  {row['considered']:>10.3f}  {row['total']:>5}"
                f"  {row['attempts']:>8}  {row['additions']:>9}"
            )


def _limit_failure(g: gm.Grammar, exc: ff.LimitExceeded) -> _Failure:
    msgs = [f"{g.name}: no fixpoint within {exc.limit} {exc.kind}"]
    for row in exc.stats.rows[-3:]:
        msgs.append(
            f"{g.name}: iteration {row.iteration}: considered {row.considered:.1f}, "
            f"total {row.total}, attempts {row.attempts}"
        )
    return _Failure(EXIT_LIMIT, msgs)


# ---------------------------------------------------------------------------
# commands

def cmd_first(args) -> int:
    g, diags = _validated(args.grammar, args)
    try:
        pairs, stats = ff.compute_first(g, args.mode)
    except ff.LimitExceeded as exc:
        raise _limit_failure(g, exc)
    _emit(_document(g, "first", args.mode, pairs, stats if args.stats else None, diags), args)
    return EXIT_OK


def cmd_follow(args) -> int:
    g, diags = _validated(args.grammar, args)
    try:
        first, _ = ff.compute_first(g, args.mode)
        pairs, stats = ff.compute_follow(g, first, args.mode)
    except ff.LimitExceeded as exc:
        raise _limit_failure(g, exc)
    _emit(_document(g, "follow", args.mode, pairs, stats if args.stats else None, diags), args)
    return EXIT_OK


def cmd_string_first(args) -> int:
    g, diags = _validated(args.grammar, args)
    try:
        cats = gm.parse_category_sequence(args.string)
    except gm.GrammarSyntaxError as exc:
        raise _Failure(
            EXIT_INPUT, [f"<string>:{i.line}:{i.col}: error: {i.message}" for i in exc.issues]
        )
    try:
        first, _ = ff.compute_first(g, args.mode)
        pairs = ff.first_of_string(first, g, cats)
    except ff.LimitExceeded as exc:
        raise _limit_failure(g, exc)
    except ff.UnknownCategory as exc:
        raise _Failure(EXIT_QUERY, [f"{g.name}: unknown category: {exc}"])
    doc = _document(g, "string-first", args.mode, pairs, None, diags, extra={"string": args.string})
    _emit(doc, args)
    return EXIT_OK


def cmd_validate(args) -> int:
    g = _load(args.grammar, args)
    diags = _diagnose(g)
    for _, text in diags:
        print(text)
    if any(sev == "error" for sev, _ in diags):
        return EXIT_INVALID
    if not diags:
        print(f"{g.name}: ok")
    return EXIT_OK


def cmd_bench(args) -> int:
    reports = []
    for path in args.grammars:
        g, _ = _validated(path, args)
        try:
            reports.append((g, ff.compare_modes(g)))
        except ff.LimitExceeded as exc:
            raise _limit_failure(g, exc)
    failed = False
    if args.format == "json":
        out = []
        for g, rep in reports:
            out.append(
                {
                    "grammar": {"file": g.name, "rules": rep.rules},
                    "equivalence": {"first": rep.first_equivalent, "follow": rep.follow_equivalent},
                    "attempt_ratio": round(rep.attempt_ratio, 3),
                    "event_ratio": round(rep.event_ratio, 3),
                    "stats": {
                        func: {
                            mode: {
                                "attempts": stats[mode].attempts,
                                "events": stats[mode].events,
                                "wall_time": stats[mode].wall_time,
                                "iterations": _stats_json(stats[mode]),
                            }
                            for mode in ff.MODES
                        }
                        for func, stats in (("first", rep.first_stats), ("follow", rep.follow_stats))
                    },
                }
            )
            failed |= not (rep.first_equivalent and rep.follow_equivalent)
        print(json.dumps(out, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        for g, rep in reports:
            print(f"benchmark: {g.name}  rules: {rep.rules}")
            for func, stats in (("first", rep.first_stats), ("follow", rep.follow_stats)):
                for mode in ff.MODES:
                    s = stats[mode]
                    print(
                        f"  {func:<6} {mode:<6} attempts {s.attempts:>6}  events {s.events:>6}"
                        f"  iterations {len(s.rows):>2}  wall {s.wall_time:.4f}s"
                    )
            print(
                f"  attempt ratio (naive/active): {rep.attempt_ratio:.2f}"
                f"  event ratio: {rep.event_ratio:.2f}"
            )
            verdict = "PASS" if rep.first_equivalent and rep.follow_equivalent else "FAIL"
            print(f"  equivalence: first {'PASS' if rep.first_equivalent else 'FAIL'},"
                  f" follow {'PASS' if rep.follow_equivalent else 'FAIL'}  [{verdict}]")
            print("  active first iterations:")
            print("    iter  considered  total  attempts  additions")
            for row in rep.first_stats["active"].rows:
                print(
                    f"    {row.iteration:>4}  {row.considered:>10.3f}  {row.total:>5}"
                    f"  {row.attempts:>8}  {row.additions:>9}"
                )
            failed |= not (rep.first_equivalent and rep.follow_equivalent)
    return 1 if failed else EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing

def _common(sub):
    sub.add_argument("--mode", choices=ff.MODES, default="active")
    sub.add_argument("--restrictor", default=None, help="override the file's restrictor ('' clears it)")
    sub.add_argument("--max-iterations", type=int, default=None)
    sub.add_argument("--max-pairs", type=int, default=None)
    sub.add_argument("--format", choices=("text", "json"), default="text")
    sub.add_argument("--stats", action="store_true", help="include iteration statistics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featflow",
        description="FIRST/FOLLOW pair sets for unification grammars",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("first", help="compute the FIRST pair set")
    p.add_argument("grammar")
    _common(p)
    p.set_defaults(run=cmd_first)

    p = subs.add_parser("follow", help="compute the FOLLOW pair set")
    p.add_argument("grammar")
    _common(p)
    p.set_defaults(run=cmd_follow)

    p = subs.add_parser("string-first", help="FIRST of a category string")
    p.add_argument("grammar")
    p.add_argument("string", help="whitespace-separated AVMs, e.g. 'NP[] NP[] VP[]'")
    _common(p)
    p.set_defaults(run=cmd_string_first)

    p = subs.add_parser("validate", help="static checks only")
    p.add_argument("grammar")
    p.add_argument("--restrictor", default=None)
    p.set_defaults(run=cmd_validate)

    p = subs.add_parser("bench", help="compare naive and active modes")
    p.add_argument("grammars", nargs="+")
    _common(p)
    p.set_defaults(run=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.run(args)
    except _Failure as exc:
        for message in exc.messages:
            print(message, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
