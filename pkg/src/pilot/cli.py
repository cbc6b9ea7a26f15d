"""Command line interface.

Subcommands: parse, check, join, verify, table, serve. Exit status is 0 on
success, 1 on domain errors (bad policies, unknown labels, incomparable
joins, ...), 2 on usage errors. ``--format json`` switches structured
output for scripting.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .algebra import policy_join, policy_subsumes
from .analysis import answer, answer_matrix, explore, respects_policy
from .errors import PilotError
from .policy import Hierarchies, PilotPolicy
from .scenario import (
    Scenario,
    cell_to_json,
    load_scenario,
    make_record,
    policy_to_json,
    save_record,
    scenario_id,
    table_to_json,
    verdict_to_json,
)
from .text import parse_policy, render_policy
from ._version import __version__


def _read_policy(path: str, hierarchies: Optional[Hierarchies]) -> PilotPolicy:
    text = Path(path).read_text(encoding="utf-8")
    return parse_policy(text, hierarchies)


def _scenario_arg(value: Optional[str]) -> Optional[Scenario]:
    if value is None:
        return None
    return load_scenario(value)


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_parse(args) -> int:
    sc = _scenario_arg(args.scenario)
    hs = sc.hierarchies if sc else None
    policy = _read_policy(args.file, hs)
    _emit(args, {"policy": policy_to_json(policy)},
          json.dumps(policy_to_json(policy), indent=2, sort_keys=True))
    return 0


def cmd_check(args) -> int:
    sc = _scenario_arg(args.scenario)
    hs = sc.hierarchies if sc else _permissive_hierarchies([args.first, args.second])
    first = _read_policy(args.first, hs if sc else None)
    second = _read_policy(args.second, hs if sc else None)
    verdict = policy_subsumes(first, second, hs)
    _emit(args, {"subsumes": verdict}, f"subsumes: {'yes' if verdict else 'no'}")
    return 0


def cmd_join(args) -> int:
    sc = _scenario_arg(args.scenario)
    hs = sc.hierarchies if sc else _permissive_hierarchies([args.first, args.second])
    first = _read_policy(args.first, hs if sc else None)
    second = _read_policy(args.second, hs if sc else None)
    joined = policy_join(first, second, hs)
    _emit(args, {"policy": policy_to_json(joined)}, render_policy(joined))
    return 0


def _permissive_hierarchies(policy_paths: List[str]) -> Hierarchies:
    """Flat hierarchies covering every label the given policy files mention,
    so standalone checks work without a scenario."""
    from .hierarchy import Hierarchy

    entities, datatypes, purposes = set(), set(), set()
    for path in policy_paths:
        p = parse_policy(Path(path).read_text(encoding="utf-8"))
        datatypes.add(p.datatype)
        for rule in [p.dcr, *p.transfers]:
            entities.add(rule.entity)
            purposes.update(rule.dur.purposes)
    return Hierarchies(
        entities=Hierarchy(frozenset(entities), frozenset()),
        datatypes=Hierarchy(frozenset(datatypes), frozenset()),
        purposes=Hierarchy(frozenset(purposes), frozenset()),
    )


def _variant_overrides(sc: Scenario, name: Optional[str]):
    if name is None:
        return None
    return sc.variant(name).overrides()


def cmd_verify(args) -> int:
    sc = load_scenario(args.scenario)
    question = sc.question(args.question)
    variant = sc.with_policies(_variant_overrides(sc, args.policy_variant))
    variant = variant.with_assumptions(args.assume)
    graph = explore(variant, max_states=args.max_states)
    verdict = answer(question.query, graph, variant)
    respected = respects_policy(question.query, verdict, variant)
    payload = verdict_to_json(verdict)
    payload["respected"] = "green" if respected else "red"
    payload["question"] = question.name
    lines = [
        f"{question.text}",
        f"answer: {'Yes' if verdict.answer else 'No'}"
        + ("" if respected else "  [policy violated]"),
        f"states explored: {verdict.states_explored}",
    ]
    if verdict.answer and verdict.witness:
        lines.append("witness:")
        from .analysis import event_text

        lines.extend(f"  {i + 1}. {event_text(ev)}" for i, ev in enumerate(verdict.witness))
    elif verdict.by_ownership:
        lines.append("(the owner holds this item by construction)")
    _emit(args, payload, "\n".join(lines))
    return 0


def _table_text(table_json: dict, sc: Scenario) -> str:
    headers = []
    for col in table_json["columns"]:
        label = col["policy_variant"] or "base"
        if col["assumptions"]:
            label += " +risk"
        headers.append(label)
    names = {q.name: q.text for q in sc.questions}
    rows = []
    for row in table_json["cells"]:
        question = names.get(row[0]["question"], row[0]["question"])
        cells = []
        for cell in row:
            mark = "Yes" if cell["answer"] == "yes" else "No"
            if cell["respected"] == "red":
                mark += "*"
            cells.append(mark)
        rows.append((question, cells))
    qwidth = max(len(q) for q, _ in rows) if rows else 8
    widths = [max(len(h), 4) for h in headers]
    out = [" " * qwidth + " | " + " | ".join(h.ljust(w) for h, w in zip(headers, widths))]
    out.append("-" * len(out[0]))
    for question, cells in rows:
        out.append(
            question.ljust(qwidth)
            + " | "
            + " | ".join(c.ljust(w) for c, w in zip(cells, widths))
        )
    out.append("(* = answer violates the data subject's policy)")
    return "\n".join(out)


def cmd_table(args) -> int:
    sc = load_scenario(args.scenario)
    policy_variants = [(v.name, v.overrides()) for v in sc.variants] or [(None, None)]
    assumption_variants = [[], [a.id for a in sc.assumptions]]
    if not sc.assumptions:
        assumption_variants = [[]]
    table = answer_matrix(sc, policy_variants, assumption_variants,
                          list(sc.questions), max_states=args.max_states)
    payload = table_to_json(table)
    if args.save_record:
        record = make_record(sc, table, [name for name, _ in policy_variants],
                             assumption_variants)
        path = save_record(record, args.save_record)
        payload["record_path"] = str(path)
    _emit(args, payload, _table_text(payload, sc))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(store_dir=args.store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pilot",
        description="Privacy policy tools: parse policies, compare them, and analyze risks.",
    )
    parser.add_argument("--version", action="version", version=f"pilot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("parse", help="parse a .pilot policy file and print its abstract form")
    p.add_argument("file")
    p.add_argument("--scenario", help="scenario file providing the label hierarchies")
    add_format(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", help="does the first policy subsume the second?")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--scenario")
    add_format(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("join", help="join two policies (fails when components are incomparable)")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--scenario")
    add_format(p)
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("verify", help="answer one scenario question, with a witness trace")
    p.add_argument("scenario")
    p.add_argument("--question", required=True)
    p.add_argument("--assume", action="append", default=[], metavar="ASSUMPTION_ID")
    p.add_argument("--policy-variant")
    p.add_argument("--max-states", type=int, default=1_000_000)
    add_format(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="full risk matrix: variants x assumption sets x questions")
    p.add_argument("scenario")
    p.add_argument("--save-record", metavar="DIR")
    p.add_argument("--max-states", type=int, default=1_000_000)
    add_format(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", default=None, help="store directory (default: PILOT_STORE or ./pilot-store)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PilotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
