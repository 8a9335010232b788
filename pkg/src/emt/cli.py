"""Command line interface.

Exit codes: 0 success, 1 I/O or input format problem, 2 rule syntax or
validation error, 3 execution error (value conflicts, strict overlaps).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from .adapters import get_interpreter, guess_format
from .engine import OverlapWarning, Transformation
from .errors import (
    ConfigurationError, EMTError, ModelFormatError, ModelIntegrityError, RuleSyntaxError,
    RuleValidationError, TraceNotFoundError,
)
from .lang import (
    dependency_graph, errors as error_diags, format_source, load_rule_set, redundant_rules,
    reference_cycles, source_terms, validate_rule_set,
)
from .ledger import ExecutionLedger, trace_lookup
from .matching import evaluate
from .metatypes import MetatypeRegistry, archimate_registry

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_EXECUTION = 0, 1, 2, 3

log = logging.getLogger("emt")


class UsageError(Exception):
    pass


def _registry(args) -> MetatypeRegistry:
    path = getattr(args, "registry", None) or os.environ.get("EMT_REGISTRY")
    base = archimate_registry()
    return base.merged(MetatypeRegistry.load(path)) if path else base


def _load_rules(args):
    rules = load_rule_set(args.rules)
    diags = validate_rule_set(rules)
    for d in diags:
        if d.severity != "error":
            print(d, file=sys.stderr)
    problems = error_diags(diags)
    if problems:
        raise RuleValidationError(problems)
    return rules


def _load_source(args, registry):
    fmt = args.source_format or guess_format(args.source)
    data = Path(args.source).read_bytes()
    return get_interpreter(fmt, "read").read(data, registry=registry)


def _describe(model, oid):
    obj = model.get(oid)
    return f"{obj.name} ({oid})" if obj is not None and obj.name else oid


def _binding_lines(binding, model):
    out = []
    for param in binding:
        v = binding[param]
        if isinstance(v, str):
            out.append(f"{param} = {_describe(model, v)}")
        else:
            out.append(f"{param} = [{', '.join(_describe(model, i) for i in v)}]")
    return out


def _emit(args, payload: dict, lines: list[str]):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        for line in lines:
            print(line)


def _write(path, data: bytes):
    Path(path).write_bytes(data)


def cmd_transform(args) -> int:
    registry = _registry(args)
    rules = _load_rules(args)
    source = _load_source(args, registry)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", OverlapWarning)
        run = Transformation(rules, source, registry, strict_overlap=args.strict_overlap, validate=False)
        target, ledger = run.run()
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.target:
        fmt = args.target_format or guess_format(args.target)
        _write(args.target, get_interpreter(fmt, "write").write(target))
    if args.trace:
        text = ledger.to_csv() if str(args.trace).lower().endswith(".csv") else ledger.to_json()
        _write(args.trace, text.encode("utf-8"))
    fired = ledger.rules_fired()
    summary = (f"{len(fired)} rules, {len(ledger.creator)} objects created, "
               f"{len(ledger.removed)} intermediates")
    _emit(args, {"rules_fired": fired, "objects_created": len(ledger.creator),
                 "intermediates_removed": len(ledger.removed), "target_objects": len(target)}, [summary])
    return EXIT_OK


def cmd_query(args) -> int:
    registry = _registry(args)
    rules = load_rule_set(args.rules)
    rule = rules.get(args.rule)
    if rule is None:
        raise UsageError(f"unknown rule {args.rule!r}")
    terms = source_terms(rule.source)
    if not 0 <= args.term < len(terms):
        raise UsageError(f"{args.rule} has source terms 0..{len(terms) - 1}, not {args.term}")
    term = terms[args.term]
    source = _load_source(args, registry)
    result = evaluate(term, source, registry)
    lines = [f"{rule.name}[{args.term}]: {format_source(term)}"]
    for i, b in enumerate(result):
        lines.append(f"  #{i}: " + "; ".join(_binding_lines(b, source)))
    lines.append(f"{len(result)} bindings")
    _emit(args, {"rule": rule.name, "term": args.term, "count": len(result),
                 "bindings": [{k: (v if isinstance(v, str) else list(v)) for k, v in b.items()} for b in result]},
          lines)
    return EXIT_OK


def cmd_run_rule(args) -> int:
    registry = _registry(args)
    rules = _load_rules(args)
    if rules.get(args.rule) is None:
        raise UsageError(f"unknown rule {args.rule!r}")
    source = _load_source(args, registry)
    run = Transformation(rules, source, registry, strict_overlap=args.strict_overlap, validate=False)
    records = run.run_rule(args.rule)
    model = run.store.model
    lines, created = [], []
    for rec in records:
        for oid in rec.created:
            obj = model[oid]
            created.append({"id": oid, "type": obj.type, "name": obj.name, "rule": rec.rule})
            ends = f" {obj.source} -> {obj.target}" if hasattr(obj, "source") else ""
            lines.append(f"{rec.rule}: created {obj.type} {obj.name!r} [{oid}]{ends}")
        for oid in rec.enriched:
            lines.append(f"{rec.rule}: enriched [{oid}]")
    lines.append(f"{len(records)} executions")
    if args.target:
        fmt = args.target_format or guess_format(args.target)
        _write(args.target, get_interpreter(fmt, "write").write(model.sorted()))
    _emit(args, {"executions": len(records), "created": created}, lines)
    return EXIT_OK


def cmd_deps(args) -> int:
    rules = load_rule_set(args.rules)
    graph = dependency_graph(rules)
    cycles = reference_cycles(rules)
    redundant = redundant_rules(rules)
    lines = [f"{a} -> {b}" for a, b in graph.edges] or ["no dependencies"]
    lines += ["cycle: " + " -> ".join(c + [c[0]]) for c in cycles]
    lines += ["warning: redundant mapping: " + ", ".join(g) for g in redundant]
    if args.dot:
        dot = ["digraph rules {"] + [f'  "{n}";' for n in graph.nodes]
        dot += [f'  "{a}" -> "{b}";' for a, b in graph.edges] + ["}"]
        _write(args.dot, ("\n".join(dot) + "\n").encode("utf-8"))
    _emit(args, {"nodes": list(graph.nodes), "edges": [list(e) for e in graph.edges],
                 "cycles": cycles, "redundant": [list(g) for g in redundant]}, lines)
    return EXIT_VALIDATION if cycles else EXIT_OK


def cmd_trace(args) -> int:
    try:
        ledger = ExecutionLedger.from_json(Path(args.trace).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ModelFormatError(f"{args.trace} is not a JSON trace file: {exc}") from exc
    prov = trace_lookup(ledger, args.id)

    def as_dict(p):
        return {"rule": p.rule, "binding": p.binding, "sources": p.sources, "removed": p.removed,
                "calls": [as_dict(c) for c in p.chain]}

    _emit(args, {"id": args.id, **as_dict(prov)}, prov.lines())
    return EXIT_OK


def cmd_validate(args) -> int:
    rules = load_rule_set(args.rules)
    diags = validate_rule_set(rules)
    _emit(args, {"diagnostics": [d.__dict__ | {"rules": list(d.rules)} for d in diags]},
          [str(d) for d in diags] or [f"{len(rules)} rules, no problems"])
    return EXIT_VALIDATION if error_diags(diags) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emt", description="Rule-based enterprise model transformation")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, source=True):
        p.add_argument("--rules", required=True, help="rule file (.emt)")
        if source:
            p.add_argument("--source", required=True)
            p.add_argument("--source-format", choices=["generic", "archimate", "bpmn"])
            p.add_argument("--registry", help="metatype registry JSON (default: $EMT_REGISTRY)")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("transform", help="run a rule set to completion")
    common(p)
    p.add_argument("--target")
    p.add_argument("--target-format", choices=["generic", "bpmn"])
    p.add_argument("--trace", help="trace file (.json or .csv)")
    p.add_argument("--strict-overlap", action="store_true")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("query", help="evaluate one source term")
    common(p)
    p.add_argument("--rule", required=True)
    p.add_argument("--term", type=int, default=0, help="pre-order index of the source term")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("run-rule", help="execute a single rule")
    common(p)
    p.add_argument("--rule", required=True)
    p.add_argument("--target")
    p.add_argument("--target-format", choices=["generic", "bpmn"])
    p.add_argument("--strict-overlap", action="store_true")
    p.set_defaults(func=cmd_run_rule)

    p = sub.add_parser("deps", help="rule dependency report")
    common(p, source=False)
    p.add_argument("--dot", help="write the graph in DOT format")
    p.set_defaults(func=cmd_deps)

    p = sub.add_parser("validate", help="static checks")
    common(p, source=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trace", help="provenance of a target object")
    p.add_argument("--trace", required=True)
    p.add_argument("id")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuleSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuleValidationError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_VALIDATION
    except TraceNotFoundError as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, ModelFormatError, ModelIntegrityError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EMTError as exc:
        print(f"execution error: {exc}", file=sys.stderr)
        return EXIT_EXECUTION


if __name__ == "__main__":
    sys.exit(main())
