"""Render syntax trees back to rule text.  ``parse(format(parse(x))) == parse(x)``."""

from __future__ import annotations

import re

from .ast import (
    Accessor, Enrichment, Literal, ParamAccess, RefAccess, Reference, Rule, RuleSet,
    SourceElement, SourceGroup, SourceRelationship, TargetElement, TargetGroup, TargetRelation,
    ValueExpression, EndRef,
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_KEYWORDS = {"rule", "element", "relation", "group", "ref", "enrich", "intermediate", "count"}


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _type(name: str) -> str:
    return name if _IDENT.match(name) and name not in _KEYWORDS else quote(name)


def format_accessor(acc: Accessor) -> str:
    return f"{acc.kind}({quote(acc.key)})" if acc.key is not None else acc.kind


def format_reference(ref: Reference) -> str:
    head = ref.rule + (f":{ref.output}" if ref.output else "")
    args = "".join(f", {a.keyword}={a.param}" if a.keyword else f", {a.param}" for a in ref.args)
    return f"ref({head}{args})"


def _refs(refs) -> str:
    return " | ".join(format_reference(r) for r in refs)


def format_value(expr: ValueExpression) -> str:
    parts = []
    for p in expr.parts:
        if isinstance(p, Literal):
            parts.append(quote(p.text))
        elif isinstance(p, ParamAccess):
            parts.append(f"{p.param}.{format_accessor(p.accessor)}")
        elif isinstance(p, RefAccess):
            parts.append(f"{_refs(p.refs)}.{format_accessor(p.accessor)}")
    return " + ".join(parts)


def _conditions(term) -> str:
    out = ""
    for c in term.conditions:
        if c.op is None:
            out += f" [{format_accessor(c.accessor)}]"
        else:
            out += f" [{format_accessor(c.accessor)} {c.op} {quote(c.value)}]"
    for lc in term.constraints:
        out += f" {{count {lc.op} {lc.count}}}"
    return out


def format_source(term) -> str:
    if isinstance(term, SourceElement):
        return f"element({term.param}: {_type(term.type)})" + _conditions(term)
    if isinstance(term, SourceRelationship):
        return (f"relation({term.param}: {_type(term.type)}, {format_source(term.source)}"
                f" -> {format_source(term.target)})" + _conditions(term))
    if isinstance(term, SourceGroup):
        return f"group({term.op}: " + ", ".join(format_source(c) for c in term.children) + ")"
    raise TypeError(term)


def _assignments(assigns) -> str:
    if not assigns:
        return ""
    return " { " + ", ".join(f"{format_accessor(a.accessor)} = {format_value(a.value)}" for a in assigns) + " }"


def _end(end: EndRef) -> str:
    return end.param if end.param is not None else _refs(end.refs)


def format_target(term, indent: str = "") -> str:
    if isinstance(term, TargetElement):
        head = f"* = {_refs(term.refs)}" if term.placeholder else _type(term.type)
        out = f"element({term.param}: {head})" + _assignments(term.assignments)
        return out + (" intermediate" if term.intermediate else "")
    if isinstance(term, TargetRelation):
        out = (f"relation({term.param}: {_type(term.type)}, {_end(term.source)} -> {_end(term.target)})"
               + _assignments(term.assignments))
        return out + (" intermediate" if term.intermediate else "")
    if isinstance(term, Enrichment):
        return f"enrich({_refs(term.refs)})" + _assignments(term.assignments)
    if isinstance(term, TargetGroup):
        if not term.children:
            return "group()"
        inner = indent + "    "
        body = (",\n" + inner).join(format_target(c, inner) for c in term.children)
        return f"group(\n{inner}{body}\n{indent})"
    raise TypeError(term)


def format_rule(rule: Rule) -> str:
    return (f"rule({rule.name}:\n    {format_source(rule.source)}\n"
            f"    -> {format_target(rule.target, '    ')}\n)")


def format_rule_set(rs: RuleSet) -> str:
    return "\n\n".join(format_rule(r) for r in rs.rules) + ("\n" if rs.rules else "")
