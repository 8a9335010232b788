"""Static checks over parsed rule sets and the rule dependency graph."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import networkx as nx

from .ast import (
    EndRef, Enrichment, ParamAccess, Rule, RuleSet, SourceGroup, SourceRelationship, TargetElement,
    TargetRelation, parameter_kinds, parameter_usages, rule_inputs, rule_references, source_terms,
    target_items, target_params,
)
from .printer import format_source

LEGAL_PATTERNS = {
    (0, 0, 0): "iterate over every relation",
    (0, 1, 1): "iterate over distinct sources, aggregate relations and targets",
    (1, 1, 0): "iterate over distinct targets, aggregate relations and sources",
    (0, 1, 0): "iterate over source/target pairs, aggregate relations",
    (1, 1, 1): "aggregate everything into one binding",
}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    rule: str | None = None
    severity: str = "error"
    rules: tuple[str, ...] = field(default=())

    def __str__(self):
        where = f"{self.rule}: " if self.rule else ""
        return f"{self.severity}: {where}{self.message} [{self.code}]"


def satisfiable(constraints) -> bool:
    """Some count n >= 0 passes every constraint."""
    if not constraints:
        return True
    bound = max(c.count for c in constraints) + 1
    return any(all(c.accepts(n) for c in constraints) for n in range(bound + 1))


def dependency_graph(rs: RuleSet) -> nx.DiGraph:
    """One node per rule, an edge caller -> callee per transformation reference.

    Nodes keep file order; edges are added in sorted order.  References to
    unknown rules are left out (the validator reports them).
    """
    g = nx.DiGraph()
    g.add_nodes_from(rs.names)
    known = set(rs.names)
    edges = set()
    for rule in rs:
        for ref in rule_references(rule):
            if ref.rule in known:
                edges.add((rule.name, ref.rule))
    g.add_edges_from(sorted(edges))
    return g


def reference_cycles(rs: RuleSet) -> list[list[str]]:
    """Elementary cycles of the dependency graph, each rotated to start at its smallest name."""
    cycles = []
    for cyc in nx.simple_cycles(dependency_graph(rs)):
        k = cyc.index(min(cyc))
        cycles.append(cyc[k:] + cyc[:k])
    return sorted(cycles)


def _rename(term, names):
    if isinstance(term, SourceGroup):
        return replace(term, children=tuple(_rename(c, names) for c in term.children))
    if isinstance(term, SourceRelationship):
        return replace(term, param=names[term.param], source=_rename(term.source, names),
                       target=_rename(term.target, names))
    return replace(term, param=names[term.param])


def source_signature(rule: Rule) -> str:
    """Source term text with parameters renamed in order of appearance."""
    names = {p: f"p{i}" for i, p in enumerate(parameter_kinds(rule.source))}
    return format_source(_rename(rule.source, names))


def redundant_rules(rs: RuleSet) -> list[tuple[str, ...]]:
    """Groups of rules whose source terms are identical up to parameter names."""
    by_sig: dict[str, list[str]] = {}
    for rule in rs:
        by_sig.setdefault(source_signature(rule), []).append(rule.name)
    return [tuple(names) for names in by_sig.values() if len(names) > 1]


def _check_rule(rule: Rule, rs: RuleSet) -> list[Diagnostic]:
    diags = []

    def err(code, msg):
        diags.append(Diagnostic(code, msg, rule.name))

    for term in source_terms(rule.source):
        if isinstance(term, SourceGroup) and len(term.children) < 2:
            err("group-arity", "source groups need at least two terms")
        if isinstance(term, SourceRelationship):
            if term.pattern not in LEGAL_PATTERNS:
                s, r, t = term.pattern
                err("illegal-pattern",
                    f"relation {term.param}: loop constraints on S={s} R={r} T={t} is not a legal "
                    "query pattern (constrained ends require a constrained relation)")
        if hasattr(term, "constraints") and not satisfiable(term.constraints):
            ranges = ", ".join(f"count {c.op} {c.count}" for c in term.constraints)
            err("unsatisfiable-range", f"{term.param}: no count satisfies {{{ranges}}}")

    kinds: dict[str, set] = {}
    for param, agg in parameter_usages(rule.source):
        kinds.setdefault(param, set()).add(agg)
    for param, seen in kinds.items():
        if len(seen) > 1:
            err("mixed-parameter", f"{param} is aggregated in one term and single-valued in another")

    bound = set(parameter_kinds(rule.source))
    created: list[str] = []
    for p in target_params(rule):
        if p in bound:
            err("parameter-clash", f"target parameter {p} shadows a source parameter")
        if p in created:
            err("parameter-clash", f"target parameter {p} is declared twice")
        created.append(p)
    visible = bound | set(created)

    def check_refs(refs):
        for ref in refs:
            callee = rs.get(ref.rule)
            if callee is None:
                err("unresolved-reference", f"reference to unknown rule {ref.rule}")
                continue
            callee_params = parameter_kinds(callee.source)
            positional = [a for a in ref.args if a.keyword is None]
            inputs = rule_inputs(callee)
            if positional and len(positional) != len(inputs):
                err("arity-mismatch",
                    f"ref({ref.rule}) takes {len(inputs)} positional argument(s) {inputs}, got {len(positional)}")
            if not ref.args and inputs:
                err("arity-mismatch", f"ref({ref.rule}) takes {len(inputs)} argument(s) {inputs}, got 0")
            for a in ref.args:
                if a.param not in bound:
                    err("unbound-parameter", f"ref({ref.rule}) argument {a.param} is not a source parameter")
                if a.keyword is not None and a.keyword not in callee_params:
                    err("unknown-keyword", f"{ref.rule} has no source parameter {a.keyword}")
            if ref.output is not None and ref.output not in target_params(callee):
                err("unknown-output", f"{ref.rule} has no target parameter {ref.output}")

    def check_values(assigns):
        for a in assigns:
            for part in a.value.parts:
                if isinstance(part, ParamAccess) and part.param not in visible:
                    err("unbound-parameter", f"{part.param} is not bound by the source term")
            check_refs(list(a.value.references()))

    def check_end(end: EndRef):
        if end.param is not None and end.param not in visible:
            err("unbound-parameter", f"relation end {end.param} is not bound")
        check_refs(end.refs)

    for item in target_items(rule.target):
        if isinstance(item, TargetElement):
            check_refs(item.refs)
            check_values(item.assignments)
        elif isinstance(item, TargetRelation):
            check_end(item.source)
            check_end(item.target)
            check_values(item.assignments)
        elif isinstance(item, Enrichment):
            check_refs(item.refs)
            check_values(item.assignments)
    return diags


def validate_rule_set(rs: RuleSet) -> list[Diagnostic]:
    """All diagnostics for ``rs``; an empty list means the rule set may run."""
    diags: list[Diagnostic] = []
    for rule in rs:
        diags += _check_rule(rule, rs)
    for cycle in reference_cycles(rs):
        diags.append(Diagnostic(
            "reference-cycle", "reference cycle: " + " -> ".join(cycle + [cycle[0]]),
            cycle[0], rules=tuple(cycle)))
    for names in redundant_rules(rs):
        diags.append(Diagnostic(
            "redundant-mapping", "rules " + ", ".join(names) + " match identical source terms",
            names[0], severity="warning", rules=names))
    return diags


def errors(diags) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]
