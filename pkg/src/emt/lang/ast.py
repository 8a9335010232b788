"""Syntax tree of the rule language.

All nodes are frozen dataclasses built from tuples, so two parses of the same
text compare equal and nodes can be used as dictionary keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

LOGIC_OPERATORS = ("AND", "OR", "XOR")
COUNT_OPERATORS = (">=", ">", "=", "<", "<=")
SEARCH_OPERATORS = ("=", "!=", "contains", "matches")


@dataclass(frozen=True)
class Accessor:
    """``name``, ``id``, ``namespace``, ``type``, ``attribute("k")`` or ``tag("x")``.

    On the left-hand side of an assignment ``tag`` has no key: the assigned
    value is added as a tag.
    """

    kind: str
    key: str | None = None


@dataclass(frozen=True)
class LoopConstraint:
    op: str
    count: int

    def accepts(self, n: int) -> bool:
        c = self.count
        return {">=": n >= c, ">": n > c, "=": n == c, "<": n < c, "<=": n <= c}[self.op]


@dataclass(frozen=True)
class SearchCondition:
    """``[accessor op literal]``; ``op`` is None for an existence test."""

    accessor: Accessor
    op: str | None = None
    value: str | None = None


# -- source side -------------------------------------------------------------

@dataclass(frozen=True)
class SourceElement:
    param: str
    type: str
    conditions: tuple[SearchCondition, ...] = ()
    constraints: tuple[LoopConstraint, ...] = ()

    @property
    def aggregated(self) -> bool:
        return bool(self.constraints)


@dataclass(frozen=True)
class SourceRelationship:
    param: str
    type: str
    source: SourceElement
    target: SourceElement
    conditions: tuple[SearchCondition, ...] = ()
    constraints: tuple[LoopConstraint, ...] = ()

    @property
    def pattern(self) -> tuple[int, int, int]:
        """Which of source end, relation and target end carry loop constraints."""
        return (int(bool(self.source.constraints)), int(bool(self.constraints)),
                int(bool(self.target.constraints)))


@dataclass(frozen=True)
class SourceGroup:
    op: str
    children: tuple["SourceTerm", ...]


SourceTerm = Union[SourceElement, SourceRelationship, SourceGroup]


# -- references and values -----------------------------------------------------

@dataclass(frozen=True)
class Argument:
    """A reference argument: positional (``keyword`` None) or ``keyword=param``."""

    param: str
    keyword: str | None = None


@dataclass(frozen=True)
class Reference:
    rule: str
    args: tuple[Argument, ...] = ()
    output: str | None = None


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class ParamAccess:
    param: str
    accessor: Accessor


@dataclass(frozen=True)
class RefAccess:
    refs: tuple[Reference, ...]
    accessor: Accessor


Operand = Union[Literal, ParamAccess, RefAccess]


@dataclass(frozen=True)
class ValueExpression:
    """Concatenation of literal segments and accessor reads."""

    parts: tuple[Operand, ...]

    def params(self) -> set[str]:
        return {p.param for p in self.parts if isinstance(p, ParamAccess)}

    def references(self) -> Iterator[Reference]:
        for p in self.parts:
            if isinstance(p, RefAccess):
                yield from p.refs


@dataclass(frozen=True)
class Assignment:
    accessor: Accessor
    value: ValueExpression


# -- target side ---------------------------------------------------------------

@dataclass(frozen=True)
class EndRef:
    """Relation end: a parameter, or the union of one or more references."""

    param: str | None = None
    refs: tuple[Reference, ...] = ()


@dataclass(frozen=True)
class TargetElement:
    param: str
    type: str | None
    assignments: tuple[Assignment, ...] = ()
    intermediate: bool = False
    refs: tuple[Reference, ...] = ()

    @property
    def placeholder(self) -> bool:
        """``element(X: * = ref(...))``: binds referenced items, mints nothing."""
        return self.type is None


@dataclass(frozen=True)
class TargetRelation:
    param: str
    type: str
    source: EndRef
    target: EndRef
    assignments: tuple[Assignment, ...] = ()
    intermediate: bool = False


@dataclass(frozen=True)
class TargetGroup:
    children: tuple["TargetTerm", ...] = ()


@dataclass(frozen=True)
class Enrichment:
    refs: tuple[Reference, ...]
    assignments: tuple[Assignment, ...] = ()


TargetTerm = Union[TargetElement, TargetRelation, TargetGroup, Enrichment]


@dataclass(frozen=True)
class Rule:
    name: str
    source: SourceTerm
    target: TargetTerm
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...] = ()
    name: str = ""

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def get(self, name: str) -> Rule | None:
        for r in self.rules:
            if r.name == name:
                return r
        return None

    def __getitem__(self, name: str) -> Rule:
        rule = self.get(name)
        if rule is None:
            raise KeyError(name)
        return rule

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.rules]


# -- traversal helpers ----------------------------------------------------------

def source_terms(term: SourceTerm) -> list[SourceTerm]:
    """Pre-order list of a source term and its sub-terms (relationship ends included)."""
    out = [term]
    if isinstance(term, SourceGroup):
        for child in term.children:
            out += source_terms(child)
    elif isinstance(term, SourceRelationship):
        out += [term.source, term.target]
    return out


def target_items(term: TargetTerm) -> list[TargetTerm]:
    """Flatten target groups into their statements, in document order."""
    if isinstance(term, TargetGroup):
        out = []
        for child in term.children:
            out += target_items(child)
        return out
    return [term]


def parameter_kinds(term: SourceTerm) -> dict[str, bool]:
    """Map each source parameter to whether it is aggregated, in first-appearance order.

    Relationship positions follow the query pattern: a position is aggregated
    when it carries loop constraints, and the relation itself is aggregated
    whenever any position is.
    """
    out: dict[str, bool] = {}

    def put(name, aggregated):
        out.setdefault(name, aggregated)

    def walk(t):
        if isinstance(t, SourceElement):
            put(t.param, t.aggregated)
        elif isinstance(t, SourceRelationship):
            s, r, tt = t.pattern
            put(t.param, bool(r))
            put(t.source.param, bool(s))
            put(t.target.param, bool(tt))
        else:
            for child in t.children:
                walk(child)

    walk(term)
    return out


def parameter_usages(term: SourceTerm) -> list[tuple[str, bool]]:
    """Every (parameter, aggregated) occurrence, for consistency checks."""
    out = []
    for t in source_terms(term):
        if isinstance(t, SourceElement):
            out.append((t.param, t.aggregated))
        elif isinstance(t, SourceRelationship):
            out.append((t.param, bool(t.pattern[1])))
    return out


def rule_inputs(rule: Rule) -> list[str]:
    """Single-valued source parameters: the positional inputs of a reference call."""
    return [p for p, agg in parameter_kinds(rule.source).items() if not agg]


def target_params(rule: Rule) -> list[str]:
    return [t.param for t in target_items(rule.target) if isinstance(t, (TargetElement, TargetRelation))]


def default_output(rule: Rule) -> str | None:
    """Output returned by an unqualified reference: the first created element, else relation."""
    items = target_items(rule.target)
    for t in items:
        if isinstance(t, TargetElement) and not t.placeholder:
            return t.param
    for t in items:
        if isinstance(t, TargetRelation):
            return t.param
    for t in items:
        if isinstance(t, TargetElement):
            return t.param
    return None


def rule_references(rule: Rule) -> list[Reference]:
    """Every transformation reference in the rule's target term, in document order."""
    out: list[Reference] = []

    def from_assignments(assigns):
        for a in assigns:
            out.extend(a.value.references())

    for item in target_items(rule.target):
        if isinstance(item, TargetElement):
            out.extend(item.refs)
            from_assignments(item.assignments)
        elif isinstance(item, TargetRelation):
            out.extend(item.source.refs)
            out.extend(item.target.refs)
            from_assignments(item.assignments)
        elif isinstance(item, Enrichment):
            out.extend(item.refs)
            from_assignments(item.assignments)
    return out
