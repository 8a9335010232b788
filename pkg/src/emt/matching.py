"""Source-term evaluation.

Evaluating a source term against a model yields a :class:`BindingSet`: one
:class:`Binding` per rule execution.  A binding maps parameter names to a
single object id, or, for loop-constrained items, to an ordered tuple of ids.

Without loop constraints an element term binds once per matching entity.
With loop constraints the matches are counted and, if every constraint
accepts the count, aggregated into a single binding.  Relationship terms
group their candidate (source, relation, target) triples according to which
of the three positions carry constraints; groups are the unit of execution.
"""

from __future__ import annotations

import fnmatch
from collections.abc import Mapping
from typing import Iterable, Iterator

from .errors import EvaluationError
from .lang.ast import (
    LoopConstraint, SearchCondition, SourceElement, SourceGroup, SourceRelationship,
)
from .lang.validate import LEGAL_PATTERNS
from .model import Entity, ModelDocument, entities_of_type, relations_of_type
from .values import read_accessor


class Binding(Mapping):
    """Immutable parameter -> slot mapping; hashable and totally ordered."""

    __slots__ = ("_items", "_dict")

    def __init__(self, items: Mapping | Iterable = ()):
        d = dict(items)
        for k, v in d.items():
            if isinstance(v, list):
                d[k] = tuple(v)
        self._dict = d
        self._items = tuple(sorted(d.items()))

    def __getitem__(self, key):
        return self._dict[key]

    def __iter__(self):
        return iter(sorted(self._dict))

    def __len__(self):
        return len(self._dict)

    def __hash__(self):
        return hash(self._items)

    def __eq__(self, other):
        if isinstance(other, Binding):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self._dict == {k: tuple(v) if isinstance(v, list) else v for k, v in other.items()}
        return NotImplemented

    def sort_key(self):
        return tuple((k, (v,) if isinstance(v, str) else (" ",) + v) for k, v in self._items)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return "{" + ", ".join(f"{k}: {list(v) if isinstance(v, tuple) else v}" for k, v in self._items) + "}"

    @property
    def key(self) -> str:
        """Canonical text key: sorted parameters, each with its sorted ids."""
        parts = []
        for k, v in self._items:
            parts.append(f"{k}={v}" if isinstance(v, str) else f"{k}=[{','.join(sorted(v))}]")
        return ";".join(parts)

    def ids(self, param) -> tuple[str, ...]:
        v = self._dict[param]
        return (v,) if isinstance(v, str) else v

    def all_ids(self) -> list[str]:
        return sorted({i for k in self._dict for i in self.ids(k)})

    def merge(self, other: "Binding") -> "Binding":
        return Binding({**self._dict, **other._dict})


class BindingSet:
    """Duplicate-free, deterministically ordered collection of bindings."""

    def __init__(self, bindings: Iterable = (), params: Iterable[str] | None = None):
        uniq = {b if isinstance(b, Binding) else Binding(b) for b in bindings}
        self.bindings: tuple[Binding, ...] = tuple(sorted(uniq))
        names = set(params or ())
        for b in self.bindings:
            names.update(b)
        self.params: frozenset[str] = frozenset(names)

    def __iter__(self) -> Iterator[Binding]:
        return iter(self.bindings)

    def __len__(self):
        return len(self.bindings)

    def __bool__(self):
        return bool(self.bindings)

    def __eq__(self, other):
        if isinstance(other, BindingSet):
            return self.bindings == other.bindings
        return NotImplemented

    def __repr__(self):
        return f"BindingSet({list(self.bindings)})"

    def as_set(self) -> set[Binding]:
        return set(self.bindings)


def check_loop_constraint(n: int, constraints: Iterable[LoopConstraint]) -> bool:
    """Conjunction of every constraint applied to the count ``n``."""
    return all(c.accepts(n) for c in constraints)


def matches_condition(obj: Entity, cond: SearchCondition) -> bool:
    acc = cond.accessor
    if cond.op is None:
        if acc.kind == "attribute":
            return acc.key in obj.attributes
        return acc.key in obj.tags
    if acc.kind == "tag":
        actual = acc.key if acc.key in obj.tags else None
    else:
        actual = read_accessor(obj, acc)
    if cond.op == "!=":
        return actual != cond.value
    if actual is None:
        return False
    if cond.op == "=":
        return actual == cond.value
    if cond.op == "contains":
        return cond.value in actual
    if cond.op == "matches":
        return fnmatch.fnmatchcase(actual, cond.value)
    raise EvaluationError(f"unknown search operator {cond.op!r}")


def _filtered(objs, conditions):
    return [o for o in objs if all(matches_condition(o, c) for c in conditions)]


def element_matches(term: SourceElement, model: ModelDocument, registry=None) -> list[Entity]:
    """Entities passing the type filter and every search condition, ascending by id."""
    return _filtered(entities_of_type(model, term.type, registry), term.conditions)


def eval_element(term: SourceElement, model: ModelDocument, registry=None) -> BindingSet:
    matches = element_matches(term, model, registry)
    if not term.constraints:
        return BindingSet(({term.param: e.id} for e in matches), [term.param])
    if check_loop_constraint(len(matches), term.constraints):
        return BindingSet([{term.param: tuple(e.id for e in matches)}], [term.param])
    return BindingSet(params=[term.param])


def relationship_triples(term: SourceRelationship, model: ModelDocument, registry=None):
    """Candidate ``(source id, relation id, target id)`` triples, ascending by relation id."""
    sources = {e.id for e in element_matches(term.source, model, registry)}
    targets = {e.id for e in element_matches(term.target, model, registry)}
    same_end = term.source.param == term.target.param
    out = []
    for r in _filtered(relations_of_type(model, term.type, registry), term.conditions):
        if r.source in sources and r.target in targets and (not same_end or r.source == r.target):
            out.append((r.source, r.id, r.target))
    return out


def _group_key(pattern, triple):
    s, _, t = triple
    return {
        (0, 1, 1): (s,),
        (1, 1, 0): (t,),
        (0, 1, 0): (s, t),
        (1, 1, 1): (),
    }[pattern]


def eval_relationship(term: SourceRelationship, model: ModelDocument, registry=None) -> BindingSet:
    pattern = term.pattern
    if pattern not in LEGAL_PATTERNS:
        raise EvaluationError(f"relation {term.param}: illegal query pattern {pattern}")
    sp, rp, tp = term.source.param, term.param, term.target.param
    if sp == tp and pattern[0] != pattern[2]:
        raise EvaluationError(f"{sp} is used for both ends with different aggregation")
    params = [sp, rp, tp]
    triples = relationship_triples(term, model, registry)
    if pattern == (0, 0, 0):
        return BindingSet(({sp: s, rp: r, tp: t} for s, r, t in triples), params)

    groups: dict[tuple, list] = {}
    if pattern == (1, 1, 1):
        groups[()] = []
    for triple in triples:
        groups.setdefault(_group_key(pattern, triple), []).append(triple)

    out = []
    for group in groups.values():
        srcs = tuple(sorted({s for s, _, _ in group}))
        rels = tuple(sorted({r for _, r, _ in group}))
        tgts = tuple(sorted({t for _, _, t in group}))
        if not check_loop_constraint(len(rels), term.constraints):
            continue
        if pattern[0] and not check_loop_constraint(len(srcs), term.source.constraints):
            continue
        if pattern[2] and not check_loop_constraint(len(tgts), term.target.constraints):
            continue
        b = {rp: rels}
        b[sp] = srcs if pattern[0] else group[0][0]
        b[tp] = tgts if pattern[2] else group[0][2]
        out.append(b)
    return BindingSet(out, params)


def _join(left: Binding, right: Binding) -> Binding | None:
    for k in set(left).intersection(right):
        if left[k] != right[k]:
            return None
    return left.merge(right)


def combine(op: str, left: BindingSet, right: BindingSet) -> BindingSet:
    """Merge the binding sets of two sibling terms.

    AND joins on shared parameter names (cross product when none are
    shared); OR is the union; XOR keeps the bindings whose shared-parameter
    values occur in exactly one operand.
    """
    params = left.params | right.params
    if op == "AND":
        out = []
        for lb in left:
            for rb in right:
                j = _join(lb, rb)
                if j is not None:
                    out.append(j)
        return BindingSet(out, params)
    if op == "OR":
        return BindingSet(list(left) + list(right), params)
    if op == "XOR":
        shared = sorted(left.params & right.params)
        if not shared:
            if bool(left) != bool(right):
                return BindingSet(list(left) + list(right), params)
            return BindingSet(params=params)

        def values(b):
            return tuple(b.get(k) for k in shared)

        lvals = {values(b) for b in left}
        rvals = {values(b) for b in right}
        keep = [b for b in left if values(b) not in rvals] + [b for b in right if values(b) not in lvals]
        return BindingSet(keep, params)
    raise EvaluationError(f"unknown logic operator {op!r}")


def evaluate(term, model: ModelDocument, registry=None) -> BindingSet:
    """Evaluate any source term; groups fold their children left to right."""
    if isinstance(term, SourceElement):
        return eval_element(term, model, registry)
    if isinstance(term, SourceRelationship):
        return eval_relationship(term, model, registry)
    if isinstance(term, SourceGroup):
        result = evaluate(term.children[0], model, registry)
        for child in term.children[1:]:
            result = combine(term.op, result, evaluate(child, model, registry))
        return result
    raise EvaluationError(f"not a source term: {term!r}")
