"""Rule execution.

:class:`Transformation` runs a validated rule set over an immutable source
model.  Rules are matched against the source model only; generated objects
are reachable through transformation references, which execute the callee on
demand and are memoized through the ledger.  Execution repeats in file order
until a full pass adds no ledger record, then intermediate objects are
removed.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import warnings
from dataclasses import dataclass, field

from .errors import (
    EMTError, OverlapError, RuleValidationError, UnboundParameterError, ValueConflictError,
)
from .lang.ast import (
    Enrichment, ParamAccess, Reference, Rule, RuleSet, TargetElement, TargetRelation,
    default_output, parameter_kinds, rule_inputs, target_items, target_params,
)
from .lang.printer import format_accessor
from .lang.validate import errors, validate_rule_set
from .ledger import EXECUTED, ExecutionLedger, Record
from .matching import Binding, BindingSet, evaluate
from .model import Entity, ModelDocument, Relation
from .values import get_value, set_value

log = logging.getLogger(__name__)


class OverlapWarning(UserWarning):
    pass


@dataclass
class TargetStore:
    model: ModelDocument = field(default_factory=ModelDocument)
    intermediate: set[str] = field(default_factory=set)
    writes: dict[tuple[str, str], tuple[str, str]] = field(default_factory=dict)


def mint_id(rule: str, key: str, param: str, extra: str = "") -> str:
    digest = hashlib.sha256("\x00".join((rule, key, param, extra)).encode("utf-8")).hexdigest()
    return f"{rule}_{param}_{digest[:12]}"


def _ctx_key(ctx: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in sorted(ctx.items()))


def _compatible(*ctxs) -> dict | None:
    merged: dict = {}
    for c in ctxs:
        for k, v in c.items():
            if merged.setdefault(k, v) != v:
                return None
    return merged


class _Execution:
    """State of one rule firing: source bindings and target objects made so far."""

    def __init__(self, rule: Rule, binding: Binding, record: Record, source: ModelDocument):
        self.rule = rule
        self.binding = binding
        self.record = record
        self.kinds = parameter_kinds(rule.source)
        self.target_names = set(target_params(rule))
        self.source = source
        # target param -> [(object, expansion context)]
        self.targets: dict[str, list[tuple[Entity, dict]]] = {}

    def aggregated(self, param) -> bool:
        return self.kinds.get(param, False) and param in self.binding

    def members(self, param) -> list[Entity]:
        return [self.source[i] for i in self.binding.ids(param)]

    def context(self, expansion: dict) -> dict[str, Entity]:
        ctx = {}
        for p in self.binding:
            if p in expansion:
                ctx[p] = self.source[expansion[p]]
            elif not self.kinds.get(p, False):
                ctx[p] = self.source[self.binding[p]]
        for p, objs in self.targets.items():
            for obj, octx in objs:
                if _compatible(octx, expansion) is not None:
                    ctx[p] = obj
                    break
        return ctx

    def expansions(self, params) -> list[dict]:
        """One context per combination of members of the aggregated ``params``."""
        agg = sorted(p for p in params if self.aggregated(p))
        if not agg:
            return [{}]
        pools = [[(p, i) for i in self.binding.ids(p)] for p in agg]
        return [dict(combo) for combo in itertools.product(*pools)]


class Transformation:
    """One transformation run: rule set + source model -> target model + ledger."""

    def __init__(self, rule_set: RuleSet, model: ModelDocument, registry=None,
                 strict_overlap: bool = False, validate: bool = True):
        if validate:
            problems = errors(validate_rule_set(rule_set))
            if problems:
                raise RuleValidationError(problems)
        self.rule_set = rule_set
        self.source = model
        self.registry = registry
        self.strict_overlap = strict_overlap
        self.ledger = ExecutionLedger(rule_set.names)
        self.store = TargetStore(ModelDocument(metadata={"transformation": rule_set.name} if rule_set.name else {}))
        self.overlaps: list[tuple[str, str, list[str]]] = []
        self._bindings: dict[str, BindingSet] = {}
        self._executions: list[Record] = []

    # -- matching

    def bindings(self, rule: Rule | str) -> BindingSet:
        if isinstance(rule, str):
            rule = self.rule_set[rule]
        if rule.name not in self._bindings:
            self._bindings[rule.name] = evaluate(rule.source, self.source, self.registry)
        return self._bindings[rule.name]

    # -- execution

    def execute_rule(self, rule: Rule, binding: Binding) -> Record:
        """Fire ``rule`` for ``binding`` unless the ledger already has the record."""
        binding = binding if isinstance(binding, Binding) else Binding(binding)
        existing = self.ledger.get(rule.name, binding.key)
        if existing is not None:
            if existing.status != EXECUTED:
                raise EMTError(f"{rule.name} re-entered for {binding.key}")
            return existing
        record = self.ledger.open(rule.name, binding.key, binding)
        ex = _Execution(rule, binding, record, self.source)
        for item in target_items(rule.target):
            if isinstance(item, TargetElement):
                if item.placeholder:
                    self._placeholder(ex, item)
                else:
                    self._create_element(ex, item)
            elif isinstance(item, TargetRelation):
                self._create_relation(ex, item)
            elif isinstance(item, Enrichment):
                self._enrich(ex, item)
        record.status = EXECUTED
        self._executions.append(record)
        log.debug("executed %s %s -> %s", rule.name, binding.key, record.outputs)
        return record

    def _assignment_params(self, assigns) -> set[str]:
        return {p.param for a in assigns for p in a.value.parts if isinstance(p, ParamAccess)}

    def _apply(self, ex: _Execution, obj: Entity, assigns, expansion: dict):
        ctx = ex.context(expansion)
        for a in assigns:
            missing = [p for p in a.value.params() if p not in ctx]
            if missing:
                if any(p not in ex.kinds and p not in ex.target_names for p in missing):
                    raise UnboundParameterError(missing[0])
                continue  # parameter unbound in this binding (OR branch)
            value = get_value(None, a.value, ctx, lambda refs: self._resolve(ex, refs))
            if value is None:
                continue
            acc = format_accessor(a.accessor) if a.accessor.kind != "tag" else f"tag={value}"
            writer = (ex.rule.name, ex.binding.key)
            try:
                set_value(obj, a.accessor, value)
            except ValueConflictError as exc:
                first = self.store.writes.get((obj.id, acc))
                raise ValueConflictError(obj.id, acc, exc.old, value, first, writer) from None
            self.store.writes.setdefault((obj.id, acc), writer)

    def _add(self, ex: _Execution, obj: Entity, intermediate: bool):
        self.store.model.add(obj)
        if intermediate:
            self.store.intermediate.add(obj.id)
        self.ledger.note_created(ex.record, obj.id)

    def _output(self, ex: _Execution, param: str, obj: Entity, ctx: dict):
        ex.targets.setdefault(param, []).append((obj, ctx))
        ids = ex.record.outputs.setdefault(param, [])
        if obj.id not in ids:
            ids.append(obj.id)

    def _create_element(self, ex: _Execution, item: TargetElement):
        for expansion in ex.expansions(self._assignment_params(item.assignments)):
            oid = mint_id(ex.rule.name, ex.binding.key, item.param, _ctx_key(expansion))
            obj = Entity(oid, "", (item.type,))
            self._add(ex, obj, item.intermediate)
            self._output(ex, item.param, obj, expansion)
            self._apply(ex, obj, item.assignments, expansion)

    def _placeholder(self, ex: _Execution, item: TargetElement):
        for ref in item.refs:
            for a in ref.args:
                if a.param not in ex.binding:
                    raise UnboundParameterError(a.param)
        for obj in self._resolve(ex, item.refs):
            self._output(ex, item.param, obj, {})
            if item.assignments:
                self._apply(ex, obj, item.assignments, {})
                self.ledger.note_enriched(ex.record, obj.id)

    def _end_candidates(self, ex: _Execution, end) -> list[tuple[Entity, dict]] | None:
        if end.refs:
            return [(o, {}) for o in self._resolve(ex, end.refs)]
        p = end.param
        if p in ex.targets:
            return list(ex.targets[p])
        if p not in ex.binding:
            return None
        if ex.aggregated(p):
            return [(self._copy_through(ex, m), {p: m.id}) for m in ex.members(p)]
        return [(self._copy_through(ex, self.source[ex.binding[p]]), {})]

    def _copy_through(self, ex: _Execution, src: Entity) -> Entity:
        existing = self.store.model.get(src.id)
        if existing is not None:
            return existing
        obj = Entity(src.id, src.name, src.types, dict(src.attributes), src.tags, src.namespace)
        self._add(ex, obj, False)
        return obj

    def _create_relation(self, ex: _Execution, item: TargetRelation):
        srcs = self._end_candidates(ex, item.source)
        tgts = self._end_candidates(ex, item.target)
        if not srcs or not tgts:
            return
        for (s, sctx), (t, tctx) in itertools.product(srcs, tgts):
            for expansion in ex.expansions(self._assignment_params(item.assignments)):
                ctx = _compatible(sctx, tctx, expansion)
                if ctx is None:
                    continue
                extra = f"{_ctx_key(ctx)}|{s.id}|{t.id}"
                oid = mint_id(ex.rule.name, ex.binding.key, item.param, extra)
                rel = Relation(oid, "", (item.type,), source=s.id, target=t.id)
                self._add(ex, rel, item.intermediate)
                self._output(ex, item.param, rel, ctx)
                self._apply(ex, rel, item.assignments, ctx)

    def _enrich(self, ex: _Execution, item: Enrichment):
        for obj in self._resolve(ex, item.refs):
            for expansion in ex.expansions(self._assignment_params(item.assignments)):
                self._apply(ex, obj, item.assignments, expansion)
            self.ledger.note_enriched(ex.record, obj.id)

    # -- references

    def _resolve(self, ex: _Execution, refs) -> list[Entity]:
        out: dict[str, Entity] = {}
        for ref in refs:
            for obj in self.resolve_reference(ref, ex.binding, caller=ex.record):
                out[obj.id] = obj
        return [out[k] for k in sorted(out)]

    def resolve_reference(self, ref: Reference, args: Binding | dict, caller: Record | None = None) -> list[Entity]:
        """Objects the callee produced for the bindings matching ``args``.

        Positional arguments line up with the callee's single-valued source
        parameters, keyword arguments name a callee parameter.  A callee
        binding matches when, for every argument, the ids it holds for that
        parameter share at least one id with the caller's argument.  Matching
        bindings that have not fired yet are executed now.
        """
        callee = self.rule_set[ref.rule]
        output = ref.output or default_output(callee)
        inputs = rule_inputs(callee)
        wanted: list[tuple[str, set[str]]] = []
        positional = [a for a in ref.args if a.keyword is None]
        for name, a in zip(inputs, positional):
            if a.param not in args:
                return []
            wanted.append((name, set(_ids(args[a.param]))))
        for a in ref.args:
            if a.keyword is not None:
                if a.param not in args:
                    return []
                wanted.append((a.keyword, set(_ids(args[a.param]))))
        results: dict[str, Entity] = {}
        for b in self.bindings(callee):
            if all(name in b and set(b.ids(name)) & ids for name, ids in wanted):
                rec = self.execute_rule(callee, b)
                if caller is not None and (rec.rule, rec.key) not in caller.calls:
                    caller.calls.append((rec.rule, rec.key))
                for oid in rec.outputs.get(output, []):
                    obj = self.store.model.get(oid)
                    if obj is not None:
                        results[oid] = obj
        return [results[k] for k in sorted(results)]

    # -- driver

    def run(self) -> tuple[ModelDocument, ExecutionLedger]:
        while True:
            before = len(self.ledger)
            for rule in self.rule_set:
                for b in self.bindings(rule):
                    if not self.ledger.has(rule.name, b.key):
                        self.execute_rule(rule, b)
            if len(self.ledger) == before:
                break
        self.check_overlaps()
        return remove_intermediates(self.store, self.ledger), self.ledger

    def run_rule(self, name: str) -> list[Record]:
        """Fire one rule for all its bindings (callees run on demand)."""
        start = len(self._executions)
        rule = self.rule_set[name]
        for b in self.bindings(rule):
            self.execute_rule(rule, b)
        return self._executions[start:]

    def check_overlaps(self):
        seen: dict[tuple[str, str], list[str]] = {}
        for oid, (rule, key) in self.ledger.creator.items():
            obj = self.store.model.get(oid)
            if obj is None or oid in self.source or not obj.name:
                continue
            seen.setdefault((obj.type, obj.name), []).append(oid)
        for (type_, name), ids in sorted(seen.items()):
            if len(ids) < 2:
                continue
            ids.sort()
            entries = [f"{oid} <- {'/'.join(self.ledger.creator[oid])}" for oid in ids]
            msg = f"duplicate {type_} named {name!r}: " + ", ".join(entries)
            self.overlaps.append((type_, name, ids))
            if self.strict_overlap:
                raise OverlapError(msg)
            warnings.warn(msg, OverlapWarning, stacklevel=3)

    @property
    def executions(self) -> list[Record]:
        return list(self._executions)


def _ids(slot) -> tuple[str, ...]:
    return (slot,) if isinstance(slot, str) else tuple(slot)


def remove_intermediates(store: TargetStore, ledger: ExecutionLedger | None = None) -> ModelDocument:
    """Drop intermediate objects and relations left dangling by the removal.

    The ledger keeps the records and marks the removed ids.  Returns the
    final model with objects in ascending id order.
    """
    model = store.model
    doomed = {oid for oid in store.intermediate if oid in model}
    for oid in doomed:
        model.remove(oid)
    while True:
        dangling = [r.id for r in model.dangling_relations()]
        if not dangling:
            break
        for oid in dangling:
            model.remove(oid)
            doomed.add(oid)
    if ledger is not None:
        ledger.removed |= doomed
    store.intermediate -= doomed
    store.model = model.sorted()
    return store.model


def run_transformation(rule_set: RuleSet, model: ModelDocument, registry=None,
                       strict_overlap: bool = False) -> tuple[ModelDocument, ExecutionLedger]:
    """Execute ``rule_set`` on ``model`` to a fixpoint; returns target model and ledger."""
    return Transformation(rule_set, model, registry, strict_overlap).run()
