"""Reading and writing object values through accessors.

``get_value`` evaluates a :class:`~emt.lang.ast.ValueExpression` against
bound objects; ``set_value`` writes one accessor of a target object and
refuses to silently overwrite a different value.
"""

from __future__ import annotations

from typing import Callable, Mapping

from .errors import EvaluationError, UnboundParameterError, ValueConflictError
from .lang.ast import Accessor, Literal, ParamAccess, RefAccess, ValueExpression
from .lang.parser import parse_value_expression
from .model import Entity


def read_accessor(obj: Entity, acc: Accessor) -> str | None:
    if acc.kind == "name":
        return obj.name
    if acc.kind == "id":
        return obj.id
    if acc.kind == "namespace":
        return obj.namespace
    if acc.kind == "type":
        return obj.type
    if acc.kind == "attribute":
        return obj.attributes.get(acc.key)
    if acc.kind == "tag":
        return "true" if acc.key in obj.tags else "false"
    raise EvaluationError(f"unknown accessor {acc.kind!r}")


def get_value(obj: Entity | None, expr: ValueExpression | str, context: Mapping[str, Entity] | None = None,
              resolve_refs: Callable | None = None) -> str | None:
    """Evaluate ``expr``; ``None`` when any part is absent.

    ``context`` maps parameter names to bound objects.  ``obj``, when given,
    is what a lone ``A.name``-style expression falls back to if ``A`` is not
    in the context.  ``resolve_refs(refs)`` returns the objects produced by
    transformation references and is required only for ``ref(...)`` parts.
    """
    if isinstance(expr, str):
        expr = parse_value_expression(expr)
    context = context or {}
    out = []
    for part in expr.parts:
        if isinstance(part, Literal):
            out.append(part.text)
            continue
        if isinstance(part, ParamAccess):
            target = context.get(part.param)
            if target is None:
                if obj is not None and not context:
                    target = obj
                else:
                    raise UnboundParameterError(part.param)
        elif isinstance(part, RefAccess):
            if resolve_refs is None:
                raise EvaluationError("references cannot be resolved in this context")
            results = resolve_refs(part.refs)
            if not results:
                return None
            target = min(results, key=lambda o: o.id)
        else:
            raise EvaluationError(f"unknown operand {part!r}")
        value = read_accessor(target, part.accessor)
        if value is None:
            return None
        out.append(value)
    return "".join(out)


def set_value(obj: Entity, accessor: Accessor | str, value: str) -> Entity:
    """Write ``value`` through ``accessor`` on ``obj`` and return it.

    Repeating an identical write is a no-op; a different value for an
    accessor that already holds one raises :class:`ValueConflictError`.
    Tags accumulate and never conflict.
    """
    if isinstance(accessor, str):
        accessor = Accessor(accessor)
    kind = accessor.kind
    if kind == "name":
        if obj.name and obj.name != value:
            raise ValueConflictError(obj.id, "name", obj.name, value)
        obj.name = value
    elif kind == "namespace":
        if obj.namespace is not None and obj.namespace != value:
            raise ValueConflictError(obj.id, "namespace", obj.namespace, value)
        obj.namespace = value
    elif kind == "attribute":
        old = obj.attributes.get(accessor.key)
        if old is not None and old != value:
            raise ValueConflictError(obj.id, f'attribute("{accessor.key}")', old, value)
        obj.attributes[accessor.key] = value
    elif kind == "tag":
        if value not in obj.tags:
            obj.tags = obj.tags + (value,)
    else:
        raise EvaluationError(f"cannot assign to {kind!r}")
    return obj
