"""The engine's native JSON model format."""

from __future__ import annotations

import json

import jsonschema

from ..errors import ModelFormatError, ModelIntegrityError
from ..model import Entity, ModelDocument, Relation

_OBJECT = {
    "type": "object",
    "required": ["id", "types"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "name": {"type": "string"},
        "types": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "attributes": {"type": "object", "additionalProperties": {"type": "string"}},
        "tags": {"type": "array", "items": {"type": "string"}},
        "namespace": {"type": ["string", "null"]},
    },
}

SCHEMA = {
    "type": "object",
    "required": ["entities", "relations"],
    "properties": {
        "entities": {"type": "array", "items": _OBJECT},
        "relations": {
            "type": "array",
            "items": {
                **_OBJECT,
                "required": ["id", "types", "source", "target"],
                "properties": {**_OBJECT["properties"], "source": {"type": "string"}, "target": {"type": "string"}},
            },
        },
        "metadata": {"type": "object"},
    },
}

_VALIDATOR = jsonschema.Draft7Validator(SCHEMA)


def _path(error) -> str:
    out = ""
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "$"


def _common(d: dict) -> dict:
    return dict(id=d["id"], name=d.get("name", ""), types=tuple(d["types"]),
                attributes=dict(d.get("attributes", {})), tags=tuple(d.get("tags", ())),
                namespace=d.get("namespace"))


def from_dict(data) -> ModelDocument:
    error = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(data))
    if error is not None:
        raise ModelFormatError(error.message, _path(error))
    doc = ModelDocument(metadata=data.get("metadata", {}))
    try:
        for e in data["entities"]:
            doc.add(Entity(**_common(e)))
        for r in data["relations"]:
            doc.add(Relation(**_common(r), source=r["source"], target=r["target"]))
    except ModelIntegrityError as exc:
        raise ModelFormatError(str(exc)) from exc
    doc.check_integrity()
    return doc


def load_generic(data: bytes | str) -> ModelDocument:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        parsed = json.loads(data)
    except ValueError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from exc
    return from_dict(parsed)


def _obj(o: Entity) -> dict:
    return {
        "attributes": dict(sorted(o.attributes.items())),
        "id": o.id,
        "name": o.name,
        "namespace": o.namespace,
        "tags": list(o.tags),
        "types": list(o.types),
    }


def to_dict(doc: ModelDocument) -> dict:
    return {
        "entities": [_obj(e) for e in doc.entities.values()],
        "metadata": doc.metadata,
        "relations": [{**_obj(r), "source": r.source, "target": r.target} for r in doc.relations.values()],
    }


def save_generic(doc: ModelDocument) -> bytes:
    """UTF-8 JSON with sorted keys; objects keep document order."""
    return (json.dumps(to_dict(doc), indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")
