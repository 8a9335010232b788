"""Serialization-neutral model representation.

A :class:`ModelDocument` holds entities and relations.  Both carry an id, a
name, an ordered, duplicate-free tuple of metatypes (the direct metatype
first), text attributes, tags and an optional namespace.  Relations point at
their source and target entity by id.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

from .errors import ModelIntegrityError

WILDCARD = "*"


def _unique(items: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(items))


@dataclass
class Entity:
    id: str
    name: str = ""
    types: tuple[str, ...] = ()
    attributes: dict[str, str] = field(default_factory=dict)
    tags: tuple[str, ...] = ()
    namespace: str | None = None

    def __post_init__(self):
        self.types = _unique(self.types)
        self.tags = _unique(self.tags)
        if not self.types:
            raise ModelIntegrityError(f"{self.id}: at least one metatype is required")

    @property
    def type(self) -> str:
        """The direct metatype."""
        return self.types[0]

    def has_type(self, type_name: str) -> bool:
        return type_name == WILDCARD or type_name in self.types

    def copy(self):
        return replace(self, attributes=dict(self.attributes))


@dataclass
class Relation(Entity):
    source: str = ""
    target: str = ""

    @property
    def endpoints(self) -> tuple[str, str]:
        return self.source, self.target


class ModelDocument:
    """Container for entities and relations, keyed by id.

    Insertion order is kept so that serializers can reproduce their input;
    queries always return objects in ascending id order.
    """

    def __init__(self, entities: Iterable[Entity] = (), relations: Iterable[Relation] = (),
                 metadata: dict | None = None):
        self.entities: dict[str, Entity] = {}
        self.relations: dict[str, Relation] = {}
        self.metadata: dict = dict(metadata or {})
        for e in entities:
            self.add(e)
        for r in relations:
            self.add(r)

    def add(self, obj: Entity) -> Entity:
        if obj.id in self.entities or obj.id in self.relations:
            raise ModelIntegrityError(f"duplicate id {obj.id!r}")
        if isinstance(obj, Relation):
            self.relations[obj.id] = obj
        else:
            self.entities[obj.id] = obj
        return obj

    def remove(self, object_id: str) -> Entity:
        if object_id in self.entities:
            return self.entities.pop(object_id)
        return self.relations.pop(object_id)

    def get(self, object_id: str) -> Entity | None:
        return self.entities.get(object_id) or self.relations.get(object_id)

    def __getitem__(self, object_id: str) -> Entity:
        obj = self.get(object_id)
        if obj is None:
            raise KeyError(object_id)
        return obj

    def __contains__(self, object_id) -> bool:
        return object_id in self.entities or object_id in self.relations

    def __iter__(self) -> Iterator[Entity]:
        yield from self.entities.values()
        yield from self.relations.values()

    def __len__(self) -> int:
        return len(self.entities) + len(self.relations)

    def __eq__(self, other):
        if not isinstance(other, ModelDocument):
            return NotImplemented
        return (self.entities == other.entities and self.relations == other.relations
                and self.metadata == other.metadata)

    def __repr__(self):
        return f"ModelDocument({len(self.entities)} entities, {len(self.relations)} relations)"

    def dangling_relations(self) -> list[Relation]:
        return [r for r in self.relations.values()
                if r.source not in self.entities or r.target not in self.entities]

    def check_integrity(self) -> None:
        """Raise :class:`ModelIntegrityError` if a relation endpoint does not resolve."""
        bad = self.dangling_relations()
        if bad:
            details = ", ".join(f"{r.id} ({r.source} -> {r.target})" for r in bad)
            raise ModelIntegrityError(f"unresolved relation endpoints: {details}")

    def sorted(self) -> "ModelDocument":
        """Copy with objects inserted in ascending id order."""
        return ModelDocument(
            sorted((e.copy() for e in self.entities.values()), key=lambda e: e.id),
            sorted((r.copy() for r in self.relations.values()), key=lambda r: r.id),
            self.metadata,
        )


def _canonical(type_name: str, registry) -> str:
    if registry is None or type_name == WILDCARD:
        return type_name
    return registry.canonical(type_name)


def entities_of_type(model: ModelDocument, type_name: str, registry=None) -> list[Entity]:
    """Entities carrying ``type_name`` among their metatypes, ascending by id.

    ``*`` selects every entity.  An unknown type yields an empty list.
    """
    t = _canonical(type_name, registry)
    return sorted((e for e in model.entities.values() if e.has_type(t)), key=lambda e: e.id)


def relations_of_type(model: ModelDocument, type_name: str, registry=None) -> list[Relation]:
    t = _canonical(type_name, registry)
    return sorted((r for r in model.relations.values() if r.has_type(t)), key=lambda r: r.id)
