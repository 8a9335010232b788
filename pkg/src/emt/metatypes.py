"""Metatype aliases and implied types.

A :class:`MetatypeRegistry` maps synonyms onto canonical type names and
canonical names onto additional, higher-level types.  The default ArchiMate
registry adds the layer and the aspect of every element type, so a
``BusinessActor`` also answers to ``Business`` and ``Active``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigurationError

ACTIVE, BEHAVIOR, PASSIVE, RELATION = "Active", "Behavior", "Passive", "Relation"


@dataclass
class MetatypeRegistry:
    aliases: dict[str, str] = field(default_factory=dict)
    hierarchy: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.hierarchy = {k: tuple(dict.fromkeys(v)) for k, v in self.hierarchy.items()}
        self._canonical = self._build_canonical_map()

    def _build_canonical_map(self) -> dict[str, str]:
        resolved: dict[str, str] = {}
        for start in self.aliases:
            chain = [start]
            current = start
            while current in self.aliases:
                current = self.aliases[current]
                if current in chain:
                    cycle = chain[chain.index(current):] + [current]
                    raise ConfigurationError("alias cycle: " + " -> ".join(cycle))
                chain.append(current)
            resolved[start] = current
        return resolved

    def canonical(self, type_name: str) -> str:
        return self._canonical.get(type_name, type_name)

    def implied(self, type_name: str) -> tuple[str, ...]:
        """Transitive closure of the hierarchy below ``type_name`` (excluding it)."""
        out: list[str] = []
        stack = [self.canonical(type_name)]
        seen = {stack[0]}
        while stack:
            current = stack.pop(0)
            for parent in self.hierarchy.get(current, ()):
                parent = self.canonical(parent)
                if parent not in seen:
                    seen.add(parent)
                    out.append(parent)
                    stack.append(parent)
        return tuple(out)

    def knows(self, type_name: str) -> bool:
        c = self.canonical(type_name)
        return c in self.hierarchy or type_name in self.aliases

    def merged(self, other: "MetatypeRegistry") -> "MetatypeRegistry":
        """Union of both registries; ``other`` wins on alias clashes."""
        hierarchy = {k: list(v) for k, v in self.hierarchy.items()}
        for k, v in other.hierarchy.items():
            hierarchy.setdefault(k, [])
            hierarchy[k] += [t for t in v if t not in hierarchy[k]]
        return MetatypeRegistry({**self.aliases, **other.aliases}, hierarchy)

    def to_dict(self) -> dict:
        return {"aliases": dict(sorted(self.aliases.items())),
                "hierarchy": {k: list(v) for k, v in sorted(self.hierarchy.items())}}

    @classmethod
    def from_dict(cls, data: Mapping) -> "MetatypeRegistry":
        if not isinstance(data, Mapping):
            raise ConfigurationError("registry must be a JSON object")
        aliases = data.get("aliases", {})
        hierarchy = data.get("hierarchy", {})
        if not isinstance(aliases, Mapping) or not isinstance(hierarchy, Mapping):
            raise ConfigurationError('registry must map "aliases" and "hierarchy" to objects')
        return cls(dict(aliases), {k: tuple(v) for k, v in hierarchy.items()})

    @classmethod
    def load(cls, path) -> "MetatypeRegistry":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read registry {path}: {exc}") from exc
        return cls.from_dict(data)


def resolve_metatypes(declared: Iterable[str], registry: MetatypeRegistry | None = None) -> tuple[str, ...]:
    """Canonicalize ``declared`` and add every implied type.

    The result is duplicate free: declared types first (in the given order),
    then implied types in breadth-first order.
    """
    if registry is None:
        return tuple(dict.fromkeys(declared))
    out = [registry.canonical(t) for t in declared]
    for t in list(out):
        out.extend(registry.implied(t))
    return tuple(dict.fromkeys(out))


# ArchiMate 3 catalog: type -> (layer, aspect or None)
_LAYERS = {
    "Strategy": {
        "Resource": PASSIVE, "Capability": BEHAVIOR, "ValueStream": BEHAVIOR, "CourseOfAction": BEHAVIOR,
    },
    "Business": {
        "BusinessActor": ACTIVE, "BusinessRole": ACTIVE, "BusinessCollaboration": ACTIVE,
        "BusinessInterface": ACTIVE, "BusinessProcess": BEHAVIOR, "BusinessFunction": BEHAVIOR,
        "BusinessInteraction": BEHAVIOR, "BusinessEvent": BEHAVIOR, "BusinessService": BEHAVIOR,
        "BusinessObject": PASSIVE, "Contract": PASSIVE, "Representation": PASSIVE, "Product": None,
    },
    "Application": {
        "ApplicationComponent": ACTIVE, "ApplicationCollaboration": ACTIVE, "ApplicationInterface": ACTIVE,
        "ApplicationFunction": BEHAVIOR, "ApplicationInteraction": BEHAVIOR, "ApplicationProcess": BEHAVIOR,
        "ApplicationEvent": BEHAVIOR, "ApplicationService": BEHAVIOR, "DataObject": PASSIVE,
    },
    "Technology": {
        "Node": ACTIVE, "Device": ACTIVE, "SystemSoftware": ACTIVE, "TechnologyCollaboration": ACTIVE,
        "TechnologyInterface": ACTIVE, "Path": ACTIVE, "CommunicationNetwork": ACTIVE,
        "TechnologyFunction": BEHAVIOR, "TechnologyProcess": BEHAVIOR, "TechnologyInteraction": BEHAVIOR,
        "TechnologyEvent": BEHAVIOR, "TechnologyService": BEHAVIOR, "Artifact": PASSIVE,
    },
    "Physical": {
        "Equipment": ACTIVE, "Facility": ACTIVE, "DistributionNetwork": ACTIVE, "Material": PASSIVE,
    },
    "Motivation": dict.fromkeys([
        "Stakeholder", "Driver", "Assessment", "Goal", "Outcome", "Principle", "Requirement",
        "Constraint", "Meaning", "Value"]),
    "Implementation": {
        "WorkPackage": BEHAVIOR, "Deliverable": PASSIVE, "ImplementationEvent": BEHAVIOR,
        "Plateau": None, "Gap": None,
    },
    "Other": {"Location": None, "Grouping": None, "AndJunction": None, "OrJunction": None},
}

ARCHIMATE_RELATIONSHIPS = (
    "Composition", "Aggregation", "Assignment", "Realization", "Serving", "Access",
    "Influence", "Triggering", "Flow", "Specialization", "Association",
)


def _spaced(camel: str) -> str:
    return re.sub(r"(?<=[a-z])(?=[A-Z])", " ", camel)


def archimate_registry() -> MetatypeRegistry:
    """Default registry for ArchiMate 3 content.

    Element types imply their layer and aspect; ``<X>Relationship`` types
    imply ``Relation``.  Prefixed (``archimate:BusinessActor``) and spaced
    (``Business Actor``) spellings, as well as the exchange-format short
    relationship names (``Aggregation``), are aliases.
    """
    aliases: dict[str, str] = {}
    hierarchy: dict[str, tuple[str, ...]] = {}
    for layer, members in _LAYERS.items():
        for name, aspect in members.items():
            hierarchy[name] = (layer,) if aspect is None else (layer, aspect)
            aliases["archimate:" + name] = name
            if _spaced(name) != name:
                aliases[_spaced(name)] = name
    for short in ARCHIMATE_RELATIONSHIPS:
        full = short + "Relationship"
        hierarchy[full] = (RELATION,)
        for alias in (short, "archimate:" + short, "archimate:" + full, _spaced(full)):
            aliases[alias] = full
    return MetatypeRegistry(aliases, hierarchy)
