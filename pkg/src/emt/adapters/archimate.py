"""Reader for the ArchiMate Model Exchange Format (elements, relationships, properties).

Views, organizations and diagram data are ignored.  Element and relationship
types are expanded through a metatype registry, so a ``BusinessActor`` is also
typed ``Business`` and ``Active`` and an ``Aggregation`` relationship becomes
``AggregationRelationship`` + ``Relation``.
"""

from __future__ import annotations

import warnings
import xml.etree.ElementTree as ET

from ..errors import ModelFormatError, ModelIntegrityError
from ..metatypes import MetatypeRegistry, archimate_registry, resolve_metatypes
from ..model import Entity, ModelDocument, Relation

XSI_TYPE = "{http://www.w3.org/2001/XMLSchema-instance}type"


class UnknownTypeWarning(UserWarning):
    pass


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(node, name):
    return [c for c in node if _local(c.tag) == name]


def _child(node, name):
    found = _children(node, name)
    return found[0] if found else None


def _text(node, name) -> str:
    """First ``name`` child's text, preferring English when several languages exist."""
    found = _children(node, name)
    if not found:
        return ""
    lang = "{http://www.w3.org/XML/1998/namespace}lang"
    for n in found:
        if n.get(lang, "en").startswith("en"):
            return (n.text or "").strip()
    return (found[0].text or "").strip()


def _type_of(node) -> str:
    t = node.get(XSI_TYPE) or node.get("type") or ""
    return t.split(":", 1)[-1] if ":" in t and not t.startswith("archimate:") else t


def load_archimate(data: bytes | str, registry: MetatypeRegistry | None = None) -> ModelDocument:
    registry = registry or archimate_registry()
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise ModelFormatError(f"invalid XML: {exc}") from exc
    if _local(root.tag) != "model":
        raise ModelFormatError(f"expected <model>, found <{_local(root.tag)}>")

    prop_names = {}
    defs = _child(root, "propertyDefinitions")
    for pd in _children(defs, "propertyDefinition") if defs is not None else []:
        prop_names[pd.get("identifier")] = _text(pd, "name") or pd.get("name") or pd.get("identifier")

    def attributes(node) -> dict[str, str]:
        props = _child(node, "properties")
        out = {}
        for p in _children(props, "property") if props is not None else []:
            key = prop_names.get(p.get("propertyDefinitionRef") or p.get("identifierRef"))
            if key:
                out[key] = _text(p, "value")
        doc = _text(node, "documentation")
        if doc:
            out["documentation"] = doc
        return out

    def types(node) -> tuple[str, ...]:
        declared = _type_of(node)
        if not declared:
            raise ModelFormatError(f"{node.get('identifier')}: missing xsi:type")
        if not registry.knows(declared):
            warnings.warn(f"unknown ArchiMate type {declared!r} kept verbatim", UnknownTypeWarning, stacklevel=4)
        return resolve_metatypes([declared], registry)

    doc = ModelDocument(metadata={"format": "archimate", "name": _text(root, "name"),
                                  "identifier": root.get("identifier", "")})
    try:
        elements = _child(root, "elements")
        for node in _children(elements, "element") if elements is not None else []:
            doc.add(Entity(node.get("identifier"), _text(node, "name"), types(node), attributes(node)))
        rels = _child(root, "relationships")
        for node in _children(rels, "relationship") if rels is not None else []:
            doc.add(Relation(node.get("identifier"), _text(node, "name"), types(node), attributes(node),
                             source=node.get("source", ""), target=node.get("target", "")))
    except ModelIntegrityError as exc:
        raise ModelFormatError(str(exc)) from exc
    doc.check_integrity()
    return doc
