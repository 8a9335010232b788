"""BPMN 2.0 XML reader/writer for a process-structure subset.

Supported target vocabulary:

========================  =============================================
model type                BPMN
========================  =============================================
``Participant/Pool``      ``participant`` + its ``process``
``Lane``                  ``lane`` in the pool process's ``laneSet``
``Process``               ``process``
``SubProcess``            ``subProcess``
``Task``                  ``task``
``Sequence Flow``         ``sequenceFlow`` (sourceRef/targetRef)
``Data Association``      ``association``
``Nested Element``        XML containment (child -> parent relation)
========================  =============================================

Attributes, tags and namespaces are not written.  Flow nodes without a
container go into a ``default_process``; pools without a nested ``Process``
get an implicit ``<pool id>_process``.  The reader reverses all of this and
synthesizes ``Nested Element`` relations from containment.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from ..errors import ModelFormatError, UnsupportedVocabularyError
from ..model import Entity, ModelDocument, Relation

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"
POOL, LANE, PROCESS, SUBPROCESS, TASK = "Participant/Pool", "Lane", "Process", "SubProcess", "Task"
SEQUENCE_FLOW, DATA_ASSOCIATION, NESTED = "Sequence Flow", "Data Association", "Nested Element"

ENTITY_TYPES = (POOL, LANE, PROCESS, SUBPROCESS, TASK)
RELATION_TYPES = (SEQUENCE_FLOW, DATA_ASSOCIATION, NESTED)
ALIASES = {
    "Participant / Pool": POOL, "Participant": POOL, "Pool": POOL,
    "Sub-Process": SUBPROCESS, "Subprocess": SUBPROCESS, "SequenceFlow": SEQUENCE_FLOW,
    "DataAssociation": DATA_ASSOCIATION, "NestedElement": NESTED,
}
TASK_TAGS = ("task", "userTask", "serviceTask", "manualTask", "scriptTask", "sendTask",
             "receiveTask", "businessRuleTask")
DEFAULT_PROCESS = "default_process"

ET.register_namespace("", BPMN_NS)


def _q(tag: str) -> str:
    return f"{{{BPMN_NS}}}{tag}"


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def bpmn_type(obj: Entity, vocabulary) -> str | None:
    for t in obj.types:
        t = ALIASES.get(t, t)
        if t in vocabulary:
            return t
    return None


def _pool_process_id(pool_id: str) -> str:
    return f"{pool_id}_process"


class _Writer:
    def __init__(self, doc: ModelDocument):
        self.doc = doc
        self.kind: dict[str, str] = {}
        unsupported = set()
        for e in doc.entities.values():
            k = bpmn_type(e, ENTITY_TYPES)
            if k is None:
                unsupported.add(e.type)
            self.kind[e.id] = k
        for r in doc.relations.values():
            k = bpmn_type(r, RELATION_TYPES)
            if k is None:
                unsupported.add(r.type)
            self.kind[r.id] = k
        if unsupported:
            raise UnsupportedVocabularyError(unsupported)

        self.parent: dict[str, str] = {}
        for r in sorted(doc.relations.values(), key=lambda r: r.id):
            if self.kind[r.id] == NESTED and r.source not in self.parent:
                self.parent[r.source] = r.target

        self.pools = self._ids(POOL)
        self.pool_process = {}
        for p in self.pools:
            nested = [c for c in self._ids(PROCESS) if self.parent.get(c) == p]
            self.pool_process[p] = nested[0] if nested else _pool_process_id(p)
        self.process_pool = {proc: pool for pool, proc in self.pool_process.items()}

    def _ids(self, kind) -> list[str]:
        return sorted(i for i in self.doc.entities if self.kind[i] == kind)

    def container(self, node_id: str) -> str:
        """Id of the XML container (process or subProcess) holding a flow node."""
        p = self.parent.get(node_id)
        k = self.kind.get(p)
        if k in (SUBPROCESS, PROCESS):
            return p
        if k == POOL:
            return self.pool_process[p]
        if k == LANE:
            pool = self.parent.get(p)
            if self.kind.get(pool) == POOL:
                return self.pool_process[pool]
        return DEFAULT_PROCESS

    def chain(self, node_id: str) -> list[str]:
        out = []
        current = node_id
        while True:
            c = self.container(current)
            if c in out:
                break
            out.append(c)
            if self.kind.get(c) != SUBPROCESS:
                break
            current = c
        return out

    def flow_container(self, rel: Relation) -> str:
        a, b = self.chain(rel.source), self.chain(rel.target)
        for c in a:
            if c in b:
                return c
        return a[-1] if a else DEFAULT_PROCESS

    def write(self) -> bytes:
        root = ET.Element(_q("definitions"), {"id": "definitions", "targetNamespace": "urn:emt"})
        nodes = self._ids(TASK) + self._ids(SUBPROCESS)
        by_container: dict[str, list[str]] = {}
        for n in sorted(nodes):
            by_container.setdefault(self.container(n), []).append(n)
        flows: dict[str, list[Relation]] = {}
        for r in sorted(self.doc.relations.values(), key=lambda r: r.id):
            if self.kind[r.id] in (SEQUENCE_FLOW, DATA_ASSOCIATION):
                flows.setdefault(self.flow_container(r), []).append(r)
        lanes_by_pool: dict[str, list[str]] = {}
        for lane in self._ids(LANE):
            pool = self.parent.get(lane)
            if self.kind.get(pool) != POOL:
                raise ModelFormatError(f"lane {lane} is not nested in a pool")
            lanes_by_pool.setdefault(pool, []).append(lane)

        if self.pools:
            collab = ET.SubElement(root, _q("collaboration"), {"id": "collaboration"})
            for p in self.pools:
                attrs = {"id": p}
                if self.doc[p].name:
                    attrs["name"] = self.doc[p].name
                attrs["processRef"] = self.pool_process[p]
                ET.SubElement(collab, _q("participant"), attrs)

        processes = set(self.pool_process.values()) | set(self._ids(PROCESS))
        if DEFAULT_PROCESS in by_container or DEFAULT_PROCESS in flows:
            processes.add(DEFAULT_PROCESS)
        for proc in sorted(processes):
            attrs = {"id": proc}
            if proc in self.doc and self.doc[proc].name:
                attrs["name"] = self.doc[proc].name
            attrs["isExecutable"] = "false"
            el = ET.SubElement(root, _q("process"), attrs)
            pool = self.process_pool.get(proc)
            if pool in lanes_by_pool:
                lane_set = ET.SubElement(el, _q("laneSet"), {"id": f"{proc}_lanes"})
                for lane in lanes_by_pool[pool]:
                    lattrs = {"id": lane}
                    if self.doc[lane].name:
                        lattrs["name"] = self.doc[lane].name
                    lane_el = ET.SubElement(lane_set, _q("lane"), lattrs)
                    for n in sorted(nodes):
                        if self.parent.get(n) == lane:
                            ET.SubElement(lane_el, _q("flowNodeRef")).text = n
            self._fill(el, proc, by_container, flows)
        ET.indent(root, space="  ")
        return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"

    def _fill(self, el, container, by_container, flows):
        for n in by_container.get(container, []):
            obj = self.doc[n]
            tag = "subProcess" if self.kind[n] == SUBPROCESS else "task"
            attrs = {"id": n}
            if obj.name:
                attrs["name"] = obj.name
            child = ET.SubElement(el, _q(tag), attrs)
            if tag == "subProcess":
                self._fill(child, n, by_container, flows)
        for r in flows.get(container, []):
            tag = "sequenceFlow" if self.kind[r.id] == SEQUENCE_FLOW else "association"
            attrs = {"id": r.id}
            if r.name:
                attrs["name"] = r.name
            attrs.update(sourceRef=r.source, targetRef=r.target)
            ET.SubElement(el, _q(tag), attrs)


def save_bpmn(doc: ModelDocument) -> bytes:
    """Serialize the supported subset; raises for other types."""
    return _Writer(doc).write()


def _nested(doc: ModelDocument, child: str, parent: str):
    doc.add(Relation(f"{child}__in__{parent}", "", (NESTED,), source=child, target=parent))


def load_bpmn(data: bytes | str) -> ModelDocument:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise ModelFormatError(f"invalid XML: {exc}") from exc
    if _local(root.tag) != "definitions":
        raise ModelFormatError(f"expected <definitions>, found <{_local(root.tag)}>")
    doc = ModelDocument(metadata={"format": "bpmn"})
    pending_relations: list[Relation] = []
    nesting: list[tuple[str, str]] = []

    process_owner: dict[str, str] = {}
    for collab in (c for c in root if _local(c.tag) == "collaboration"):
        for part in (p for p in collab if _local(p.tag) == "participant"):
            doc.add(Entity(part.get("id"), part.get("name", ""), (POOL,)))
            if part.get("processRef"):
                process_owner[part.get("processRef")] = part.get("id")

    def walk(el, container: str | None):
        lane_of: dict[str, str] = {}
        for child in el:
            tag = _local(child.tag)
            if tag == "laneSet":
                for lane in (ln for ln in child if _local(ln.tag) == "lane"):
                    doc.add(Entity(lane.get("id"), lane.get("name", ""), (LANE,)))
                    if container:
                        nesting.append((lane.get("id"), container))
                    for ref in (r for r in lane if _local(r.tag) == "flowNodeRef"):
                        lane_of[(ref.text or "").strip()] = lane.get("id")
        for child in el:
            tag = _local(child.tag)
            cid = child.get("id")
            if tag in TASK_TAGS or tag == "subProcess":
                doc.add(Entity(cid, child.get("name", ""), (SUBPROCESS if tag == "subProcess" else TASK,)))
                parent = lane_of.get(cid, container)
                if parent:
                    nesting.append((cid, parent))
                if tag == "subProcess":
                    walk(child, cid)
            elif tag in ("sequenceFlow", "association"):
                kind = SEQUENCE_FLOW if tag == "sequenceFlow" else DATA_ASSOCIATION
                pending_relations.append(Relation(cid, child.get("name", ""), (kind,),
                                                  source=child.get("sourceRef", ""),
                                                  target=child.get("targetRef", "")))

    for proc in (p for p in root if _local(p.tag) == "process"):
        pid, name = proc.get("id"), proc.get("name", "")
        owner = process_owner.get(pid)
        if owner and pid == _pool_process_id(owner) and not name:
            container = owner
        elif pid == DEFAULT_PROCESS and not name:
            container = None
        else:
            doc.add(Entity(pid, name, (PROCESS,)))
            if owner:
                nesting.append((pid, owner))
            container = pid
        walk(proc, container)

    for r in pending_relations:
        doc.add(r)
    for child, parent in nesting:
        _nested(doc, child, parent)
    doc.check_integrity()
    return doc
