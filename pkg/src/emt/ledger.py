"""Assignment tables: which rule produced which target object from which input.

Each rule owns a table of records keyed by the canonical binding key.  A
record lists the input binding, the objects bound to each target parameter,
the objects it created or enriched and the records of other rules it called
through transformation references.  A reverse index maps every target object
to its creating record.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .errors import TraceNotFoundError

PENDING, EXECUTED = "pending", "executed"


@dataclass
class Record:
    rule: str
    key: str
    binding: dict
    status: str = PENDING
    outputs: dict[str, list[str]] = field(default_factory=dict)
    created: list[str] = field(default_factory=list)
    enriched: list[str] = field(default_factory=list)
    calls: list[tuple[str, str]] = field(default_factory=list)

    @property
    def sources(self) -> list[str]:
        ids = set()
        for v in self.binding.values():
            ids.update([v] if isinstance(v, str) else v)
        return sorted(ids)

    def to_dict(self) -> dict:
        return {
            "binding": {k: (v if isinstance(v, str) else list(v)) for k, v in sorted(self.binding.items())},
            "calls": [{"rule": r, "binding": k} for r, k in self.calls],
            "created": list(self.created),
            "enriched": list(self.enriched),
            "key": self.key,
            "outputs": {k: list(v) for k, v in sorted(self.outputs.items())},
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, rule: str, data: dict) -> "Record":
        return cls(
            rule=rule, key=data["key"], binding=dict(data["binding"]), status=data["status"],
            outputs={k: list(v) for k, v in data.get("outputs", {}).items()},
            created=list(data.get("created", [])), enriched=list(data.get("enriched", [])),
            calls=[(c["rule"], c["binding"]) for c in data.get("calls", [])],
        )


@dataclass
class Provenance:
    object_id: str
    rule: str
    binding: dict
    sources: list[str]
    removed: bool = False
    enrichments: list[tuple[str, str]] = field(default_factory=list)
    chain: list["Provenance"] = field(default_factory=list)
    key: str = ""

    def lines(self, indent: int = 0) -> list[str]:
        binding = ", ".join(f"{k}={v if isinstance(v, str) else list(v)}" for k, v in sorted(self.binding.items()))
        if indent == 0:
            out = [f"{self.object_id}: created by {self.rule} {{{binding}}}" + (" [removed]" if self.removed else "")]
            if self.sources:
                out.append(f"  sources: {', '.join(self.sources)}")
            out += [f"  enriched by {rule} {{{key}}}" for rule, key in self.enrichments]
        else:
            out = ["  " * indent + f"calls {self.rule} {{{binding}}}"]
        for sub in self.chain:
            out += sub.lines(indent + 1)
        return out

    def rules(self) -> list[str]:
        """Rule names along the whole chain, depth first."""
        out = [self.rule]
        for sub in self.chain:
            out += sub.rules()
        return out


class ExecutionLedger:
    def __init__(self, rule_names=()):
        self.tables: dict[str, dict[str, Record]] = {name: {} for name in rule_names}
        self.creator: dict[str, tuple[str, str]] = {}
        self.enrichers: dict[str, list[tuple[str, str]]] = {}
        self.removed: set[str] = set()

    def __len__(self):
        return sum(len(t) for t in self.tables.values())

    def records(self, rule: str | None = None) -> list[Record]:
        if rule is not None:
            return list(self.tables.get(rule, {}).values())
        return [r for t in self.tables.values() for r in t.values()]

    def get(self, rule: str, key: str) -> Record | None:
        return self.tables.get(rule, {}).get(key)

    def has(self, rule: str, key: str) -> bool:
        return self.get(rule, key) is not None

    def open(self, rule: str, key: str, binding) -> Record:
        table = self.tables.setdefault(rule, {})
        if key in table:
            raise ValueError(f"{rule} already has a record for {key}")
        rec = Record(rule, key, dict(binding))
        table[key] = rec
        return rec

    def note_created(self, record: Record, object_id: str):
        record.created.append(object_id)
        self.creator[object_id] = (record.rule, record.key)

    def note_enriched(self, record: Record, object_id: str):
        if object_id not in record.enriched:
            record.enriched.append(object_id)
        entry = (record.rule, record.key)
        lst = self.enrichers.setdefault(object_id, [])
        if entry not in lst:
            lst.append(entry)

    def rules_fired(self) -> list[str]:
        return [name for name, t in self.tables.items() if t]

    # -- serialization

    def to_dict(self) -> dict:
        provenance = {}
        for oid in sorted(self.creator):
            rule, key = self.creator[oid]
            rec = self.tables[rule][key]
            provenance[oid] = {
                "binding": key,
                "enrichments": [{"rule": r, "binding": k} for r, k in self.enrichers.get(oid, [])],
                "removed": oid in self.removed,
                "rule": rule,
                "sources": rec.sources,
            }
        return {
            "provenance": provenance,
            "rules": [
                {"name": name, "records": [table[k].to_dict() for k in sorted(table)]}
                for name, table in self.tables.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target_id", "rule", "binding", "sources", "role", "status", "removed"])
        for name, table in self.tables.items():
            for key in sorted(table):
                rec = table[key]
                rows = [(oid, "created") for oid in rec.created] + [(oid, "enriched") for oid in rec.enriched]
                if not rows:
                    rows = [("", "none")]
                for oid, role in rows:
                    w.writerow([oid, name, key, " ".join(rec.sources), role, rec.status,
                                str(oid in self.removed).lower()])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, data: dict) -> "ExecutionLedger":
        ledger = cls()
        for table in data.get("rules", []):
            name = table["name"]
            ledger.tables[name] = {}
            for rd in table["records"]:
                rec = Record.from_dict(name, rd)
                ledger.tables[name][rec.key] = rec
                for oid in rec.created:
                    ledger.creator[oid] = (name, rec.key)
                for oid in rec.enriched:
                    ledger.enrichers.setdefault(oid, []).append((name, rec.key))
        for oid, entry in data.get("provenance", {}).items():
            if entry.get("removed"):
                ledger.removed.add(oid)
        return ledger

    @classmethod
    def from_json(cls, text: str) -> "ExecutionLedger":
        return cls.from_dict(json.loads(text))


def _chain(ledger: ExecutionLedger, rec: Record, seen: set) -> list[Provenance]:
    out = []
    for rule, key in rec.calls:
        if (rule, key) in seen:
            continue
        seen.add((rule, key))
        callee = ledger.get(rule, key)
        if callee is None:
            continue
        out.append(Provenance("", rule, callee.binding, callee.sources,
                              chain=_chain(ledger, callee, seen), key=key))
    return out


def trace_lookup(ledger: ExecutionLedger, object_id: str) -> Provenance:
    """Creating rule, binding and source ids of ``object_id``, with the records it called."""
    if object_id not in ledger.creator:
        raise TraceNotFoundError(object_id)
    rule, key = ledger.creator[object_id]
    rec = ledger.tables[rule][key]
    return Provenance(
        object_id, rule, rec.binding, rec.sources, removed=object_id in ledger.removed,
        enrichments=list(ledger.enrichers.get(object_id, [])),
        chain=_chain(ledger, rec, {(rule, key)}), key=key,
    )
