"""Scenario files, validation, and file-based persistence.

A scenario is one JSON document: label hierarchies, devices, data items,
initial policies per device (structured form or embedded policy text), risk
assumptions, the logical clock, named questions, and optional named policy
variants. Serialization is canonical (sorted keys and members) so that
saving is byte-stable and files can be content-addressed.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from filelock import FileLock

from ._version import __version__
from .analysis import (
    AnswerTable,
    CanReceive,
    CanUse,
    CanUseOtherThan,
    IllegalTransferCapability,
    IllegalUseInterest,
    MatrixCell,
    Query,
    RiskAssumption,
    Verdict,
    event_text,
)
from .conditions import Condition, TT, referenced_items
from .errors import StoreError, ValidationError
from .hierarchy import Hierarchy
from .model import (
    ClockPolicy,
    DataItem,
    Device,
    DeviceKind,
    Event,
    IllegalTransfer,
    IllegalUse,
    Request,
    Send,
    Transfer,
    Use,
)
from .policy import (
    DataCommunicationRule,
    DataUsageRule,
    Hierarchies,
    PilotPolicy,
    dcr_key,
)
from .text import parse_condition, parse_policy, render_condition
from .timestamps import Timestamp, looks_like_date


@dataclass(frozen=True)
class Question:
    name: str
    query: Query
    text: str


@dataclass(frozen=True)
class PolicyVariant:
    name: str
    policies: Tuple[Tuple[str, Tuple[PilotPolicy, ...]], ...]  # (device, policies)

    def overrides(self) -> Dict[str, Tuple[PilotPolicy, ...]]:
        return dict(self.policies)


@dataclass
class Scenario:
    name: str
    hierarchies: Hierarchies
    devices: Tuple[Device, ...]
    items: Tuple[DataItem, ...]
    policies: Dict[str, Tuple[PilotPolicy, ...]]
    assumptions: Tuple[RiskAssumption, ...]
    clock: ClockPolicy
    questions: Tuple[Question, ...]
    variants: Tuple[PolicyVariant, ...] = ()

    @cached_property
    def device_by_id(self) -> Dict[str, Device]:
        return {d.id: d for d in self.devices}

    @cached_property
    def item_by_id(self) -> Dict[str, DataItem]:
        return {i.id: i for i in self.items}

    def question(self, name: str) -> Question:
        for q in self.questions:
            if q.name == name:
                return q
        raise ValidationError(f"unknown question: {name!r}")

    def variant(self, name: str) -> PolicyVariant:
        for v in self.variants:
            if v.name == name:
                return v
        raise ValidationError(f"unknown policy variant: {name!r}")

    def with_policies(self, overrides: Optional[Mapping[str, Sequence[PilotPolicy]]]) -> "Scenario":
        if not overrides:
            return self
        for device_id in overrides:
            if device_id not in self.device_by_id:
                raise ValidationError(f"policy override names unknown device {device_id!r}")
        merged = dict(self.policies)
        for device_id, policies in overrides.items():
            merged[device_id] = tuple(policies)
        return replace(self, policies=merged)

    def with_assumptions(self, ids: Sequence[str]) -> "Scenario":
        known = {a.id for a in self.assumptions}
        for aid in ids:
            if aid not in known:
                raise ValidationError(f"unknown assumption id {aid!r}")
        selected = tuple(a for a in self.assumptions if a.id in set(ids))
        return replace(self, assumptions=selected)


# --- JSON: values and conditions ------------------------------------------------

def value_to_json(value):
    if value is None:
        return None
    if isinstance(value, Timestamp):
        return str(value)
    return value


def value_from_json(raw):
    if raw is None:
        return None
    if isinstance(raw, bool):
        raise ValidationError(f"boolean item values are not supported: {raw!r}")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, str):
        if looks_like_date(raw):
            return Timestamp.parse(raw)
        return raw
    raise ValidationError(f"unsupported item value: {raw!r}")


# --- JSON: policies ---------------------------------------------------------------

def _rule_to_json(rule: DataCommunicationRule) -> dict:
    out = {
        "entity": rule.entity,
        "purposes": sorted(rule.dur.purposes),
        "until": str(rule.dur.retention),
    }
    if rule.condition != TT:
        out["condition"] = render_condition(rule.condition)
    return out


def _rule_from_json(raw: dict, hierarchies: Optional[Hierarchies]) -> DataCommunicationRule:
    condition: Condition = TT
    if raw.get("condition") not in (None, "", "true"):
        condition = parse_condition(raw["condition"])
    return DataCommunicationRule(
        condition=condition,
        entity=raw["entity"],
        dur=DataUsageRule(
            purposes=frozenset(raw["purposes"]),
            retention=Timestamp.parse(raw["until"]),
        ),
    )


def policy_to_json(policy: PilotPolicy) -> dict:
    return {
        "datatype": policy.datatype,
        "collection": _rule_to_json(policy.dcr),
        "transfers": [_rule_to_json(t) for t in sorted(policy.transfers, key=dcr_key)],
    }


def policy_from_json(raw, hierarchies: Optional[Hierarchies] = None) -> PilotPolicy:
    if isinstance(raw, str):
        return parse_policy(raw, hierarchies)
    if "pilot" in raw:
        return parse_policy(raw["pilot"], hierarchies)
    try:
        return PilotPolicy(
            datatype=raw["datatype"],
            dcr=_rule_from_json(raw["collection"], hierarchies),
            transfers=frozenset(
                _rule_from_json(t, hierarchies) for t in raw.get("transfers", [])
            ),
        )
    except KeyError as exc:
        raise ValidationError(f"policy is missing required key {exc.args[0]!r}") from exc


# --- JSON: assumptions and questions ------------------------------------------------

def assumption_to_json(a: RiskAssumption) -> dict:
    if isinstance(a, IllegalTransferCapability):
        out = {"id": a.id, "kind": "illegal_transfer", "from": a.from_entity, "to": a.to_entity}
    else:
        out = {"id": a.id, "kind": "illegal_use", "entity": a.entity, "purpose": a.purpose}
    if a.datatype is not None:
        out["datatype"] = a.datatype
    return out


def assumption_from_json(raw: dict) -> RiskAssumption:
    kind = raw.get("kind")
    if kind == "illegal_transfer":
        return IllegalTransferCapability(
            id=raw["id"], from_entity=raw["from"], to_entity=raw["to"],
            datatype=raw.get("datatype"),
        )
    if kind == "illegal_use":
        return IllegalUseInterest(
            id=raw["id"], entity=raw["entity"], purpose=raw["purpose"],
            datatype=raw.get("datatype"),
        )
    raise ValidationError(f"unknown assumption kind: {kind!r}")


def query_to_json(q: Query) -> dict:
    if isinstance(q, CanReceive):
        return {"kind": "can_receive", "entity": q.entity, "item": q.item}
    if isinstance(q, CanUse):
        return {"kind": "can_use", "entity": q.entity, "item": q.item, "purpose": q.purpose}
    return {
        "kind": "can_use_other_than",
        "entity": q.entity,
        "item": q.item,
        "other_than": sorted(q.reference),
    }


def query_from_json(raw: dict) -> Query:
    kind = raw.get("kind")
    if kind == "can_receive":
        return CanReceive(raw["entity"], raw["item"])
    if kind == "can_use":
        return CanUse(raw["entity"], raw["item"], raw["purpose"])
    if kind == "can_use_other_than":
        return CanUseOtherThan(raw["entity"], raw["item"], frozenset(raw["other_than"]))
    raise ValidationError(f"unknown question kind: {kind!r}")


def question_to_json(q: Question) -> dict:
    out = query_to_json(q.query)
    out["name"] = q.name
    if q.text != q.query.describe():
        out["text"] = q.text
    return out


def question_from_json(raw: dict) -> Question:
    query = query_from_json(raw)
    return Question(name=raw["name"], query=query, text=raw.get("text") or query.describe())


# --- JSON: hierarchies, devices, items ------------------------------------------------

def _hierarchy_to_json(h: Hierarchy) -> dict:
    return {
        "labels": sorted(h.labels),
        "edges": sorted([list(e) for e in h.edges]),
    }


def _hierarchy_from_json(raw: dict) -> Hierarchy:
    return Hierarchy(
        labels=frozenset(raw.get("labels", [])),
        edges=frozenset(tuple(e) for e in raw.get("edges", [])),
    )


def scenario_to_json(sc: Scenario) -> dict:
    out = {
        "name": sc.name,
        "hierarchies": {
            "entities": _hierarchy_to_json(sc.hierarchies.entities),
            "datatypes": _hierarchy_to_json(sc.hierarchies.datatypes),
            "purposes": _hierarchy_to_json(sc.hierarchies.purposes),
        },
        "devices": [
            {"id": d.id, "entity": d.entity, "kind": d.kind.value}
            for d in sorted(sc.devices, key=lambda d: d.id)
        ],
        "items": [
            {"id": i.id, "datatype": i.datatype, "owner": i.owner,
             "value": value_to_json(i.value)}
            for i in sorted(sc.items, key=lambda i: i.id)
        ],
        "policies": {
            device_id: [policy_to_json(p) for p in policies]
            for device_id, policies in sorted(sc.policies.items())
        },
        "assumptions": [assumption_to_json(a) for a in sc.assumptions],
        "now": str(sc.clock.now),
        "questions": [question_to_json(q) for q in sc.questions],
    }
    if sc.variants:
        out["variants"] = [
            {
                "name": v.name,
                "policies": {
                    device_id: [policy_to_json(p) for p in policies]
                    for device_id, policies in v.policies
                },
            }
            for v in sc.variants
        ]
    return out


def scenario_from_json(raw: dict) -> Scenario:
    try:
        hraw = raw["hierarchies"]
        hierarchies = Hierarchies(
            entities=_hierarchy_from_json(hraw.get("entities", {})),
            datatypes=_hierarchy_from_json(hraw.get("datatypes", {})),
            purposes=_hierarchy_from_json(hraw.get("purposes", {})),
        )
        devices = tuple(
            Device(d["id"], d["entity"], DeviceKind(d["kind"])) for d in raw["devices"]
        )
        items = tuple(
            DataItem(i["id"], i["datatype"], i["owner"], value_from_json(i.get("value")))
            for i in raw["items"]
        )
        policies = {
            device_id: tuple(policy_from_json(p, hierarchies) for p in plist)
            for device_id, plist in raw.get("policies", {}).items()
        }
        assumptions = tuple(assumption_from_json(a) for a in raw.get("assumptions", []))
        clock = ClockPolicy(Timestamp.parse(raw["now"]))
        questions = tuple(question_from_json(q) for q in raw.get("questions", []))
        variants = tuple(
            PolicyVariant(
                name=v["name"],
                policies=tuple(
                    sorted(
                        (
                            device_id,
                            tuple(policy_from_json(p, hierarchies) for p in plist),
                        )
                        for device_id, plist in v.get("policies", {}).items()
                    )
                ),
            )
            for v in raw.get("variants", [])
        )
    except KeyError as exc:
        raise ValidationError(f"scenario is missing required key {exc.args[0]!r}") from exc
    scenario = Scenario(
        name=raw.get("name", "scenario"),
        hierarchies=hierarchies,
        devices=devices,
        items=items,
        policies=policies,
        assumptions=assumptions,
        clock=clock,
        questions=questions,
        variants=variants,
    )
    validate_scenario(scenario)
    return scenario


# --- validation -------------------------------------------------------------------

def _validate_policy(p: PilotPolicy, sc: Scenario, where: str, problems: List[str]):
    hs = sc.hierarchies
    if p.datatype not in hs.datatypes.labels:
        problems.append(f"{where}: undeclared datatype {p.datatype!r}")
    for label, rule in [("collection", p.dcr)] + [("transfer", t) for t in p.transfers]:
        if rule.entity not in hs.entities.labels:
            problems.append(f"{where} ({label} rule): undeclared entity {rule.entity!r}")
        if not rule.dur.purposes:
            problems.append(f"{where} ({label} rule): authored rules need at least one purpose")
        for q in rule.dur.purposes:
            if q not in hs.purposes.labels:
                problems.append(f"{where} ({label} rule): undeclared purpose {q!r}")
        for item in referenced_items(rule.condition):
            if item not in {i.id for i in sc.items}:
                problems.append(f"{where} ({label} rule): condition reads unknown item {item!r}")


def validate_scenario(sc: Scenario) -> None:
    problems: List[str] = []
    hs = sc.hierarchies

    seen_devices = set()
    for d in sc.devices:
        if d.id in seen_devices:
            problems.append(f"duplicate device id {d.id!r}")
        seen_devices.add(d.id)
        if d.entity not in hs.entities.labels:
            problems.append(f"device {d.id!r}: undeclared entity {d.entity!r}")

    seen_items = set()
    for i in sc.items:
        if i.id in seen_items:
            problems.append(f"duplicate item id {i.id!r} (one valuation entry per item)")
        seen_items.add(i.id)
        if i.datatype not in hs.datatypes.labels:
            problems.append(f"item {i.id!r}: undeclared datatype {i.datatype!r}")
        owner = sc.device_by_id.get(i.owner)
        if owner is None:
            problems.append(f"item {i.id!r}: unknown owner device {i.owner!r}")
        elif owner.kind is not DeviceKind.DS:
            problems.append(f"item {i.id!r}: owner {i.owner!r} must be a DS device")

    for device_id, plist in sc.policies.items():
        if device_id not in sc.device_by_id:
            problems.append(f"policies name unknown device {device_id!r}")
            continue
        for n, p in enumerate(plist):
            _validate_policy(p, sc, f"policy {device_id}[{n}]", problems)

    seen_assumptions = set()
    for a in sc.assumptions:
        if a.id in seen_assumptions:
            problems.append(f"duplicate assumption id {a.id!r}")
        seen_assumptions.add(a.id)
        if isinstance(a, IllegalTransferCapability):
            for lab in (a.from_entity, a.to_entity):
                if lab not in hs.entities.labels:
                    problems.append(f"assumption {a.id!r}: undeclared entity {lab!r}")
        else:
            if a.entity not in hs.entities.labels:
                problems.append(f"assumption {a.id!r}: undeclared entity {a.entity!r}")
            if a.purpose not in hs.purposes.labels:
                problems.append(f"assumption {a.id!r}: undeclared purpose {a.purpose!r}")
        if a.datatype is not None and a.datatype not in hs.datatypes.labels:
            problems.append(f"assumption {a.id!r}: undeclared datatype {a.datatype!r}")

    seen_questions = set()
    for q in sc.questions:
        if q.name in seen_questions:
            problems.append(f"duplicate question name {q.name!r}")
        seen_questions.add(q.name)
        if q.query.entity not in hs.entities.labels:
            problems.append(f"question {q.name!r}: undeclared entity {q.query.entity!r}")
        if q.query.item not in sc.item_by_id:
            problems.append(f"question {q.name!r}: unknown item {q.query.item!r}")
        purposes = []
        if isinstance(q.query, CanUse):
            purposes = [q.query.purpose]
        elif isinstance(q.query, CanUseOtherThan):
            purposes = sorted(q.query.reference)
        for pur in purposes:
            if pur not in hs.purposes.labels:
                problems.append(f"question {q.name!r}: undeclared purpose {pur!r}")

    seen_variants = set()
    for v in sc.variants:
        if v.name in seen_variants:
            problems.append(f"duplicate variant name {v.name!r}")
        seen_variants.add(v.name)
        for device_id, plist in v.policies:
            if device_id not in sc.device_by_id:
                problems.append(f"variant {v.name!r} names unknown device {device_id!r}")
            for n, p in enumerate(plist):
                _validate_policy(p, sc, f"variant {v.name}/{device_id}[{n}]", problems)

    if problems:
        raise ValidationError(
            f"scenario validation failed: {problems[0]}"
            + (f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""),
            violations=problems,
        )


# --- events and verdicts as JSON -------------------------------------------------------

_EVENT_KINDS = {
    Request: "request",
    Send: "send",
    Transfer: "transfer",
    Use: "use",
    IllegalTransfer: "illegal_transfer",
    IllegalUse: "illegal_use",
}


def event_to_json(ev: Event) -> dict:
    out = {"kind": _EVENT_KINDS[type(ev)], "timestamp": str(ev.timestamp), "text": event_text(ev)}
    if isinstance(ev, Request):
        out.update(sender=ev.sndr, receiver=ev.rcv, datatype=ev.datatype,
                   policy=policy_to_json(ev.policy))
    elif isinstance(ev, (Send, Transfer, IllegalTransfer)):
        out.update(sender=ev.sndr, receiver=ev.rcv, item=ev.item)
    else:
        out.update(device=ev.dev, item=ev.item, purpose=ev.purpose)
    return out


def event_from_json(raw: dict, hierarchies: Optional[Hierarchies] = None) -> Event:
    kind = raw["kind"]
    ts = Timestamp.parse(raw["timestamp"])
    if kind == "request":
        return Request(raw["sender"], raw["receiver"], raw["datatype"],
                       policy_from_json(raw["policy"], hierarchies), ts)
    if kind == "send":
        return Send(raw["sender"], raw["receiver"], raw["item"], ts)
    if kind == "transfer":
        return Transfer(raw["sender"], raw["receiver"], raw["item"], ts)
    if kind == "use":
        return Use(raw["device"], raw["item"], raw["purpose"], ts)
    if kind == "illegal_transfer":
        return IllegalTransfer(raw["sender"], raw["receiver"], raw["item"], ts)
    if kind == "illegal_use":
        return IllegalUse(raw["device"], raw["item"], raw["purpose"], ts)
    raise ValidationError(f"unknown event kind: {kind!r}")


def verdict_to_json(v: Verdict) -> dict:
    return {
        "answer": "yes" if v.answer else "no",
        "witness": None if v.witness is None else [event_to_json(e) for e in v.witness],
        "states_explored": v.states_explored,
        "by_ownership": v.by_ownership,
    }


def cell_to_json(cell: MatrixCell) -> dict:
    out = verdict_to_json(cell.verdict)
    out.update(
        question=cell.question,
        policy_variant=cell.policy_variant,
        assumptions=list(cell.assumptions),
        respected="green" if cell.respected else "red",
    )
    return out


def table_to_json(table: AnswerTable) -> dict:
    return {
        "questions": table.questions,
        "columns": [
            {"policy_variant": name, "assumptions": list(assumptions)}
            for name, assumptions in table.columns
        ],
        "cells": [[cell_to_json(c) for c in row] for row in table.cells],
    }


# --- canonical serialization and content addressing ------------------------------------

def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def content_id(obj) -> str:
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()[:16]


def scenario_id(sc: Scenario) -> str:
    return content_id(scenario_to_json(sc))


# --- analysis records --------------------------------------------------------------------

@dataclass
class AnalysisRecord:
    scenario_id: str
    variants: dict  # input descriptor: policy variants and assumption selections
    questions: List[str]
    table: dict  # table_to_json output
    ran_at: str
    engine_version: str = __version__

    def record_id(self) -> str:
        return content_id({
            "scenario": self.scenario_id,
            "variants": self.variants,
            "questions": self.questions,
        })

    def to_json(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "variants": self.variants,
            "questions": self.questions,
            "table": self.table,
            "ran_at": self.ran_at,
            "engine_version": self.engine_version,
        }

    @classmethod
    def from_json(cls, raw: dict) -> "AnalysisRecord":
        return cls(
            scenario_id=raw["scenario_id"],
            variants=raw["variants"],
            questions=raw["questions"],
            table=raw["table"],
            ran_at=raw["ran_at"],
            engine_version=raw.get("engine_version", ""),
        )


def make_record(sc: Scenario, table: AnswerTable,
                policy_variant_names: List[Optional[str]],
                assumption_variants: List[List[str]]) -> AnalysisRecord:
    return AnalysisRecord(
        scenario_id=scenario_id(sc),
        variants={
            "policy_variants": policy_variant_names,
            "assumption_variants": assumption_variants,
        },
        questions=table.questions,
        table=table_to_json(table),
        ran_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


# --- files ---------------------------------------------------------------------------------

def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"scenario file {path} is not valid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}"
        ) from exc
    return scenario_from_json(raw)


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(data, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        try:
            tmp.unlink(missing_ok=True)
        except OSError:
            pass
        raise StoreError(f"cannot write {path}: {exc}") from exc


def _store_lock(directory: Path) -> FileLock:
    return FileLock(str(directory / ".pilot.lock"))


def save_scenario(sc: Scenario, directory) -> Path:
    directory = Path(directory)
    if not directory.is_dir():
        raise StoreError(f"not a directory: {directory}")
    sid = scenario_id(sc)
    path = directory / f"{sid}.scenario.json"
    with _store_lock(directory):
        _atomic_write(path, canonical_dumps(scenario_to_json(sc)))
    return path


def save_record(record: AnalysisRecord, directory) -> Path:
    directory = Path(directory)
    if not directory.is_dir():
        raise StoreError(f"not a directory: {directory}")
    path = directory / f"{record.record_id()}.record.json"
    with _store_lock(directory):
        _atomic_write(path, canonical_dumps(record.to_json()))
    return path


def load_record(path) -> AnalysisRecord:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise StoreError(f"cannot read record file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"record file {path} is not valid JSON: {exc.msg}") from exc
    return AnalysisRecord.from_json(raw)


def bundled_scenario_path() -> Path:
    return Path(__file__).parent / "data" / "anpr.scenario.json"


def load_bundled_scenario() -> Scenario:
    return load_scenario(bundled_scenario_path())
