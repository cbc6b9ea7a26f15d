"""HTTP service exposing parsing, the policy algebra, and risk verification.

The service is stateless apart from a file store of scenarios and analysis
records; verification runs synchronously on an immutable scenario snapshot.
Intended for a single user at desk scale (the companion web UI talks to
these endpoints exclusively).
"""

from __future__ import annotations

import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ._version import __version__
from .algebra import policy_join, policy_subsumes
from .analysis import answer, explore, respects_policy
from .errors import (
    IncomparableError,
    PilotError,
    PolicySyntaxError,
    UnknownLabelError,
    ValidationError,
)
from .hierarchy import Hierarchy
from .policy import Hierarchies, PilotPolicy
from .scenario import (
    AnalysisRecord,
    Scenario,
    bundled_scenario_path,
    load_record,
    load_scenario,
    policy_from_json,
    policy_to_json,
    save_record,
    save_scenario,
    scenario_from_json,
    scenario_id,
    scenario_to_json,
    verdict_to_json,
)
from .text import parse_policy, render_policy


class Store:
    """Scenario and record files under one directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def save_scenario(self, sc: Scenario) -> str:
        save_scenario(sc, self.root)
        return scenario_id(sc)

    def scenario_ids(self) -> List[str]:
        return sorted(p.name.removesuffix(".scenario.json")
                      for p in self.root.glob("*.scenario.json"))

    def load_scenario(self, sid: str) -> Scenario:
        path = self.root / f"{sid}.scenario.json"
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"unknown scenario id {sid!r}")
        return load_scenario(path)

    def save_record(self, record: AnalysisRecord) -> str:
        save_record(record, self.root)
        return record.record_id()

    def load_record(self, rid: str):
        path = self.root / f"{rid}.record.json"
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"unknown record id {rid!r}")
        return load_record(path)

    def seed_bundled(self) -> None:
        if not self.scenario_ids():
            self.save_scenario(load_scenario(bundled_scenario_path()))


class ParseRequest(BaseModel):
    text: str
    scenario: Optional[str] = None


class RenderRequest(BaseModel):
    policy: Dict[str, Any]
    scenario: Optional[str] = None


class PolicyPairRequest(BaseModel):
    first: Any
    second: Any
    scenario: Optional[str] = None


class VerifyRequestModel(BaseModel):
    question: str
    policy_variant: Optional[str] = None
    policies: Optional[Dict[str, List[Any]]] = None
    assumptions: List[str] = []
    max_states: int = 1_000_000


def _permissive_hierarchies(policies: List[PilotPolicy]) -> Hierarchies:
    entities, datatypes, purposes = set(), set(), set()
    for p in policies:
        datatypes.add(p.datatype)
        for rule in [p.dcr, *p.transfers]:
            entities.add(rule.entity)
            purposes.update(rule.dur.purposes)
    return Hierarchies(
        entities=Hierarchy(frozenset(entities), frozenset()),
        datatypes=Hierarchy(frozenset(datatypes), frozenset()),
        purposes=Hierarchy(frozenset(purposes), frozenset()),
    )


def create_app(store_dir: Optional[str] = None, seed: bool = True) -> FastAPI:
    root = Path(store_dir or os.environ.get("PILOT_STORE", "pilot-store"))
    store = Store(root)
    if seed:
        store.seed_bundled()

    app = FastAPI(title="pilot-privacy", version=__version__)
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(PilotError)
    async def pilot_error_handler(request: Request, exc: PilotError):
        status = 400
        if isinstance(exc, IncomparableError):
            status = 422
        body: Dict[str, Any] = {"error": exc.code, "detail": str(exc)}
        if isinstance(exc, ValidationError):
            body["violations"] = exc.violations
        if isinstance(exc, (PolicySyntaxError, UnknownLabelError)) and getattr(exc, "span", None):
            body["span"] = list(exc.span)
        return JSONResponse(status_code=status, content=body)

    def hierarchies_for(sid: Optional[str]) -> Optional[Hierarchies]:
        if sid is None:
            return None
        return store.load_scenario(sid).hierarchies

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/scenarios")
    def list_scenarios():
        out = []
        for sid in store.scenario_ids():
            sc = store.load_scenario(sid)
            out.append({"id": sid, "name": sc.name,
                        "questions": [q.name for q in sc.questions]})
        return out

    @app.post("/scenarios", status_code=201)
    def create_scenario(raw: Dict[str, Any]):
        sc = scenario_from_json(raw)
        sid = store.save_scenario(sc)
        return {"id": sid, "name": sc.name}

    @app.get("/scenarios/{sid}")
    def get_scenario(sid: str):
        sc = store.load_scenario(sid)
        out = scenario_to_json(sc)
        out["id"] = sid
        return out

    @app.get("/scenarios/{sid}/assumptions")
    def list_assumptions(sid: str):
        sc = store.load_scenario(sid)
        return [
            {
                "id": a.id,
                "kind": "illegal_transfer" if hasattr(a, "from_entity") else "illegal_use",
                "description": a.describe(),
            }
            for a in sc.assumptions
        ]

    @app.post("/policies/parse")
    def parse_endpoint(req: ParseRequest):
        hs = hierarchies_for(req.scenario)
        policy = parse_policy(req.text, hs)
        return {"policy": policy_to_json(policy), "rendered": render_policy(policy)}

    @app.post("/policies/render")
    def render_endpoint(req: RenderRequest):
        hs = hierarchies_for(req.scenario)
        policy = policy_from_json(req.policy, hs)
        if hs is not None:
            _validate_against(policy, hs)
        return {"text": render_policy(policy), "policy": policy_to_json(policy)}

    def _validate_against(policy: PilotPolicy, hs: Hierarchies) -> None:
        problems = []
        if policy.datatype not in hs.datatypes.labels:
            raise UnknownLabelError(policy.datatype, "datatype")
        for rule in [policy.dcr, *policy.transfers]:
            if rule.entity not in hs.entities.labels:
                raise UnknownLabelError(rule.entity, "entity")
            if not rule.dur.purposes:
                raise ValidationError("authored rules need at least one purpose")
            for q in rule.dur.purposes:
                if q not in hs.purposes.labels:
                    raise UnknownLabelError(q, "purpose")

    def _pair(req: PolicyPairRequest):
        hs = hierarchies_for(req.scenario)
        first = policy_from_json(req.first, hs)
        second = policy_from_json(req.second, hs)
        if hs is None:
            hs = _permissive_hierarchies([first, second])
        else:
            _validate_against(first, hs)
            _validate_against(second, hs)
        return first, second, hs

    @app.post("/policies/subsumption")
    def subsumption_endpoint(req: PolicyPairRequest):
        first, second, hs = _pair(req)
        return {"subsumes": policy_subsumes(first, second, hs)}

    @app.post("/policies/join")
    def join_endpoint(req: PolicyPairRequest):
        first, second, hs = _pair(req)
        joined = policy_join(first, second, hs)
        return {"policy": policy_to_json(joined), "rendered": render_policy(joined)}

    @app.post("/scenarios/{sid}/verify")
    def verify_endpoint(sid: str, req: VerifyRequestModel):
        sc = store.load_scenario(sid)
        question = sc.question(req.question)
        variant = sc
        overrides_json: Optional[Dict[str, List[Any]]] = None
        if req.policy_variant is not None:
            variant = variant.with_policies(sc.variant(req.policy_variant).overrides())
        if req.policies:
            parsed = {
                device: tuple(policy_from_json(p, sc.hierarchies) for p in plist)
                for device, plist in req.policies.items()
            }
            overrides_json = {
                device: [policy_to_json(p) for p in plist]
                for device, plist in parsed.items()
            }
            variant = variant.with_policies(parsed)
        variant = variant.with_assumptions(req.assumptions)
        graph = explore(variant, max_states=req.max_states)
        verdict = answer(question.query, graph, variant)
        respected = respects_policy(question.query, verdict, variant)

        record = AnalysisRecord(
            scenario_id=sid,
            variants={
                "policy_variant": req.policy_variant,
                "policy_overrides": overrides_json,
                "assumptions": sorted(req.assumptions),
            },
            questions=[question.name],
            table={
                "questions": [question.name],
                "columns": [{"policy_variant": req.policy_variant,
                             "assumptions": sorted(req.assumptions)}],
                "cells": [[{**verdict_to_json(verdict),
                            "question": question.name,
                            "policy_variant": req.policy_variant,
                            "assumptions": sorted(req.assumptions),
                            "respected": "green" if respected else "red"}]],
            },
            ran_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        rid = store.save_record(record)

        out = verdict_to_json(verdict)
        out["respected"] = "green" if respected else "red"
        out["question"] = question.name
        out["record"] = rid
        return out

    @app.get("/records/{rid}")
    def get_record(rid: str):
        record = store.load_record(rid)
        out = record.to_json()
        out["id"] = rid
        return out

    return app
