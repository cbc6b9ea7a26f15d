"""Exhaustive-state risk analysis.

A breadth-first fixpoint over all enabled events (legal and, when risk
assumptions allow them, illegal) builds the full reachable state graph of a
scenario; reachability queries are answered over that graph with shortest
witness traces. Determinism is guaranteed by a fixed event ordering and by
processing the frontier in discovery order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from .errors import StateBudgetExceededError, UnknownLabelError
from .model import (
    Event,
    IllegalTransfer,
    IllegalUse,
    Request,
    Send,
    SystemState,
    Transfer,
    Use,
    apply,
    enabled,
    initial_state,
    DeviceKind,
)
from .policy import PilotPolicy, policy_key


# --- risk assumptions ---------------------------------------------------------

@dataclass(frozen=True)
class IllegalTransferCapability:
    """An entity may pass data of some type onward, disregarding policies."""

    id: str
    from_entity: str
    to_entity: str
    datatype: Optional[str] = None

    def describe(self) -> str:
        scope = f" {self.datatype}" if self.datatype else ""
        return f"{self.from_entity} may transfer{scope} data to {self.to_entity} disregarding policies"


@dataclass(frozen=True)
class IllegalUseInterest:
    """An entity has an interest in using data for a purpose, allowed or not."""

    id: str
    entity: str
    purpose: str
    datatype: Optional[str] = None

    def describe(self) -> str:
        scope = f" {self.datatype}" if self.datatype else ""
        return f"{self.entity} may use{scope} data for {self.purpose} disregarding policies"


RiskAssumption = Union[IllegalTransferCapability, IllegalUseInterest]


# --- queries -------------------------------------------------------------------

@dataclass(frozen=True)
class CanReceive:
    entity: str
    item: str

    def describe(self) -> str:
        return f"Can {self.entity} receive {self.item}?"


@dataclass(frozen=True)
class CanUse:
    entity: str
    item: str
    purpose: str

    def describe(self) -> str:
        return f"Can {self.entity} use {self.item} for {self.purpose}?"


@dataclass(frozen=True)
class CanUseOtherThan:
    entity: str
    item: str
    reference: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "reference", frozenset(self.reference))

    def describe(self) -> str:
        ref = ", ".join(sorted(self.reference))
        return f"Can {self.entity} use {self.item} for other purposes than {ref}?"


Query = Union[CanReceive, CanUse, CanUseOtherThan]


@dataclass(frozen=True)
class Verdict:
    answer: bool
    witness: Optional[Tuple[Event, ...]]  # present iff answer is yes
    states_explored: int
    by_ownership: bool = False


# --- event ordering --------------------------------------------------------------

_EVENT_RANK = {Request: 0, Send: 1, Transfer: 2, Use: 3, IllegalTransfer: 4, IllegalUse: 5}


def event_key(event: Event) -> tuple:
    rank = _EVENT_RANK[type(event)]
    if isinstance(event, Request):
        return (rank, event.sndr, event.rcv, event.datatype, policy_key(event.policy))
    if isinstance(event, (Send, Transfer, IllegalTransfer)):
        return (rank, event.sndr, event.rcv, event.item)
    return (rank, event.dev, event.item, event.purpose)


# --- enumeration -------------------------------------------------------------------

def enumerate_events(state: SystemState, scenario) -> List[Event]:
    """Every enabled event instance over the scenario's finite domains, in
    the fixed deterministic order. Request policies come from each
    controller's declared policy set only."""
    now = scenario.clock.now
    devices = sorted(scenario.device_by_id.values(), key=lambda d: d.id)
    controllers = [d for d in devices if d.kind is DeviceKind.DC]
    subjects_and_controllers = devices
    items = sorted(scenario.items, key=lambda i: i.id)
    purposes = sorted(scenario.hierarchies.purposes.labels)

    candidates: List[Event] = []
    for dc in controllers:
        for p in scenario.policies.get(dc.id, ()):
            for rcv in subjects_and_controllers:
                if rcv.id != dc.id:
                    candidates.append(Request(dc.id, rcv.id, p.datatype, p, now))
    for item in items:
        owner = scenario.device_by_id.get(item.owner)
        if owner is None or owner.kind is not DeviceKind.DS:
            continue
        for dc in controllers:
            candidates.append(Send(owner.id, dc.id, item.id, now))
    for sndr in controllers:
        for rcv in controllers:
            if sndr.id == rcv.id:
                continue
            for item in items:
                candidates.append(Transfer(sndr.id, rcv.id, item.id, now))
                candidates.append(IllegalTransfer(sndr.id, rcv.id, item.id, now))
    for dc in controllers:
        for item in items:
            for pur in purposes:
                candidates.append(Use(dc.id, item.id, pur, now))
                candidates.append(IllegalUse(dc.id, item.id, pur, now))

    out = [ev for ev in candidates if enabled(ev, state, scenario)]
    out.sort(key=event_key)
    return out


# --- exploration ---------------------------------------------------------------------

@dataclass
class StateGraph:
    initial: SystemState
    states: List[SystemState]  # discovery order
    index: Dict[SystemState, int]
    edges: List[Tuple[int, Event, int]]
    parent: Dict[int, Tuple[int, Event]] = field(default_factory=dict)

    def path_to(self, target: int) -> Tuple[Event, ...]:
        events: List[Event] = []
        node = target
        while node != 0:
            prev, ev = self.parent[node]
            events.append(ev)
            node = prev
        events.reverse()
        return tuple(events)


def explore(scenario, max_states: int = 1_000_000) -> StateGraph:
    """Breadth-first fixpoint with canonical-state deduplication. Terminates
    because events only add entries over finite domains."""
    init = initial_state(scenario)
    graph = StateGraph(initial=init, states=[init], index={init: 0}, edges=[])
    frontier = [0]
    while frontier:
        next_frontier: List[int] = []
        for node in frontier:
            state = graph.states[node]
            for ev in enumerate_events(state, scenario):
                succ = apply(ev, state, scenario)
                found = graph.index.get(succ)
                if found is None:
                    found = len(graph.states)
                    if found >= max_states:
                        raise StateBudgetExceededError(max_states)
                    graph.states.append(succ)
                    graph.index[succ] = found
                    graph.parent[found] = (node, ev)
                    next_frontier.append(found)
                graph.edges.append((node, ev, found))
        frontier = next_frontier
    return graph


# --- answering ------------------------------------------------------------------------

def _check_labels(query: Query, scenario) -> None:
    hs = scenario.hierarchies
    hs.entities.require(query.entity, "entity")
    if query.item not in scenario.item_by_id:
        raise UnknownLabelError(query.item, "item")
    if isinstance(query, CanUse):
        hs.purposes.require(query.purpose, "purpose")
    if isinstance(query, CanUseOtherThan):
        for p in query.reference:
            hs.purposes.require(p, "purpose")


def _receiving_devices(query, scenario) -> List[str]:
    hs = scenario.hierarchies
    return [
        d.id
        for d in sorted(scenario.device_by_id.values(), key=lambda d: d.id)
        if hs.entities.leq(d.entity, query.entity)
    ]


def _answer_can_receive(query: CanReceive, graph: StateGraph, scenario) -> Verdict:
    hs = scenario.hierarchies
    total = len(graph.states)
    owner = scenario.device_by_id[scenario.item_by_id[query.item].owner]
    if hs.entities.leq(owner.entity, query.entity):
        # The owner holds its own item by construction; reported distinctly.
        return Verdict(True, witness=(), states_explored=total, by_ownership=True)
    holders = set(_receiving_devices(query, scenario))
    for idx, state in enumerate(graph.states):
        if any(d in holders and i == query.item for d, _, i, _ in state.received):
            return Verdict(True, graph.path_to(idx), total)
    return Verdict(False, None, total)


def _use_event_for(state: SystemState, scenario, devices: List[str], item: str,
                   purpose: str) -> Optional[Event]:
    now = scenario.clock.now
    for dev in devices:
        ev = Use(dev, item, purpose, now)
        if enabled(ev, state, scenario):
            return ev
    for dev in devices:
        ev = IllegalUse(dev, item, purpose, now)
        if enabled(ev, state, scenario):
            return ev
    return None


def _answer_can_use(query: CanUse, graph: StateGraph, scenario) -> Verdict:
    total = len(graph.states)
    devices = _receiving_devices(query, scenario)
    for idx, state in enumerate(graph.states):
        ev = _use_event_for(state, scenario, devices, query.item, query.purpose)
        if ev is not None:
            return Verdict(True, graph.path_to(idx) + (ev,), total)
    return Verdict(False, None, total)


def _answer_can_use_other(query: CanUseOtherThan, graph: StateGraph, scenario) -> Verdict:
    hs = scenario.hierarchies
    others = [
        q
        for q in sorted(hs.purposes.labels)
        if not any(hs.purposes.leq(q, ref) for ref in query.reference)
    ]
    total = len(graph.states)
    devices = _receiving_devices(query, scenario)
    for idx, state in enumerate(graph.states):
        for q in others:
            ev = _use_event_for(state, scenario, devices, query.item, q)
            if ev is not None:
                return Verdict(True, graph.path_to(idx) + (ev,), total)
    return Verdict(False, None, total)


def answer(query: Query, graph: StateGraph, scenario) -> Verdict:
    """Reachability answer with a shortest witness (breadth-first depth
    order, ties broken by the fixed event ordering)."""
    _check_labels(query, scenario)
    if isinstance(query, CanReceive):
        return _answer_can_receive(query, graph, scenario)
    if isinstance(query, CanUse):
        return _answer_can_use(query, graph, scenario)
    if isinstance(query, CanUseOtherThan):
        return _answer_can_use_other(query, graph, scenario)
    raise TypeError(f"not a query: {query!r}")


# --- policy-respected classification ------------------------------------------------

def _owner_policies(query: Query, scenario) -> List[PilotPolicy]:
    hs = scenario.hierarchies
    item = scenario.item_by_id[query.item]
    return [
        p
        for p in scenario.policies.get(item.owner, ())
        if hs.datatypes.leq(item.datatype, p.datatype)
    ]


def _entity_licensed(entity: str, policies, hs) -> bool:
    for p in policies:
        if hs.entities.leq(entity, p.dcr.entity):
            return True
        if any(hs.entities.leq(entity, tr.entity) for tr in p.transfers):
            return True
    return False


def _use_licensed(entity: str, purpose: str, policies, hs) -> bool:
    for p in policies:
        for rule in [p.dcr, *p.transfers]:
            if hs.entities.leq(entity, rule.entity) and any(
                hs.purposes.leq(purpose, q) for q in rule.dur.purposes
            ):
                return True
    return False


def respects_policy(query: Query, verdict: Verdict, scenario) -> bool:
    """Green/red classification: red exactly when the answer is yes and the
    witnessed behavior is not licensed by the data subject's own policy."""
    if not verdict.answer or verdict.by_ownership:
        return True
    policies = _owner_policies(query, scenario)
    hs = scenario.hierarchies
    witness = verdict.witness or ()
    if isinstance(query, CanReceive):
        final = witness[-1] if witness else None
        if final is None:
            return True
        device = scenario.device_by_id[final.rcv]
        return _entity_licensed(device.entity, policies, hs)
    # use-style queries: classify the witnessed use event
    final = witness[-1] if witness else None
    if not isinstance(final, (Use, IllegalUse)):
        return True
    device = scenario.device_by_id[final.dev]
    return _use_licensed(device.entity, final.purpose, policies, hs)


# --- matrices -----------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixCell:
    question: str
    policy_variant: Optional[str]
    assumptions: Tuple[str, ...]
    verdict: Verdict
    respected: bool


@dataclass
class AnswerTable:
    questions: List[str]
    columns: List[Tuple[Optional[str], Tuple[str, ...]]]  # (policy variant, assumption ids)
    cells: List[List[MatrixCell]]  # cells[row][col]


def answer_matrix(scenario, policy_variants, assumption_variants, questions,
                  max_states: int = 1_000_000) -> AnswerTable:
    """Cross product of variants and questions; one exploration per column.

    ``policy_variants`` holds (name, per-device policy overrides) pairs and
    ``assumption_variants`` holds tuples of assumption ids to enable.
    Column order is assumption-major so that the no-assumption columns come
    first, mirroring the case-study presentation.
    """
    columns = []
    for assumption_ids in assumption_variants:
        for name, overrides in policy_variants:
            columns.append((name, tuple(assumption_ids), overrides))

    cells: List[List[MatrixCell]] = [[] for _ in questions]
    column_headers = []
    for name, assumption_ids, overrides in columns:
        column_headers.append((name, assumption_ids))
        variant = scenario.with_policies(overrides).with_assumptions(assumption_ids)
        graph = explore(variant, max_states=max_states)
        for row, question in enumerate(questions):
            verdict = answer(question.query, graph, variant)
            cells[row].append(
                MatrixCell(
                    question=question.name,
                    policy_variant=name,
                    assumptions=assumption_ids,
                    verdict=verdict,
                    respected=respects_policy(question.query, verdict, variant),
                )
            )
    return AnswerTable(
        questions=[q.name for q in questions],
        columns=column_headers,
        cells=cells,
    )


# --- human-readable event rendering ----------------------------------------------------

def event_text(event: Event) -> str:
    if isinstance(event, Request):
        return f"{event.sndr} requests {event.datatype} data from {event.rcv}"
    if isinstance(event, Send):
        return f"{event.sndr} sends {event.item} to {event.rcv}"
    if isinstance(event, Transfer):
        return f"{event.sndr} transfers {event.item} to {event.rcv}"
    if isinstance(event, Use):
        return f"{event.dev} uses {event.item} for {event.purpose}"
    if isinstance(event, IllegalTransfer):
        return f"{event.sndr} illegally transfers {event.item} to {event.rcv}"
    if isinstance(event, IllegalUse):
        return f"{event.dev} illegally uses {event.item} for {event.purpose}"
    raise TypeError(f"not an event: {event!r}")
