"""Event-based execution model over device states.

The system state is a triple: a valuation of data items per device, a policy
base per device (locally defined policies plus policies received through
requests), and the set of data each controller has received together with
the policy that governs it. Events (request, send, transfer, use, plus the
illegal variants enabled by risk assumptions) are checked against the state
and applied additively: no event ever removes information.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import FrozenSet, Optional, Tuple, Union

from .algebra import policy_subsumes
from .conditions import TT, TruthValue, Value, evaluate
from .errors import NotEnabledError
from .policy import (
    DataCommunicationRule,
    DataUsageRule,
    PilotPolicy,
    policy_key,
)
from .timestamps import Timestamp


class DeviceKind(Enum):
    DS = "DS"
    DC = "DC"


@dataclass(frozen=True)
class Device:
    id: str
    entity: str
    kind: DeviceKind


@dataclass(frozen=True)
class DataItem:
    id: str
    datatype: str
    owner: str  # device id of the data subject's device
    value: Optional[Value]  # None when the item has no defined value yet


@dataclass(frozen=True)
class ClockPolicy:
    """Single logical instant shared by every event of one analysis run."""

    now: Timestamp


@dataclass(frozen=True)
class SystemState:
    valuation: FrozenSet[Tuple[str, str, Value]]  # (device, item, value)
    policy_base: FrozenSet[Tuple[str, str, PilotPolicy]]  # (holder, origin, policy)
    received: FrozenSet[Tuple[str, str, str, PilotPolicy]]  # (holder, sender, item, policy)

    @cached_property
    def values(self) -> dict:
        return {(d, i): v for d, i, v in self.valuation}

    def value_of(self, device: str, item: str):
        return self.values.get((device, item))

    def policies_of(self, device: str) -> frozenset:
        return frozenset((o, p) for d, o, p in self.policy_base if d == device)

    def received_of(self, device: str) -> frozenset:
        return frozenset((s, i, p) for d, s, i, p in self.received if d == device)

    def holds_item(self, device: str, item: str) -> bool:
        return any(d == device and i == item for d, _, i, _ in self.received)

    def extend(self, valuation=(), policy_base=(), received=()) -> "SystemState":
        return SystemState(
            valuation=self.valuation | frozenset(valuation),
            policy_base=self.policy_base | frozenset(policy_base),
            received=self.received | frozenset(received),
        )


# --- events ------------------------------------------------------------------

@dataclass(frozen=True)
class Request:
    sndr: str
    rcv: str
    datatype: str
    policy: PilotPolicy
    timestamp: Timestamp


@dataclass(frozen=True)
class Send:
    sndr: str
    rcv: str
    item: str
    timestamp: Timestamp


@dataclass(frozen=True)
class Transfer:
    sndr: str
    rcv: str
    item: str
    timestamp: Timestamp


@dataclass(frozen=True)
class Use:
    dev: str
    item: str
    purpose: str
    timestamp: Timestamp


@dataclass(frozen=True)
class IllegalTransfer:
    sndr: str
    rcv: str
    item: str
    timestamp: Timestamp


@dataclass(frozen=True)
class IllegalUse:
    dev: str
    item: str
    purpose: str
    timestamp: Timestamp


Event = Union[Request, Send, Transfer, Use, IllegalTransfer, IllegalUse]


def initial_state(scenario) -> SystemState:
    """Owners hold their defined item values; every device carries its own
    declared policies; nothing has been received yet."""
    valuation = frozenset(
        (item.owner, item.id, item.value)
        for item in scenario.items
        if item.value is not None
    )
    policy_base = frozenset(
        (device_id, device_id, p)
        for device_id, policies in scenario.policies.items()
        for p in policies
    )
    return SystemState(valuation=valuation, policy_base=policy_base, received=frozenset())


# --- activity checks ----------------------------------------------------------

def _rule_active(
    datatype: str,
    rule: DataCommunicationRule,
    sndr: str,
    rcv: str,
    item: DataItem,
    state: SystemState,
    scenario,
    clock: ClockPolicy,
) -> bool:
    hs = scenario.hierarchies
    rcv_device = scenario.device_by_id.get(rcv)
    if rcv_device is None:
        return False
    if not hs.datatypes.leq(item.datatype, datatype):
        return False
    if evaluate(rule.condition, state.values, sndr) is not TruthValue.TRUE:
        return False
    if not clock.now < rule.dur.retention:
        return False
    return hs.entities.leq(rcv_device.entity, rule.entity)


def active_policy(policy: PilotPolicy, event: Send, state: SystemState, scenario,
                  clock: Optional[ClockPolicy] = None) -> bool:
    """A policy is active for a send when it covers the item's datatype, its
    condition holds on the sender (undefined counts as not active), the
    retention deadline has not passed, and the receiver's entity is allowed."""
    clock = clock or scenario.clock
    item = scenario.item_by_id[event.item]
    return _rule_active(policy.datatype, policy.dcr, event.sndr, event.rcv,
                        item, state, scenario, clock)


def active_transfer(rule: DataCommunicationRule, policy: PilotPolicy,
                    event: Transfer, state: SystemState, scenario,
                    clock: Optional[ClockPolicy] = None) -> bool:
    """Same checks applied to the transfer rule (datatype taken from the
    carrying policy), plus the sender-side retention of that policy."""
    clock = clock or scenario.clock
    item = scenario.item_by_id[event.item]
    if not _rule_active(policy.datatype, rule, event.sndr, event.rcv,
                        item, state, scenario, clock):
        return False
    return clock.now < policy.dcr.dur.retention


# --- enabledness ---------------------------------------------------------------

def _device(scenario, device_id: str) -> Optional[Device]:
    return scenario.device_by_id.get(device_id)


def _active_pairs_for_send(event, state, scenario):
    """(sender-defined active policies, receiver-sent active policies) found
    in the sender's policy base."""
    own, sent = [], []
    for origin, p in state.policies_of(event.sndr):
        if origin == event.sndr and active_policy(p, event, state, scenario):
            own.append(p)
        elif origin == event.rcv and active_policy(p, event, state, scenario):
            sent.append(p)
    return own, sent


def _transfer_candidates(event, state, scenario):
    """Receiver policies admissible for a transfer: active, sent by the
    receiver, and subsumed by some policy-with-active-transfer-rule carried
    alongside the item."""
    hs = scenario.hierarchies
    item = scenario.item_by_id.get(event.item)
    if item is None:
        return []
    carried = [p for s, i, p in state.received_of(event.sndr) if i == event.item]
    rcv_policies = [
        p
        for origin, p in state.policies_of(event.sndr)
        if origin == event.rcv
        and _rule_active(p.datatype, p.dcr, event.sndr, event.rcv, item, state,
                         scenario, scenario.clock)
    ]
    admissible = []
    for p_rcv in rcv_policies:
        for p in carried:
            for tr in p.transfers:
                if not active_transfer(tr, p, event, state, scenario):
                    continue
                p_tr = PilotPolicy(p.datatype, tr, p.transfers)
                if policy_subsumes(p_rcv, p_tr, hs):
                    admissible.append(p_rcv)
                    break
            else:
                continue
            break
    return admissible


def _matching_transfer_capabilities(event, scenario):
    from .analysis import IllegalTransferCapability  # cycle-free: analysis imports nothing from here at import time

    hs = scenario.hierarchies
    sndr = _device(scenario, event.sndr)
    rcv = _device(scenario, event.rcv)
    item = scenario.item_by_id.get(event.item)
    if sndr is None or rcv is None or item is None:
        return []
    out = []
    for a in scenario.assumptions:
        if not isinstance(a, IllegalTransferCapability):
            continue
        if not hs.entities.leq(sndr.entity, a.from_entity):
            continue
        if not hs.entities.leq(rcv.entity, a.to_entity):
            continue
        if a.datatype is not None and not hs.datatypes.leq(item.datatype, a.datatype):
            continue
        out.append(a)
    return out


def _matching_use_interests(event, scenario):
    from .analysis import IllegalUseInterest

    hs = scenario.hierarchies
    dev = _device(scenario, event.dev)
    item = scenario.item_by_id.get(event.item)
    if dev is None or item is None:
        return []
    out = []
    for a in scenario.assumptions:
        if not isinstance(a, IllegalUseInterest):
            continue
        if not hs.entities.leq(dev.entity, a.entity):
            continue
        if not hs.purposes.leq(event.purpose, a.purpose):
            continue
        if a.datatype is not None and not hs.datatypes.leq(item.datatype, a.datatype):
            continue
        out.append(a)
    return out


def enabled(event: Event, state: SystemState, scenario) -> bool:
    hs = scenario.hierarchies
    if isinstance(event, Request):
        sndr = _device(scenario, event.sndr)
        rcv = _device(scenario, event.rcv)
        if sndr is None or rcv is None or sndr.kind is not DeviceKind.DC:
            return False
        if event.sndr == event.rcv:
            return False
        return event.policy.datatype == event.datatype

    if isinstance(event, Send):
        sndr = _device(scenario, event.sndr)
        rcv = _device(scenario, event.rcv)
        item = scenario.item_by_id.get(event.item)
        if sndr is None or rcv is None or item is None:
            return False
        if sndr.kind is not DeviceKind.DS or rcv.kind is not DeviceKind.DC:
            return False
        if item.owner != event.sndr:
            return False
        own, sent = _active_pairs_for_send(event, state, scenario)
        return any(
            policy_subsumes(p_rcv, p_sndr, hs) for p_rcv in sent for p_sndr in own
        )

    if isinstance(event, Transfer):
        sndr = _device(scenario, event.sndr)
        rcv = _device(scenario, event.rcv)
        if sndr is None or rcv is None or event.sndr == event.rcv:
            return False
        if sndr.kind is not DeviceKind.DC or rcv.kind is not DeviceKind.DC:
            return False
        if not state.holds_item(event.sndr, event.item):
            return False
        return bool(_transfer_candidates(event, state, scenario))

    if isinstance(event, Use):
        dev = _device(scenario, event.dev)
        if dev is None or dev.kind is not DeviceKind.DC:
            return False
        if event.purpose not in hs.purposes.labels:
            return False
        for _, i, p in state.received_of(event.dev):
            if i != event.item:
                continue
            allowed = any(hs.purposes.leq(event.purpose, q) for q in p.dcr.dur.purposes)
            if allowed and scenario.clock.now < p.dcr.dur.retention:
                return True
        return False

    if isinstance(event, IllegalTransfer):
        sndr = _device(scenario, event.sndr)
        rcv = _device(scenario, event.rcv)
        if sndr is None or rcv is None or event.sndr == event.rcv:
            return False
        if sndr.kind is not DeviceKind.DC or rcv.kind is not DeviceKind.DC:
            return False
        if not state.holds_item(event.sndr, event.item):
            return False
        return bool(_matching_transfer_capabilities(event, scenario))

    if isinstance(event, IllegalUse):
        dev = _device(scenario, event.dev)
        if dev is None or dev.kind is not DeviceKind.DC:
            return False
        if not state.holds_item(event.dev, event.item):
            return False
        return bool(_matching_use_interests(event, scenario))

    raise TypeError(f"not an event: {event!r}")


# --- effects --------------------------------------------------------------------

def _unrestricted_policy(item: DataItem, rcv: Device, scenario) -> PilotPolicy:
    """Marker policy recorded by an illegal transfer when the receiver has no
    declared policy for the item's type: everything allowed, far-off deadline."""
    return PilotPolicy(
        datatype=item.datatype,
        dcr=DataCommunicationRule(
            condition=TT,
            entity=rcv.entity,
            dur=DataUsageRule(
                purposes=frozenset(scenario.hierarchies.purposes.labels),
                retention=Timestamp(4_000_000),
            ),
        ),
        transfers=frozenset(),
    )


def _shadow_policy(event: IllegalTransfer, scenario) -> PilotPolicy:
    item = scenario.item_by_id[event.item]
    declared = [
        p
        for p in scenario.policies.get(event.rcv, ())
        if scenario.hierarchies.datatypes.leq(item.datatype, p.datatype)
    ]
    if declared:
        return min(declared, key=policy_key)
    return _unrestricted_policy(item, scenario.device_by_id[event.rcv], scenario)


def _copy_value(state: SystemState, sndr: str, rcv: str, item: str):
    value = state.value_of(sndr, item)
    if value is None:
        return ()
    return ((rcv, item, value),)


def apply(event: Event, state: SystemState, scenario) -> SystemState:
    """Successor state for an enabled event; raises NotEnabledError otherwise.

    All effects are additive, and repeating an event is idempotent.
    """
    if not enabled(event, state, scenario):
        raise NotEnabledError(f"event not enabled: {event!r}")

    if isinstance(event, Request):
        return state.extend(policy_base=[(event.rcv, event.sndr, event.policy)])

    if isinstance(event, Send):
        hs = scenario.hierarchies
        own, sent = _active_pairs_for_send(event, state, scenario)
        admissible = [
            p_rcv
            for p_rcv in sent
            if any(policy_subsumes(p_rcv, p_sndr, hs) for p_sndr in own)
        ]
        chosen = min(admissible, key=policy_key)
        return state.extend(
            valuation=_copy_value(state, event.sndr, event.rcv, event.item),
            received=[(event.rcv, event.sndr, event.item, chosen)],
        )

    if isinstance(event, Transfer):
        chosen = min(_transfer_candidates(event, state, scenario), key=policy_key)
        return state.extend(
            valuation=_copy_value(state, event.sndr, event.rcv, event.item),
            received=[(event.rcv, event.sndr, event.item, chosen)],
        )

    if isinstance(event, IllegalTransfer):
        shadow = _shadow_policy(event, scenario)
        return state.extend(
            valuation=_copy_value(state, event.sndr, event.rcv, event.item),
            received=[(event.rcv, event.sndr, event.item, shadow)],
        )

    if isinstance(event, (Use, IllegalUse)):
        return state

    raise TypeError(f"not an event: {event!r}")
