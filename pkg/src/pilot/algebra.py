"""Subsumption ordering and join operator on policies.

Subsumption reads "at least as restrictive as": a rule subsumes another when
its condition is stronger, its receiving entity is more specific, its purpose
set is covered and its retention deadline is no later. The join combines two
policies componentwise and, when it succeeds, is subsumed by both operands.
"""

from __future__ import annotations

from .conditions import conj, entails
from .hierarchy import Hierarchy, po_min, purpose_cap
from .policy import DataCommunicationRule, DataUsageRule, Hierarchies, PilotPolicy


def dur_subsumes(d1: DataUsageRule, d2: DataUsageRule, h: Hierarchy) -> bool:
    """d1 is at least as restrictive as d2: every purpose of d1 is covered by
    some purpose of d2 and d1's retention deadline is no later."""
    for p in d1.purposes | d2.purposes:
        h.require(p, "purpose")
    covered = all(any(h.leq(p1, p2) for p2 in d2.purposes) for p1 in d1.purposes)
    return covered and d1.retention <= d2.retention


def dcr_subsumes(r1: DataCommunicationRule, r2: DataCommunicationRule, hs: Hierarchies) -> bool:
    """r1 is at least as restrictive as r2: stronger condition, more specific
    entity, more restrictive usage rule."""
    hs.entities.require(r1.entity, "entity")
    hs.entities.require(r2.entity, "entity")
    return (
        entails(r1.condition, r2.condition)
        and hs.entities.leq(r1.entity, r2.entity)
        and dur_subsumes(r1.dur, r2.dur, hs.purposes)
    )


def policy_subsumes(p1: PilotPolicy, p2: PilotPolicy, hs: Hierarchies) -> bool:
    """p1 is at least as restrictive as p2; every transfer rule of p1 must be
    subsumed by some transfer rule of p2."""
    hs.datatypes.require(p1.datatype, "datatype")
    hs.datatypes.require(p2.datatype, "datatype")
    if not hs.datatypes.leq(p1.datatype, p2.datatype):
        return False
    if not dcr_subsumes(p1.dcr, p2.dcr, hs):
        return False
    return all(
        any(dcr_subsumes(t1, t2, hs) for t2 in p2.transfers) for t1 in p1.transfers
    )


def dur_join(d1: DataUsageRule, d2: DataUsageRule, h: Hierarchy) -> DataUsageRule:
    """Purpose-set cap plus the earlier retention deadline.

    The result may carry an empty purpose set (no allowed purpose); that is
    permitted in join results even though authored rules require purposes.
    """
    return DataUsageRule(
        purposes=purpose_cap(d1.purposes, d2.purposes, h),
        retention=min(d1.retention, d2.retention),
    )


def dcr_join(
    r1: DataCommunicationRule,
    r2: DataCommunicationRule,
    hs: Hierarchies,
    literal_min: bool = False,
) -> DataCommunicationRule:
    """Conjoined condition, minimum entity, joined usage rule.

    Raises IncomparableError when the entities are unrelated, unless
    ``literal_min`` selects the fidelity mode of ``po_min``.
    """
    return DataCommunicationRule(
        condition=conj(r1.condition, r2.condition),
        entity=po_min(r1.entity, r2.entity, hs.entities, literal=literal_min),
        dur=dur_join(r1.dur, r2.dur, hs.purposes),
    )


def policy_join(
    p1: PilotPolicy,
    p2: PilotPolicy,
    hs: Hierarchies,
    literal_min: bool = False,
) -> PilotPolicy:
    """Componentwise join; the transfer set holds the joins of all cross
    pairs (t, t') where t from p1 subsumes t' from p2."""
    transfers = frozenset(
        dcr_join(t1, t2, hs, literal_min)
        for t1 in p1.transfers
        for t2 in p2.transfers
        if dcr_subsumes(t1, t2, hs)
    )
    return PilotPolicy(
        datatype=po_min(p1.datatype, p2.datatype, hs.datatypes, literal=literal_min),
        dcr=dcr_join(p1.dcr, p2.dcr, hs, literal_min),
        transfers=transfers,
    )
