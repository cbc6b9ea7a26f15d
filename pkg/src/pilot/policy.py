"""Abstract syntax of PILOT privacy policies.

A policy names a datatype, carries one data communication rule for
collection, and a set of transfer rules licensing onward disclosure.
All values are immutable and hashable so they can live in sets and in
canonically hashed system states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet

from .conditions import Condition, condition_key
from .hierarchy import Hierarchy
from .timestamps import Timestamp


@dataclass(frozen=True)
class DataUsageRule:
    purposes: FrozenSet[str]
    retention: Timestamp

    def __post_init__(self):
        object.__setattr__(self, "purposes", frozenset(self.purposes))


@dataclass(frozen=True)
class DataCommunicationRule:
    condition: Condition
    entity: str
    dur: DataUsageRule


@dataclass(frozen=True)
class PilotPolicy:
    datatype: str
    dcr: DataCommunicationRule
    transfers: FrozenSet[DataCommunicationRule]

    def __post_init__(self):
        object.__setattr__(self, "transfers", frozenset(self.transfers))


@dataclass(frozen=True)
class Hierarchies:
    entities: Hierarchy
    datatypes: Hierarchy
    purposes: Hierarchy


# Canonical sort keys give deterministic ordering for rendering, event
# enumeration and tie-breaking; they mirror structural equality.

def dur_key(d: DataUsageRule) -> tuple:
    return (tuple(sorted(d.purposes)), d.retention.days)


def dcr_key(r: DataCommunicationRule) -> tuple:
    return (r.entity, dur_key(r.dur), condition_key(r.condition))


def policy_key(p: PilotPolicy) -> tuple:
    return (p.datatype, dcr_key(p.dcr), tuple(sorted(dcr_key(t) for t in p.transfers)))
