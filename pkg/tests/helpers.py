"""Shared test utilities: independent oracles and random generators.

The oracles here deliberately re-derive results through a different route
than the implementation under test (closure enumeration for orders, a
reference interpreter for condition evaluation, depth-first sequence
enumeration for reachability) so the two sides can check each other.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Set, Tuple

from pilot.analysis import (
    CanReceive,
    CanUse,
    CanUseOtherThan,
    enumerate_events,
)
from pilot.conditions import (
    And,
    Atom,
    Condition,
    Const,
    FF,
    FalseCond,
    FuncApp,
    ItemRef,
    Not,
    TT,
    TrueCond,
)
from pilot.hierarchy import Hierarchy
from pilot.model import IllegalUse, SystemState, Use, apply, enabled, initial_state
from pilot.policy import (
    DataCommunicationRule,
    DataUsageRule,
    Hierarchies,
    PilotPolicy,
)
from pilot.timestamps import Timestamp


# --- order oracle -------------------------------------------------------------

def closure_pairs(labels, edges) -> Set[Tuple[str, str]]:
    """Reflexive-transitive closure by plain Warshall iteration."""
    labels = sorted(labels)
    reach = {(a, b): False for a in labels for b in labels}
    for a in labels:
        reach[(a, a)] = True
    for child, parent in edges:
        reach[(child, parent)] = True
    for k in labels:
        for a in labels:
            if not reach[(a, k)]:
                continue
            for b in labels:
                if reach[(k, b)]:
                    reach[(a, b)] = True
    return {pair for pair, ok in reach.items() if ok}


# --- reference condition evaluator ----------------------------------------------

def reference_eval(cond: Condition, valuation: Dict[Tuple[str, str], object], device: str):
    """Independent three-valued interpreter; returns True/False/None where
    None stands for undefined. Mirrors the semantics table directly."""

    def term(t):
        if isinstance(t, ItemRef):
            return valuation.get((device, t.item), None)
        if isinstance(t, Const):
            return t.value
        if isinstance(t, FuncApp):
            raise NotImplementedError("reference evaluator covers registered-function rows separately")
        raise TypeError(t)

    def pred(op, a, b):
        if op == "=":
            return a == b
        if op == "!=":
            return a != b
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]

    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, FalseCond):
        return False
    if isinstance(cond, Atom):
        a, b = term(cond.left), term(cond.right)
        if a is None or b is None:
            return None
        return pred(cond.predicate, a, b)
    if isinstance(cond, Not):
        inner = reference_eval(cond.operand, valuation, device)
        return None if inner is None else (not inner)
    if isinstance(cond, And):
        parts = [reference_eval(c, valuation, device) for c in cond.conjuncts]
        if any(p is None for p in parts):
            return None
        return all(parts)
    raise TypeError(cond)


def classical_eval(cond: Condition, assignment: Dict[str, object]) -> bool:
    """Two-valued evaluation under a total assignment of item values
    (used to check entailment soundness by enumeration)."""
    result = reference_eval(cond, {("d", k): v for k, v in assignment.items()}, "d")
    assert result is not None, "total assignments cannot yield undefined"
    return result


# --- random generators -------------------------------------------------------------

def random_hierarchy(rng: random.Random, prefix: str, chains: int = 2,
                     depth: int = 3, loose: int = 2) -> Hierarchy:
    """A forest of chains plus a few loose labels; chains make comparable
    pairs common, loose labels keep incomparability reachable."""
    labels = []
    edges = []
    for c in range(chains):
        chain = [f"{prefix}{c}_{lvl}" for lvl in range(depth)]
        labels.extend(chain)
        for lower, upper in zip(chain, chain[1:]):
            edges.append((lower, upper))
    for n in range(loose):
        labels.append(f"{prefix}loose{n}")
    # occasionally connect chain tops to a shared root
    if rng.random() < 0.5:
        root = f"{prefix}root"
        labels.append(root)
        for c in range(chains):
            edges.append((f"{prefix}{c}_{depth - 1}", root))
    return Hierarchy(frozenset(labels), frozenset(edges))


def random_hierarchies(rng: random.Random) -> Hierarchies:
    return Hierarchies(
        entities=random_hierarchy(rng, "E"),
        datatypes=random_hierarchy(rng, "T"),
        purposes=random_hierarchy(rng, "p"),
    )


def any_label(rng: random.Random, h: Hierarchy) -> str:
    return rng.choice(sorted(h.labels))


def comparable_pair(rng: random.Random, h: Hierarchy) -> Tuple[str, str]:
    labels = sorted(h.labels)
    for _ in range(200):
        a, b = rng.choice(labels), rng.choice(labels)
        if h.leq(a, b) or h.leq(b, a):
            return a, b
    lab = rng.choice(labels)
    return lab, lab


def random_timestamp(rng: random.Random) -> Timestamp:
    return Timestamp(rng.randrange(15000, 25000))


def random_term(rng: random.Random, items: List[str], values: List[int]):
    roll = rng.random()
    if roll < 0.5:
        return ItemRef(rng.choice(items))
    return Const(rng.choice(values))


def random_condition(rng: random.Random, items: List[str], values: List[int],
                     depth: int = 3) -> Condition:
    roll = rng.random()
    if depth <= 0 or roll < 0.55:
        pred = rng.choice(["=", "!=", "<", "<=", ">", ">="])
        return Atom(pred, random_term(rng, items, values), random_term(rng, items, values))
    if roll < 0.65:
        return TT
    if roll < 0.72:
        return FF
    if roll < 0.85:
        return Not(random_condition(rng, items, values, depth - 1))
    return And(tuple(random_condition(rng, items, values, depth - 1) for _ in range(2)))


_COND_ITEMS = ["speed", "age", "distance"]
_COND_VALUES = [0, 1, 2, 18]


def random_dur(rng: random.Random, purposes: Hierarchy) -> DataUsageRule:
    labels = sorted(purposes.labels)
    count = rng.randrange(1, min(3, len(labels)) + 1)
    return DataUsageRule(frozenset(rng.sample(labels, count)), random_timestamp(rng))


def random_dcr(rng: random.Random, hs: Hierarchies,
               entity: Optional[str] = None) -> DataCommunicationRule:
    return DataCommunicationRule(
        condition=random_condition(rng, _COND_ITEMS, _COND_VALUES, depth=2),
        entity=entity or any_label(rng, hs.entities),
        dur=random_dur(rng, hs.purposes),
    )


def random_policy(rng: random.Random, hs: Hierarchies,
                  datatype: Optional[str] = None,
                  entity: Optional[str] = None,
                  transfer_count: Optional[int] = None) -> PilotPolicy:
    if transfer_count is None:
        transfer_count = rng.randrange(0, 3)
    return PilotPolicy(
        datatype=datatype or any_label(rng, hs.datatypes),
        dcr=random_dcr(rng, hs, entity),
        transfers=frozenset(random_dcr(rng, hs) for _ in range(transfer_count)),
    )


def comparable_dcr_pair(rng: random.Random, hs: Hierarchies):
    e1, e2 = comparable_pair(rng, hs.entities)
    return random_dcr(rng, hs, e1), random_dcr(rng, hs, e2)


def comparable_policy_pair(rng: random.Random, hs: Hierarchies):
    t1, t2 = comparable_pair(rng, hs.datatypes)
    e1, e2 = comparable_pair(rng, hs.entities)
    # transfer entities drawn pairwise comparable as well so cross joins succeed
    p1_transfers, p2_transfers = [], []
    for _ in range(rng.randrange(0, 3)):
        te1, te2 = comparable_pair(rng, hs.entities)
        p1_transfers.append(random_dcr(rng, hs, te1))
        p2_transfers.append(random_dcr(rng, hs, te2))
    p1 = PilotPolicy(t1, random_dcr(rng, hs, e1), frozenset(p1_transfers))
    p2 = PilotPolicy(t2, random_dcr(rng, hs, e2), frozenset(p2_transfers))
    return p1, p2


# --- subsumption-chain builders (non-vacuous transitivity inputs) --------------------

def weaken_condition(rng: random.Random, cond: Condition) -> Condition:
    """Something the input condition entails."""
    roll = rng.random()
    if roll < 0.4:
        return TT
    if isinstance(cond, And) and roll < 0.8:
        return rng.choice(cond.conjuncts)
    return cond


def _ancestor(rng: random.Random, h: Hierarchy, label: str) -> str:
    ups = sorted(lab for lab in h.labels if h.leq(label, lab))
    return rng.choice(ups)


def weaken_dur(rng: random.Random, d: DataUsageRule, purposes: Hierarchy) -> DataUsageRule:
    new_purposes = {_ancestor(rng, purposes, p) for p in d.purposes}
    if rng.random() < 0.5:
        new_purposes.add(any_label(rng, purposes))
    return DataUsageRule(
        frozenset(new_purposes),
        Timestamp(d.retention.days + rng.randrange(0, 60)),
    )


def weaken_dcr(rng: random.Random, r: DataCommunicationRule, hs: Hierarchies) -> DataCommunicationRule:
    return DataCommunicationRule(
        condition=weaken_condition(rng, r.condition),
        entity=_ancestor(rng, hs.entities, r.entity),
        dur=weaken_dur(rng, r.dur, hs.purposes),
    )


def weaken_policy(rng: random.Random, p: PilotPolicy, hs: Hierarchies) -> PilotPolicy:
    """A policy the input subsumes, built by construction."""
    transfers = {weaken_dcr(rng, t, hs) for t in p.transfers}
    if rng.random() < 0.5:
        transfers.add(random_dcr(rng, hs))
    return PilotPolicy(
        datatype=_ancestor(rng, hs.datatypes, p.datatype),
        dcr=weaken_dcr(rng, p.dcr, hs),
        transfers=frozenset(transfers),
    )


# --- brute-force exploration oracle ----------------------------------------------------

def brute_force_states(scenario) -> Set[SystemState]:
    """All reachable states by recursive depth-first enumeration of event
    sequences, pruning only exact state repeats. Independent of the
    breadth-first graph construction under test."""
    seen: Set[SystemState] = set()

    def walk(state: SystemState):
        if state in seen:
            return
        seen.add(state)
        for ev in enumerate_events(state, scenario):
            walk(apply(ev, state, scenario))

    walk(initial_state(scenario))
    return seen


def all_progressing_sequences(scenario, max_depth: int = 20) -> Set[SystemState]:
    """Tree enumeration of event sequences without global memoization; every
    step must change the state. Only usable on very small scenarios."""
    reached: Set[SystemState] = set()

    def walk(state: SystemState, depth: int):
        reached.add(state)
        if depth >= max_depth:
            return
        for ev in enumerate_events(state, scenario):
            succ = apply(ev, state, scenario)
            if succ != state:
                walk(succ, depth + 1)

    walk(initial_state(scenario), 0)
    return reached


def brute_force_answer(query, states: Set[SystemState], scenario) -> bool:
    """Yes/no answer recomputed from a plain state set."""
    hs = scenario.hierarchies
    owner = scenario.device_by_id[scenario.item_by_id[query.item].owner]
    devices = [d.id for d in scenario.devices if hs.entities.leq(d.entity, query.entity)]
    now = scenario.clock.now

    if isinstance(query, CanReceive):
        if hs.entities.leq(owner.entity, query.entity):
            return True
        return any(
            d in devices and i == query.item
            for st in states
            for d, _, i, _ in st.received
        )

    def usable(purpose: str) -> bool:
        for st in states:
            for d in devices:
                if enabled(Use(d, query.item, purpose, now), st, scenario):
                    return True
                if enabled(IllegalUse(d, query.item, purpose, now), st, scenario):
                    return True
        return False

    if isinstance(query, CanUse):
        return usable(query.purpose)
    if isinstance(query, CanUseOtherThan):
        others = [
            q for q in sorted(hs.purposes.labels)
            if not any(hs.purposes.leq(q, ref) for ref in query.reference)
        ]
        return any(usable(q) for q in others)
    raise TypeError(query)
