"""Label hierarchies and their partial orders.

A hierarchy is a finite set of labels plus (child, parent) edges; the order
relation is the reflexive-transitive closure of the edge graph. Three of
these drive the whole engine: entities, datatypes and purposes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable, Tuple

from .errors import IncomparableError, UnknownLabelError, ValidationError


@dataclass(frozen=True)
class Hierarchy:
    labels: FrozenSet[str]
    edges: FrozenSet[Tuple[str, str]]  # (child, parent)

    def __post_init__(self):
        object.__setattr__(self, "labels", frozenset(self.labels))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        for child, parent in self.edges:
            for lab in (child, parent):
                if lab not in self.labels:
                    raise ValidationError(f"edge label {lab!r} is not in the label set")
        self._check_acyclic()

    def _check_acyclic(self):
        # DFS over child -> parent edges; a back edge means a cycle.
        parents = {}
        for child, parent in self.edges:
            parents.setdefault(child, set()).add(parent)
        WHITE, GREY, BLACK = 0, 1, 2
        color = {lab: WHITE for lab in self.labels}

        def visit(lab):
            color[lab] = GREY
            for nxt in parents.get(lab, ()):
                if color[nxt] == GREY:
                    raise ValidationError(f"hierarchy edges form a cycle through {nxt!r}")
                if color[nxt] == WHITE:
                    visit(nxt)
            color[lab] = BLACK

        for lab in sorted(self.labels):
            if color[lab] == WHITE:
                visit(lab)

    @cached_property
    def _ancestors(self) -> dict:
        """label -> frozenset of labels reachable via parent edges, self included."""
        parents = {}
        for child, parent in self.edges:
            parents.setdefault(child, set()).add(parent)
        closure: dict = {}

        def ancestors_of(lab):
            if lab in closure:
                return closure[lab]
            acc = {lab}
            for p in parents.get(lab, ()):
                acc |= ancestors_of(p)
            closure[lab] = frozenset(acc)
            return closure[lab]

        for lab in self.labels:
            ancestors_of(lab)
        return closure

    def require(self, label: str, kind: str = "label") -> str:
        if label not in self.labels:
            raise UnknownLabelError(label, kind)
        return label

    def leq(self, a: str, b: str) -> bool:
        self.require(a)
        self.require(b)
        return b in self._ancestors[a]


def order_leq(h: Hierarchy, a: str, b: str) -> bool:
    """True iff a is b or a reaches b through parent edges."""
    return h.leq(a, b)


def po_min(a: str, b: str, h: Hierarchy, literal: bool = False) -> str:
    """The smaller of two comparable labels.

    Incomparable labels raise IncomparableError unless ``literal`` is set,
    in which case the second operand is returned (fidelity mode; joins built
    this way are not guaranteed to subsume both operands).
    """
    if h.leq(a, b):
        return a
    if h.leq(b, a):
        return b
    if literal:
        return b
    raise IncomparableError(a, b)


def purpose_cap(p_set: Iterable[str], q_set: Iterable[str], h: Hierarchy) -> FrozenSet[str]:
    """Intersection keeping elements of the first set strictly below the second set.

    Asymmetric by definition: minima are kept from the first operand only.
    """
    ps = frozenset(p_set)
    qs = frozenset(q_set)
    for lab in ps | qs:
        h.require(lab, "purpose")
    below = {p for p in ps if any(p != q and h.leq(p, q) for q in qs)}
    return (ps & qs) | below
