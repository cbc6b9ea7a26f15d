"""Three-valued condition logic.

Conditions are finite formulas over device-local data items:
atoms ``t1 * t2`` with a binary predicate, negation, conjunction, and the
constants true/false. Terms are item references, typed constants, or
function applications. Evaluation against a partial valuation yields
true, false or undefined; undefined arises from missing data items and
propagates strictly through predicates and connectives.

``entails`` is a sound, deliberately incomplete syntactic checker used by
the policy subsumption algebra: it only answers True when implication is
certain.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Tuple, Union

from .errors import EvaluationError, UnknownSymbolError
from .timestamps import Timestamp


class TruthValue(Enum):
    TRUE = "true"
    FALSE = "false"
    UNDEFINED = "undefined"


class _Bottom:
    """Singleton marker for the undefined value of a missing data item."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "<undefined>"


BOTTOM = _Bottom()

Value = Union[int, str, Timestamp]


# --- terms -----------------------------------------------------------------

@dataclass(frozen=True)
class ItemRef:
    item: str


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class FuncApp:
    func: str
    args: Tuple["Term", ...]


Term = Union[ItemRef, Const, FuncApp]


# --- conditions ------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    predicate: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    operand: "Condition"


@dataclass(frozen=True)
class And:
    conjuncts: Tuple["Condition", ...]

    def __post_init__(self):
        if len(self.conjuncts) < 2:
            raise ValueError("a conjunction needs at least two conjuncts")


@dataclass(frozen=True)
class TrueCond:
    pass


@dataclass(frozen=True)
class FalseCond:
    pass


TT = TrueCond()
FF = FalseCond()

Condition = Union[Atom, Not, And, TrueCond, FalseCond]


def conj(*parts: Condition) -> Condition:
    """Build a (possibly unary/nullary) conjunction without normalizing."""
    if not parts:
        return TT
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


# --- interpretation registries ---------------------------------------------

PREDICATES = ("=", "!=", "<", "<=", ">", ">=")

# Function symbols are structurally supported but none is registered by
# default; scenarios may not introduce new symbols.
_FUNCTIONS: dict[str, tuple[int, Callable[..., Value]]] = {}


def register_function(name: str, arity: int, fn: Callable[..., Value]) -> None:
    _FUNCTIONS[name] = (arity, fn)


def _orderable(a: Value, b: Value) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return False
    if isinstance(a, int) and isinstance(b, int):
        return True
    if isinstance(a, Timestamp) and isinstance(b, Timestamp):
        return True
    return False


def _apply_predicate(pred: str, a: Value, b: Value) -> bool:
    if pred == "=":
        return a == b
    if pred == "!=":
        return a != b
    if pred not in PREDICATES:
        raise UnknownSymbolError(pred)
    if not _orderable(a, b):
        raise EvaluationError(
            f"predicate {pred!r} is not defined for values {a!r} and {b!r}"
        )
    if pred == "<":
        return a < b
    if pred == "<=":
        return a <= b
    if pred == ">":
        return a > b
    return a >= b


# --- evaluation ------------------------------------------------------------

def eval_term(term: Term, valuation: Mapping[tuple[str, str], Value], device: str):
    """Value of a term on a device, or BOTTOM when a referenced item is missing."""
    if isinstance(term, ItemRef):
        return valuation.get((device, term.item), BOTTOM)
    if isinstance(term, Const):
        return term.value
    if isinstance(term, FuncApp):
        if term.func not in _FUNCTIONS:
            raise UnknownSymbolError(term.func)
        arity, fn = _FUNCTIONS[term.func]
        if arity != len(term.args):
            raise EvaluationError(f"function {term.func!r} expects {arity} arguments")
        args = [eval_term(a, valuation, device) for a in term.args]
        if any(a is BOTTOM for a in args):
            return BOTTOM
        return fn(*args)
    raise TypeError(f"not a term: {term!r}")


def evaluate(phi: Condition, valuation: Mapping[tuple[str, str], Value], device: str) -> TruthValue:
    """Three-valued evaluation; undefined is strict through atoms, not and and."""
    if isinstance(phi, TrueCond):
        return TruthValue.TRUE
    if isinstance(phi, FalseCond):
        return TruthValue.FALSE
    if isinstance(phi, Atom):
        if phi.predicate not in PREDICATES:
            raise UnknownSymbolError(phi.predicate)
        left = eval_term(phi.left, valuation, device)
        right = eval_term(phi.right, valuation, device)
        if left is BOTTOM or right is BOTTOM:
            return TruthValue.UNDEFINED
        return TruthValue.TRUE if _apply_predicate(phi.predicate, left, right) else TruthValue.FALSE
    if isinstance(phi, Not):
        inner = evaluate(phi.operand, valuation, device)
        if inner is TruthValue.UNDEFINED:
            return TruthValue.UNDEFINED
        return TruthValue.FALSE if inner is TruthValue.TRUE else TruthValue.TRUE
    if isinstance(phi, And):
        parts = [evaluate(c, valuation, device) for c in phi.conjuncts]
        if any(p is TruthValue.UNDEFINED for p in parts):
            return TruthValue.UNDEFINED
        return (
            TruthValue.TRUE
            if all(p is TruthValue.TRUE for p in parts)
            else TruthValue.FALSE
        )
    raise TypeError(f"not a condition: {phi!r}")


# --- canonical ordering ----------------------------------------------------

def term_key(term: Term) -> tuple:
    if isinstance(term, ItemRef):
        return (0, term.item)
    if isinstance(term, Const):
        v = term.value
        if isinstance(v, Timestamp):
            return (1, "date", str(v.days))
        if isinstance(v, int):
            return (1, "int", f"{v:020d}")
        return (1, "str", str(v))
    return (2, term.func, tuple(term_key(a) for a in term.args))


def condition_key(phi: Condition) -> tuple:
    if isinstance(phi, TrueCond):
        return (0,)
    if isinstance(phi, FalseCond):
        return (1,)
    if isinstance(phi, Atom):
        return (2, phi.predicate, term_key(phi.left), term_key(phi.right))
    if isinstance(phi, Not):
        return (3, condition_key(phi.operand))
    return (4, tuple(condition_key(c) for c in phi.conjuncts))


# --- normalization ---------------------------------------------------------

def normalize(phi: Condition) -> Condition:
    """Flatten, sort and deduplicate conjunctions; drop true conjuncts;
    collapse any conjunction containing false to false.

    Caution: the false-annihilator rule is classical; on partial valuations
    a conjunction of false with an undefined conjunct evaluates to undefined
    while false alone does not.
    """
    if isinstance(phi, (TrueCond, FalseCond, Atom)):
        return phi
    if isinstance(phi, Not):
        return Not(normalize(phi.operand))
    if isinstance(phi, And):
        flat: list[Condition] = []

        def collect(c: Condition):
            c = normalize(c)
            if isinstance(c, And):
                flat.extend(c.conjuncts)
            else:
                flat.append(c)

        for part in phi.conjuncts:
            collect(part)
        if any(isinstance(c, FalseCond) for c in flat):
            return FF
        kept = [c for c in flat if not isinstance(c, TrueCond)]
        unique = sorted(set(kept), key=condition_key)
        if not unique:
            return TT
        if len(unique) == 1:
            return unique[0]
        return And(tuple(unique))
    raise TypeError(f"not a condition: {phi!r}")


# --- sound entailment ------------------------------------------------------

def entails(a: Condition, b: Condition) -> bool:
    """True only when a logically implies b (a is at least as strong as b)."""
    return _entails(normalize(a), normalize(b))


def _entails(a: Condition, b: Condition) -> bool:
    if isinstance(b, TrueCond):
        return True
    if isinstance(a, FalseCond):
        return True
    if a == b:
        return True
    if isinstance(b, And):
        return all(_entails(a, part) for part in b.conjuncts)
    if isinstance(a, And):
        return any(_entails(part, b) for part in a.conjuncts)
    return False


def referenced_items(phi: Condition) -> frozenset[str]:
    """Item identifiers a condition reads (used by scenario validation)."""
    items: set[str] = set()

    def walk_term(t: Term):
        if isinstance(t, ItemRef):
            items.add(t.item)
        elif isinstance(t, FuncApp):
            for a in t.args:
                walk_term(a)

    def walk(c: Condition):
        if isinstance(c, Atom):
            walk_term(c.left)
            walk_term(c.right)
        elif isinstance(c, Not):
            walk(c.operand)
        elif isinstance(c, And):
            for part in c.conjuncts:
                walk(part)

    walk(phi)
    return frozenset(items)
