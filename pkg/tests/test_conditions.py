import random

import pytest
from hypothesis import given, settings, strategies as st

from pilot.conditions import (
    And,
    Atom,
    BOTTOM,
    Const,
    FF,
    FuncApp,
    ItemRef,
    Not,
    TT,
    TruthValue,
    _FUNCTIONS,
    entails,
    eval_term,
    evaluate,
    normalize,
    referenced_items,
)
from pilot.errors import EvaluationError, UnknownSymbolError
from pilot.timestamps import Timestamp

from tests.helpers import (
    _COND_ITEMS,
    _COND_VALUES,
    classical_eval,
    random_condition,
    reference_eval,
)

T, F, U = TruthValue.TRUE, TruthValue.FALSE, TruthValue.UNDEFINED


def atom(pred="=", left="x", right=1):
    lterm = ItemRef(left) if isinstance(left, str) and left.islower() else Const(left)
    rterm = ItemRef(right) if isinstance(right, str) and right.islower() else Const(right)
    return Atom(pred, lterm, rterm)


# --- the evaluation semantics, row by row ---------------------------------------

class TestEvaluationRows:
    def test_true_constant(self):
        assert evaluate(TT, {}, "d") is T

    def test_false_constant(self):
        assert evaluate(FF, {}, "d") is F

    def test_item_lookup(self):
        nu = {("d", "age"): 21}
        assert eval_term(ItemRef("age"), nu, "d") == 21

    def test_item_lookup_missing_is_undefined(self):
        assert eval_term(ItemRef("age"), {}, "d") is BOTTOM

    def test_item_lookup_is_per_device(self):
        nu = {("other", "age"): 21}
        assert eval_term(ItemRef("age"), nu, "d") is BOTTOM

    def test_constant_interpretation(self):
        assert eval_term(Const(5), {}, "d") == 5
        assert eval_term(Const("Lyon"), {}, "d") == "Lyon"

    def test_function_application(self, monkeypatch):
        monkeypatch.setitem(_FUNCTIONS, "double", (1, lambda v: v * 2))
        nu = {("d", "age"): 21}
        assert eval_term(FuncApp("double", (ItemRef("age"),)), nu, "d") == 42

    def test_function_undefined_argument_propagates(self, monkeypatch):
        monkeypatch.setitem(_FUNCTIONS, "double", (1, lambda v: v * 2))
        assert eval_term(FuncApp("double", (ItemRef("age"),)), {}, "d") is BOTTOM

    def test_unregistered_function_errors(self):
        with pytest.raises(UnknownSymbolError):
            eval_term(FuncApp("mystery", (Const(1),)), {}, "d")

    def test_atom_defined_operands(self):
        nu = {("d", "age"): 21}
        assert evaluate(atom(">=", "age", 18), nu, "d") is T
        assert evaluate(atom("<", "age", 18), nu, "d") is F

    def test_atom_undefined_operand(self):
        # a referenced item with no value makes the whole atom undefined
        assert evaluate(atom("=", "car_location", "Lyon"), {}, "d") is U

    def test_negation_classical_on_defined(self):
        assert evaluate(Not(TT), {}, "d") is F
        assert evaluate(Not(FF), {}, "d") is T

    def test_negation_strict_on_undefined(self):
        assert evaluate(Not(atom()), {}, "d") is U

    def test_conjunction_classical_on_defined(self):
        assert evaluate(And((TT, TT)), {}, "d") is T
        assert evaluate(And((TT, FF)), {}, "d") is F

    def test_conjunction_strict_on_undefined(self):
        # strict rule: undefined wins even against false
        assert evaluate(And((atom(), FF)), {}, "d") is U
        assert evaluate(And((FF, atom())), {}, "d") is U
        assert evaluate(And((atom(), TT)), {}, "d") is U


def test_example_undefined_location():
    cond = atom("=", "car_location", "Lyon")
    assert evaluate(cond, {}, "d") is U


def test_example_age_conjunction():
    cond = And((atom(">=", "age", 18), TT))
    # brute-force application of the semantics table
    assert reference_eval(cond, {("d", "age"): 21}, "d") is True
    assert evaluate(cond, {("d", "age"): 21}, "d") is T


def test_generated_agreement_with_reference_interpreter():
    rng = random.Random(424242)
    mismatches = 0
    for _ in range(2000):
        cond = random_condition(rng, _COND_ITEMS, _COND_VALUES, depth=3)
        nu = {}
        for item in _COND_ITEMS:
            if rng.random() < 0.7:
                nu[("d", item)] = rng.choice(_COND_VALUES)
        got = evaluate(cond, nu, "d")
        want = reference_eval(cond, nu, "d")
        want_tv = {True: T, False: F, None: U}[want]
        if got is not want_tv:
            mismatches += 1
    assert mismatches == 0


def test_undefined_item_always_undefines():
    # every referenced-undefined item forces the undefined result
    rng = random.Random(11)
    checked = 0
    for _ in range(500):
        cond = random_condition(rng, _COND_ITEMS, _COND_VALUES, depth=3)
        refs = referenced_items(cond)
        if not refs:
            continue
        nu = {("d", item): rng.choice(_COND_VALUES) for item in refs}
        missing = rng.choice(sorted(refs))
        del nu[("d", missing)]
        assert evaluate(cond, nu, "d") is U
        checked += 1
    assert checked > 200


def test_order_predicates_on_dates():
    earlier = Const(Timestamp.parse("21/03/2019"))
    later = Const(Timestamp.parse("26/04/2019"))
    assert evaluate(Atom("<", earlier, later), {}, "d") is T
    assert evaluate(Atom(">=", earlier, later), {}, "d") is F


def test_equality_on_strings_and_cross_types():
    assert evaluate(Atom("=", Const("Lyon"), Const("Lyon")), {}, "d") is T
    assert evaluate(Atom("!=", Const("Lyon"), Const("Paris")), {}, "d") is T
    assert evaluate(Atom("=", Const(3), Const("3")), {}, "d") is F


def test_order_on_strings_rejected():
    with pytest.raises(EvaluationError):
        evaluate(Atom("<", Const("a"), Const("b")), {}, "d")


def test_unknown_predicate_rejected():
    with pytest.raises(UnknownSymbolError):
        evaluate(Atom("~", Const(1), Const(2)), {}, "d")


# --- normalization -----------------------------------------------------------------

class TestNormalize:
    def test_true_unit(self):
        cond = And((TT, atom("=", "car_location", "Lyon")))
        assert normalize(cond) == atom("=", "car_location", "Lyon")

    def test_idempotence(self):
        phi = atom(">=", "age", 18)
        assert normalize(And((phi, phi))) == phi

    def test_false_annihilator(self):
        assert normalize(And((atom("=", "a", 1), FF))) == FF

    def test_flattens_and_sorts(self):
        a, b, c = atom("=", "x", 1), atom("=", "y", 2), atom("=", "z", 3)
        left = normalize(And((And((c, b)), a)))
        right = normalize(And((a, And((b, c)))))
        assert left == right
        assert isinstance(left, And) and len(left.conjuncts) == 3

    def test_all_true_collapses_to_true(self):
        assert normalize(And((TT, TT))) == TT

    def test_normalize_is_idempotent(self):
        rng = random.Random(5)
        for _ in range(300):
            cond = random_condition(rng, _COND_ITEMS, _COND_VALUES)
            once = normalize(cond)
            assert normalize(once) == once


@st.composite
def condition_strategy(draw, depth=3):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    return random_condition(rng, _COND_ITEMS, _COND_VALUES, depth=depth)


@given(condition_strategy(), st.dictionaries(st.sampled_from(_COND_ITEMS), st.sampled_from(_COND_VALUES)))
@settings(max_examples=300, deadline=None)
def test_normalize_preserves_total_valuations(cond, assignment):
    # on total assignments normalization never changes the verdict
    total = {item: assignment.get(item, 0) for item in _COND_ITEMS}
    assert classical_eval(cond, total) == classical_eval(normalize(cond), total)


@given(condition_strategy(), st.dictionaries(st.sampled_from(_COND_ITEMS), st.sampled_from(_COND_VALUES)))
@settings(max_examples=300, deadline=None)
def test_normalize_preserves_partial_valuations_without_false(cond, assignment):
    # the false-annihilator is the one rewrite that is not strict-undefined
    # preserving, so the partial-valuation property holds on false-free inputs
    def has_false(c):
        if c == FF:
            return True
        if isinstance(c, Not):
            return has_false(c.operand)
        if isinstance(c, And):
            return any(has_false(part) for part in c.conjuncts)
        return False

    if has_false(cond):
        return
    nu = {("d", k): v for k, v in assignment.items()}
    assert evaluate(cond, nu, "d") is evaluate(normalize(cond), nu, "d")


# --- entailment ----------------------------------------------------------------------

class TestEntails:
    def test_anything_entails_true(self):
        assert entails(atom("=", "car_location", "Lyon"), TT)
        assert entails(FF, TT)

    def test_false_entails_anything(self):
        assert entails(FF, atom("=", "x", 1))

    def test_reflexive(self):
        phi = And((atom(">=", "age", 18), atom("=", "x", 1)))
        assert entails(phi, phi)

    def test_conjunction_entails_each_conjunct(self):
        a, b = atom("=", "x", 1), atom(">=", "age", 18)
        assert entails(And((a, b)), a)
        assert entails(And((a, b)), b)

    def test_entails_conjunction_needs_both(self):
        a, b = atom("=", "x", 1), atom(">=", "age", 18)
        assert entails(And((a, b)), And((b, a)))
        assert not entails(a, And((a, b)))

    def test_true_does_not_entail_atom(self):
        cond = atom(">=", "age", 18)
        assert not entails(TT, cond)
        # countermodel: age=10 makes the right side false while tt holds
        assert classical_eval(cond, {"age": 10, "speed": 0, "distance": 0}) is False

    def test_incompleteness_is_on_the_safe_side(self):
        # semantically valid but not derivable by the syntactic rules
        stronger = atom(">=", "age", 21)
        weaker = atom(">=", "age", 18)
        assert not entails(stronger, weaker)


def _enumerate_assignments(items, values):
    if not items:
        yield {}
        return
    head, *rest = items
    for sub in _enumerate_assignments(rest, values):
        for v in values:
            yield {head: v, **sub}


def test_entailment_soundness_by_enumeration():
    rng = random.Random(20190426)
    positives = 0
    for _ in range(800):
        a = random_condition(rng, _COND_ITEMS, _COND_VALUES, depth=3)
        b = random_condition(rng, _COND_ITEMS, _COND_VALUES, depth=3)
        if not entails(a, b):
            continue
        positives += 1
        for assignment in _enumerate_assignments(_COND_ITEMS, _COND_VALUES):
            if classical_eval(a, assignment):
                assert classical_eval(b, assignment), (a, b, assignment)
    assert positives >= 50  # the sample must actually exercise the rules
