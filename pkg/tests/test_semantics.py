import random
from fractions import Fraction

import pytest

from gen import make_ftable, random_domain, random_interpretation, random_program
from relkit.ast import App, Atom, Const, Disjunct, Var
from relkit.domain import (
    BUILTIN_FUNCTIONS,
    BUILTIN_PREDICATES,
    Domain,
    FunctionTable,
    NonEnumerableDomain,
)
from relkit.semantics import (
    Interpretation,
    SignatureMismatch,
    UnboundVariable,
    eval_term,
    intersect,
    join,
    leq,
    relation_of,
    satisfies,
)
from relkit.values import EMPTY_ASSIGNMENT, UNDEFINED, Assignment


def int_ftable(lo=-10, hi=10):
    dom = Domain.int_range(lo, hi)
    fns = {
        "s": BUILTIN_FUNCTIONS["succ"],
        "+": BUILTIN_FUNCTIONS["add"],
        "*": BUILTIN_FUNCTIONS["mul"],
    }
    return dom, FunctionTable(dom, fns, {}, {"<": BUILTIN_PREDICATES["lt"]})


def test_successor_of_successor():
    # s(s(x)) and x+2 denote the same function
    _, ft = int_ftable()
    alpha = Assignment({"x": 3})
    t = App("s", (App("s", (Var("x"),)),))
    t2 = App("+", (Var("x"), Const("2")))
    assert eval_term(t, ft, alpha) == 5
    assert eval_term(t2, ft, alpha) == 5


def test_linear_combination():
    _, ft = int_ftable()
    t = App("+", (App("+", (Var("x"), App("*", (Const("2"), Var("y"))))), App("*", (Const("3"), Var("z")))))
    alpha = Assignment({"x": 3, "y": 2, "z": 1})
    assert eval_term(t, ft, alpha) == 10


def test_unbound_variable_is_an_error():
    _, ft = int_ftable()
    with pytest.raises(UnboundVariable):
        eval_term(Var("x"), ft, EMPTY_ASSIGNMENT)


def test_undefined_propagates_and_atoms_are_just_false():
    dom = Domain.int_range(0, 3)
    ft = FunctionTable(dom, {"s": BUILTIN_FUNCTIONS["succ"]}, {}, {})
    alpha = Assignment({"x": 3})
    assert eval_term(App("s", (Var("x"),)), ft, alpha) is UNDEFINED  # 4 is outside D
    atom = Atom("=", (App("s", (Var("x"),)), Var("x")))
    assert satisfies(atom, Interpretation(), ft, dom, alpha) is False


def test_circle_formula_relation():
    # x*x + y*y < 2 and x > y  (the bound 2 must itself lie in D)
    dom, ft = int_ftable(0, 2)
    lhs = App("+", (App("*", (Var("x"), Var("x"))), App("*", (Var("y"), Var("y")))))
    body = [Disjunct((), (Atom("<", (lhs, Const("2"))), Atom("<", (Var("y"), Var("x")))))]
    rel = relation_of(body, Interpretation(), ft, dom)
    assert rel == frozenset({Assignment({"x": 1, "y": 0})})
    # admitting -1 into the domain brings in the second solution
    dom2, ft2 = int_ftable(-1, 2)
    rel2 = relation_of(body, Interpretation(), ft2, dom2)
    assert rel2 == frozenset({Assignment({"x": 1, "y": 0}), Assignment({"x": 0, "y": -1})})


def test_closed_formula_denotes_unit_or_empty():
    dom, ft = int_ftable()
    taut = Atom("=", (Const("1"), Const("1")))
    assert relation_of(taut, Interpretation(), ft, dom) == frozenset({EMPTY_ASSIGNMENT})
    fals = Atom("=", (Const("0"), Const("1")))
    assert relation_of(fals, Interpretation(), ft, dom) == frozenset()


def test_existential_satisfaction():
    dom = Domain.int_range(0, 5)
    ft = FunctionTable(dom, {"s": BUILTIN_FUNCTIONS["succ"]}, {}, {})
    interp = Interpretation({"p": {(2,)}})
    d = Disjunct(("y",), (Atom("=", (Var("x"), App("s", (Var("y"),)))), Atom("p", (Var("y"),))))
    assert satisfies(d, interp, ft, dom, Assignment({"x": 3}))
    assert not satisfies(d, interp, ft, dom, Assignment({"x": 4}))


def test_existential_needs_enumerable_domain():
    dom = Domain.all_of("rational")
    ft = FunctionTable(dom, {}, {}, {})
    d = Disjunct(("y",), (Atom("=", (Var("x"), Var("y"))),))
    with pytest.raises(NonEnumerableDomain):
        satisfies(d, Interpretation(), ft, dom, Assignment({"x": Fraction(1)}))


def test_equality_is_identity_on_the_domain():
    dom, ft = int_ftable()
    a = Atom("=", (Var("x"), Var("y")))
    assert satisfies(a, Interpretation(), ft, dom, Assignment({"x": 2, "y": 2}))
    assert not satisfies(a, Interpretation(), ft, dom, Assignment({"x": 2, "y": 3}))


def test_true_false_fixed_meanings():
    dom, ft = int_ftable()
    assert satisfies(Atom("true"), Interpretation(), ft, dom, EMPTY_ASSIGNMENT)
    assert not satisfies(Atom("false"), Interpretation(), ft, dom, EMPTY_ASSIGNMENT)


# ---------------------------------------------------------------------------
# The (F,=)-set partial order


def test_leq_join_basics():
    a = Interpretation({"p": {(1,)}, "q": set()})
    b = Interpretation({"p": {(1,), (2,)}, "q": {(0, 0)}})
    assert leq(a, b) and not leq(b, a)
    assert join(a, b) == b
    assert leq(a, a)


def test_leq_requires_same_shape():
    with pytest.raises(SignatureMismatch):
        leq(Interpretation({"p": set()}), Interpretation({"q": set()}))


def test_intersect():
    a = Interpretation({"p": {(1,), (2,)}})
    b = Interpretation({"p": {(2,), (3,)}})
    assert intersect([a, b]) == Interpretation({"p": {(2,)}})
    with pytest.raises(ValueError):
        intersect([])


def test_order_laws_on_random_interpretations():
    rng = random.Random(23)
    for _ in range(100):
        dom = random_domain(rng)
        ft = make_ftable(dom)
        prog = random_program(rng, dom)
        a = random_interpretation(rng, prog, ft, dom)
        b = random_interpretation(rng, prog, ft, dom)
        j = join(a, b)
        assert leq(a, j) and leq(b, j)
        m = intersect([a, b])
        assert leq(m, a) and leq(m, b)
        # join is the least upper bound
        assert leq(j, join(j, a))
        assert (leq(a, b) and leq(b, a)) == (a == b)
