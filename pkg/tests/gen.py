"""Seeded random generators shared by the property and acceptance tests.

Programs are generated valid by construction (checked with validate) over
small integer domains, so both step evaluators and the model-theoretic
checks stay exhaustive and fast.
"""

import itertools
import random

from relkit.ast import App, Atom, Clause, Const, Disjunct, Program, Signature, Var, validate
from relkit.domain import BUILTIN_FUNCTIONS, BUILTIN_PREDICATES, Domain, FunctionTable
from relkit.semantics import Interpretation

PRED_NAMES = ("p", "q", "r")
HEAD_VARS = ("x", "y")
EXTRA_VARS = ("z", "w")


def random_domain(rng: random.Random) -> Domain:
    hi = rng.randint(1, 4)
    return Domain.int_range(0, hi)


def make_ftable(domain, with_succ=True, with_lt=False) -> FunctionTable:
    functions = {"s": BUILTIN_FUNCTIONS["succ"]} if with_succ else {}
    predicates = {"<": BUILTIN_PREDICATES["lt"]} if with_lt else {}
    return FunctionTable(domain, functions, {}, predicates)


def _random_term(rng, vars_, values, with_succ):
    roll = rng.random()
    if roll < 0.5:
        return Var(rng.choice(vars_))
    if roll < 0.8 or not with_succ:
        return Const(str(rng.choice(values)))
    return App("s", (Var(rng.choice(vars_)),))


def random_program(rng: random.Random, domain: Domain, with_succ=True, with_lt=False) -> Program:
    """A valid program: every head variable and existential occurs in its
    disjunct's conjuncts (padded with reflexive equalities when needed)."""
    values = domain.enumerate()
    npred = rng.randint(1, 3)
    preds = {}
    for name in PRED_NAMES[:npred]:
        preds[name] = rng.randint(1, 2)
    clauses = []
    for name, arity in preds.items():
        head_vars = HEAD_VARS[:arity]
        head = Atom(name, tuple(Var(v) for v in head_vars))
        disjuncts = []
        for _ in range(rng.randint(1, 2)):
            existentials = tuple(EXTRA_VARS[: rng.randint(0, 2)])
            vars_ = tuple(head_vars) + existentials
            conjuncts = []
            for _ in range(rng.randint(1, 3)):
                roll = rng.random()
                if roll < 0.45:
                    conjuncts.append(
                        Atom("=", (Var(rng.choice(vars_)), _random_term(rng, vars_, values, with_succ)))
                    )
                elif roll < 0.55 and with_lt:
                    conjuncts.append(Atom("<", (Var(rng.choice(vars_)), Var(rng.choice(vars_)))))
                else:
                    callee = rng.choice(list(preds))
                    conjuncts.append(
                        Atom(callee, tuple(Var(rng.choice(vars_)) for _ in range(preds[callee])))
                    )
            used = set()
            for c in conjuncts:
                for t in c.args:
                    used |= _term_vars(t)
            for v in vars_:
                if v not in used:
                    conjuncts.append(Atom("=", (Var(v), Var(v))))
            disjuncts.append(Disjunct(existentials, tuple(conjuncts)))
        clauses.append(Clause(head, tuple(disjuncts)))
    sig_preds = dict(preds)
    if with_lt:
        sig_preds["<"] = 2
    program = Program(
        Signature.make((), {"s": 1} if with_succ else {}, sig_preds),
        tuple(clauses),
    )
    assert validate(program) == [], validate(program)
    return program


def _term_vars(t):
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, App):
        out = set()
        for a in t.args:
            out |= _term_vars(a)
        return out
    return set()


def interpretation_predicates(program, ftable):
    return [p for p, _ in program.signature.predicates if p not in ftable.predicates]


def random_interpretation(rng: random.Random, program: Program, ftable, domain: Domain) -> Interpretation:
    values = domain.enumerate()
    arities = dict(program.signature.predicates)
    rel = {}
    for p in interpretation_predicates(program, ftable):
        space = list(itertools.product(values, repeat=arities[p]))
        rel[p] = frozenset(t for t in space if rng.random() < 0.3)
    return Interpretation(rel)
