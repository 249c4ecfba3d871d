"""Reference (naive, enumerating) semantics of terms and formulas.

An Interpretation is the variable part of a structure: one finite relation
per predicate symbol.  The universe, the function symbols, and "=" (identity
on D) are fixed by the Domain/FunctionTable pair, so two interpretations
over the same pair differ only in their relations and are comparable by
componentwise inclusion.
"""

from __future__ import annotations

from .ast import Atom, Clause, Disjunct, Var, Const, App, free_variables, body_free_variables
from .domain import Domain, FunctionTable, NonEnumerableDomain
from .values import UNDEFINED, Assignment, EMPTY_ASSIGNMENT


class UnboundVariable(KeyError):
    pass


class SignatureMismatch(ValueError):
    pass


class Interpretation:
    """An immutable vector of finite relations indexed by predicate symbol.

    "true" is fixed as the singleton empty tuple and "false" as the empty
    relation; neither is stored, and neither is "=".
    """

    __slots__ = ("_rel",)

    def __init__(self, relations=None):
        self._rel = {p: frozenset(map(tuple, ts)) for p, ts in dict(relations or {}).items()}

    def relation(self, predicate) -> frozenset:
        return self._rel.get(predicate, frozenset())

    def predicates(self):
        return sorted(self._rel)

    def with_relation(self, predicate, tuples) -> "Interpretation":
        rel = dict(self._rel)
        rel[predicate] = frozenset(map(tuple, tuples))
        return Interpretation(rel)

    def total_size(self) -> int:
        return sum(len(ts) for ts in self._rel.values())

    def __eq__(self, other):
        return isinstance(other, Interpretation) and self._rel == other._rel

    def __hash__(self):
        return hash(frozenset((p, ts) for p, ts in self._rel.items()))

    def __repr__(self):
        parts = ", ".join(f"{p}:{len(ts)}" for p, ts in sorted(self._rel.items()))
        return f"Interpretation({parts})"

    @staticmethod
    def bottom(predicates) -> "Interpretation":
        return Interpretation({p: frozenset() for p in predicates})


def _require_same_shape(a: Interpretation, b: Interpretation):
    if set(a._rel) != set(b._rel):
        raise SignatureMismatch(
            f"interpretations cover different predicates: {sorted(set(a._rel) ^ set(b._rel))}"
        )


def leq(i0: Interpretation, i1: Interpretation) -> bool:
    """Componentwise relation inclusion: the partial order on one (F,=)-set."""
    _require_same_shape(i0, i1)
    return all(i0.relation(p) <= i1.relation(p) for p in i0._rel)


def join(i0: Interpretation, i1: Interpretation) -> Interpretation:
    _require_same_shape(i0, i1)
    return Interpretation({p: i0.relation(p) | i1.relation(p) for p in i0._rel})


def intersect(interps) -> Interpretation:
    """Componentwise intersection of a nonempty family of interpretations."""
    interps = list(interps)
    if not interps:
        raise ValueError("intersect requires a nonempty set of interpretations")
    first = interps[0]
    out = dict(first._rel)
    for other in interps[1:]:
        _require_same_shape(first, other)
        for p in out:
            out[p] = out[p] & other.relation(p)
    return Interpretation(out)


# ---------------------------------------------------------------------------
# Term evaluation


def eval_term(term, ftable: FunctionTable, alpha: Assignment):
    """Structural evaluation of a term; UNDEFINED propagates upward.

    Interpretation-independent by construction: only the assignment and the
    fixed function table are consulted.
    """
    if isinstance(term, Var):
        v = alpha.get(term.name, UNDEFINED)
        if v is UNDEFINED and term.name not in alpha:
            raise UnboundVariable(term.name)
        return v
    if isinstance(term, Const):
        return ftable.constant_value(term.name)
    if isinstance(term, App):
        args = []
        for a in term.args:
            v = eval_term(a, ftable, alpha)
            if v is UNDEFINED:
                return UNDEFINED
            args.append(v)
        return ftable.apply(term.fun, args)
    raise TypeError(f"not a term: {term!r}")


# ---------------------------------------------------------------------------
# Satisfaction


def satisfies(phi, interp: Interpretation, ftable: FunctionTable, domain: Domain, alpha: Assignment) -> bool:
    """Satisfaction of an atom, a disjunct, or a whole body (disjunct list).

    Atoms with an UNDEFINED argument are unsatisfied, never an error.
    Existentials range over the domain, which must then be enumerable.
    """
    if isinstance(phi, Atom):
        return _satisfies_atom(phi, interp, ftable, alpha)
    if isinstance(phi, Disjunct):
        return _satisfies_disjunct(phi, interp, ftable, domain, alpha)
    if isinstance(phi, (list, tuple)):
        return any(_satisfies_disjunct(d, interp, ftable, domain, alpha) for d in phi)
    raise TypeError(f"cannot evaluate {phi!r}")


def _satisfies_atom(atom: Atom, interp, ftable, alpha) -> bool:
    pred = atom.predicate
    if pred == "true":
        return True
    if pred == "false":
        return False
    args = []
    for t in atom.args:
        v = eval_term(t, ftable, alpha)
        if v is UNDEFINED:
            return False
        args.append(v)
    if pred == "=":
        return args[0] == args[1]
    builtin = ftable.builtin_predicate(pred)
    if builtin is not None:
        return bool(builtin(*args))
    return tuple(args) in interp.relation(pred)


def _satisfies_disjunct(d: Disjunct, interp, ftable, domain, alpha) -> bool:
    if not d.existentials:
        return all(_satisfies_atom(c, interp, ftable, alpha) for c in d.conjuncts)
    if not domain.enumerable:
        raise NonEnumerableDomain("existential quantification needs an enumerable domain")
    return _exists(d, 0, interp, ftable, domain, alpha)


def _exists(d: Disjunct, i: int, interp, ftable, domain, alpha) -> bool:
    if i == len(d.existentials):
        return all(_satisfies_atom(c, interp, ftable, alpha) for c in d.conjuncts)
    x = d.existentials[i]
    for v in domain.enumerate():
        if _exists(d, i + 1, interp, ftable, domain, alpha.extend(x, v)):
            return True
    return False


def relation_of(phi, interp: Interpretation, ftable: FunctionTable, domain: Domain) -> frozenset:
    """The relation denoted by a formula: all satisfying assignments of its
    free variables.  A closed formula denotes {} (false) or {empty} (true)."""
    if isinstance(phi, (list, tuple)):
        free = sorted(body_free_variables(phi))
    else:
        free = sorted(free_variables(phi))
    if not free:
        if satisfies(phi, interp, ftable, domain, EMPTY_ASSIGNMENT):
            return frozenset({EMPTY_ASSIGNMENT})
        return frozenset()
    if not domain.enumerable:
        raise NonEnumerableDomain("relation_of needs an enumerable domain")
    out = set()
    values = domain.enumerate()
    _enumerate_assignments(phi, free, 0, EMPTY_ASSIGNMENT, values, interp, ftable, domain, out)
    return frozenset(out)


def _enumerate_assignments(phi, free, i, alpha, values, interp, ftable, domain, out):
    if i == len(free):
        if satisfies(phi, interp, ftable, domain, alpha):
            out.add(alpha)
        return
    for v in values:
        _enumerate_assignments(phi, free, i + 1, alpha.extend(free[i], v), values, interp, ftable, domain, out)
