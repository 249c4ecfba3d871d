"""Abstract syntax for relational programs and structural validation.

A program is a conjunction of universally closed implications, one per
predicate symbol: ``head <- disjunct \\/ ... \\/ disjunct`` where each
disjunct is an existentially quantified conjunction of atoms, and the head's
arguments are distinct variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .values import Assignment

NUMERIC_RE = re.compile(r"-?\d+(\.\d+)?([eE][+-]?\d+)?$|-?\d+/\d+$|-?0[xX][0-9a-fA-F.p+-]+$")

RESERVED_PREDICATES = {"=": 2, "true": 0, "false": 0}


def is_numeric_literal(name: str) -> bool:
    """Numeric literals act as implicitly declared constant symbols."""
    return bool(NUMERIC_RE.match(name))


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self):
        return f"{self.file}:{self.start_line}:{self.start_col}"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    predicate: Optional[str] = None
    span: Optional[SourceSpan] = None

    def __str__(self):
        where = f" [{self.span}]" if self.span else ""
        who = f" ({self.predicate})" if self.predicate else ""
        return f"{self.code}{who}: {self.message}{where}"


# ---------------------------------------------------------------------------
# Terms, atoms, clauses


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    fun: str
    args: tuple

    def __str__(self):
        return f"{self.fun}({', '.join(map(str, self.args))})"


Term = Union[Var, Const, App]


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Disjunct:
    """One alternative procedure body: an existentially closed conjunction."""

    existentials: tuple  # ordered, distinct variable names
    conjuncts: tuple  # nonempty tuple of Atoms


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple  # nonempty tuple of Disjuncts
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def head_vars(self) -> tuple:
        return tuple(a.name for a in self.head.args if isinstance(a, Var))


@dataclass(frozen=True)
class Signature:
    constants: frozenset = frozenset()
    functions: tuple = ()  # tuple of (name, arity), sorted
    predicates: tuple = ()  # tuple of (name, arity), sorted; excludes reserved

    @staticmethod
    def make(constants=(), functions=(), predicates=()) -> "Signature":
        return Signature(
            frozenset(constants),
            tuple(sorted(dict(functions).items())),
            tuple(sorted(dict(predicates).items())),
        )

    def function_arity(self, name):
        return dict(self.functions).get(name)

    def predicate_arity(self, name):
        if name in RESERVED_PREDICATES:
            return RESERVED_PREDICATES[name]
        return dict(self.predicates).get(name)

    def declares_constant(self, name) -> bool:
        return name in self.constants or is_numeric_literal(name)


@dataclass(frozen=True)
class Program:
    signature: Signature
    clauses: tuple = ()  # tuple of Clauses, at most one per predicate

    def clause_for(self, predicate) -> Optional[Clause]:
        for c in self.clauses:
            if c.head.predicate == predicate:
                return c
        return None

    def defined_predicates(self):
        return [c.head.predicate for c in self.clauses]

    def extensional_predicates(self):
        """Declared predicates with no defining clause: base relations."""
        defined = set(self.defined_predicates())
        return [p for p, _ in self.signature.predicates if p not in defined]


# ---------------------------------------------------------------------------
# Free variables


def free_variables(node):
    """Free-variable set of a Term, Atom, Disjunct, or Clause."""
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, App):
        out = set()
        for a in node.args:
            out |= free_variables(a)
        return out
    if isinstance(node, Atom):
        out = set()
        for a in node.args:
            out |= free_variables(a)
        return out
    if isinstance(node, Disjunct):
        out = set()
        for c in node.conjuncts:
            out |= free_variables(c)
        return out - set(node.existentials)
    if isinstance(node, Clause):
        return free_variables(node.head)
    raise TypeError(f"no free variables for {type(node).__name__}")


def body_free_variables(body) -> set:
    """Free variables of a whole clause body (a disjunction of Disjuncts)."""
    out = set()
    for d in body:
        out |= free_variables(d)
    return out


# ---------------------------------------------------------------------------
# Tuple reindexing


class LengthMismatch(ValueError):
    pass


class RepeatedVariable(ValueError):
    pass


def reindex(t, head_vars) -> Assignment:
    """Turn a position-indexed tuple into a variable-indexed assignment.

    ``reindex((b, c, c), ("x", "y", "z"))`` is ``{x: b, y: c, z: c}``;
    composing the result back with ``head_vars`` reproduces ``t``.
    """
    if len(t) != len(head_vars):
        raise LengthMismatch(f"tuple length {len(t)} != {len(head_vars)} variables")
    if len(set(head_vars)) != len(head_vars):
        raise RepeatedVariable(f"repeated variable in {head_vars}")
    return Assignment(zip(head_vars, t))


def compose(assignment: Assignment, head_vars) -> tuple:
    """Inverse of reindex: read the assignment back out in position order."""
    return tuple(assignment[v] for v in head_vars)


# ---------------------------------------------------------------------------
# Validation


def _check_terms(sig: Signature, pred: str, terms, diags, span):
    for t in terms:
        if isinstance(t, Var):
            continue
        if isinstance(t, Const):
            if not sig.declares_constant(t.name):
                diags.append(
                    Diagnostic("UnknownConstant", f"constant '{t.name}' is not declared", pred, span)
                )
        elif isinstance(t, App):
            ar = sig.function_arity(t.fun)
            if ar is None:
                diags.append(
                    Diagnostic("UnknownFunction", f"function '{t.fun}' is not declared", pred, span)
                )
            elif ar != len(t.args):
                diags.append(
                    Diagnostic(
                        "FunctionArityMismatch",
                        f"'{t.fun}' declared with arity {ar}, used with {len(t.args)}",
                        pred,
                        span,
                    )
                )
            _check_terms(sig, pred, t.args, diags, span)
        else:
            diags.append(Diagnostic("MalformedTerm", f"not a term: {t!r}", pred, span))


def validate_signature(sig: Signature):
    diags = []
    funs = dict(sig.functions)
    preds = dict(sig.predicates)
    names = {}
    for c in sig.constants:
        names.setdefault(c, []).append("constant")
    for f in funs:
        names.setdefault(f, []).append("function")
    for p in preds:
        names.setdefault(p, []).append("predicate")
    for n, kinds in names.items():
        if len(kinds) > 1:
            diags.append(Diagnostic("SymbolClassClash", f"'{n}' declared as {' and '.join(kinds)}"))
    for f, ar in funs.items():
        if not isinstance(ar, int) or ar < 1:
            diags.append(Diagnostic("BadArity", f"function '{f}' must have positive arity, got {ar}"))
    for p, ar in preds.items():
        if not isinstance(ar, int) or ar < 0:
            diags.append(Diagnostic("BadArity", f"predicate '{p}' must have nonnegative arity, got {ar}"))
        if p in RESERVED_PREDICATES:
            diags.append(Diagnostic("ReservedPredicate", f"'{p}' is reserved and not user-declarable"))
    return diags


def validate(program: Program):
    """Check every structural invariant; returns a list of Diagnostics.

    Total on arbitrary well-typed AST input: an empty result means the
    program is well-formed.
    """
    diags = list(validate_signature(program.signature))
    sig = program.signature

    seen_heads = set()
    for clause in program.clauses:
        pred = clause.head.predicate
        span = clause.span
        if pred in seen_heads:
            diags.append(Diagnostic("DuplicateClause", f"more than one clause for '{pred}'", pred, span))
        seen_heads.add(pred)
        if pred in RESERVED_PREDICATES:
            diags.append(Diagnostic("ReservedPredicate", f"cannot define reserved '{pred}'", pred, span))
            continue

        ar = sig.predicate_arity(pred)
        if ar is None:
            diags.append(Diagnostic("UnknownPredicate", f"head predicate '{pred}' is not declared", pred, span))
        elif ar != len(clause.head.args):
            diags.append(
                Diagnostic(
                    "PredicateArityMismatch",
                    f"'{pred}' declared with arity {ar}, head has {len(clause.head.args)}",
                    pred,
                    span,
                )
            )

        head_var_names = []
        for a in clause.head.args:
            if not isinstance(a, Var):
                diags.append(
                    Diagnostic("NonVariableHeadArgument", f"head argument {a} is not a variable", pred, span)
                )
            else:
                head_var_names.append(a.name)
        if len(set(head_var_names)) != len(head_var_names):
            diags.append(
                Diagnostic("RepeatedHeadVariable", f"head of '{pred}' repeats a variable", pred, span)
            )
        head_vars = set(head_var_names)

        if not clause.body:
            diags.append(Diagnostic("EmptyBody", f"clause for '{pred}' has no disjuncts", pred, span))

        for i, d in enumerate(clause.body):
            if not isinstance(d, Disjunct) or not d.conjuncts:
                diags.append(Diagnostic("EmptyDisjunct", f"disjunct {i} of '{pred}' is empty", pred, span))
                continue
            ex = list(d.existentials)
            if len(set(ex)) != len(ex):
                diags.append(
                    Diagnostic("RepeatedExistential", f"disjunct {i} of '{pred}' repeats an existential", pred, span)
                )
            shadowing = head_vars & set(ex)
            if shadowing:
                diags.append(
                    Diagnostic(
                        "ExistentialShadowsHead",
                        f"disjunct {i} of '{pred}' quantifies head variable(s) {sorted(shadowing)}",
                        pred,
                        span,
                    )
                )
            used = set()
            for atom in d.conjuncts:
                p_ar = sig.predicate_arity(atom.predicate)
                if p_ar is None:
                    diags.append(
                        Diagnostic(
                            "UnknownPredicate", f"predicate '{atom.predicate}' is not declared", pred, span
                        )
                    )
                elif p_ar != len(atom.args):
                    diags.append(
                        Diagnostic(
                            "PredicateArityMismatch",
                            f"'{atom.predicate}' declared with arity {p_ar}, used with {len(atom.args)}",
                            pred,
                            span,
                        )
                    )
                _check_terms(sig, pred, atom.args, diags, span)
                used |= free_variables(atom)
            for e in ex:
                if e not in used:
                    diags.append(
                        Diagnostic(
                            "UnusedExistential",
                            f"existential '{e}' in disjunct {i} of '{pred}' occurs in no conjunct",
                            pred,
                            span,
                        )
                    )

        body_free = body_free_variables(clause.body)
        extra = body_free - head_vars
        if extra:
            diags.append(
                Diagnostic(
                    "UnquantifiedBodyVariable",
                    f"body of '{pred}' has free variable(s) {sorted(extra)} not in the head",
                    pred,
                    span,
                )
            )
        missing = head_vars - body_free
        if missing:
            diags.append(
                Diagnostic(
                    "UnusedHeadVariable",
                    f"head variable(s) {sorted(missing)} of '{pred}' do not occur in the body",
                    pred,
                    span,
                )
            )
    return diags
