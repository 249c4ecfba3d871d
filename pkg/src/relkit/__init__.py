"""relkit: parse, validate, evaluate, and transpile relational programs."""

from .ast import (
    App,
    Atom,
    Clause,
    Const,
    Diagnostic,
    Disjunct,
    Program,
    Signature,
    Var,
    compose,
    free_variables,
    reindex,
    validate,
)
from .domain import Domain, DomainFileError, FunctionTable, NonEnumerableDomain, load_domain
from .fixpoint import (
    FixpointConfig,
    FixpointResult,
    NotRangeRestricted,
    TheoremViolation,
    is_model,
    lfp,
    step_binding,
    step_naive,
)
from .parser import ParseResult, parse_program, parse_relation_data, pretty_print
from .semantics import Interpretation, eval_term, join, intersect, leq, relation_of, satisfies
from .stdlib import EXAMPLE_NAMES, ExamplePack, UnknownExample, load_example
from .transpile import (
    ModeError,
    ProcUnit,
    agree_with_fixpoint,
    execute,
    lower,
    mode_check,
    parse_modes,
    render,
)
from .values import UNDEFINED, Assignment, Sym, format_value

__version__ = "0.1.0"

__all__ = [
    "App",
    "Assignment",
    "Atom",
    "Clause",
    "Const",
    "Diagnostic",
    "Disjunct",
    "Domain",
    "DomainFileError",
    "EXAMPLE_NAMES",
    "ExamplePack",
    "FixpointConfig",
    "FixpointResult",
    "FunctionTable",
    "Interpretation",
    "ModeError",
    "NonEnumerableDomain",
    "NotRangeRestricted",
    "ParseResult",
    "ProcUnit",
    "Program",
    "Signature",
    "Sym",
    "TheoremViolation",
    "UNDEFINED",
    "UnknownExample",
    "Var",
    "agree_with_fixpoint",
    "compose",
    "eval_term",
    "execute",
    "format_value",
    "free_variables",
    "intersect",
    "is_model",
    "join",
    "leq",
    "lfp",
    "load_domain",
    "load_example",
    "lower",
    "mode_check",
    "parse_modes",
    "parse_program",
    "parse_relation_data",
    "pretty_print",
    "reindex",
    "relation_of",
    "render",
    "satisfies",
    "step_binding",
    "step_naive",
    "validate",
]
