"""Immediate-consequence step, least-fixpoint iteration, and model checking.

Two step implementations with identical outputs wherever both apply:

  * step_naive      -- literal transcription of the defining set comprehension:
                       enumerate every candidate head tuple over D and test the
                       body under the reindexed assignment.
  * step_binding    -- per-disjunct binding analysis: order conjuncts into
                       solvers, generators (joins against current relations),
                       filters, and (on enumerable domains) domain enumeration,
                       so generated and large finite domains stay tractable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .ast import App, Atom, Clause, Const, Diagnostic, Disjunct, Program, Var, free_variables
from .domain import Domain, FunctionTable, NonEnumerableDomain
from .semantics import Interpretation, UnboundVariable, leq, relation_of, satisfies
from .values import UNDEFINED, Assignment

# ---------------------------------------------------------------------------
# Configuration and results


@dataclass
class FixpointConfig:
    max_iterations: int = 1000
    max_relation_size: int = 1_000_000
    evaluator: str = "naive"  # "naive" | "binding"
    trace: bool = False

    def __post_init__(self):
        if self.max_iterations <= 0 or self.max_relation_size <= 0:
            raise ValueError("fixpoint budgets must be positive")
        if self.evaluator not in ("naive", "binding"):
            raise ValueError(f"unknown evaluator '{self.evaluator}'")


REACHED_FIXPOINT = "reachedFixpoint"
ITERATION_BUDGET = "iterationBudgetExhausted"
SIZE_BUDGET = "sizeBudgetExhausted"


@dataclass
class FixpointResult:
    interpretation: Interpretation
    iterations: int
    status: str
    per_round_deltas: list = field(default_factory=list)
    trace_lines: list = field(default_factory=list)


class NotRangeRestricted(ValueError):
    def __init__(self, variable, predicate, disjunct_index):
        super().__init__(
            f"variable '{variable}' in disjunct {disjunct_index} of '{predicate}' "
            "can never be bound by a generator or solver"
        )
        self.variable = variable
        self.predicate = predicate
        self.disjunct_index = disjunct_index


class TheoremViolation(AssertionError):
    pass


def program_predicates(program: Program, ftable: FunctionTable):
    """The predicate symbols that form the interpretation vector: everything
    declared except comparison predicates computed by the function table."""
    return [p for p, _ in program.signature.predicates if p not in ftable.predicates]


def bottom(program: Program, ftable: FunctionTable, extensional=None) -> Interpretation:
    """Least interpretation: clause-defined predicates empty, extensional
    relations held at their loaded values."""
    rel = {p: frozenset() for p in program_predicates(program, ftable)}
    for p, tuples in (extensional or {}).items():
        rel[p] = frozenset(map(tuple, tuples))
    return Interpretation(rel)


# ---------------------------------------------------------------------------
# Naive step


def step_naive(program: Program, interp: Interpretation, ftable: FunctionTable, domain: Domain) -> Interpretation:
    """One application of the consequence operator by exhaustive enumeration:
    the q-component is every tuple over D whose reindexed assignment makes
    the body true in the current interpretation."""
    if not domain.enumerable:
        raise NonEnumerableDomain("the naive step needs a finite, enumerable domain")
    values = domain.enumerate()
    out = {}
    for p in program_predicates(program, ftable):
        clause = program.clause_for(p)
        if clause is None:
            out[p] = interp.relation(p)
            continue
        head_vars = clause.head_vars()
        tuples = set()
        for t in itertools.product(values, repeat=len(head_vars)):
            alpha = Assignment(zip(head_vars, t))
            if satisfies(clause.body, interp, ftable, domain, alpha):
                tuples.add(t)
        out[p] = frozenset(tuples)
    return Interpretation(out)


# ---------------------------------------------------------------------------
# Binding analysis


@dataclass(frozen=True)
class Solve:
    var: str
    term: object


@dataclass(frozen=True)
class Check:
    atom: Atom


@dataclass(frozen=True)
class Generate:
    atom: Atom
    # per argument position: ("check", term) or ("bind", var-name)
    actions: tuple


@dataclass(frozen=True)
class Enumerate:
    var: str


@dataclass(frozen=True)
class Fail:
    pass


@dataclass(frozen=True)
class DisjunctPlan:
    steps: tuple
    reads: frozenset  # relation symbols consulted (for delta-driven reuse)


@dataclass(frozen=True)
class BindingPlan:
    predicate: str
    head_vars: tuple
    disjuncts: tuple  # of DisjunctPlan


def _is_plain_var(t):
    return isinstance(t, Var)


def _vars_of(t):
    return free_variables(t)


def _plan_disjunct(pred, idx, disjunct: Disjunct, head_vars, ftable, enumerable):
    bound = set()
    remaining = list(disjunct.conjuncts)
    steps = []
    reads = set()

    def relation_atom(a: Atom) -> bool:
        return a.predicate not in ("=", "true", "false") and ftable.builtin_predicate(a.predicate) is None

    while remaining:
        chosen = None
        # solvers: v = t with t fully bound
        for i, a in enumerate(remaining):
            if a.predicate == "=" and len(a.args) == 2:
                lhs, rhs = a.args
                if _is_plain_var(lhs) and lhs.name not in bound and _vars_of(rhs) <= bound:
                    chosen = (i, Solve(lhs.name, rhs), {lhs.name})
                    break
                if _is_plain_var(rhs) and rhs.name not in bound and _vars_of(lhs) <= bound:
                    chosen = (i, Solve(rhs.name, lhs), {rhs.name})
                    break
        # fully bound conjuncts become filters
        if chosen is None:
            for i, a in enumerate(remaining):
                if a.predicate == "false":
                    chosen = (i, Fail(), set())
                    break
                if a.predicate == "true":
                    chosen = (i, None, set())
                    break
                if _vars_of(a) <= bound:
                    if relation_atom(a):
                        reads.add(a.predicate)
                    chosen = (i, Check(a), set())
                    break
        # generators: relation atoms whose args are bound terms or plain new vars
        if chosen is None:
            for i, a in enumerate(remaining):
                if not relation_atom(a):
                    continue
                actions = []
                newly = set()
                ok = True
                for t in a.args:
                    if _is_plain_var(t) and t.name not in bound:
                        # repeated fresh variables stay "bind": the executor
                        # checks consistency against the earlier binding
                        actions.append(("bind", t.name))
                        newly.add(t.name)
                    elif _vars_of(t) <= bound:
                        actions.append(("check", t))
                    else:
                        ok = False
                        break
                if ok:
                    reads.add(a.predicate)
                    chosen = (i, Generate(a, tuple(actions)), newly)
                    break
        # enumeration fallback (finite domains only)
        if chosen is None:
            if enumerable:
                var = _pick_enumeration_var(remaining, bound)
                steps.append(Enumerate(var))
                bound.add(var)
                continue
            var = _pick_enumeration_var(remaining, bound)
            raise NotRangeRestricted(var, pred, idx)

        i, step, newly = chosen
        remaining.pop(i)
        if isinstance(step, Fail):
            return DisjunctPlan((Fail(),), frozenset())
        if step is not None:
            steps.append(step)
        bound |= newly

    return DisjunctPlan(tuple(steps), frozenset(reads))


def _pick_enumeration_var(remaining, bound):
    a = remaining[0]
    unbound = [v for t in a.args for v in sorted(_vars_of(t)) if v not in bound]
    if a.predicate == "=" and len(a.args) == 2:
        lhs, rhs = a.args
        # leave a lone plain variable on one side to become a solver
        if _is_plain_var(lhs) and lhs.name not in bound:
            other = [v for v in sorted(_vars_of(rhs)) if v not in bound]
            if other:
                return other[0]
        if _is_plain_var(rhs) and rhs.name not in bound:
            other = [v for v in sorted(_vars_of(lhs)) if v not in bound]
            if other:
                return other[0]
    return unbound[0]


def plan_bindings(program: Program, ftable: FunctionTable, *, enumerable=False):
    """Build evaluation plans for every clause.  Returns (plans, diagnostics);
    a failed disjunct yields a NotRangeRestricted diagnostic instead of a plan."""
    plans = {}
    diagnostics = []
    for clause in program.clauses:
        pred = clause.head.predicate
        head_vars = clause.head_vars()
        dplans = []
        for idx, d in enumerate(clause.body):
            try:
                dplans.append(_plan_disjunct(pred, idx, d, head_vars, ftable, enumerable))
            except NotRangeRestricted as e:
                diagnostics.append(
                    Diagnostic("NotRangeRestricted", str(e), pred, clause.span)
                )
        if len(dplans) == len(clause.body):
            plans[pred] = BindingPlan(pred, head_vars, tuple(dplans))
    return plans, diagnostics


# -- plan execution ----------------------------------------------------------


def _eval(term, ftable, env):
    if isinstance(term, Var):
        return env.get(term.name, UNDEFINED)
    if isinstance(term, Const):
        return ftable.constant_value(term.name)
    args = []
    for a in term.args:
        v = _eval(a, ftable, env)
        if v is UNDEFINED:
            return UNDEFINED
        args.append(v)
    return ftable.apply(term.fun, args)


def _check(atom: Atom, interp, ftable, env) -> bool:
    args = []
    for t in atom.args:
        v = _eval(t, ftable, env)
        if v is UNDEFINED:
            return False
        args.append(v)
    if atom.predicate == "=":
        return args[0] == args[1]
    builtin = ftable.builtin_predicate(atom.predicate)
    if builtin is not None:
        return bool(builtin(*args))
    return tuple(args) in interp.relation(atom.predicate)


def _run_plan(dplan: DisjunctPlan, head_vars, interp, ftable, domain):
    envs = [{}]
    for step in dplan.steps:
        if isinstance(step, Fail):
            return set()
        if isinstance(step, Solve):
            nxt = []
            for env in envs:
                v = _eval(step.term, ftable, env)
                if v is UNDEFINED:
                    continue
                old = env.get(step.var, UNDEFINED)
                if old is not UNDEFINED:
                    if old == v:
                        nxt.append(env)
                    continue
                e2 = dict(env)
                e2[step.var] = v
                nxt.append(e2)
            envs = nxt
        elif isinstance(step, Check):
            envs = [e for e in envs if _check(step.atom, interp, ftable, e)]
        elif isinstance(step, Enumerate):
            values = domain.enumerate()
            envs = [dict(e, **{step.var: v}) for e in envs for v in values]
        elif isinstance(step, Generate):
            envs = _run_generate(step, interp, ftable, envs)
        if not envs:
            return set()
    out = set()
    for env in envs:
        out.add(tuple(env[v] for v in head_vars))
    return out


def _run_generate(step: Generate, interp, ftable, envs):
    relation = interp.relation(step.atom.predicate)
    check_pos = [i for i, (kind, _) in enumerate(step.actions) if kind == "check"]
    index = {}
    for tup in relation:
        index.setdefault(tuple(tup[i] for i in check_pos), []).append(tup)
    nxt = []
    for env in envs:
        key = []
        dead = False
        for i in check_pos:
            v = _eval(step.actions[i][1], ftable, env)
            if v is UNDEFINED:
                dead = True
                break
            key.append(v)
        if dead:
            continue
        for tup in index.get(tuple(key), ()):
            e2 = dict(env)
            ok = True
            for i, (kind, payload) in enumerate(step.actions):
                if kind != "bind":
                    continue
                if payload in e2 and e2[payload] != tup[i]:
                    ok = False
                    break
                e2[payload] = tup[i]
            if ok:
                nxt.append(e2)
    return nxt


def step_binding(
    program: Program,
    interp: Interpretation,
    ftable: FunctionTable,
    domain: Domain,
    *,
    _plans=None,
    _cache=None,
    _changed=None,
) -> Interpretation:
    """Same contract as step_naive, computed by executing binding plans.
    Works on non-enumerable domains when every disjunct is range-restricted."""
    if _plans is None:
        plans, diags = plan_bindings(program, ftable, enumerable=domain.enumerable)
        if diags:
            d = diags[0]
            raise NotRangeRestricted(d.message.split("'")[1], d.predicate, -1)
        _plans = plans
    out = {}
    for p in program_predicates(program, ftable):
        clause = program.clause_for(p)
        if clause is None:
            out[p] = interp.relation(p)
            continue
        plan = _plans[p]
        tuples = set()
        for idx, dplan in enumerate(plan.disjuncts):
            key = (p, idx)
            if _cache is not None and key in _cache and _changed is not None and not (dplan.reads & _changed):
                tuples |= _cache[key]
                continue
            produced = _run_plan(dplan, plan.head_vars, interp, ftable, domain)
            if _cache is not None:
                _cache[key] = produced
            tuples |= produced
        out[p] = frozenset(tuples)
    return Interpretation(out)


# ---------------------------------------------------------------------------
# Least fixpoint iteration


def lfp(
    program: Program,
    ftable: FunctionTable,
    domain: Domain,
    config: Optional[FixpointConfig] = None,
    extensional=None,
) -> FixpointResult:
    """Iterate the chosen step from bottom until no round adds a tuple, or a
    budget runs out.  Budget exhaustion is a result status, not an error."""
    config = config or FixpointConfig()
    current = bottom(program, ftable, extensional)

    plans = None
    cache = None
    changed = None
    if config.evaluator == "binding":
        plans, diags = plan_bindings(program, ftable, enumerable=domain.enumerable)
        if diags:
            d = diags[0]
            raise NotRangeRestricted(d.message.split("'")[1], d.predicate, -1)
        cache = {}

    deltas = []
    trace_lines = []
    iterations = 0
    status = None
    while True:
        if iterations >= config.max_iterations:
            status = ITERATION_BUDGET
            break
        if config.evaluator == "binding":
            nxt = step_binding(
                program, current, ftable, domain, _plans=plans, _cache=cache, _changed=changed
            )
        else:
            nxt = step_naive(program, current, ftable, domain)
        iterations += 1
        round_delta = {}
        changed = set()
        for p in sorted(nxt.predicates()):
            new = len(nxt.relation(p)) - len(current.relation(p))
            round_delta[p] = new
            if nxt.relation(p) != current.relation(p):
                changed.add(p)
            if config.trace:
                trace_lines.append(
                    f"round={iterations} pred={p} new={new} total={len(nxt.relation(p))}"
                )
        deltas.append(round_delta)
        if nxt == current:
            status = REACHED_FIXPOINT
            current = nxt
            break
        current = nxt
        if current.total_size() > config.max_relation_size:
            status = SIZE_BUDGET
            break
    return FixpointResult(current, iterations, status, deltas, trace_lines)


# ---------------------------------------------------------------------------
# Model checking


def is_model(program: Program, interp: Interpretation, ftable: FunctionTable, domain: Domain):
    """Inclusion test per clause: the body's relation must be contained in
    the head's.  Returns (verdict, witness); the witness is a (predicate,
    assignment) pair satisfying the body but not the head."""
    for clause in program.clauses:
        head_vars = clause.head_vars()
        body_rel = relation_of(clause.body, interp, ftable, domain)
        head_relation = interp.relation(clause.head.predicate)
        for alpha in sorted(body_rel, key=repr):
            t = tuple(alpha[v] for v in head_vars)
            if t not in head_relation:
                return False, (clause.head.predicate, alpha)
    return True, None


def check_model_fixpoint_equivalence(
    program: Program, interp: Interpretation, ftable: FunctionTable, domain: Domain
) -> bool:
    """Both model characterizations must agree: satisfaction-by-inclusion and
    one-step-deflation.  Disagreement falsifies the implementation."""
    by_inclusion, witness = is_model(program, interp, ftable, domain)
    by_deflation = leq(step_naive(program, interp, ftable, domain), interp)
    if by_inclusion != by_deflation:
        raise TheoremViolation(
            f"model checks disagree: inclusion={by_inclusion} (witness {witness}), "
            f"one-step deflation={by_deflation}"
        )
    return by_inclusion
