"""Mode analysis and lowering of well-moded programs to a procedural IR.

Each predicate becomes a boolean function; each disjunct becomes one branch
tried in source order: bound-only atoms become guards, binding equalities
become assignments (or structural matches when run right-to-left against a
constructor), predicate atoms become calls, existentials become locals.  The
IR is loop-free (recursion only) and renderable as C-style pseudocode.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .ast import App, Atom, Const, Diagnostic, Disjunct, Program, Var, free_variables
from .domain import FunctionTable
from .parser import format_atom, format_term
from .values import UNDEFINED, Sym


class ModeError(ValueError):
    pass


class ModesFileError(ValueError):
    pass


def parse_modes(text: str, file="<modes>"):
    """Mode files: one line per predicate, ``q: in,in,out,out``."""
    modes = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(.*)$", line)
        if not m:
            raise ModesFileError(f"{file}:{lineno}: expected 'pred: in,out,...'")
        pred, rest = m.group(1), m.group(2).strip()
        if rest:
            decl = tuple(p.strip() for p in rest.split(","))
        else:
            decl = ()
        if any(d not in ("in", "out") for d in decl):
            raise ModesFileError(f"{file}:{lineno}: modes must be 'in' or 'out'")
        modes[pred] = decl
    return modes


# ---------------------------------------------------------------------------
# IR


@dataclass(frozen=True)
class Guard:
    atom: Atom


@dataclass(frozen=True)
class Assign:
    var: str
    term: object


@dataclass(frozen=True)
class Match:
    """Destructuring: run a constructor equality right to left, binding the
    pattern's fresh variables from an already bound value."""

    pattern: object  # term containing the variables to bind
    source: object  # fully bound term


@dataclass(frozen=True)
class Call:
    predicate: str
    # per position: ("in", term) or ("out", var-name)
    args: tuple


@dataclass(frozen=True)
class Branch:
    guards: tuple  # leading fully-bound atoms
    locals: tuple  # existential variable names
    stmts: tuple  # Assign | Match | Call | Guard (late checks)
    provenance: str


@dataclass(frozen=True)
class ProcFunction:
    name: str
    params: tuple  # of (name, "in"|"out")
    branches: tuple

    def in_params(self):
        return [n for n, m in self.params if m == "in"]

    def out_params(self):
        return [n for n, m in self.params if m == "out"]


@dataclass(frozen=True)
class ProcUnit:
    functions: tuple  # of ProcFunction, in lowering order

    def function(self, name) -> Optional[ProcFunction]:
        for f in self.functions:
            if f.name == name:
                return f
        return None


# ---------------------------------------------------------------------------
# Mode checking / lowering (one shared dataflow pass)


def _pattern_bindable(term, bound):
    """True if the term can serve as a match pattern: an application whose
    unbound leaves are plain variables."""
    if isinstance(term, Var):
        return term.name not in bound
    if isinstance(term, Const):
        return True
    return all(
        (isinstance(a, Var) and a.name not in bound) or _pattern_bindable(a, bound) for a in term.args
    )


def _pattern_vars(term, bound):
    return {v for v in free_variables(term) if v not in bound}


def _lower_disjunct(program, modes, ftable, pred, idx, disjunct: Disjunct, params):
    """Returns (Branch, None) or (None, Diagnostic)."""
    bound = {n for n, m in params if m == "in"}
    sig = program.signature
    defined = set(program.defined_predicates())
    guards = []
    stmts = []

    def fail(code, msg):
        return None, Diagnostic(code, f"disjunct {idx} of '{pred}': {msg}", pred)

    for atom in disjunct.conjuncts:
        p = atom.predicate
        fully_bound = free_variables(atom) <= bound
        if p in ("true", "false"):
            _emit_check(guards, stmts, atom)
            continue
        if p == "=":
            lhs, rhs = atom.args
            if fully_bound:
                _emit_check(guards, stmts, atom)
                continue
            lv, rv = free_variables(lhs) <= bound, free_variables(rhs) <= bound
            if isinstance(lhs, Var) and lhs.name not in bound and rv:
                stmts.append(Assign(lhs.name, rhs))
                bound.add(lhs.name)
                continue
            if isinstance(rhs, Var) and rhs.name not in bound and lv:
                stmts.append(Assign(rhs.name, lhs))
                bound.add(rhs.name)
                continue
            # constructor match: bound value on one side, pattern on the other
            if lv and _pattern_bindable(rhs, bound):
                stmts.append(Match(rhs, lhs))
                bound |= _pattern_vars(rhs, bound)
                continue
            if rv and _pattern_bindable(lhs, bound):
                stmts.append(Match(lhs, rhs))
                bound |= _pattern_vars(lhs, bound)
                continue
            unbindable = sorted((free_variables(lhs) | free_variables(rhs)) - bound)
            return fail("UnmodedVariable", f"cannot bind '{unbindable[0]}' in {format_atom(atom)}")
        if ftable is not None and ftable.builtin_predicate(p) is not None or (
            p not in defined and p not in modes
        ):
            # computable comparison or extensional membership: all-in only
            if not fully_bound:
                unbindable = sorted(free_variables(atom) - bound)
                return fail(
                    "UnmodedVariable",
                    f"'{unbindable[0]}' must be bound before the test {format_atom(atom)}",
                )
            _emit_check(guards, stmts, atom)
            continue
        # predicate call
        decl = modes.get(p)
        if decl is None:
            return fail("MissingMode", f"no mode declaration for called predicate '{p}'")
        if len(decl) != len(atom.args):
            return fail("ModeArityMismatch", f"mode for '{p}' has {len(decl)} positions")
        if p not in defined and any(m == "out" for m in decl):
            return fail("ExtensionalOutMode", f"extensional '{p}' may be all-in only")
        call_args = []
        newly = set()
        for mode, arg in zip(decl, atom.args):
            if mode == "in":
                if not free_variables(arg) <= bound:
                    unbindable = sorted(free_variables(arg) - bound)
                    return fail(
                        "UnmodedVariable",
                        f"'{unbindable[0]}' is unbound at in-position of {format_atom(atom)}",
                    )
                call_args.append(("in", arg))
            else:
                if not isinstance(arg, Var) or arg.name in bound or arg.name in newly:
                    return fail(
                        "OutPositionNotFresh",
                        f"out-position of {format_atom(atom)} needs a fresh variable, got {format_term(arg)}",
                    )
                call_args.append(("out", arg.name))
                newly.add(arg.name)
        stmts.append(Call(p, tuple(call_args)))
        bound |= newly

    for name, m in params:
        if m == "out" and name not in bound:
            return fail("UnboundOutput", f"out-parameter '{name}' is never bound")
    for e in disjunct.existentials:
        if e not in bound:
            return fail("UnboundExistential", f"existential '{e}' is never bound")

    provenance = " /\\ ".join(format_atom(c) for c in disjunct.conjuncts)
    return Branch(tuple(guards), tuple(disjunct.existentials), tuple(stmts), provenance), None


def _emit_check(guards, stmts, atom):
    if stmts:
        stmts.append(Guard(atom))
    else:
        guards.append(atom)


def mode_check(program: Program, modes, ftable: Optional[FunctionTable] = None):
    """Dataflow check of every disjunct under the declared modes; returns a
    list of diagnostics naming the first unbindable variable per failure."""
    diags = []
    for clause in program.clauses:
        pred = clause.head.predicate
        decl = modes.get(pred)
        if decl is None:
            diags.append(Diagnostic("MissingMode", f"no mode declaration for '{pred}'", pred))
            continue
        if len(decl) != len(clause.head.args):
            diags.append(
                Diagnostic("ModeArityMismatch", f"mode for '{pred}' has {len(decl)} positions", pred)
            )
            continue
        params = tuple(zip(clause.head_vars(), decl))
        for idx, d in enumerate(clause.body):
            _, diag = _lower_disjunct(program, modes, ftable, pred, idx, d, params)
            if diag:
                diags.append(diag)
    return diags


def lower(program: Program, modes, ftable: Optional[FunctionTable] = None) -> ProcUnit:
    """Deterministic lowering: one function per moded predicate, one branch
    per disjunct in source order.  Raises ModeError if mode_check fails."""
    functions = []
    for clause in program.clauses:
        pred = clause.head.predicate
        decl = modes.get(pred)
        if decl is None or len(decl) != len(clause.head.args):
            raise ModeError(f"missing or ill-sized mode declaration for '{pred}'")
        params = tuple(zip(clause.head_vars(), decl))
        branches = []
        for idx, d in enumerate(clause.body):
            branch, diag = _lower_disjunct(program, modes, ftable, pred, idx, d, params)
            if diag:
                raise ModeError(str(diag))
            branches.append(branch)
        functions.append(ProcFunction(pred, params, tuple(branches)))
    return ProcUnit(tuple(functions))


# ---------------------------------------------------------------------------
# Rendering


def _render_guard_atom(atom: Atom) -> str:
    if atom.predicate == "=" and len(atom.args) == 2:
        return f"{format_term(atom.args[0])} == {format_term(atom.args[1])}"
    if atom.predicate in ("<", "<=") and len(atom.args) == 2:
        return f"{format_term(atom.args[0])} {atom.predicate} {format_term(atom.args[1])}"
    return format_atom(atom)


def _render_call(c: Call) -> str:
    parts = [format_term(t) if kind == "in" else t for kind, t in c.args]
    return f"{c.predicate}({', '.join(parts)})"


def _render_branch(b: Branch) -> list:
    guard = " && ".join(_render_guard_atom(g) for g in b.guards) or "true"
    pieces = [f"loc {v};" for v in b.locals]
    stmts = list(b.stmts)
    # a trailing run of calls renders as a combined boolean return
    tail_calls = []
    while stmts and isinstance(stmts[-1], Call):
        tail_calls.insert(0, stmts.pop())
    for s in stmts:
        if isinstance(s, Assign):
            pieces.append(f"{s.var} = {format_term(s.term)};")
        elif isinstance(s, Match):
            pieces.append(f"match {format_term(s.pattern)} = {format_term(s.source)};")
        elif isinstance(s, Call):
            pieces.append(f"if (!{_render_call(s)}) return false;")
        elif isinstance(s, Guard):
            pieces.append(f"if (!({_render_guard_atom(s.atom)})) return false;")
    if tail_calls:
        pieces.append("return " + " && ".join(_render_call(c) for c in tail_calls) + ";")
    else:
        pieces.append("return true;")
    body = " ".join(pieces)
    return [
        f"  // disjunct: {b.provenance}",
        f"  if ({guard}) {{ {body} }}",
    ]


def render(unit: ProcUnit) -> str:
    """C-style pseudocode, stable for golden-file testing; comments map each
    branch back to its source disjunct."""
    if not unit.functions:
        return ""
    out = []
    for fn in unit.functions:
        names = ", ".join(n for n, _ in fn.params)
        modes = ", ".join(m for _, m in fn.params)
        out.append(f"bool {fn.name}({names}) {{ // modes: {modes}")
        for b in fn.branches:
            out.extend(_render_branch(b))
        out.append("  return false;")
        out.append("}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Execution


SUCCESS = "success"
FAILURE = "failure"
RESOURCE_LIMIT = "resourceLimit"


@dataclass
class ExecResult:
    status: str
    outs: Optional[dict] = None  # out-parameter name -> value
    max_depth: int = 0


class _DepthLimit(Exception):
    pass


class _Machine:
    def __init__(self, unit, ftable, extensional, max_depth, inverses=None):
        self.unit = unit
        self.ftable = ftable
        self.extensional = extensional or {}
        self.max_depth = max_depth
        self.deepest = 0
        self.inverses = dict(inverses or {})
        # successor/predecessor are invertible whatever the program calls
        # them; constructors match structurally
        from .domain import BUILTIN_FUNCTIONS

        for sym, fn in ftable.functions.items():
            if fn is BUILTIN_FUNCTIONS["succ"]:
                self.inverses.setdefault(sym, lambda v: v - 1)
            elif fn is BUILTIN_FUNCTIONS["pred"]:
                self.inverses.setdefault(sym, lambda v: v + 1)

    def eval(self, term, env):
        if isinstance(term, Var):
            return env.get(term.name, UNDEFINED)
        if isinstance(term, Const):
            return self.ftable.constant_value(term.name)
        args = []
        for a in term.args:
            v = self.eval(a, env)
            if v is UNDEFINED:
                return UNDEFINED
            args.append(v)
        return self.ftable.apply(term.fun, args)

    def check(self, atom, env) -> bool:
        if atom.predicate == "true":
            return True
        if atom.predicate == "false":
            return False
        args = []
        for t in atom.args:
            v = self.eval(t, env)
            if v is UNDEFINED:
                return False
            args.append(v)
        if atom.predicate == "=":
            return args[0] == args[1]
        builtin = self.ftable.builtin_predicate(atom.predicate)
        if builtin is not None:
            return bool(builtin(*args))
        return tuple(args) in self.extensional.get(atom.predicate, frozenset())

    def match(self, pattern, value, env) -> bool:
        if isinstance(pattern, Var):
            if pattern.name in env:
                return env[pattern.name] == value
            env[pattern.name] = value
            return True
        if isinstance(pattern, Const):
            return self.ftable.constant_value(pattern.name) == value
        if isinstance(value, Sym) and value.fun == pattern.fun and len(value.args) == len(pattern.args):
            return all(self.match(p, v, env) for p, v in zip(pattern.args, value.args))
        inv = self.inverses.get(pattern.fun)
        if inv is not None and len(pattern.args) == 1 and not isinstance(value, Sym):
            try:
                candidate = inv(value)
            except (TypeError, ValueError, OverflowError):
                return False
            if self.ftable.apply(pattern.fun, [candidate]) != value:
                return False
            return self.match(pattern.args[0], candidate, env)
        return False

    def call(self, name, in_values, depth):
        if depth > self.max_depth:
            raise _DepthLimit()
        self.deepest = max(self.deepest, depth)
        fn = self.unit.function(name)
        if fn is None:
            raise ModeError(f"no function '{name}' in the unit")
        if len(in_values) != len(fn.in_params()):
            raise TypeError(f"'{name}' expects {len(fn.in_params())} inputs, got {len(in_values)}")
        env = dict(zip(fn.in_params(), in_values))
        for branch in fn.branches:
            if self.run_branch(fn, branch, env, depth):
                return [env[o] for o in fn.out_params()]
        return None

    def run_branch(self, fn, branch, env, depth) -> bool:
        # env mutations are deliberately kept when a branch fails
        for g in branch.guards:
            if not self.check(g, env):
                return False
        for s in branch.stmts:
            if isinstance(s, Assign):
                v = self.eval(s.term, env)
                if v is UNDEFINED:
                    return False
                env[s.var] = v
            elif isinstance(s, Match):
                v = self.eval(s.source, env)
                if v is UNDEFINED or not self.match(s.pattern, v, env):
                    return False
            elif isinstance(s, Guard):
                if not self.check(s.atom, env):
                    return False
            elif isinstance(s, Call):
                ins = []
                dead = False
                for kind, payload in s.args:
                    if kind == "in":
                        v = self.eval(payload, env)
                        if v is UNDEFINED:
                            dead = True
                            break
                        ins.append(v)
                if dead:
                    return False
                outs = self.call(s.predicate, ins, depth + 1)
                if outs is None:
                    return False
                out_names = [payload for kind, payload in s.args if kind == "out"]
                for n, v in zip(out_names, outs):
                    env[n] = v
        return True


def execute(
    unit: ProcUnit,
    entry: str,
    inputs,
    ftable: FunctionTable,
    extensional=None,
    max_depth: int = 500,
) -> ExecResult:
    """Run the IR: branches are tried in order; the first whose guards hold
    and whose calls all succeed yields the outs.  Out values are meaningful
    only under success."""
    machine = _Machine(unit, ftable, extensional, max_depth)
    fn = unit.function(entry)
    if fn is None:
        raise ModeError(f"no function '{entry}' in the unit")
    try:
        outs = machine.call(entry, list(inputs), 1)
    except _DepthLimit:
        return ExecResult(RESOURCE_LIMIT, None, machine.deepest)
    if outs is None:
        return ExecResult(FAILURE, None, machine.deepest)
    return ExecResult(SUCCESS, dict(zip(fn.out_params(), outs)), machine.deepest)


# ---------------------------------------------------------------------------
# Agreement with the fixpoint semantics


@dataclass
class AgreementReport:
    total: int
    disagreements: list  # of (predicate, in_values, detail)

    @property
    def ok(self) -> bool:
        return not self.disagreements


def agree_with_fixpoint(
    program: Program,
    modes,
    ftable: FunctionTable,
    domain,
    queries,
    config=None,
    extensional=None,
    max_depth: int = 500,
) -> AgreementReport:
    """Cross-check IR execution against least-fixpoint membership.

    For each (predicate, in-values) query: a successful run must produce a
    tuple in the lfp relation; a failed run means no lfp tuple extends the
    inputs.  The lfp is the independent oracle here, computed from the
    declarative semantics, not from the IR."""
    from .fixpoint import FixpointConfig, lfp

    unit = lower(program, modes, ftable)
    result = lfp(program, ftable, domain, config or FixpointConfig(evaluator="binding"), extensional)
    disagreements = []
    ext_rel = {p: result.interpretation.relation(p) for p in result.interpretation.predicates()}
    for pred, in_values in queries:
        decl = modes[pred]
        relation = result.interpretation.relation(pred)
        res = execute(unit, pred, in_values, ftable, extensional=ext_rel, max_depth=max_depth)
        in_positions = [i for i, m in enumerate(decl) if m == "in"]
        matching = [t for t in relation if [t[i] for i in in_positions] == list(in_values)]
        if res.status == SUCCESS:
            fn = unit.function(pred)
            full = _assemble_tuple(decl, in_values, [res.outs[o] for o in fn.out_params()])
            if full not in relation:
                disagreements.append((pred, tuple(in_values), f"IR produced {full}, not in lfp"))
        elif res.status == FAILURE:
            if matching:
                disagreements.append(
                    (pred, tuple(in_values), f"IR failed but lfp contains {sorted(matching, key=repr)[0]}")
                )
        else:
            disagreements.append((pred, tuple(in_values), "resource limit"))
    return AgreementReport(len(list(queries)), disagreements)


def _assemble_tuple(decl, in_values, out_values):
    ins = iter(in_values)
    outs = iter(out_values)
    return tuple(next(ins) if m == "in" else next(outs) for m in decl)
