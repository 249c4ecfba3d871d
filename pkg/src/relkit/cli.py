"""Command-line front door: validate | eval | query | check-model | transpile.

Exit codes: 0 success, 1 diagnostics or a negative answer, 2 usage or file
format errors, 3 resource budget exhausted.  Machine-readable output goes to
stdout; diagnostics and trace lines go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .ast import Var
from .domain import DomainFileError, NonEnumerableDomain, load_domain
from .fixpoint import (
    FixpointConfig,
    ITERATION_BUDGET,
    NotRangeRestricted,
    REACHED_FIXPOINT,
    SIZE_BUDGET,
    is_model,
    lfp,
    program_predicates,
)
from .parser import (
    ParseError,
    RelationDataError,
    format_atom,
    parse_atom_text,
    parse_program,
    parse_relation_data,
)
from .semantics import Interpretation, eval_term, satisfies
from .transpile import (
    FAILURE,
    ModesFileError,
    RESOURCE_LIMIT,
    SUCCESS,
    execute,
    lower,
    mode_check,
    parse_modes,
    render,
)
from .values import EMPTY_ASSIGNMENT, UNDEFINED, format_value

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _read_file(path, what):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise _Usage(f"cannot read {what} {path!r}: {e.strerror}")


class _Usage(Exception):
    pass


def _emit_diagnostics(diags):
    for d in diags:
        print(str(d), file=sys.stderr)


def _load_program(path):
    result = parse_program(_read_file(path, "program"), path)
    if result.program is None or result.diagnostics:
        _emit_diagnostics(result.diagnostics)
        return None
    return result.program


def _load_dom(path):
    try:
        return load_domain(_read_file(path, "domain file"), path)
    except DomainFileError as e:
        raise _Usage(str(e))


def _load_rdata(path, signature, ftable):
    try:
        return parse_relation_data(_read_file(path, "relation data"), signature, ftable, path)
    except RelationDataError as e:
        raise _Usage(str(e))


def _relations_text(interp: Interpretation) -> str:
    lines = []
    for p in interp.predicates():
        for t in sorted(interp.relation(p), key=repr):
            lines.append(f"{p}: ({', '.join(format_value(v) for v in t)}).")
    return "\n".join(lines) + ("\n" if lines else "")


def _relations_json(interp: Interpretation):
    return {
        p: sorted([format_value(v) for v in t] for t in interp.relation(p))
        for p in interp.predicates()
    }


def _default_max_iter():
    raw = os.environ.get("RELKIT_MAX_ITER")
    if raw is None:
        return 1000
    try:
        return int(raw)
    except ValueError:
        raise _Usage(f"RELKIT_MAX_ITER must be an integer, got {raw!r}")


def _fixpoint_config(args):
    max_iter = args.max_iter if args.max_iter is not None else _default_max_iter()
    try:
        return FixpointConfig(max_iterations=max_iter, evaluator=args.evaluator, trace=args.trace)
    except ValueError as e:
        raise _Usage(str(e))


def _status_line(result):
    if result.status == REACHED_FIXPOINT:
        return f"fixpoint reached in {result.iterations} rounds"
    if result.status == ITERATION_BUDGET:
        return f"iteration budget exhausted after {result.iterations} rounds"
    if result.status == SIZE_BUDGET:
        return f"size budget exhausted after {result.iterations} rounds"
    return result.status


def _run_lfp(program, ftable, domain, args, extensional):
    result = lfp(program, ftable, domain, _fixpoint_config(args), extensional)
    for line in result.trace_lines:
        print(line, file=sys.stderr)
    return result


# ---------------------------------------------------------------------------
# Subcommands


def cmd_validate(args):
    result = parse_program(_read_file(args.program, "program"), args.program)
    if args.format == "json":
        print(json.dumps({"ok": result.ok, "diagnostics": [str(d) for d in result.diagnostics]}))
    else:
        _emit_diagnostics(result.diagnostics)
        if result.ok:
            print("ok")
    return EXIT_OK if result.ok else EXIT_DIAGNOSTICS


def cmd_eval(args):
    program = _load_program(args.program)
    if program is None:
        return EXIT_DIAGNOSTICS
    domain, ftable = _load_dom(args.domain)
    extensional = None
    if args.data:
        extensional = _load_rdata(args.data, program.signature, ftable)
    try:
        result = _run_lfp(program, ftable, domain, args, extensional)
    except (NotRangeRestricted, NonEnumerableDomain) as e:
        print(str(e), file=sys.stderr)
        return EXIT_DIAGNOSTICS
    text = _relations_text(result.interpretation)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    if args.format == "json":
        print(
            json.dumps(
                {
                    "status": result.status,
                    "iterations": result.iterations,
                    "relations": _relations_json(result.interpretation),
                }
            )
        )
    else:
        print(_status_line(result))
        if not args.out:
            sys.stdout.write(text)
    return EXIT_OK if result.status == REACHED_FIXPOINT else EXIT_BUDGET


def _query_answers(atom, interp, ftable, domain):
    """Assignments satisfying the atom against the computed relations.

    Free variables are matched against the (finite) lfp relation rather than
    enumerated, so queries work on infinite domains too.
    """
    if atom.predicate in ("=", "true", "false") or ftable.builtin_predicate(atom.predicate):
        if any(isinstance(a, Var) for a in atom.args):
            raise _Usage(f"query on computed predicate '{atom.predicate}' must be ground")
        sat = satisfies(atom, interp, ftable, domain, EMPTY_ASSIGNMENT)
        return [{}] if sat else []
    answers = []
    for t in sorted(interp.relation(atom.predicate), key=repr):
        env = {}
        ok = True
        for term, v in zip(atom.args, t):
            if isinstance(term, Var):
                if term.name in env and env[term.name] != v:
                    ok = False
                    break
                env[term.name] = v
            else:
                if free_vars_nonempty(term):
                    raise _Usage(f"query argument {format_atom(atom)} mixes variables into terms")
                w = eval_term(term, ftable, EMPTY_ASSIGNMENT)
                if w is UNDEFINED or w != v:
                    ok = False
                    break
        if ok:
            answers.append(env)
    return answers


def free_vars_nonempty(term):
    from .ast import free_variables

    return bool(free_variables(term))


def cmd_query(args):
    program = _load_program(args.program)
    if program is None:
        return EXIT_DIAGNOSTICS
    domain, ftable = _load_dom(args.domain)
    try:
        atom = parse_atom_text(args.atom, program.signature)
    except ParseError as e:
        raise _Usage(f"malformed query atom: {e.message}")
    arity = program.signature.predicate_arity(atom.predicate)
    if ftable.builtin_predicate(atom.predicate) is None and atom.predicate not in ("=", "true", "false"):
        if arity is None:
            raise _Usage(f"unknown predicate '{atom.predicate}' in query")
        if arity != len(atom.args):
            raise _Usage(f"'{atom.predicate}' has arity {arity}, query supplies {len(atom.args)}")
    extensional = None
    if args.data:
        extensional = _load_rdata(args.data, program.signature, ftable)
    try:
        result = _run_lfp(program, ftable, domain, args, extensional)
    except (NotRangeRestricted, NonEnumerableDomain) as e:
        print(str(e), file=sys.stderr)
        return EXIT_DIAGNOSTICS
    answers = _query_answers(atom, result.interpretation, ftable, domain)
    if args.format == "json":
        print(json.dumps([{k: format_value(v) for k, v in sorted(a.items())} for a in answers]))
    else:
        for a in answers:
            pairs = sorted(a.items())
            print(" ".join(f"{k}={format_value(v)}" for k, v in pairs) if pairs else "yes")
    return EXIT_OK if answers else EXIT_DIAGNOSTICS


def cmd_check_model(args):
    program = _load_program(args.program)
    if program is None:
        return EXIT_DIAGNOSTICS
    domain, ftable = _load_dom(args.domain)
    relations = _load_rdata(args.rdata, program.signature, ftable)
    rel = {p: frozenset() for p in program_predicates(program, ftable)}
    for p, tuples in relations.items():
        if p not in rel:
            raise _Usage(f"'{p}' is a computed comparison predicate, not part of an interpretation")
        rel[p] = frozenset(tuples)
    interp = Interpretation(rel)
    try:
        verdict, witness = is_model(program, interp, ftable, domain)
    except NonEnumerableDomain as e:
        raise _Usage(str(e))
    if args.format == "json":
        print(json.dumps({"model": verdict, "witness": repr(witness) if witness else None}))
    elif verdict:
        print("model")
    else:
        pred, alpha = witness
        print(f"not a model: body of '{pred}' is satisfied by {alpha!r} but the head tuple is absent")
    return EXIT_OK if verdict else EXIT_DIAGNOSTICS


def cmd_transpile(args):
    program = _load_program(args.program)
    if program is None:
        return EXIT_DIAGNOSTICS
    try:
        modes = parse_modes(_read_file(args.modes, "mode file"), args.modes)
    except ModesFileError as e:
        raise _Usage(str(e))
    ftable = None
    domain = None
    if args.domain:
        domain, ftable = _load_dom(args.domain)
    diags = mode_check(program, modes, ftable)
    if diags:
        _emit_diagnostics(diags)
        return EXIT_DIAGNOSTICS
    unit = lower(program, modes, ftable)
    text = render(unit)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    if args.run:
        if ftable is None:
            raise _Usage("--run needs --domain to evaluate input values")
        try:
            call = parse_atom_text(args.run, program.signature)
        except ParseError as e:
            raise _Usage(f"malformed --run atom: {e.message}")
        if call.predicate not in modes:
            raise _Usage(f"no mode declaration for entry '{call.predicate}'")
        decl = modes[call.predicate]
        n_in = sum(1 for m in decl if m == "in")
        if len(call.args) == len(decl):
            ins = [a for a, m in zip(call.args, decl) if m == "in"]
        elif len(call.args) == n_in:
            ins = list(call.args)
        else:
            raise _Usage(
                f"entry '{call.predicate}' takes {len(decl)} arguments or its {n_in} in-arguments"
            )
        values = []
        for term in ins:
            v = eval_term(term, ftable, EMPTY_ASSIGNMENT)
            if v is UNDEFINED:
                raise _Usage(f"input value {term} is undefined in this domain")
            values.append(v)
        result = execute(unit, call.predicate, values, ftable, max_depth=args.max_depth)
        if args.format == "json":
            print(
                json.dumps(
                    {
                        "status": result.status,
                        "outs": {k: format_value(v) for k, v in (result.outs or {}).items()},
                        "maxDepth": result.max_depth,
                    }
                )
            )
        else:
            if result.status == SUCCESS:
                fn = unit.function(call.predicate)
                print(" ".join(f"{o}={format_value(result.outs[o])}" for o in fn.out_params()) or "true")
            elif result.status == FAILURE:
                print("failure")
            else:
                print("resource limit")
        if result.status == RESOURCE_LIMIT:
            return EXIT_BUDGET
        return EXIT_OK if result.status == SUCCESS else EXIT_DIAGNOSTICS
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument plumbing


def _add_fixpoint_flags(p):
    p.add_argument("--max-iter", type=int, default=None, help="iteration budget (default: RELKIT_MAX_ITER or 1000)")
    p.add_argument("--evaluator", choices=["naive", "binding"], default="binding")
    p.add_argument("--trace", action="store_true", help="per-round per-predicate deltas on stderr")
    p.add_argument("--data", default=None, help="extensional relations (.rdata)")


def build_parser():
    ap = argparse.ArgumentParser(prog="relkit", description=__doc__)
    ap.add_argument("--format", choices=["text", "json"], default="text")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and structurally validate a program")
    p.add_argument("program")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("eval", help="compute the least fixpoint and print/write the relations")
    p.add_argument("program")
    p.add_argument("domain")
    _add_fixpoint_flags(p)
    p.add_argument("--out", default=None, help="write relations to this path instead of stdout")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("query", help="print all assignments satisfying an atom in the least model")
    p.add_argument("program")
    p.add_argument("domain")
    p.add_argument("atom")
    _add_fixpoint_flags(p)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("check-model", help="test whether loaded relations form a model")
    p.add_argument("program")
    p.add_argument("domain")
    p.add_argument("rdata")
    p.set_defaults(fn=cmd_check_model)

    p = sub.add_parser("transpile", help="mode-check, lower, and render a program; optionally run it")
    p.add_argument("program")
    p.add_argument("modes")
    p.add_argument("--domain", default=None, help="domain file (needed with --run)")
    p.add_argument("--out", default=None)
    p.add_argument("--run", default=None, metavar="ATOM", help="execute an entry, e.g. 'q(100, 7)'")
    p.add_argument("--max-depth", type=int, default=500)
    p.set_defaults(fn=cmd_transpile)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except _Usage as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
