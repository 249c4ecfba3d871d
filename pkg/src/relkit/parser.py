"""Concrete syntax for relational programs and relation data.

Program files (``.rel``) hold a signature header followed by clauses:

    const nil; func s/1; pred even/1, odd/1;
    even(x) <- x = 0 \\/ exists y. x = s(y) /\\ odd(y);

Tokens: ``<-`` implication, ``\\/`` disjunction, ``/\\`` conjunction,
``exists v1, ..., vk.`` existential prefix scoping to the end of the
enclosing disjunct, ``;`` clause terminator, ``#`` line comments.
``=``, ``<``, ``<=``, ``>``, ``>=`` are infix atom sugar (``>``/``>=`` are
normalized to their mirrored ``<``/``<=`` forms) and ``+ - * /`` are infix
term sugar for the correspondingly named binary function symbols.

Relation data files (``.rdata``) list ground tuples, one per line:

    split: (nil, nil, nil).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ast import (
    App,
    Atom,
    Clause,
    Const,
    Diagnostic,
    Disjunct,
    Program,
    Signature,
    SourceSpan,
    Var,
    free_variables,
    is_numeric_literal,
    validate,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(\.\d+)?([eE][+-]?\d+)?|0[xX][0-9a-fA-F]+(\.[0-9a-fA-F]*)?([pP][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><-|<=|>=|\\/|/\\|[<>=;,.()/*+-])
""",
    re.VERBOSE,
)

_INFIX_PREDS = {"=", "<", "<=", ">", ">="}
_ADD_OPS = {"+", "-"}
_MUL_OPS = {"*", "/"}


@dataclass
class Token:
    kind: str  # number | name | op | eof
    text: str
    line: int
    col: int


class ParseError(Exception):
    def __init__(self, message, token: Token, file="<string>"):
        super().__init__(message)
        self.message = message
        self.token = token
        self.file = file

    def diagnostic(self) -> Diagnostic:
        t = self.token
        span = SourceSpan(self.file, t.line, t.col, t.line, t.col + max(1, len(t.text)))
        return Diagnostic("SyntaxError", self.message, span=span)


def tokenize(text: str, file="<string>"):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            bad = Token("op", text[pos], line, col)
            raise ParseError(f"unexpected character {text[pos]!r}", bad, file)
        lexeme = m.group(0)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class ParseResult:
    program: Optional[Program]
    diagnostics: list

    @property
    def ok(self) -> bool:
        return self.program is not None and not self.diagnostics


class _Parser:
    def __init__(self, tokens, file):
        self.tokens = tokens
        self.i = 0
        self.file = file

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text == text

    def at_name(self, text) -> bool:
        t = self.peek()
        return t.kind == "name" and t.text == text

    def accept(self, text) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text) -> Token:
        if not self.at(text):
            raise ParseError(f"expected '{text}', found {self.peek().text!r}", self.peek(), self.file)
        return self.next()

    def expect_name(self) -> Token:
        t = self.peek()
        if t.kind != "name":
            raise ParseError(f"expected a name, found {t.text!r}", t, self.file)
        return self.next()

    def span_from(self, tok: Token) -> SourceSpan:
        end = self.tokens[max(0, self.i - 1)]
        return SourceSpan(self.file, tok.line, tok.col, end.line, end.col + len(end.text))

    # -- header ------------------------------------------------------------

    def symbol_name(self) -> str:
        """A declarable symbol: an identifier or an operator like + or <=."""
        t = self.peek()
        if t.kind == "name":
            return self.next().text
        if t.kind == "op" and t.text in ("+", "-", "*", "/", "<", "<=", ">", ">="):
            return self.next().text
        raise ParseError(f"expected a symbol name, found {t.text!r}", t, self.file)

    def parse_header_item(self, constants, functions, predicates):
        kw = self.next().text
        while True:
            name = self.symbol_name()
            if kw == "const":
                constants.add(name)
            else:
                self.expect("/")
                ar_tok = self.peek()
                if ar_tok.kind != "number" or not ar_tok.text.isdigit():
                    raise ParseError("expected an arity", ar_tok, self.file)
                self.next()
                arity = int(ar_tok.text)
                (functions if kw == "func" else predicates)[name] = arity
            if not self.accept(","):
                break
        self.expect(";")

    # -- terms ---------------------------------------------------------------

    def parse_term(self):
        return self.parse_additive()

    def parse_additive(self):
        t = self.parse_multiplicative()
        while self.peek().kind == "op" and self.peek().text in _ADD_OPS:
            op = self.next().text
            rhs = self.parse_multiplicative()
            t = App(op, (t, rhs))
        return t

    def parse_multiplicative(self):
        t = self.parse_primary()
        while self.peek().kind == "op" and self.peek().text in _MUL_OPS:
            op = self.next().text
            rhs = self.parse_primary()
            t = App(op, (t, rhs))
        return t

    def parse_primary(self):
        t = self.peek()
        if t.kind == "number":
            self.next()
            return Const(t.text)
        if self.at("-"):
            # unary minus: only immediately before a numeric literal
            save = self.i
            self.next()
            n = self.peek()
            if n.kind == "number":
                self.next()
                return Const("-" + n.text)
            self.i = save
            raise ParseError("'-' is only unary before a number", t, self.file)
        if self.at("("):
            self.next()
            inner = self.parse_term()
            self.expect(")")
            return inner
        if t.kind == "name":
            self.next()
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.parse_term())
                    while self.accept(","):
                        args.append(self.parse_term())
                self.expect(")")
                return App(t.text, tuple(args))
            if t.text in self.constants:
                return Const(t.text)
            return Var(t.text)
        raise ParseError(f"expected a term, found {t.text!r}", t, self.file)

    # -- atoms and bodies ----------------------------------------------------

    def term_to_atom(self, term, tok) -> Atom:
        if isinstance(term, App):
            return Atom(term.fun, term.args)
        if isinstance(term, (Var, Const)) and not is_numeric_literal(term.name):
            return Atom(term.name, ())
        raise ParseError(f"{term} is not an atom", tok, self.file)

    def parse_atom(self) -> Atom:
        tok = self.peek()
        lhs = self.parse_term()
        t = self.peek()
        if t.kind == "op" and t.text in _INFIX_PREDS:
            self.next()
            rhs = self.parse_term()
            if t.text == ">":
                return Atom("<", (rhs, lhs))
            if t.text == ">=":
                return Atom("<=", (rhs, lhs))
            return Atom(t.text, (lhs, rhs))
        return self.term_to_atom(lhs, tok)

    def parse_disjunct(self) -> Disjunct:
        if self.at("("):
            save = self.i
            try:
                self.next()
                d = self.parse_disjunct()
                self.expect(")")
                return d
            except ParseError:
                self.i = save  # reparse as an atom that happens to start with '('
        existentials = ()
        if self.at_name("exists"):
            self.next()
            names = [self.expect_name().text]
            while self.accept(","):
                names.append(self.expect_name().text)
            self.expect(".")
            existentials = tuple(names)
        conjuncts = [self.parse_atom()]
        while self.accept("/\\"):
            conjuncts.append(self.parse_atom())
        return Disjunct(existentials, tuple(conjuncts))

    def parse_clause(self) -> Clause:
        start = self.peek()
        head = self.parse_atom()
        self.expect("<-")
        disjuncts = [self.parse_disjunct()]
        while self.accept("\\/"):
            disjuncts.append(self.parse_disjunct())
        self.expect(";")
        return Clause(head, tuple(disjuncts), span=self.span_from(start))

    # -- program ---------------------------------------------------------

    def parse_program(self) -> Program:
        constants = set()
        functions = {}
        predicates = {}
        clauses = []
        self.constants = constants
        while self.peek().kind != "eof":
            if self.peek().kind == "name" and self.peek().text in ("const", "func", "pred"):
                if clauses:
                    raise ParseError("signature header must precede all clauses", self.peek(), self.file)
                self.parse_header_item(constants, functions, predicates)
            else:
                clauses.append(self.parse_clause())
        sig = Signature.make(constants, functions, predicates)
        return Program(sig, tuple(_merge_clauses(clauses)))


def _rename_clause(clause: Clause, mapping) -> Clause:
    def sub_term(t):
        if isinstance(t, Var):
            return Var(mapping.get(t.name, t.name))
        if isinstance(t, App):
            return App(t.fun, tuple(sub_term(a) for a in t.args))
        return t

    def sub_atom(a):
        return Atom(a.predicate, tuple(sub_term(t) for t in a.args))

    body = tuple(
        Disjunct(tuple(mapping.get(e, e) for e in d.existentials), tuple(sub_atom(c) for c in d.conjuncts))
        for d in clause.body
    )
    return Clause(sub_atom(clause.head), body, span=clause.span)


def _merge_clauses(clauses):
    """Normalize several clauses per predicate into one disjunctive clause."""
    merged = {}
    order = []
    for c in clauses:
        pred = c.head.predicate
        if pred not in merged:
            merged[pred] = c
            order.append(pred)
            continue
        first = merged[pred]
        if len(first.head.args) != len(c.head.args):
            # leave both in place; the validator reports the arity clash
            merged[pred + f"#dup{len(order)}"] = c
            order.append(pred + f"#dup{len(order)}")
            continue
        mapping = {}
        target_heads = first.head_vars()
        for old, new in zip(c.head_vars(), target_heads):
            mapping[old] = new
        taken = set(target_heads) | set(mapping)
        for d in c.body:
            for e in d.existentials:
                if e in mapping:
                    continue
                if e in taken:
                    fresh = e
                    n = 0
                    while fresh in taken:
                        n += 1
                        fresh = f"{e}_{n}"
                    mapping[e] = fresh
                    taken.add(fresh)
        renamed = _rename_clause(c, mapping)
        merged[pred] = Clause(first.head, first.body + renamed.body, span=first.span)
    return [merged[p] for p in order]


def parse_program(text: str, file="<string>") -> ParseResult:
    """Parse program text; never raises.  Validation diagnostics are included."""
    try:
        tokens = tokenize(text, file)
        program = _Parser(tokens, file).parse_program()
    except ParseError as e:
        return ParseResult(None, [e.diagnostic()])
    except RecursionError:
        return ParseResult(None, [Diagnostic("SyntaxError", "input nests too deeply")])
    diags = validate(program)
    return ParseResult(program if not diags else None, diags)


# ---------------------------------------------------------------------------
# Relation data (.rdata)


def parse_relation_data(text: str, signature: Signature, ftable, file="<string>"):
    """Parse extensional relation data: lines of ``pred: (v1, ..., vk).``

    Values are ground terms resolved through ``ftable``.  Returns a dict
    mapping predicate symbols to sets of value tuples; raises
    RelationDataError on the first malformed entry.
    """
    relations = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"([A-Za-z_][A-Za-z0-9_']*|<=|<)\s*:\s*(.*)$", line)
        if not m:
            raise RelationDataError(f"{file}:{lineno}: expected 'pred: (values).'")
        pred, rest = m.group(1), m.group(2).strip()
        arity = signature.predicate_arity(pred)
        if arity is None:
            raise RelationDataError(f"{file}:{lineno}: UnknownPredicate '{pred}'")
        if not rest.endswith("."):
            raise RelationDataError(f"{file}:{lineno}: missing terminating '.'")
        body = rest[:-1].strip()
        values = _parse_value_tuple(body, ftable, f"{file}:{lineno}")
        if len(values) != arity:
            raise RelationDataError(
                f"{file}:{lineno}: ArityMismatch: '{pred}' has arity {arity}, tuple has {len(values)}"
            )
        relations.setdefault(pred, set()).add(tuple(values))
    return relations


class RelationDataError(ValueError):
    pass


def _parse_value_tuple(body: str, ftable, where):
    tokens = tokenize(body, where)
    p = _Parser(tokens, where)
    p.constants = set()  # every bare name is resolved as a constant below
    values = []
    try:
        if p.accept("("):
            if not p.at(")"):
                values.append(p.parse_term())
                while p.accept(","):
                    values.append(p.parse_term())
            p.expect(")")
        else:
            values.append(p.parse_term())
            while p.accept(","):
                values.append(p.parse_term())
        if p.peek().kind != "eof":
            raise RelationDataError(f"{where}: trailing input {p.peek().text!r}")
    except ParseError as e:
        raise RelationDataError(f"{where}: {e.message}") from e
    out = []
    for term in values:
        out.append(_eval_ground(term, ftable, where))
    return out


def _eval_ground(term, ftable, where):
    from .values import UNDEFINED

    if isinstance(term, (Var, Const)):
        v = ftable.constant_value(term.name)
        if v is UNDEFINED:
            raise RelationDataError(f"{where}: UnknownConstant '{term.name}'")
        return v
    args = [_eval_ground(a, ftable, where) for a in term.args]
    v = ftable.apply(term.fun, args)
    if v is UNDEFINED:
        raise RelationDataError(f"{where}: value {term} is undefined in this domain")
    return v


# ---------------------------------------------------------------------------
# Pretty printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_term(t, parent_prec=0, right=False) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    if t.fun in _PREC and len(t.args) == 2:
        prec = _PREC[t.fun]
        lhs = format_term(t.args[0], prec, False)
        rhs = format_term(t.args[1], prec, True)
        s = f"{lhs} {t.fun} {rhs}"
        if prec < parent_prec or (prec == parent_prec and right):
            return f"({s})"
        return s
    if not t.args:
        return f"{t.fun}()"
    return f"{t.fun}({', '.join(format_term(a) for a in t.args)})"


def format_atom(a: Atom) -> str:
    if a.predicate in ("=", "<", "<=") and len(a.args) == 2:
        return f"{format_term(a.args[0])} {a.predicate} {format_term(a.args[1])}"
    if not a.args:
        return a.predicate
    return f"{a.predicate}({', '.join(format_term(t) for t in a.args)})"


def format_disjunct(d: Disjunct, lone: bool) -> str:
    conj = " /\\ ".join(format_atom(c) for c in d.conjuncts)
    if d.existentials:
        s = f"exists {', '.join(d.existentials)}. {conj}"
    else:
        s = conj
    if not lone and (d.existentials or len(d.conjuncts) > 1):
        return f"({s})"
    return s


def format_clause(c: Clause) -> str:
    lone = len(c.body) == 1
    body = " \\/ ".join(format_disjunct(d, lone) for d in c.body)
    return f"{format_atom(c.head)} <- {body};"


def pretty_print(program: Program) -> str:
    """Canonical text rendering; reparsing it reproduces the program."""
    sig = program.signature
    lines = []
    if sig.constants:
        lines.append("const " + ", ".join(sorted(sig.constants)) + ";")
    if sig.functions:
        lines.append("func " + ", ".join(f"{n}/{a}" for n, a in sig.functions) + ";")
    if sig.predicates:
        lines.append("pred " + ", ".join(f"{n}/{a}" for n, a in sig.predicates) + ";")
    if lines:
        lines.append("")
    for c in program.clauses:
        lines.append(format_clause(c))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_atom_text(text: str, signature: Signature, file="<query>") -> Atom:
    """Parse a single query atom like ``sort(cons(b, nil), W)``; raises ParseError."""
    tokens = tokenize(text, file)
    p = _Parser(tokens, file)
    p.constants = set(signature.constants)
    atom = p.parse_atom()
    if p.peek().kind != "eof":
        raise ParseError(f"trailing input {p.peek().text!r}", p.peek(), file)
    return atom
