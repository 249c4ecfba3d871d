"""Universes of discourse and fixed function-symbol interpretations.

A Domain is the universe D; a FunctionTable fixes the meaning of every
constant and function symbol over D (the structure's invariant part), plus
any computable comparison predicates bound from the builtin catalog.
Partiality is explicit: applying a function outside its domain, or producing
a value outside D, yields UNDEFINED.

Domain/interpretation files (``.dom``) are line-based::

    value rational            # int | rational | float | term
    domain all                # all | range LO HI | enum V... | lists E... maxlen N | generated depth K
    const nil
    fun + = add
    pred < = lt
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .values import UNDEFINED, Sym, format_value

_GENERATED_SIZE_CAP = 200_000


class DomainFileError(ValueError):
    pass


class UnboundFunction(KeyError):
    pass


def parse_numeral(text: str, value_kind: str):
    if "/" in text:
        return Fraction(text)
    if text.lower().startswith("0x") or text.lower().startswith("-0x"):
        return float.fromhex(text)
    if "." in text or "e" in text.lower():
        return float(text) if value_kind == "float" else Fraction(text)
    return int(text)


def _value_sort_key(v):
    if isinstance(v, Sym):
        return (1, format_value(v))
    return (0, float(v), format_value(v))


@dataclass(frozen=True)
class Domain:
    """The universe D.  Finite kinds carry their full enumeration."""

    kind: str  # "enum" | "range" | "lists" | "generated" | "all"
    value_kind: str  # "int" | "rational" | "float" | "term"
    values: Optional[frozenset] = None  # None for non-enumerable domains

    @property
    def enumerable(self) -> bool:
        return self.values is not None

    def enumerate(self) -> list:
        if self.values is None:
            raise NonEnumerableDomain(f"domain of kind '{self.kind}' is not enumerable")
        return sorted(self.values, key=_value_sort_key)

    def contains(self, v) -> bool:
        if self.values is not None:
            return v in self.values
        if self.value_kind == "rational":
            return isinstance(v, (int, Fraction)) and not isinstance(v, bool)
        if self.value_kind == "float":
            # integers are admitted as the separate quotient-count kind
            return isinstance(v, (float, int)) and not isinstance(v, bool)
        if self.value_kind == "int":
            return isinstance(v, int) and not isinstance(v, bool)
        return isinstance(v, Sym)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def int_range(lo: int, hi: int) -> "Domain":
        return Domain("range", "int", frozenset(range(lo, hi + 1)))

    @staticmethod
    def enum_of(values, value_kind) -> "Domain":
        return Domain("enum", value_kind, frozenset(values))

    @staticmethod
    def lists_of(elems, maxlen: int) -> "Domain":
        """Atomic elements plus all flat lists over them up to maxlen,
        encoded as nil/cons terms.  Keeps the closure finite and flat."""
        elems = tuple(Sym(e) if isinstance(e, str) else e for e in elems)
        values = set(elems)
        level = [Sym("nil")]
        values.add(Sym("nil"))
        for _ in range(maxlen):
            level = [Sym("cons", (h, t)) for t in level for h in elems]
            values.update(level)
        return Domain("lists", "term", frozenset(values))

    @staticmethod
    def generated(seeds, generators, depth: int, value_kind) -> "Domain":
        """Closure of the seed values under the generator functions, cut off
        at the given depth."""
        values = set(seeds)
        frontier = set(seeds)
        for _ in range(depth):
            new = set()
            pool = sorted(values, key=_value_sort_key)
            for _, (fn, arity) in sorted(generators.items()):
                if arity == 1:
                    cands = [(v,) for v in frontier]
                else:
                    cands = [
                        args
                        for args in _tuples_touching(pool, frontier, arity)
                    ]
                for args in cands:
                    try:
                        v = fn(*args)
                    except (TypeError, ZeroDivisionError, OverflowError, ValueError):
                        continue
                    if v is UNDEFINED or v in values:
                        continue
                    new.add(v)
                    if len(values) + len(new) > _GENERATED_SIZE_CAP:
                        raise DomainFileError("generated domain exceeds the size cap")
            if not new:
                break
            values |= new
            frontier = new
        return Domain("generated", value_kind, frozenset(values))

    @staticmethod
    def all_of(value_kind) -> "Domain":
        return Domain("all", value_kind, None)


def _tuples_touching(pool, frontier, arity):
    # all arity-tuples over pool with at least one coordinate in the frontier
    import itertools

    for args in itertools.product(pool, repeat=arity):
        if any(a in frontier for a in args):
            yield args


class NonEnumerableDomain(ValueError):
    pass


# ---------------------------------------------------------------------------
# Builtin catalog


def _num_div(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return a / b
    return Fraction(a) / Fraction(b)


def _cons(h, t):
    return Sym("cons", (h, t))


BUILTIN_FUNCTIONS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": _num_div,
    "succ": lambda a: a + 1,
    "pred": lambda a: a - 1,
    "cons": _cons,
}

_FUNCTION_ARITIES = {"add": 2, "sub": 2, "mul": 2, "div": 2, "succ": 1, "pred": 1, "cons": 2}


def _sym_comparable(a, b):
    return isinstance(a, Sym) and isinstance(b, Sym) and not a.args and not b.args


def _lt(a, b):
    if isinstance(a, Sym) or isinstance(b, Sym):
        return _sym_comparable(a, b) and a.fun < b.fun
    try:
        return bool(a < b)
    except TypeError:
        return False


def _le(a, b):
    if isinstance(a, Sym) or isinstance(b, Sym):
        return _sym_comparable(a, b) and a.fun <= b.fun
    try:
        return bool(a <= b)
    except TypeError:
        return False


BUILTIN_PREDICATES = {"lt": _lt, "le": _le}


class FunctionTable:
    """Total-or-partial interpretations for constants and function symbols,
    restricted to a domain, plus computable comparison predicates.

    "=" is never here: it is fixed as identity on D.
    """

    def __init__(self, domain: Domain, functions=None, constants=None, predicates=None):
        self.domain = domain
        self.functions = dict(functions or {})  # symbol -> raw callable
        self.constants = dict(constants or {})  # symbol -> value
        self.predicates = dict(predicates or {})  # symbol -> bool callable

    def constant_value(self, name: str):
        if name in self.constants:
            return self.constants[name]
        try:
            v = parse_numeral(name, self.domain.value_kind)
        except (ValueError, ZeroDivisionError):
            return UNDEFINED
        return self._canon(v)

    def apply(self, fun: str, args):
        if fun not in self.functions:
            raise UnboundFunction(f"function symbol '{fun}' has no binding in the domain file")
        if any(a is UNDEFINED for a in args):
            return UNDEFINED
        try:
            v = self.functions[fun](*args)
        except (TypeError, ZeroDivisionError, OverflowError, ValueError):
            return UNDEFINED
        return self._canon(v)

    def _canon(self, v):
        if isinstance(v, Fraction) and v.denominator == 1 and self.domain.value_kind == "int":
            v = int(v)
        if v is UNDEFINED or not self.domain.contains(v):
            return UNDEFINED
        return v

    def builtin_predicate(self, name: str):
        return self.predicates.get(name)

    def test(self, name: str, args) -> bool:
        fn = self.predicates[name]
        if any(a is UNDEFINED for a in args):
            return False
        return bool(fn(*args))


# ---------------------------------------------------------------------------
# .dom files


@dataclass
class _DomSpec:
    value_kind: Optional[str] = None
    domain_decl: Optional[list] = None
    consts: list = field(default_factory=list)
    funs: list = field(default_factory=list)
    preds: list = field(default_factory=list)


def load_domain(text: str, file="<dom>"):
    """Parse a .dom file into a (Domain, FunctionTable) pair."""
    spec = _DomSpec()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        where = f"{file}:{lineno}"
        kw = parts[0]
        if kw == "value":
            if len(parts) != 2 or parts[1] not in ("int", "rational", "float", "term"):
                raise DomainFileError(f"{where}: expected 'value int|rational|float|term'")
            spec.value_kind = parts[1]
        elif kw == "domain":
            spec.domain_decl = parts[1:]
        elif kw == "const":
            if len(parts) == 2:
                spec.consts.append((parts[1], None, where))
            elif len(parts) == 4 and parts[2] == "=":
                spec.consts.append((parts[1], parts[3], where))
            else:
                raise DomainFileError(f"{where}: expected 'const NAME' or 'const NAME = VALUE'")
        elif kw in ("fun", "pred"):
            if len(parts) != 4 or parts[2] != "=":
                raise DomainFileError(f"{where}: expected '{kw} SYMBOL = CATALOGNAME'")
            (spec.funs if kw == "fun" else spec.preds).append((parts[1], parts[3], where))
        else:
            raise DomainFileError(f"{where}: unknown directive '{kw}'")

    if spec.value_kind is None:
        raise DomainFileError(f"{file}: missing 'value' directive")
    if spec.domain_decl is None:
        raise DomainFileError(f"{file}: missing 'domain' directive")
    return _build(spec, file)


def _literal_value(text: str, value_kind: str, where: str):
    if text[0].isdigit() or text[0] == "-" or text.lower().startswith("0x"):
        try:
            return parse_numeral(text, value_kind)
        except (ValueError, ZeroDivisionError) as e:
            raise DomainFileError(f"{where}: bad numeral '{text}'") from e
    return Sym(text)


def _build(spec: _DomSpec, file: str):
    vk = spec.value_kind

    constants = {}
    for name, valtext, where in spec.consts:
        if valtext is None:
            value = Sym(name) if vk == "term" else _literal_value(name, vk, where)
        else:
            value = _literal_value(valtext, vk, where)
        constants[name] = value

    raw_funs = {}
    for sym, cat, where in spec.funs:
        if cat not in BUILTIN_FUNCTIONS:
            raise DomainFileError(f"{where}: unknown catalog function '{cat}'")
        raw_funs[sym] = cat
    raw_preds = {}
    for sym, cat, where in spec.preds:
        if cat not in BUILTIN_PREDICATES:
            raise DomainFileError(f"{where}: unknown catalog predicate '{cat}'")
        raw_preds[sym] = BUILTIN_PREDICATES[cat]

    decl = spec.domain_decl
    where = f"{file}: domain"
    try:
        if decl[0] == "all":
            domain = Domain.all_of(vk)
        elif decl[0] == "range":
            domain = Domain.int_range(int(decl[1]), int(decl[2]))
        elif decl[0] == "enum":
            domain = Domain.enum_of([_literal_value(t, vk, where) for t in decl[1:]], vk)
        elif decl[0] == "lists":
            if len(decl) < 4 or decl[-2] != "maxlen":
                raise DomainFileError(f"{where}: expected 'domain lists E... maxlen N'")
            domain = Domain.lists_of(decl[1:-2], int(decl[-1]))
        elif decl[0] == "generated":
            if len(decl) != 3 or decl[1] != "depth":
                raise DomainFileError(f"{where}: expected 'domain generated depth K'")
            gens = {
                sym: (BUILTIN_FUNCTIONS[cat], _FUNCTION_ARITIES[cat]) for sym, cat in raw_funs.items()
            }
            domain = Domain.generated(constants.values(), gens, int(decl[2]), vk)
        else:
            raise DomainFileError(f"{where}: unknown domain kind '{decl[0]}'")
    except (IndexError, ValueError) as e:
        raise DomainFileError(f"{where}: malformed domain declaration: {e}") from e

    functions = {sym: BUILTIN_FUNCTIONS[cat] for sym, cat in raw_funs.items()}
    ftable = FunctionTable(domain, functions, constants, raw_preds)
    for name, value in constants.items():
        if value is not UNDEFINED and not domain.contains(value):
            raise DomainFileError(f"{file}: constant '{name}' value {format_value(value)} is outside the domain")
    return domain, ftable
