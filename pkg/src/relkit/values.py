"""Runtime values shared by the semantics, fixpoint, and transpile layers.

A value is one of:
  * ``int``            -- arbitrary-precision integer
  * ``Fraction``       -- exact rational, always normalized by the stdlib
  * ``float``          -- binary64
  * ``Sym``            -- a ground symbolic term (Herbrand-style universes)

Lists are encoded symbolically as ``nil`` / ``cons(h, t)`` terms so that
Herbrand-style and value-level evaluation coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union


@dataclass(frozen=True)
class Sym:
    """A ground symbolic term value: a function/constant symbol applied to values."""

    fun: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.fun
        return f"{self.fun}({', '.join(format_value(a) for a in self.args)})"


class _Undefined:
    """Result of a partial function outside its domain.  Propagates through
    term evaluation; an atom containing it is unsatisfied, never an error."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Undefined"

    def __bool__(self):
        return False


UNDEFINED = _Undefined()

Value = Union[int, Fraction, float, Sym]


def is_defined(v) -> bool:
    return v is not UNDEFINED


def format_value(v) -> str:
    """Render a value in the bit-exact syntax accepted back by the parsers."""
    if isinstance(v, Sym):
        return str(v)
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, bool):
        raise TypeError("bool is not a relational value")
    if isinstance(v, float):
        return repr(v)
    return str(v)


class Assignment:
    """An immutable, hashable finite map from variable names to values.

    This is the tuple-indexed-by-variables of the data model: assignments are
    members of relations over a variable index set, so they must be usable as
    set elements.
    """

    __slots__ = ("_items",)

    def __init__(self, mapping=()):
        if isinstance(mapping, Assignment):
            self._items = mapping._items
        else:
            d = dict(mapping)
            self._items = tuple(sorted(d.items()))

    def __getitem__(self, name):
        for k, v in self._items:
            if k == name:
                return v
        raise KeyError(name)

    def get(self, name, default=None):
        for k, v in self._items:
            if k == name:
                return v
        return default

    def __contains__(self, name):
        return any(k == name for k, _ in self._items)

    def keys(self):
        return [k for k, _ in self._items]

    def items(self):
        return self._items

    def extend(self, name, value) -> "Assignment":
        """The alpha_{x|d} operation: rebind one variable, keep the rest."""
        d = dict(self._items)
        d[name] = value
        return Assignment(d)

    def restrict(self, names) -> "Assignment":
        return Assignment({k: v for k, v in self._items if k in names})

    def __eq__(self, other):
        return isinstance(other, Assignment) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def __len__(self):
        return len(self._items)

    def __repr__(self):
        inner = ", ".join(f"{k}={format_value(v)}" for k, v in self._items)
        return f"{{{inner}}}"


EMPTY_ASSIGNMENT = Assignment()
