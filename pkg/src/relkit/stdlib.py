"""Bundled example programs with their domains, modes, and expected results.

Every pack lives under ``relkit/examples/<name>/`` as plain files:
``program.rel`` (required), ``domain.dom`` (required), ``modes.modes`` and
``expected.rdata`` (optional).  The expected relations are reproduced by the
engine in the test suite, so the files double as executable documentation.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .domain import load_domain
from .parser import parse_program, parse_relation_data
from .transpile import parse_modes

EXAMPLE_NAMES = ("deBruijn", "evenOdd", "newtonSqrt2", "sortMerge", "sortSpec")


class UnknownExample(KeyError):
    pass


@dataclass(frozen=True)
class ExamplePack:
    name: str
    program_text: str
    domain_text: str
    mode_text: Optional[str] = None
    fixture_text: Optional[str] = None

    def program(self):
        result = parse_program(self.program_text, f"{self.name}/program.rel")
        if not result.ok:
            raise ValueError(f"bundled program '{self.name}' does not validate: {result.diagnostics}")
        return result.program

    def domain(self):
        """Returns the (Domain, FunctionTable) pair for this pack."""
        return load_domain(self.domain_text, f"{self.name}/domain.dom")

    def modes(self):
        if self.mode_text is None:
            return None
        return parse_modes(self.mode_text, f"{self.name}/modes.modes")

    def fixtures(self):
        """Expected relations as {predicate: set of value tuples}, or None."""
        if self.fixture_text is None:
            return None
        _, ftable = self.domain()
        return parse_relation_data(
            self.fixture_text, self.program().signature, ftable, f"{self.name}/expected.rdata"
        )


def _read(name: str, filename: str) -> Optional[str]:
    ref = resources.files(__package__) / "examples" / name / filename
    if not ref.is_file():
        return None
    return ref.read_text(encoding="utf-8")


def load_example(name: str) -> ExamplePack:
    if name not in EXAMPLE_NAMES:
        raise UnknownExample(name)
    program_text = _read(name, "program.rel")
    domain_text = _read(name, "domain.dom")
    assert program_text is not None and domain_text is not None
    return ExamplePack(
        name,
        program_text,
        domain_text,
        mode_text=_read(name, "modes.modes"),
        fixture_text=_read(name, "expected.rdata"),
    )


def example_path(name: str, filename: str) -> str:
    """Filesystem path of a bundled example file (for CLI tests and docs)."""
    if name not in EXAMPLE_NAMES:
        raise UnknownExample(name)
    return str(resources.files(__package__) / "examples" / name / filename)
