from fractions import Fraction

import pytest

from relkit.fixpoint import FixpointConfig, ITERATION_BUDGET, REACHED_FIXPOINT, lfp
from relkit.stdlib import EXAMPLE_NAMES, UnknownExample, load_example


def test_unknown_example():
    with pytest.raises(UnknownExample):
        load_example("nope")


def test_all_packs_parse_and_validate():
    for name in EXAMPLE_NAMES:
        pack = load_example(name)
        program = pack.program()  # raises if the bundled text does not validate
        domain, ftable = pack.domain()
        assert program.defined_predicates()
        if pack.mode_text is not None:
            assert pack.modes()


def test_even_odd_fixture_is_reproduced():
    pack = load_example("evenOdd")
    program = pack.program()
    domain, ftable = pack.domain()
    result = lfp(program, ftable, domain, FixpointConfig(evaluator="binding"))
    assert result.status == REACHED_FIXPOINT
    expected = pack.fixtures()
    for pred, tuples in expected.items():
        assert result.interpretation.relation(pred) == frozenset(tuples)


def test_newton_fixture_is_the_round_four_relation():
    pack = load_example("newtonSqrt2")
    program = pack.program()
    domain, ftable = pack.domain()
    result = lfp(program, ftable, domain, FixpointConfig(evaluator="binding", max_iterations=4))
    assert result.status == ITERATION_BUDGET
    expected = pack.fixtures()["q"]
    assert result.interpretation.relation("q") == frozenset(expected)
    assert (Fraction(577, 408),) in expected


def test_newton_iterates_are_exact_rationals():
    pack = load_example("newtonSqrt2")
    program = pack.program()
    domain, ftable = pack.domain()
    result = lfp(program, ftable, domain, FixpointConfig(evaluator="binding", max_iterations=6))
    for (v,) in result.interpretation.relation("q"):
        assert isinstance(v, (int, Fraction))
