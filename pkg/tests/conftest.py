from fractions import Fraction

from hypothesis import settings

from misodof.poly_core import InequalitySystem, LinearConstraint

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def row(text: str) -> LinearConstraint:
    return LinearConstraint.parse(text)


def system(*rows: str, vars=()) -> InequalitySystem:
    return InequalitySystem.of([row(r) for r in rows], vars=vars)


def Q(x) -> Fraction:
    return Fraction(x)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
