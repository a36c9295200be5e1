from fractions import Fraction

from hypothesis import strategies as st

from ascoli.funcspace import PiecewiseLinear


@st.composite
def unit_rationals(draw, max_den=64):
    d = draw(st.integers(1, max_den))
    return Fraction(draw(st.integers(0, d)), d)


@st.composite
def pl_functions(draw, max_pieces=5, max_den=16):
    """Piecewise linear maps [0,1] -> [0,1] with rational breakpoints."""
    inner = draw(st.sets(st.integers(1, max_den - 1), max_size=max_pieces - 1))
    xs = [Fraction(0)] + [Fraction(i, max_den) for i in sorted(inner)] + [Fraction(1)]
    ys = [draw(unit_rationals(max_den)) for _ in xs]
    return PiecewiseLinear(list(zip(xs, ys)))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
