from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from polespec.cli import read_input
from polespec.poly import Poly, monomials

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
XYZW = ["x", "y", "z", "w"]


def fixture_poly(name: str) -> Poly:
    return read_input(FIXTURES / name).poly()


@pytest.fixture
def load():
    return fixture_poly


coefficients = st.one_of(st.integers(-20, 20),
                         st.fractions(min_value=-5, max_value=5, max_denominator=7))


@st.composite
def homogeneous_polys(draw, nvars=None, max_degree=5, max_terms=6):
    n = draw(st.integers(2, 4)) if nvars is None else nvars
    d = draw(st.integers(0, max_degree))
    monos = monomials(d, n)
    chosen = draw(st.lists(st.sampled_from(monos), min_size=1, max_size=max_terms, unique=True))
    return Poly(n, {m: draw(coefficients) for m in chosen})


@st.composite
def sparse_polys(draw, nvars=3, max_degree=4, max_terms=5):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = tuple(draw(st.integers(0, max_degree)) for _ in range(nvars))
        terms[mono] = draw(coefficients)
    return Poly(nvars, terms)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
