import pickle
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from polespec.poly import (NotReducedError, ParseError, Poly, euler_defect, generic_section,
                           linear_product, monomials, parse_poly, partials, restrict_generic_hyperplane,
                           slice_basis, slice_dim, squarefree_probabilistic)

from conftest import XYZW, homogeneous_polys, sparse_polys


def test_parse_expands_products_and_powers():
    f = parse_poly("(x+y)^2 - x**2 - 2*x*y", ["x", "y"])
    assert f == Poly(2, {(0, 2): 1})


def test_parse_rational_coefficients():
    f = parse_poly("x/2 + 3/4*y", ["x", "y"])
    assert f.terms == {(1, 0): Fraction(1, 2), (0, 1): Fraction(3, 4)}


def test_parse_unary_minus_and_precedence():
    assert parse_poly("-x^2", ["x"]) == Poly(1, {(2,): -1})
    assert parse_poly("2*x^2*3", ["x"]) == Poly(1, {(2,): 6})


@pytest.mark.parametrize("text", ["x^-1", "x +", "(x", "q*x", "x y", "x/(y)"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_poly(text, ["x", "y"])


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse_poly("x + t", ["x"])
    assert err.value.position == 4


@given(sparse_polys())
def test_text_round_trip(f):
    names = ["x", "y", "z"]
    assert parse_poly(f.to_text(names), names) == f


@settings(max_examples=100, deadline=None)
@given(homogeneous_polys())
def test_euler_identity(f):
    # sum x_i f_i = d f for homogeneous f
    assert euler_defect(f).is_zero()


def test_euler_defect_detects_inhomogeneity():
    f = parse_poly("x^2 + y", ["x", "y"])
    assert not f.is_homogeneous()


@given(st.integers(0, 8), st.integers(0, 4))
def test_slice_dim_is_binomial(m, n):
    assert slice_dim(m, n) == comb(m + n, n) == len(monomials(m, n + 1))


def test_slice_dim_negative():
    assert slice_dim(-1, 3) == 0 and monomials(-2, 3) == ()


def test_monomials_lex_descending():
    assert monomials(2, 3) == ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))
    b = slice_basis(2, 2)
    assert [b.index[m] for m in b.basis] == list(range(len(b)))


@given(sparse_polys(), sparse_polys())
def test_ring_axioms(f, g):
    assert f * g == g * f
    assert (f + g) - g == f
    assert (f * (g + f)) == f * g + f * f


@given(sparse_polys(), st.integers(0, 2))
def test_diff_leibniz(f, i):
    g = Poly.variable(3, (i + 1) % 3) + Poly.constant(3, 2)
    assert (f * g).diff(i) == f.diff(i) * g + f * g.diff(i)


def test_evaluate_and_substitute():
    f = parse_poly("x^2*y - 3*z", ["x", "y", "z"])
    assert f.evaluate([2, 3, 1]) == 9
    g = f.substitute([Poly.variable(3, 1), Poly.variable(3, 0), Poly.variable(3, 2)])
    assert g == parse_poly("y^2*x - 3*z", ["x", "y", "z"])


def test_pickle_round_trip():
    f = parse_poly("x*y/3 + z^2", ["x", "y", "z"])
    assert pickle.loads(pickle.dumps(f)) == f


def test_squarefree_detects_repeated_factor():
    assert squarefree_probabilistic(parse_poly("x*y*(x+y)*z", XYZW))
    assert not squarefree_probabilistic(parse_poly("x^2*y*z", XYZW))
    assert not squarefree_probabilistic(parse_poly("(x+y+z)^2*(x-w)", XYZW))


def test_generic_section_keeps_degree_and_reducedness():
    f = parse_poly("x*y*z*w*(x+y+z)*(y-z+w)", XYZW)
    g = generic_section(f, seed=3)
    assert g.nvars == 3 and g.homogeneous_degree == 6
    assert squarefree_probabilistic(g)


def test_special_section_can_fail_reducedness():
    # x_n := x_0 makes the factors x and w coincide
    f = parse_poly("x*y*z*w*(x+y+z)", XYZW)
    with pytest.raises(NotReducedError):
        restrict_generic_hyperplane(f, coefficients=[1, 0, 0])


def test_linear_product():
    assert linear_product([[1, 0], [1, 1]]) == parse_poly("x^2 + x*y", ["x", "y"])


def test_partials():
    f = parse_poly("x^3 + x*y^2", ["x", "y"])
    assert partials(f) == [parse_poly("3*x^2 + y^2", ["x", "y"]), parse_poly("2*x*y", ["x", "y"])]
