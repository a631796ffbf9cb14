from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modeforge.algebra import (
    CPoly,
    Frac,
    MPoly,
    QSeries,
    c,
    default_order,
    nullspace,
    poly_from_roots,
    rational_roots,
    rref,
    solve_linear,
)

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)
coeff_lists = st.lists(small, min_size=1, max_size=8)


def series(cs, start=0, N=1, prec=10):
    return QSeries(list(cs), start, N, prec)


@st.composite
def unit_series(draw):
    cs = draw(coeff_lists)
    cs[0] = Fraction(1)
    return series(cs)


# QSeries -------------------------------------------------------------------


@given(coeff_lists, coeff_lists, coeff_lists)
def test_series_ring_laws(a, b, d):
    x, y, z = series(a), series(b), series(d)
    assert (x * y).agrees(y * x)
    assert ((x * y) * z).agrees(x * (y * z))
    assert (x * (y + z)).agrees(x * y + x * z)


@given(unit_series())
def test_inverse(u):
    one = QSeries.constant(1).truncate(u.valid)
    assert (u * u.inv()).agrees(one)


@given(unit_series(), st.sampled_from([Fraction(1, 2), Fraction(-1, 3), Fraction(2, 3), Fraction(-1, 6)]))
def test_rational_power_composes(u, r):
    p = u.pow_rational(r)
    assert (p * u.pow_rational(1 - r)).agrees(u)


@given(unit_series())
def test_cube_root_cubes_back(u):
    root = u.pow_rational(Fraction(1, 3))
    assert (root * root * root).agrees(u)


@given(coeff_lists, coeff_lists)
def test_dq_is_a_derivation(a, b):
    x, y = series(a, start=1), series(b)
    assert (x * y).dq().agrees(x.dq() * y + x * y.dq())


def test_validity_propagates_through_products():
    a = QSeries([1, 2, 3], 0, 1, 5)
    b = QSeries([0, 1], 0, 1, 3)
    p = a * b
    # b is known through q^3 and a has valuation 0, so that bounds the product
    assert p.valid == 3
    with pytest.raises(ValueError):
        p.coeff(4)


def test_puiseux_exponents():
    s = QSeries.from_terms({Fraction(1, 3): 1, Fraction(4, 3): -2}, valid=3)
    assert s.N == 3
    cube = s * s * s
    assert cube.coeff(1) == 1
    assert cube.coeff(2) == -6


def test_exact_series_has_no_validity_bound():
    s = QSeries.from_terms({0: 1, 2: 5})
    assert s.is_exact()
    assert s.coeff(100) == 0


def test_default_order_env(monkeypatch):
    monkeypatch.setenv("MODEFORGE_ORDER", "17")
    assert default_order() == 17
    monkeypatch.delenv("MODEFORGE_ORDER")
    assert default_order() == 64


def test_text_rendering():
    s = QSeries([1, -24, 252], 1, 1, 3)
    assert s.to_text() == "q - 24q^2 + 252q^3"


# CPoly ---------------------------------------------------------------------


def test_cpoly_arithmetic():
    x = c * 3 + 2
    y = c * c - 1
    assert (x * y).terms == {3: 3, 2: 2, 1: -3, 0: -2}
    assert (c * 6).inv() * 6 == CPoly({-1: 1})
    assert CPoly({0: 5}).is_scalar()


@given(st.dictionaries(st.integers(-3, 3), small, max_size=3), st.dictionaries(st.integers(-3, 3), small, max_size=3))
def test_cpoly_commutes(a, b):
    assert CPoly(a) * CPoly(b) == CPoly(b) * CPoly(a)


# MPoly / Frac --------------------------------------------------------------

names = st.sampled_from(["x", "y", "z"])


@st.composite
def mpolys(draw):
    p = MPoly()
    for _ in range(draw(st.integers(0, 4))):
        term = MPoly.const(draw(small))
        for _ in range(draw(st.integers(0, 2))):
            term = term * MPoly.var(draw(names))
        p = p + term
    return p


@given(mpolys(), mpolys(), mpolys())
def test_mpoly_ring_laws(a, b, d):
    assert a * b == b * a
    assert (a + b) * d == a * d + b * d


@given(mpolys(), st.dictionaries(names, small, min_size=3, max_size=3))
def test_mpoly_evaluation_is_a_homomorphism(a, env):
    b = a * a + MPoly.var("x")
    assert b.evaluate(env) == a.evaluate(env) ** 2 + env["x"]


def test_frac_normalizes():
    x, y = MPoly.var("x"), MPoly.var("y")
    f = Frac(x * x - y * y, x - y)
    assert f.is_polynomial()
    assert f.as_mpoly() == x + y
    g = Frac(1, x) + Frac(1, y)
    assert g == Frac(x + y, x * y)


def test_degree_and_leading_form():
    x, y = MPoly.var("x"), MPoly.var("y")
    p = x * x * y + x * 3 + 1
    assert p.degree() == 3
    assert p.degree(["x"]) == 2
    assert p.leading_form(["x"]) == x * x * y


# linear algebra ------------------------------------------------------------


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4))
def test_nullspace_vectors_are_annihilated(rows):
    for v in nullspace(rows, 3):
        for r in rows:
            assert sum(a * b for a, b in zip(r, v)) == 0
    _, piv = rref(rows)
    assert len(piv) + len(nullspace(rows, 3)) == 3


def test_solve_linear():
    x, null = solve_linear([[1, 1], [1, -1]], [3, 1])
    assert x == [2, 1] and null == []
    x, _ = solve_linear([[1, 1], [2, 2]], [1, 3])
    assert x is None


@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=4), min_size=1, max_size=4))
def test_rational_roots_recover_roots(roots):
    found = rational_roots(poly_from_roots(roots))
    expanded = sorted(r for r, m in found for _ in range(m))
    assert expanded == sorted(Fraction(r) for r in roots)
