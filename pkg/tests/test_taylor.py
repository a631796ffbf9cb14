from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modeforge.algebra import MPoly
from modeforge.taylor import (
    POINT_I,
    POINT_RHO,
    B,
    C,
    generic_point,
    ode_parity_check,
    parity_filter_check,
    serre_d,
    taylor_expand,
    weighted_degree,
)


@st.composite
def forms(draw):
    """A random homogeneous polynomial in B = E4, C = E6."""
    k = draw(st.sampled_from([4, 6, 8, 10, 12, 14, 16, 18, 20, 24]))
    p = MPoly()
    for a in range(k // 4 + 1):
        rest = k - 4 * a
        if rest % 6 == 0:
            x = draw(st.integers(-4, 4))
            if x:
                p = p + MPoly.const(x) * B ** a * C ** (rest // 6)
    return k, p


def test_serre_d_on_generators():
    assert serre_d(B) == C * Fraction(-1, 3)
    assert serre_d(C) == B * B * Fraction(-1, 2)


@given(forms(), forms())
def test_serre_d_is_a_derivation(f, g):
    (_, a), (_, b) = f, g
    assert serre_d(a * b) == serre_d(a) * b + a * serre_d(b)


@given(forms())
def test_expansion_is_homogeneous(f):
    k, p = f
    assert taylor_expand(p, k, 6).check_homogeneous()


@given(forms())
def test_parity_filters(f):
    k, p = f
    exp = taylor_expand(p, k, 9)
    assert parity_filter_check(exp, 2)
    assert parity_filter_check(exp, 3)


def test_delta_identity():
    # 1728 Delta = E4^3 - E6^2 has vanishing constant term at both elliptic points up to scale
    d = B ** 3 - C ** 2
    exp = taylor_expand(d, 12, 4)
    assert exp.at(POINT_I).coeff(0) == 1
    assert exp.at(POINT_RHO).coeff(0) == -1
    # Delta never vanishes in H, so at a generic point B = C = t the value is t^3 - t^2
    t = Fraction(5)
    assert exp.at(generic_point(t)).coeff(0) == t ** 3 - t ** 2


@given(forms(), forms())
def test_expansion_is_multiplicative(f, g):
    (k1, a), (k2, b) = f, g
    n = 5
    lhs = taylor_expand(a * b, k1 + k2, n).at(POINT_I)
    rhs = taylor_expand(a, k1, n).at(POINT_I) * taylor_expand(b, k2, n).at(POINT_I)
    assert lhs.agrees(rhs, n)


def test_inhomogeneous_input_rejected():
    with pytest.raises(ValueError):
        taylor_expand(B + C, 4, 3)
    with pytest.raises(ValueError):
        taylor_expand(B, 4, -1)


def test_generic_point_rejects_degenerate_t():
    with pytest.raises(ValueError):
        generic_point(0).bc()
    with pytest.raises(ValueError):
        generic_point(1).bc()


def test_weighted_degree():
    assert weighted_degree(B ** 3 + C ** 2) == {12}


def test_ode_parity_check():
    from modeforge.algebra import QSeries

    a = QSeries([0, 0, 0, 0, 0], 0, 1, 4, "x")
    b = QSeries([1, 0, 0, 7, 0], 0, 1, 4, "x")
    assert ode_parity_check(a, b, 3)
    b2 = QSeries([1, 1, 0, 0, 0], 0, 1, 4, "x")
    assert not ode_parity_check(a, b2, 3)
