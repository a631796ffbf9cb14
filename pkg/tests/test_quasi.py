from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modeforge.algebra import CPoly
from modeforge.frobenius import LocalExponents
from modeforge.modforms import E2, E4, E6, dim_mk
from modeforge.quasi import (
    cusp_exponents_from_orders,
    extremal,
    from_series,
    orders_at_cusp,
    wronskian,
    wronskian_rational,
)

F = Fraction


@pytest.mark.parametrize("k", [6, 8, 10, 12, 14, 16])
def test_extremal_vanishing_order(k):
    f = extremal(k, 30)
    s = f.series()
    dim = 1 + k // 4
    assert s.valuation() == dim - 1
    assert s.coeff(dim - 1) == 1


def test_extremal_weight6_by_hand():
    # the only normalized depth-1 weight-6 form vanishing at the cusp is (E2 E4 - E6)/720
    f = extremal(6, 20)
    expect = (E2(20) * E4(20) - E6(20)).scale(F(1, 720))
    assert f.series().agrees(expect, 19)


def test_extremal_rejects_small_or_odd_weight():
    with pytest.raises(ValueError):
        extremal(4)
    with pytest.raises(ValueError):
        extremal(9)


def test_depth_zero_wronskian_is_degenerate():
    with pytest.raises(ValueError):
        wronskian(from_series(4, E4(20)))


@pytest.mark.parametrize("k", [6, 8, 12])
def test_wronskian_is_c_cubed_times_rational(k):
    p, w = wronskian_rational(extremal(k, 30))
    assert p == 3
    assert all(not isinstance(x, CPoly) for x in w.coeffs)


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 6))
def test_cusp_exponents_sum_to_zero(a, b, d):
    exps, ord_w = cusp_exponents_from_orders(a, b, d)
    ks = exps.as_tuple()
    assert sum(ks) == 0
    assert list(ks) == sorted(ks)
    assert ord_w == a + min(a, b) + min(a, b, d)


def test_orders_for_weight6_extremal():
    f = extremal(6, 20)
    assert orders_at_cusp(f)[:2] == (1, 0)
    exps, ord_w = cusp_exponents_from_orders(*orders_at_cusp(f))
    assert exps == LocalExponents(F(-1, 3), F(-1, 3), F(2, 3))
    assert ord_w == 1


def test_extremal_dimension_count():
    for k in range(6, 40, 2):
        assert dim_mk(k) + dim_mk(k - 2) + dim_mk(k - 4) == 1 + k // 4
