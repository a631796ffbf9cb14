from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modeforge.algebra import QSeries
from modeforge.frobenius import (
    APPARENT,
    COMPLETELY_NOT_APPARENT,
    NOT_APPARENT,
    LocalExponents,
    LogSeries,
    ThetaOperator,
    classify,
    cusp_basis,
    indicial,
    indicial_from_coeffs,
    synthetic_operator,
    verify_basis,
)

F = Fraction


def test_regular_point_indicial():
    assert indicial(0, 0).roots == [0, 1, 2]


def test_cusp_indicial_with_double_root():
    ind = indicial(-3, -2, kind="cusp")
    assert ind.supported and ind.roots == [-1, -1, 2]


def test_interior_thirds():
    ind = indicial(F(-4, 3), F(16, 27))
    assert ind.exponents() == LocalExponents(F(-1, 3), F(2, 3), F(8, 3))


def test_unsupported_configurations():
    # s^3 - 2 has no rational root
    assert not indicial_from_coeffs([-2, 0, 0, 1]).supported
    # roots 0, 1/2, 1 do not differ by integers
    ind = indicial_from_coeffs([0, F(1, 2), F(-3, 2), 1])
    assert not ind.supported
    with pytest.raises(ValueError):
        ind.exponents()


@given(st.lists(st.integers(-4, 4), min_size=2, max_size=2), st.integers(-3, 3))
def test_indicial_round_trip(gaps, shift):
    a = F(shift, 3)
    d1, d2 = sorted(abs(g) for g in gaps)
    ks = [a, a + d1, a + d1 + d2]
    e1 = sum(ks)
    e2 = ks[0] * ks[1] + ks[0] * ks[2] + ks[1] * ks[2]
    e3 = ks[0] * ks[1] * ks[2]
    ind = indicial_from_coeffs([-e3, e2, -e1, 1])
    assert ind.supported and ind.roots == ks


def test_log_series_theta_on_log():
    # theta(Lambda) = 1 where Lambda = log x
    lam = LogSeries({1: QSeries.constant(1, var="x").truncate(5)})
    th = lam.theta()
    assert th.degree == 0 and th.part(0).agrees(QSeries.constant(1, var="x").truncate(5))


BRANCHES = {
    "equal": ((1, 1, 1), [], [], COMPLETELY_NOT_APPARENT),
    "upper_pair/vanishing": ((-1, 2, 2), [(-1, 3)], [], NOT_APPARENT),
    "lower_pair/obstructed": ((0, 0, 3), [], [(0, 3)], COMPLETELY_NOT_APPARENT),
    "distinct/split/apparent": ((-1, 1, 3), [(1, 2), (-1, 2), (-1, 4)], [], APPARENT),
    "distinct/log/squared": ((-1, 1, 3), [], [(1, 2), (-1, 2)], COMPLETELY_NOT_APPARENT),
}


@pytest.mark.parametrize("branch", sorted(BRANCHES))
@given(seed=st.integers(0, 50))
def test_branch_bases_are_solutions(branch, seed):
    ks, vanish, nonzero, tag = BRANCHES[branch]
    op = synthetic_operator(ks, vanish, nonzero, n_max=8, seed=seed)
    st_ = classify(op, n_max=8)
    assert st_.branch == branch and st_.tag == tag
    assert all(verify_basis(op, st_))


def test_synthetic_operator_rejects_bad_sums():
    with pytest.raises(ValueError):
        synthetic_operator((0, 0, 1))


def test_cusp_basis_normalization():
    op = synthetic_operator((-1, 0, 1), [], [(-1, 1), (0, 1)], n_max=8, seed=2)
    cb = cusp_basis(op, n_max=8)
    assert cb.normalized
    assert cb.structure.tag == COMPLETELY_NOT_APPARENT
    assert cb.Y_minus.part(2).agrees(cb.y_plus)


def test_cusp_basis_needs_cusp_operator():
    op = synthetic_operator((0, 1, 2), n_max=4)
    with pytest.raises(ValueError):
        cusp_basis(op)


def test_apply_to_power_gives_indicial_value():
    op = ThetaOperator.from_coeffs("interior", [F(-4, 3)], [F(16, 27)])
    y = LogSeries.plain(QSeries.from_terms({F(2, 3): 1}, valid=4, var="x"))
    assert op.annihilates(y)
