from fractions import Fraction

import pytest

import conftest
from modeforge.algebra import QSeries
from modeforge.frobenius import APPARENT, COMPLETELY_NOT_APPARENT, LogSeries
from modeforge.modforms import Delta, E4, E6, InsufficientOrder
from modeforge.mode import (
    DependentSolutions,
    closed_form_mismatches,
    extremal_closed_form,
    is_rational_mode,
    mode_from_quasi,
    mode_from_solutions,
)
from modeforge.quasi import from_series

F = Fraction


def test_depth_zero_seed_gives_trivial_operator():
    m = mode_from_quasi(from_series(4, E4(30)))
    assert m.Q.is_zero() and m.R.is_zero()
    assert m.cusp.as_tuple() == (0, 0, 0)


@pytest.mark.parametrize("k", [6, 8, 10, 12])
def test_extremal_closed_forms(k):
    _, m, rep = conftest.extremal_mode(k)
    assert is_rational_mode(m)
    assert closed_form_mismatches(m, extremal_closed_form(k)) == []
    assert rep["inf"].tag == COMPLETELY_NOT_APPARENT
    assert rep["i"].tag == APPARENT and rep["rho"].tag == APPARENT


def test_wrong_closed_form_is_detected():
    _, m, _ = conftest.extremal_mode(8)
    assert closed_form_mismatches(m, extremal_closed_form(12)) == ["Q", "R"]


def test_closed_form_check_needs_order():
    _, m, _ = conftest.extremal_mode(8)
    with pytest.raises(InsufficientOrder):
        closed_form_mismatches(m, extremal_closed_form(8), through=10 ** 4)


def test_extremal_closed_form_rejects_odd_weight():
    with pytest.raises(ValueError):
        extremal_closed_form(7)


def test_dependent_solutions_rejected():
    e4 = E4(20)
    with pytest.raises(DependentSolutions):
        mode_from_solutions(e4, e4.scale(2), E6(20))


def test_weight24_triple():
    m, rep = conftest.weight24_mode()
    vals = m.closed.nonzero()
    assert vals == {"r_inf": -1, "r_i": F(-3, 4), "r_rho": F(8, 9)}
    assert rep["inf"].tag == APPARENT


def test_mode_is_invariant_under_basis_change():
    e4, d = E4(40), Delta(40)
    f, g, h = e4 ** 6, e4 ** 3 * d, d * d
    a = mode_from_solutions(f, g, h, check=False)
    b = mode_from_solutions(f + h.scale(3), g.scale(F(-2, 5)), h - g, check=False)
    n = int(min(a.valid, b.valid))
    assert a.Q.agrees(b.Q, n) and a.R.agrees(b.R, n)


def test_log_inputs_accepted():
    y = QSeries.constant(1).truncate(20)
    lam = LogSeries({1: y})
    lam2 = LogSeries({2: y})
    m = mode_from_solutions(LogSeries.plain(y), lam, lam2, check=False)
    assert m.Q.is_zero() and m.R.is_zero()
