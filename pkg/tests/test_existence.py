from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import conftest
from modeforge.existence import (
    ExponentSpec,
    SpecError,
    assignment_from_mode,
    degree_report,
    fix_indicial,
    obstruction_polynomials,
    spec_from_mode,
    univariate_roots,
    verify_candidate,
)

F = Fraction


@st.composite
def i_triples(draw):
    """Exponents at i summing to 3 with {3 kappa} = {0, 0, 1} mod 2."""
    while True:
        d1 = draw(st.integers(1, 4))
        d2 = draw(st.integers(1, 4))
        # k1 + (k1 + d1) + (k1 + d1 + d2) = 3
        k1 = F(3 - 2 * d1 - d2, 3)
        ks = (k1, k1 + d1, k1 + d1 + d2)
        if sorted(int(3 * k) % 2 for k in ks) == [0, 0, 1]:
            return ks


@given(i_triples())
def test_degrees_at_i(ks):
    spec = ExponentSpec((-1, 0, 1), ks)
    for line in degree_report(obstruction_polynomials(spec)):
        if line.point == "i":
            assert line.ok, line


@st.composite
def rho_triples(draw):
    """Integer exponents at rho summing to 3 and distinct mod 3."""
    while True:
        d1, d2 = draw(st.integers(1, 4)), draw(st.integers(1, 4))
        if (3 - 2 * d1 - d2) % 3:
            continue
        k1 = (3 - 2 * d1 - d2) // 3
        ks = (k1, k1 + d1, k1 + d1 + d2)
        if sorted(k % 3 for k in ks) == [0, 1, 2]:
            return ks


@given(rho_triples())
def test_rho_obstructions_vanish_under_congruence(ks):
    spec = ExponentSpec((-1, 0, 1), rho=ks)
    assert all(e.is_zero for e in obstruction_polynomials(spec).at("rho"))


def test_generic_point_degrees():
    spec = ExponentSpec((-1, 0, 1), points=((2, (-1, 1, 3)),))
    sysm = obstruction_polynomials(spec)
    assert all(line.ok for line in degree_report(sysm))
    assert {"r_z1_1", "s_z1_1", "s_z1_2"} <= set(sysm.params.free)


def test_indicial_parameters_for_regular_points():
    p = fix_indicial(ExponentSpec((-1, 0, 1)))
    assert p.fixed["r_i"] == 0 and p.fixed["r_rho"] == 0
    assert p.fixed["r_inf"] == -1 and p.fixed["s_inf"] == 0


@pytest.mark.parametrize("inf, i", [((0, 0, 1), (0, 1, 2)), ((-1, 0, 1), (0, 1, 3)), ((-1, 0, 1), (F(1, 2), 1, F(3, 2)))])
def test_structural_errors(inf, i):
    with pytest.raises(SpecError):
        fix_indicial(ExponentSpec(inf, i))


def test_congruence_violation_only_when_strict():
    spec = ExponentSpec((-1, 0, 1), i=(F(1, 3), F(1, 3), F(7, 3)))
    # 3 kappa_i all odd breaks the i congruence
    with pytest.raises(SpecError):
        fix_indicial(spec, strict=True)
    fix_indicial(spec, strict=False)


@pytest.mark.parametrize("k", [6, 10, 14])
def test_extremal_modes_solve_their_systems(k):
    _, m, rep = conftest.extremal_mode(k)
    sysm = obstruction_polynomials(spec_from_mode(m, rep), strict=False)
    assert verify_candidate(sysm, assignment_from_mode(m, sysm.params)).ok


def test_weight24_forces_s_i1():
    m, rep = conftest.weight24_mode()
    sysm = obstruction_polynomials(spec_from_mode(m, rep), strict=False)
    roots = set()
    for e in sysm.nonzero():
        roots |= {r for r, _ in univariate_roots(e.poly, "s_i1")}
    assert roots == {0}
    assert not verify_candidate(sysm, {"s_i1": F(1)}).ok


def test_verify_needs_every_symbol():
    spec = ExponentSpec((-1, 0, 1), (F(-1, 3), F(2, 3), F(8, 3)))
    with pytest.raises(ValueError):
        verify_candidate(obstruction_polynomials(spec), {})


def test_repeated_exponent_rejected():
    with pytest.raises(ValueError):
        obstruction_polynomials(ExponentSpec((-1, 0, 1), rho=(0, 0, 3)), strict=False)
