from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import conftest
from modeforge.bol import (
    IRREDUCIBLE,
    TRIVIAL,
    canonical_matrices,
    certify_trivial,
    classify_bol,
    compute_ell,
    lemma_spectra,
    multiplier_F,
    multiplier_from_mode,
    reassemble,
    recover_quasimodular,
)
from modeforge.frobenius import LocalExponents

F = Fraction


def exps(*ks):
    return LocalExponents(*(F(k) for k in ks))


@pytest.mark.parametrize("tag", [IRREDUCIBLE, TRIVIAL])
def test_modular_group_relations(tag):
    assert canonical_matrices(tag, 0).relations_hold()


def test_classification_by_parity():
    assert classify_bol(exps(F(-1, 3), F(2, 3), F(8, 3))) == IRREDUCIBLE
    assert classify_bol(exps(F(1, 3), F(1, 3), F(7, 3))) == TRIVIAL
    with pytest.raises(ValueError):
        classify_bol(exps(F(1, 2), 1, F(3, 2)))


@pytest.mark.parametrize("k", [6, 8, 10, 12, 14])
def test_extremal_lemma_spectra_match_matrices(k):
    _, m, rep = conftest.extremal_mode(k)
    ki, kr = rep["i"].exponents, rep["rho"].exponents
    mult = multiplier_from_mode(m, rep, order=8)
    # raises if the eigenvalue lemma disagrees with the matrices
    data = canonical_matrices(classify_bol(ki), mult.ell, ki, kr)
    assert data.relations_hold()


def test_lemma_uses_differences_not_exponents():
    # shifting every exponent at i by the same amount must not move the prediction
    a = lemma_spectra(4, exps(F(-1, 3), F(2, 3), F(8, 3)), exps(0, 1, 2))
    b = lemma_spectra(4, exps(F(2, 3), F(5, 3), F(11, 3)), exps(0, 1, 2))
    assert a == b


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_ell_is_even(a, b):
    k_inf = F(a, 1)
    k_i = F(2 * b - 1, 3) if a % 2 else F(2 * b, 3)
    try:
        ell = compute_ell(k_inf, k_i, 0)
    except ValueError:
        return
    assert ell % 2 == 0


def test_weight24_is_trivial_and_certified():
    m, rep = conftest.weight24_mode()
    assert classify_bol(rep["i"].exponents) == TRIVIAL
    mult = multiplier_from_mode(m, rep)
    assert mult.ell % 12 == 0
    assert all(cert.ok for cert in certify_trivial(m, mult))


@pytest.mark.parametrize("k", [6, 8])
def test_recovery_reassembles_the_extremal_form(k):
    f, m, rep = conftest.extremal_mode(k)
    rec = recover_quasimodular(m, multiplier_from_mode(m, rep))
    s = reassemble(rec)
    lead = s.leading()
    target = f.series()
    n = 20
    assert s.scale(1 / lead[1]).agrees(target.scale(1 / target.leading()[1]), n)


def test_multiplier_rejects_fractional_rho():
    with pytest.raises(ValueError):
        multiplier_F(0, 0, F(1, 3))
