"""Bol representation data and recovery of the quasimodular seed.

For a MODE with first exponents kappa^(1) at the cusp, i, rho and generic
points z_j, put

    F = Delta^(-k_inf) E4^(-k_rho) E6^(-k_i) prod F_(t_j)^(-k_zj),
    l = -2 - 12 k_inf - 4 k_rho - 6 k_i - 12 sum k_zj.

F * y has weight l for every solution y (of weight -2).  The representation
on the solution space is either irreducible, with the matrices below
(lambda = 2, beta = 1), or trivial, decided by the parities of 3 kappa at i.

Eigenvalues are represented exactly as angles x in Q/2Z, meaning exp(pi i x).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import CPoly, QSeries, as_rational, default_order, solve_linear
from .frobenius import COMPLETELY_NOT_APPARENT, LocalExponents, cusp_basis
from .modforms import E2, E4, E6, Delta, InsufficientOrder, basis, dim_mk, membership

IRREDUCIBLE = "Irreducible"
TRIVIAL = "Trivial"

LAMBDA = 2

S_IRR = ((0, 0, 1), (LAMBDA, -1, LAMBDA), (1, 0, 0))
R_IRR = ((0, 0, 1), (1, 0, 0), (0, 1, 0))
T_IRR = ((0, 1, 0), (-1, LAMBDA, LAMBDA), (0, 0, 1))
IDENTITY = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def matmul(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3))


def det(m) -> int:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _angle(x) -> Fraction:
    return as_rational(x) % 2


def matrix_spectrum(m) -> list[Fraction]:
    """Eigenvalues of a finite-order integer matrix as sorted angles."""
    import sympy

    lam = sympy.symbols("lam")
    poly = sympy.Poly(sympy.Matrix(m).charpoly(lam).as_expr(), lam)
    out = []
    for root, mult in sympy.roots(poly).items():
        arg = sympy.nsimplify(sympy.arg(root) / sympy.pi)
        if sympy.Abs(root) != 1 or not arg.is_Rational:
            raise ValueError(f"eigenvalue {root} is not a root of unity")
        out.extend([_angle(Fraction(int(arg.p), int(arg.q)))] * mult)
    return sorted(out)


def lemma_spectra(ell: int, kappa_i: LocalExponents, kappa_rho: LocalExponents) -> tuple[list, list]:
    """(S-hat angles, R-hat angles) predicted from l and exponent differences."""
    def diffs(k):
        return [Fraction(0), k.k2 - k.k1, k.k3 - k.k1]
    s = sorted(_angle(Fraction(-ell - 2 * d, 2)) for d in diffs(kappa_i))
    r = sorted(_angle(Fraction(-(ell + 2 * d), 3)) for d in diffs(kappa_rho))
    return s, r


@dataclass
class BolData:
    ell: int
    tag: str
    S_hat: tuple
    R_hat: tuple
    T_hat: tuple
    S_eigen: list = field(default_factory=list)
    R_eigen: list = field(default_factory=list)

    def relations_hold(self) -> bool:
        return (matmul(self.S_hat, self.S_hat) == IDENTITY
                and matmul(self.R_hat, matmul(self.R_hat, self.R_hat)) == IDENTITY
                and matmul(self.S_hat, self.R_hat) == self.T_hat
                and all(det(m) == 1 for m in (self.S_hat, self.R_hat, self.T_hat)))


def classify_bol(kappa_i: LocalExponents) -> str:
    parities = sorted(int(3 * k) % 2 for k in (kappa_i.k1, kappa_i.k2, kappa_i.k3))
    if any((3 * k).denominator != 1 for k in (kappa_i.k1, kappa_i.k2, kappa_i.k3)):
        raise ValueError("exponents at i must lie in (1/3)Z")
    if parities == [0, 0, 1]:
        return IRREDUCIBLE
    if parities == [1, 1, 1]:
        return TRIVIAL
    raise ValueError(f"parity pattern {parities} cannot occur when the exponents sum to 3")


def canonical_matrices(tag: str, ell: int, kappa_i: LocalExponents | None = None,
                       kappa_rho: LocalExponents | None = None) -> BolData:
    if tag == IRREDUCIBLE:
        data = BolData(ell, tag, S_IRR, R_IRR, T_IRR)
    elif tag == TRIVIAL:
        data = BolData(ell, tag, IDENTITY, IDENTITY, IDENTITY)
    else:
        raise ValueError(f"unknown tag {tag}")
    data.S_eigen = matrix_spectrum(data.S_hat)
    data.R_eigen = matrix_spectrum(data.R_hat)
    if kappa_i is not None and kappa_rho is not None:
        s, r = lemma_spectra(ell, kappa_i, kappa_rho)
        if s != data.S_eigen or r != data.R_eigen:
            raise ValueError(f"eigenvalue lemma gives S {s}, R {r}; matrices give "
                             f"S {data.S_eigen}, R {data.R_eigen}")
    return data


# --------------------------------------------------------------------------
# multiplier F


@dataclass
class Multiplier:
    F: QSeries  # unit-normalized q-expansion
    ell: int
    scale: Fraction  # F_true = scale * F (from the F_t factors)


def compute_ell(k_inf, k_i, k_rho, k_points: Sequence = ()) -> int:
    ell = -2 - 12 * as_rational(k_inf) - 4 * as_rational(k_rho) - 6 * as_rational(k_i)
    ell -= 12 * sum((as_rational(k) for _, k in k_points), Fraction(0))
    if ell.denominator != 1 or int(ell) % 2:
        raise ValueError(f"l = {ell} is not an even integer")
    return int(ell)


def multiplier_F(k_inf, k_i, k_rho, k_points: Sequence = (), order: int | None = None) -> Multiplier:
    """F from the first exponents; k_points lists (t, kappa^(1)) at generic points."""
    order = default_order() if order is None else order
    k_inf, k_i, k_rho = (as_rational(x) for x in (k_inf, k_i, k_rho))
    if k_rho.denominator != 1:
        raise ValueError("kappa_rho^(1) must be an integer")
    ell = compute_ell(k_inf, k_i, k_rho, k_points)
    F = Delta(order).pow_rational(-k_inf).truncate(-k_inf + order)
    if k_rho:
        F = F * E4(order) ** int(-k_rho)
    if k_i:
        F = F * E6(order).pow_rational(-k_i)
    scale = Fraction(1)
    for t, k in k_points:
        t = as_rational(t)
        ft = E4(order) ** 3 - (E6(order) ** 2).scale(t)
        # F_t(i infinity) = 1 - t
        F = F * ft.scale(1 / (1 - t)).pow_rational(-as_rational(k))
        scale *= (1 - t) ** (-as_rational(k))
    return Multiplier(F, ell, scale)


def multiplier_from_mode(mode, report: dict, order: int | None = None) -> Multiplier:
    pts = [(as_rational(name[2:]), r.exponents.k1) for name, r in report.items() if name.startswith("t=")]
    return multiplier_F(report["inf"].exponents.k1, report["i"].exponents.k1,
                        report["rho"].exponents.k1, pts, order)


# --------------------------------------------------------------------------
# recovery


@dataclass
class Recovered:
    m0: QSeries
    m1: QSeries
    m2: QSeries
    weights: tuple
    nu: Fraction
    mu: Fraction
    certificates: tuple = ()


class RecoveryError(ValueError):
    pass


def _rational(s: QSeries, power: int) -> QSeries:
    def conv(x):
        if isinstance(x, CPoly):
            if not x:
                return 0
            if x.powers() != [power]:
                raise RecoveryError(f"expected a pure c^{power} series, got {x}")
            return x.coeff(power)
        if x != 0 and power != 0:
            raise RecoveryError(f"expected a pure c^{power} series")
        return x
    return s.map_coeffs(conv)


def _lift(s: QSeries, power: int) -> QSeries:
    return s.map_coeffs(lambda x: CPoly({power: x}) if x != 0 else 0)


def _residual(s: QSeries, weight: int) -> dict:
    """Linear functionals that vanish exactly when s (to its validity) lies in M_weight."""
    out = {}
    dim = dim_mk(weight)
    top = int(s.valid)
    for e, x in s.terms():
        if e < 0 or e.denominator != 1:
            out[("bad", e)] = x
    if dim:
        bas = basis(weight, top + 1)
        head = [s.coeff(i) for i in range(dim)]
        for n in range(dim, top + 1):
            v = s.coeff(n) - sum((h * b.coeff(n) for h, b in zip(head, bas) if h != 0), Fraction(0))
            out[("n", n)] = v
    else:
        for n in range(0, top + 1):
            out[("n", n)] = s.coeff(n)
    return out


def _parts(F: QSeries, cb, e2: QSeries):
    """(m2, m1, m0) as affine functions of (nu, mu): lists [const, d/dnu, d/dmu]."""
    u1, u0, v0 = cb.Y_minus.part(1), cb.Y_minus.part(0), cb.Y_perp.part(0)
    yp = cb.y_plus
    zero = (F * yp).scale(0)
    # m2 = (c^2/4) F (u0 + nu v0 + mu y+),  m1* = (c/2) F (u1 + nu y+)
    m2 = [(F * u0).scale(Fraction(1, 4)), (F * v0).scale(Fraction(1, 4)), (F * yp).scale(Fraction(1, 4))]
    m1s = [(F * u1).scale(Fraction(1, 2)), (F * yp).scale(Fraction(1, 2)), zero]
    # m1 = m1* - (1/(3c)) m2 E2 ; the c-powers (2 -> 1) line up
    m1 = [a - (b * e2).scale(Fraction(1, 3)) for a, b in zip(m1s, m2)]
    # m0 = F y+ - (1/(36 c^2)) m2 E2^2 - (1/(6c)) m1 E2
    e22 = e2 * e2
    m0 = [(F * yp if j == 0 else zero) - (m2[j] * e22).scale(Fraction(1, 36)) - (m1[j] * e2).scale(Fraction(1, 6))
          for j in range(3)]
    return m2, m1, m0


def recover_quasimodular(mode, mult: Multiplier, n_max: int | None = None) -> Recovered:
    """Recover (m0, m1, m2) with F y+ = m0 + (1/(6c)) m1 E2 + (1/(6c))^2 m2 E2^2."""
    op = mode.operator()
    n_max = int(mode.valid) if n_max is None else n_max
    cb = cusp_basis(op, n_max=n_max)
    if cb.structure.tag != COMPLETELY_NOT_APPARENT:
        raise RecoveryError("recovery needs a completely-not-apparent cusp")
    ell = mult.ell
    F = mult.F
    e2 = E2(n_max + 4)
    m2, m1, m0 = _parts(F, cb, e2)
    rows, rhs = [], []
    top = min(s.valid for s in m2 + m1 + m0)
    for series, w in ((m2, ell - 2), (m1, ell), (m0, ell + 2)):
        res = [_residual(s.truncate(top), w) for s in series]
        keys = set().union(*res)
        for key in sorted(keys, key=str):
            rows.append([res[1].get(key, 0), res[2].get(key, 0)])
            rhs.append(-res[0].get(key, 0))
    x, null = solve_linear(rows, rhs)
    if x is None:
        raise RecoveryError("modularity certification failed")
    if null:
        raise RecoveryError("ambiguous recovery: the correction (nu, mu) is not unique")
    nu, mu = (as_rational(v) for v in x)

    def pick(parts):
        return parts[0] + parts[1].scale(nu) + parts[2].scale(mu)

    r2, r1, r0 = pick(m2), pick(m1), pick(m0)
    certs = []
    for s, w in ((r2, ell - 2), (r1, ell), (r0, ell + 2)):
        if s.is_zero():
            certs.append(None)
            continue
        try:
            cert = membership(s, w)
        except InsufficientOrder:
            cert = None
        if cert is not None and not cert.ok:
            raise RecoveryError("modularity certification failed")
        certs.append(cert)
    return Recovered(_lift(r0, 0), _lift(r1, 1), _lift(r2, 2), (ell + 2, ell, ell - 2), nu, mu, tuple(certs))


def reassemble(rec: Recovered) -> QSeries:
    """m0 + (1/(6c)) m1 E2 + (1/(6c))^2 m2 E2^2 (c-free)."""
    e2 = E2(int(min(rec.m0.valid, rec.m1.valid, rec.m2.valid)) + 1)
    m0 = _rational(rec.m0, 0)
    m1 = _rational(rec.m1, 1)
    m2 = _rational(rec.m2, 2)
    return m0 + (m1 * e2).scale(Fraction(1, 6)) + (m2 * e2 * e2).scale(Fraction(1, 36))


def certify_trivial(mode, mult: Multiplier, n_max: int | None = None) -> list:
    """For a trivial representation every F*y (cusp basis) lies in M_l."""
    op = mode.operator()
    n_max = int(mode.valid) if n_max is None else n_max
    cb = cusp_basis(op, n_max=n_max)
    out = []
    for y in cb.structure.basis:
        if y.degree > 0:
            raise RecoveryError("trivial representation but the cusp basis has logarithms")
        out.append(membership(mult.F * y.part(0), mult.ell))
    return out
