"""Quasimodular forms of depth at most 2 and their Wronskians.

f = f0 + f1 E2 + f2 E2^2 with f_j in M_(k-2j).  The h-vector

    h3 = f,  h2 = 2Z f + alpha g,  h1 = Z^2 f + alpha Z g + alpha^2 f2,

with g = f1 + 2 f2 E2, alpha = 6c, c = 1/(pi i) and Z = z = (c/2) ln q, spans
the solution space of the MODE attached to f.  Everything is written as a
polynomial in Lambda = ln q, so D_q Lambda = 1 and the coefficients lie in Q[c].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import CPoly, QSeries, c, default_order, nullspace
from .frobenius import LogSeries, LocalExponents, det3
from .modforms import E2, basis, c_monomial_split, dim_mk

ALPHA = c * 6


@dataclass
class QuasiForm:
    weight: int
    f0: QSeries
    f1: QSeries
    f2: QSeries

    @property
    def depth(self) -> int:
        for j, s in ((2, self.f2), (1, self.f1), (0, self.f0)):
            if not s.is_zero():
                return j
        return -1

    def _e2(self) -> QSeries:
        vals = [s.valid for s in (self.f0, self.f1, self.f2) if s.prec is not None]
        return E2(int(min(vals)) + 1 if vals else default_order())

    def series(self) -> QSeries:
        e2 = self._e2()
        return self.f0 + self.f1 * e2 + self.f2 * e2 * e2

    def g(self) -> QSeries:
        """f1 + 2 f2 E2."""
        return self.f1 + (self.f2 * self._e2()).scale(2)

    def order_at_cusp(self) -> Fraction | None:
        return self.series().valuation()


def _lift(s: QSeries, cpow: int = 0, scale=1) -> QSeries:
    return s.map_coeffs(lambda x: CPoly({cpow: x * scale}) if x != 0 else 0)


@dataclass
class HVector:
    """(h1, h2, h3) as polynomials in Lambda with Q[c]-valued series parts."""

    h1: LogSeries
    h2: LogSeries
    h3: LogSeries

    def as_list(self) -> list[LogSeries]:
        return [self.h1, self.h2, self.h3]


def h_vector(f: QuasiForm) -> HVector:
    s, g, f2 = f.series(), f.g(), f.f2
    # Z = (c/2) Lambda, alpha = 6c
    h3 = LogSeries({0: _lift(s)})
    h2 = LogSeries({1: _lift(s, 1), 0: _lift(g, 1, 6)})
    h1 = LogSeries({2: _lift(s, 2, Fraction(1, 4)), 1: _lift(g, 2, 3), 0: _lift(f2, 2, 36)})
    return HVector(h1, h2, h3)


def wronskian_det(ys: list[LogSeries]) -> LogSeries:
    d1 = [y.theta() for y in ys]
    d2 = [y.theta() for y in d1]
    return det3([ys, d1, d2])


def wronskian(f: QuasiForm) -> QSeries:
    """det[h, D h, D^2 h] with D = D_q; Lambda-free with coefficients in c^3 Q."""
    if f.depth < 1:
        raise ValueError("W_f is degenerate for depth 0 (h-vector is not independent)")
    return wronskian_det(h_vector(f).as_list()).free_part()


def wronskian_rational(f: QuasiForm) -> tuple[int, QSeries]:
    """(power of c, rational series) with W_f = c^p * series."""
    return c_monomial_split(wronskian(f))


def from_series(weight: int, f0: QSeries, f1: QSeries | None = None, f2: QSeries | None = None) -> QuasiForm:
    zero = QSeries.constant(0).truncate(f0.valid if f0.prec is not None else default_order())
    return QuasiForm(weight, f0, f1 if f1 is not None else zero, f2 if f2 is not None else zero)


def extremal(k: int, order: int | None = None) -> QuasiForm:
    """The unique normalized depth-<=2 form of weight k with ord = dim - 1."""
    if k < 6 or k % 2:
        raise ValueError("extremal forms are built for even k >= 6")
    order = default_order() if order is None else order
    dim = 1 + k // 4
    e2 = E2(order)
    blocks = [basis(k, order), basis(k - 2, order), basis(k - 4, order)]
    if sum(len(b) for b in blocks) != dim:
        raise ValueError("dimension count disagrees with 1 + floor(k/4)")
    cols = []
    for j, bas in enumerate(blocks):
        for b in bas:
            cols.append(b * e2 ** j if j else b)
    rows = [[col.coeff(n) for col in cols] for n in range(dim - 1)]
    ker = nullspace(rows, len(cols)) if rows else [[Fraction(int(i == 0)) for i in range(len(cols))]]
    if len(ker) != 1:
        raise ValueError(f"extremal kernel has dimension {len(ker)} at weight {k}")
    v = ker[0]
    lead = sum((x * col.coeff(dim - 1) for x, col in zip(v, cols)), Fraction(0))
    if lead == 0:
        raise ValueError("extremal form vanishes beyond the expected order")
    v = [x / lead for x in v]
    parts = []
    pos = 0
    for bas in blocks:
        s = QSeries.constant(0).truncate(order)
        for b in bas:
            if v[pos]:
                s = s + b.scale(v[pos])
            pos += 1
        parts.append(s)
    return QuasiForm(k, *parts)


def cusp_exponents_from_orders(ord_f, ord_g, ord_h) -> tuple[LocalExponents, Fraction]:
    """Cusp exponents of the MODE of f from the orders of f, g, f2.

    Returns the exponents and ord W_f.  Covers all four cases of the order
    comparison at once: kappa_3 = ord f - r, kappa_2 = min(ord f, ord g) - r,
    kappa_1 = min of all three - r, with 3r = ord W_f.
    """
    of, og, oh = (Fraction(x) for x in (ord_f, ord_g, ord_h))
    m2 = min(of, og)
    m1 = min(of, og, oh)
    ord_w = of + m2 + m1
    r = ord_w / 3
    return LocalExponents(m1 - r, m2 - r, of - r), ord_w


def orders_at_cusp(f: QuasiForm) -> tuple[Fraction, Fraction, Fraction]:
    inf = Fraction(10 ** 9)
    vals = []
    for s in (f.series(), f.g(), f.f2):
        v = s.valuation()
        vals.append(inf if v is None else v)
    return tuple(vals)


__all__ = [
    "ALPHA", "HVector", "QuasiForm", "cusp_exponents_from_orders", "dim_mk", "extremal",
    "from_series", "h_vector", "orders_at_cusp", "wronskian", "wronskian_rational",
]
