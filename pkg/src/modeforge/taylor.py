"""Taylor expansions of modular forms at a point of the upper half-plane.

A weight-k form built from E4 and E6 is expanded in the local variable u as
sum f_n(z0)/n! u^n, where the f_n come from the Serre-derivative recursion

    f_0 = f,  f_1 = d f,  f_(n+1) = d f_n - n(n+k-1) (E4/144) f_(n-1)

with d E4 = -E6/3 and d E6 = -E4^2/2.  Coefficients live in Q[B, C] with
B = E4(z0), C = E6(z0).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from .algebra import Frac, MPoly, QSeries, as_rational
from .modforms import Generator

B = MPoly.var("B")
C = MPoly.var("C")
T = MPoly.var("t")


def serre_d(f: MPoly) -> MPoly:
    """Serre derivative on Q[B, C] (a derivation raising weight by 2)."""
    out = MPoly()
    for mono, v in f.terms.items():
        exps = dict(mono)
        a, b = exps.get("B", 0), exps.get("C", 0)
        if set(exps) - {"B", "C"}:
            raise ValueError("serre_d acts on polynomials in B and C only")
        if a:
            # d(B^a) = a B^(a-1) (-C/3)
            out = out + MPoly({tuple(sorted(((("B", a - 1),) if a > 1 else ()) + (("C", b + 1),))): Fraction(-a, 3) * v})
        if b:
            # d(C^b) = b C^(b-1) (-B^2/2)
            m = (("B", a + 2),) + ((("C", b - 1),) if b > 1 else ())
            out = out + MPoly({tuple(sorted(m)): Fraction(-b, 2) * v})
    return out


def weighted_degree(f: MPoly) -> set[int]:
    return {sum(4 * e if x == "B" else 6 * e for x, e in m) for m in f.terms}


@dataclass(frozen=True)
class PointClass:
    tag: str  # "i", "rho", "generic"
    t: object = None  # Rational, or None for a symbolic t

    @property
    def e(self) -> int:
        return {"i": 2, "rho": 3, "generic": 1}[self.tag]

    def bc(self) -> tuple:
        """Canonical (B, C): the x-scaling lets one of them be 1 at elliptic
        points, and B = C = t at a generic point (so B^3/C^2 = t)."""
        if self.tag == "i":
            return 1, 0
        if self.tag == "rho":
            return 0, 1
        t = self.t_value()
        if not isinstance(t, MPoly) and t in (0, 1):
            raise ValueError("generic point needs t not in {0, 1}")
        return t, t

    def t_value(self):
        if self.t is None:
            return T
        if isinstance(self.t, str):
            return MPoly.var(self.t)
        return as_rational(self.t)

    def __str__(self):
        if self.tag == "generic":
            return f"t={'t' if self.t is None else self.t}"
        return self.tag


POINT_I = PointClass("i")
POINT_RHO = PointClass("rho")


def generic_point(t=None) -> PointClass:
    return PointClass("generic", t)


@dataclass
class LocalExpansion:
    weight: int
    coeffs: list  # MPoly in B, C; index n is the u^n coefficient

    def check_homogeneous(self) -> bool:
        for n, cf in enumerate(self.coeffs):
            if cf and weighted_degree(cf) != {self.weight + 2 * n}:
                return False
        return True

    def at(self, point: PointClass, var: str = "x") -> QSeries:
        b, c = point.bc()
        vals = [cf.evaluate({"B": b, "C": c}) if cf else 0 for cf in self.coeffs]
        vals = [v.as_mpoly() if isinstance(v, Frac) and v.is_polynomial() else v for v in vals]
        return QSeries(vals, 0, 1, len(self.coeffs) - 1, var)


def taylor_expand(f: MPoly, k: int, order: int) -> LocalExpansion:
    """u-expansion of a weight-k polynomial in E4 = B, E6 = C through u^order."""
    if order < 0:
        raise ValueError("order must be non-negative")
    if f and weighted_degree(f) != {k}:
        raise ValueError(f"{f} is not homogeneous of weight {k}")
    fs = [f]
    if order >= 1:
        fs.append(serre_d(f))
    for n in range(1, order):
        fs.append(serre_d(fs[n]) - fs[n - 1] * B * Fraction(n * (n + k - 1), 144))
    return LocalExpansion(k, [fn * Fraction(1, factorial(n)) for n, fn in enumerate(fs)])


def parity_filter_check(exp: LocalExpansion, e: int) -> bool:
    """At an elliptic point of order e, u^n vanishes unless k + 2n = 0 mod 2e."""
    point = {2: POINT_I, 3: POINT_RHO}[e]
    s = exp.at(point)
    return all(x == 0 for n, x in enumerate(s.coeffs) if (exp.weight + 2 * n) % (2 * e))


def ode_parity_check(a: QSeries, b: QSeries, e: int) -> bool:
    """a_n = 0 unless n = e-2 mod e, b_n = 0 unless n = e-3 mod e."""
    ok_a = all(x == 0 for n, x in a.terms() if (n - (e - 2)) % e)
    ok_b = all(x == 0 for n, x in b.terms() if (n - (e - 3)) % e)
    return ok_a and ok_b


_cache: dict = {}


def _basic(point: PointClass, order: int) -> tuple[QSeries, QSeries]:
    key = (point, order)
    if key not in _cache:
        e4 = taylor_expand(B, 4, order).at(point)
        e6 = taylor_expand(C, 6, order).at(point)
        _cache[key] = (e4, e6)
    return _cache[key]


def _symbols(gen: Generator, point: PointClass) -> list[str]:
    names = {t for t, _ in gen.ft if isinstance(t, str)}
    if point.tag == "generic" and isinstance(point.t_value(), MPoly):
        names |= set(point.t_value().variables())
    return sorted(names)


def local_generator(gen: Generator, point: PointClass, order: int) -> QSeries:
    """Local Laurent expansion (prefactor stripped) of a generator monomial."""
    # each inverted factor vanishes to order at most 1 at the point
    pad = sum(-e for e in (gen.e4, gen.e6) if e < 0) + sum(-e for _, e in gen.ft if e < 0) + 1
    e4, e6 = _basic(point, order + pad)
    names = _symbols(gen, point)
    if names:
        return _local_symbolic(gen, e4, e6, names, order + pad)
    out = QSeries.constant(gen.coeff, var="x").truncate(order + pad)
    if gen.e4:
        out = out * e4 ** gen.e4
    if gen.e6:
        out = out * e6 ** gen.e6
    if gen.d0:
        out = out * (e4 ** 3 - e6 ** 2) ** gen.d0
    for t, e in gen.ft:
        out = out * (e4 ** 3 - e6 ** 2 * t) ** e
    return out


def _local_symbolic(gen: Generator, e4: QSeries, e6: QSeries, names: list[str], n: int) -> QSeries:
    """Same expansion with symbolic t: polynomial arithmetic in sympy's sparse
    rings, one inversion with cleared denominators, one gcd per coefficient."""
    from sympy import QQ
    from sympy.polys.rings import ring

    R, *gens = ring(",".join(names), QQ)
    sym = dict(zip(names, gens))

    def lift(x):
        if isinstance(x, MPoly):
            out = R.zero
            for m, v in x.terms.items():
                v = Fraction(v)
                out += R(QQ(v.numerator, v.denominator)) * _monomial(sym, m)
            return out
        v = Fraction(x)
        return R(QQ(v.numerator, v.denominator))

    p4 = e4.map_coeffs(lift)
    p6 = e6.map_coeffs(lift)
    factors = [(p4, gen.e4), (p6, gen.e6), (p4 ** 3 - p6 ** 2, gen.d0)]
    for t, e in gen.ft:
        tv = sym[t] if isinstance(t, str) else lift(t)
        factors.append((p4 ** 3 - p6 ** 2 * tv, e))
    num = QSeries([lift(gen.coeff)], 0, 1, n, "x")
    den = QSeries([R.one], 0, 1, n, "x")
    for base, e in factors:
        if e > 0:
            num = num * base ** e
        elif e < 0:
            den = den * base ** (-e)
    den = den.strip()
    if not den.coeffs or den.coeffs[0] == 0:
        raise ValueError(f"generator {gen} has an undetermined denominator at this point")
    d = den.coeffs
    L = d[0]
    length = min(len(num.coeffs), len(d))
    # beta_k = b_k L^(k+1) where sum b_k x^k = 1/(d_0 + d_1 x + ...)
    lpow = [R.one]
    for _ in range(length + 1):
        lpow.append(lpow[-1] * L)
    beta = [R.one]
    for k in range(1, length):
        acc = R.zero
        for i in range(1, k + 1):
            if i < len(d) and d[i]:
                acc += d[i] * beta[k - i] * lpow[i - 1]
        beta.append(-acc)
    out = []
    for k in range(length):
        acc = R.zero
        for j in range(k + 1):
            if num.coeffs[j]:
                acc += num.coeffs[j] * beta[k - j] * lpow[j]
        out.append(_lower_pair(names, acc, lpow[k + 1]))
    start = num.start - den.start
    return QSeries(out, start, 1, start + length - 1, "x")


def _monomial(sym: dict, m: tuple):
    out = 1
    for x, e in m:
        out = out * sym[x] ** e
    return out


def _lower_pair(names: list[str], num, den):
    from .algebra import _from_sympy

    if not num:
        return 0
    _, num, den = num.cofactors(den)
    pn = _from_sympy(names, num)
    pd = _from_sympy(names, den)
    if pd.is_constant():
        return _tidy(pn * (Fraction(1) / pd.constant_value()))
    inv = Fraction(1) / pd.sorted_terms()[0][1]
    return Frac(pn * inv, pd * inv, normalize=False)


def _tidy(x):
    if isinstance(x, Frac) and x.is_polynomial():
        x = x.as_mpoly()
    if isinstance(x, MPoly) and x.is_constant():
        return x.constant_value()
    return x


@dataclass
class LocalODEData:
    point: PointClass
    q: QSeries  # Q~(x) = sum a_n x^n
    b: QSeries  # (1/2) Q~' + R~ = sum b_n x^n
    r: QSeries  # R~(x)

    def a_n(self, n: int):
        return self.q.coeff(n)

    def b_n(self, n: int):
        return self.b.coeff(n)


def local_ode_data(q_terms: Sequence, r_terms: Sequence, point: PointClass, order: int) -> LocalODEData:
    """Q~ and the combined (1/2)Q~' + R~ at a point, valid through x^order."""
    def build(terms, weight, max_pole, name):
        total = None
        for cf, gen in terms:
            if gen.weight != weight:
                raise ValueError(f"{name} generator {gen} has weight {gen.weight}, expected {weight}")
            s = local_generator(gen, point, order + max_pole + 1)
            v = s.valuation()
            if v is not None and v < -max_pole:
                raise ValueError(f"{name} generator {gen} has a pole of order {-v} at {point}")
            s = s.truncate(order + 1)
            term = s.map_coeffs(lambda x, cf=cf: cf * x if x != 0 else 0)
            total = term if total is None else total + term
        if total is None:
            total = QSeries.constant(0, var="x").truncate(order + 1)
        return total.map_coeffs(_tidy)

    q = build(q_terms, 4, 2, "Q")
    r = build(r_terms, 6, 3, "R")
    b = (q.ddx().scale(Fraction(1, 2)) + r).truncate(order)
    return LocalODEData(point, q.truncate(order), b.map_coeffs(_tidy), r.truncate(order))
