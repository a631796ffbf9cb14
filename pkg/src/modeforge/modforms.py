"""Classical modular forms on SL(2,Z) as exact q-expansions.

Also: Serre derivative, echelon bases of M_k, membership testing,
factorization into E4^a E6^b Delta^d P(j), and the small generator
language (monomials in E4, E6, Delta0 and F_t = E4^3 - t E6^2) used to write
meromorphic Q and R.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (
    CPoly,
    MPoly,
    QSeries,
    as_rational,
    coeff_inverse,
    default_order,
    fmt_rational,
    is_rational,
    rational_roots,
)

# --------------------------------------------------------------------------
# classical forms


@dataclass(frozen=True)
class ClassicalForm:
    tag: str  # E2, E4, E6, Delta, Delta0, J, EtaPow
    m: int = 0

    def __post_init__(self):
        if self.tag not in {"E2", "E4", "E6", "Delta", "Delta0", "J", "EtaPow"}:
            raise ValueError(f"unknown classical form {self.tag}")

    @property
    def weight(self) -> Fraction:
        table = {"E2": 2, "E4": 4, "E6": 6, "Delta": 12, "Delta0": 12, "J": 0}
        if self.tag == "EtaPow":
            return Fraction(self.m, 2)
        return Fraction(table[self.tag])


E2F = ClassicalForm("E2")
E4F = ClassicalForm("E4")
E6F = ClassicalForm("E6")
DELTA = ClassicalForm("Delta")
DELTA0 = ClassicalForm("Delta0")
JF = ClassicalForm("J")


def eta_pow(m: int) -> ClassicalForm:
    return ClassicalForm("EtaPow", m)


_lock = threading.Lock()
_cache: dict = {}


def _cached(key, order: int, build):
    """Memoize the longest expansion built so far; shorter requests truncate."""
    with _lock:
        hit = _cache.get(key)
    if hit is not None and hit.prec is not None and hit.prec >= order * hit.N:
        return hit.truncate(order) if hit.prec > order * hit.N else hit
    series = build(order)
    with _lock:
        cur = _cache.get(key)
        if cur is None or cur.prec < series.prec:
            _cache[key] = series
    return series


def _divisor_sums(k: int, order: int) -> list[int]:
    s = [0] * (order + 1)
    for d in range(1, order + 1):
        dk = d ** k
        for n in range(d, order + 1, d):
            s[n] += dk
    return s


def _eisenstein(const: int, k: int):
    def build(order):
        sig = _divisor_sums(k, order)
        cs = [1] + [const * sig[n] for n in range(1, order + 1)]
        return QSeries(cs, 0, 1, order)
    return build


def _euler_product(order: int) -> QSeries:
    """prod (1 - q^n) via the pentagonal number theorem."""
    cs = [0] * (order + 1)
    k = 0
    while True:
        done = True
        for kk in ((k, -k) if k else (0,)):
            e = kk * (3 * kk - 1) // 2
            if e <= order:
                cs[e] += -1 if kk % 2 else 1
                done = False
        if done and k > 0:
            break
        k += 1
    return QSeries(cs, 0, 1, order)


def _delta(order: int) -> QSeries:
    # q * prod(1-q^n)^24, so 1728 Delta = E4^3 - E6^2 stays an honest check
    body = _euler_product(max(order - 1, 0)) ** 24
    return body.shift(1) if order >= 1 else QSeries([], 1, 1, order)


def expand(form: ClassicalForm, order: int | None = None) -> QSeries:
    """Expansion of a classical form valid through q^order."""
    if order is None:
        order = default_order()
    if order < 0:
        raise ValueError("order must be non-negative")
    tag = form.tag
    if tag == "E2":
        return _cached("E2", order, _eisenstein(-24, 1))
    if tag == "E4":
        return _cached("E4", order, _eisenstein(240, 3))
    if tag == "E6":
        return _cached("E6", order, _eisenstein(-504, 5))
    if tag == "Delta":
        return _cached("Delta", order, _delta)
    if tag == "Delta0":
        return expand(DELTA, order).scale(1728)
    if tag == "J":
        def build(o):
            return expand(E4F, o + 1) ** 3 / expand(DELTA, o + 2)
        return _cached("J", order, build).truncate(order)
    if tag == "EtaPow":
        m = form.m
        # Euler product to order, times q^(m/24)
        base = _euler_product(order)
        body = base ** m if m >= 0 else base.inv() ** (-m)
        return body.shift(Fraction(m, 24)).truncate(order)
    raise ValueError(tag)


def E2(order: int | None = None) -> QSeries:
    return expand(E2F, order)


def E4(order: int | None = None) -> QSeries:
    return expand(E4F, order)


def E6(order: int | None = None) -> QSeries:
    return expand(E6F, order)


def Delta(order: int | None = None) -> QSeries:
    return expand(DELTA, order)


def Delta0(order: int | None = None) -> QSeries:
    return expand(DELTA0, order)


def J(order: int | None = None) -> QSeries:
    return expand(JF, order)


def _rel_order(f: QSeries) -> int:
    """How many q-steps past its leading exponent a series is valid."""
    if f.prec is None:
        return default_order()
    v = f.valid - f.e0
    return max(int(v) + (1 if v.denominator != 1 else 0), 0)


def serre_derivative(f: QSeries, k) -> QSeries:
    """D_q f - (k/12) E2 f."""
    k = as_rational(k)
    e2 = E2(_rel_order(f))
    return f.dq() - (e2 * f).scale(k / 12)


# --------------------------------------------------------------------------
# bases and membership


def dim_mk(k: int) -> int:
    """Classical dimension of M_k(SL(2,Z))."""
    if k < 0 or k % 2:
        return 0
    if k % 12 == 2:
        return k // 12
    return k // 12 + 1


def _e4e6(w: int) -> tuple[int, int]:
    """(a, b) with 4a + 6b = w, b in {0, 1}."""
    if w % 4 == 0:
        return w // 4, 0
    return (w - 6) // 4, 1


def monomial_basis(k: int, order: int | None = None) -> list[QSeries]:
    """Delta^d E4^a E6^b, d = 0..dim-1 (leading order d)."""
    order = default_order() if order is None else order
    out = []
    for d in range(dim_mk(k)):
        a, b = _e4e6(k - 12 * d)
        s = Delta(order) ** d if d else QSeries.constant(1).truncate(order)
        if a:
            s = s * E4(order) ** a
        if b:
            s = s * E6(order)
        out.append(s.truncate(order))
    return out


def basis(k: int, order: int | None = None) -> list[QSeries]:
    """Reduced echelon basis of M_k: element i is q^i + O(q^dim)."""
    if k < 0 or k % 2:
        return []
    mons = monomial_basis(k, order)
    n = len(mons)
    for i in range(n):
        # leading coefficient of the Delta^i monomial at q^i is 1
        for j in range(n):
            if j != i:
                f = mons[j].coeff(i)
                if f != 0:
                    mons[j] = mons[j] - mons[i].scale(f)
    return mons


@dataclass(frozen=True)
class Generator:
    """coeff * E4^e4 * E6^e6 * Delta0^d0 * prod F_t^e over (t, e) in ft."""

    e4: int = 0
    e6: int = 0
    d0: int = 0
    ft: tuple = ()
    coeff: Fraction = Fraction(1)

    def __post_init__(self):
        norm = tuple(sorted(((t if isinstance(t, str) else as_rational(t)), int(e))
                            for t, e in self.ft if e))
        for t, _ in norm:
            if not isinstance(t, str) and t in (0, 1):
                raise ValueError("F_t needs t not in {0, 1}")
        object.__setattr__(self, "ft", norm)
        object.__setattr__(self, "coeff", as_rational(self.coeff))

    @property
    def weight(self) -> int:
        return 4 * self.e4 + 6 * self.e6 + 12 * self.d0 + 12 * sum(e for _, e in self.ft)

    def expand(self, order: int | None = None) -> QSeries:
        """q-expansion; valid through q^order relative to its leading term."""
        order = default_order() if order is None else order
        # negative Delta0 powers shift the start down; pad enough terms
        work = order + abs(self.d0) + 2
        s = QSeries.constant(self.coeff).truncate(work)
        for base, e in ((E4(work), self.e4), (E6(work), self.e6),
                        (Delta0(work), self.d0)):
            if e:
                s = s * (base ** e)
        for t, e in self.ft:
            tv = MPoly.var(t) if isinstance(t, str) else t
            f = E4(work) ** 3 - (E6(work) ** 2).scale(tv)
            s = s * (f ** e)
        v = s.e0
        return s.truncate(v + order)

    def __str__(self):
        parts = []
        if self.coeff != 1:
            parts.append(fmt_rational(self.coeff))
        for name, e in (("E4", self.e4), ("E6", self.e6), ("D0", self.d0)):
            if e:
                parts.append(name if e == 1 else f"{name}^{e}")
        for t, e in self.ft:
            nm = f"F[{t if isinstance(t, str) else fmt_rational(t)}]"
            parts.append(nm if e == 1 else f"{nm}^{e}")
        return "*".join(parts) or "1"


@dataclass
class MembershipResult:
    ok: bool
    coords: list = field(default_factory=list)
    weight: int = 0
    mismatch_exponent: Fraction | None = None
    mismatch_value: object = None
    reason: str = ""


class InsufficientOrder(ValueError):
    pass


SAFETY_MARGIN = 10


def membership(f: QSeries, weight: int, denominator: Generator | None = None) -> MembershipResult:
    """Decide whether f * denominator lies in M_(weight + denominator weight).

    Coordinates are read off from the first dim coefficients in the echelon
    basis; the rest of the known expansion is the certificate.
    """
    g = f if denominator is None else f * denominator.expand(_rel_order(f) + 2)
    w = weight + (0 if denominator is None else denominator.weight)
    dim = dim_mk(w)
    if g.prec is not None and g.valid < dim - 1 + SAFETY_MARGIN:
        raise InsufficientOrder(
            f"need validity through q^{dim - 1 + SAFETY_MARGIN}, have q^{fmt_rational(g.valid)}")
    for e, x in g.terms():
        if e < 0 or e.denominator != 1:
            return MembershipResult(False, [], w, e, x, "term outside the integral non-negative grid")
        break
    for e, x in g.terms():
        if e.denominator != 1:
            return MembershipResult(False, [], w, e, x, "fractional exponent")
    top = int(g.valid) if g.prec is not None else int(max((e for e, _ in g.terms()), default=0)) + dim
    bas = basis(w, max(top, dim)) if w >= 0 else []
    coords = [g.coeff(i) for i in range(dim)]
    resid = g
    for cf, b in zip(coords, bas):
        if cf != 0:
            resid = resid - b.scale(cf)
    for e, x in resid.terms():
        return MembershipResult(False, coords, w, e, x, "residual coefficient")
    return MembershipResult(True, coords, w)


# --------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class FormFactorization:
    """f = scale * E4^a * E6^b * Delta^d * P(j), P monic (low-to-high coeffs).

    Canonical form has a <= 2, b <= 1 and deg P <= d, with 4a+6b+12d = weight.
    """

    a: int
    b: int
    d: int
    P: tuple
    scale: object = 1
    weight: int = 0

    @property
    def deg_p(self) -> int:
        return len(self.P) - 1

    def reassemble(self, order: int | None = None) -> QSeries:
        order = default_order() if order is None else order
        work = order + self.deg_p + 1
        s = Delta(work + self.d) ** self.d if self.d else QSeries.constant(1).truncate(work)
        s = s * (E4(work) ** self.a) if self.a else s
        s = s * (E6(work) ** self.b) if self.b else s
        jj = J(work)
        pj = QSeries.constant(self.P[0]).truncate(work)
        jp = QSeries.constant(1).truncate(work)
        for cf in self.P[1:]:
            jp = jp * jj
            pj = pj + jp.scale(cf)
        return (s * pj).scale(self.scale).truncate(order)

    def expanded(self) -> "ExpandedFactorization":
        """Pull j^m0 (j-1728)^m1 out of P into E4 and E6 powers."""
        p = list(self.P)
        m0 = 0
        while len(p) > 1 and p[0] == 0:
            p.pop(0)
            m0 += 1
        m1 = 0
        while len(p) > 1:
            # synthetic division by (j - 1728)
            q = [Fraction(0)] * (len(p) - 1)
            acc = Fraction(0)
            for i in range(len(p) - 1, 0, -1):
                acc = acc * 1728 + p[i]
                q[i - 1] = acc
            if acc * 1728 + p[0] != 0:
                break
            p = q
            m1 += 1
        return ExpandedFactorization(self.a + 3 * m0, self.b + 2 * m1, self.d - m0 - m1,
                                     tuple(p), self.scale, self.weight, m0, m1)

    def orders(self) -> dict:
        ex = self.expanded()
        roots = rational_roots(ex.P) if len(ex.P) > 1 else []
        generic = [(j / (j - 1728), m) for j, m in roots]
        nroot = sum(m for _, m in roots)
        return {
            "rho": ex.a,
            "i": ex.b,
            "inf": self.d - self.deg_p,
            "t_roots": generic,
            "irrational_degree": len(ex.P) - 1 - nroot,
        }

    def __str__(self):
        pcs = ", ".join(fmt_rational(x) for x in self.P)
        return f"{self.scale} * E4^{self.a} E6^{self.b} Delta^{self.d} P(j), P = [{pcs}]"


@dataclass(frozen=True)
class ExpandedFactorization:
    a: int
    b: int
    d: int
    P: tuple
    scale: object
    weight: int
    m0: int
    m1: int


class NotAModularForm(ValueError):
    pass


def factor_form(f: QSeries, weight: int) -> FormFactorization:
    """Write a holomorphic weight-k expansion as scale*E4^a E6^b Delta^d P(j)."""
    if weight < 0 or weight % 2:
        raise NotAModularForm(f"no nonzero holomorphic forms of weight {weight}")
    a, b = {0: (0, 0), 2: (2, 1), 4: (1, 0), 6: (0, 1), 8: (2, 0), 10: (1, 1)}[weight % 12]
    n = (weight - 4 * a - 6 * b) // 12
    if n < 0:
        raise NotAModularForm(f"no nonzero holomorphic forms of weight {weight}")
    if f.prec is None:
        f = f.truncate(default_order())
    if f.valid < n + 1:
        raise InsufficientOrder(f"need validity through q^{n + 1} to factor weight {weight}")
    lead = f.leading()
    if lead is None:
        raise NotAModularForm("zero expansion")
    if lead[0] < 0 or lead[0].denominator != 1:
        raise NotAModularForm(f"leading exponent {lead[0]} is not a holomorphic-form order")
    order = int(f.valid) + 1
    g = f
    if a:
        g = g / (E4(order) ** a)
    if b:
        g = g / E6(order)
    h = g / (Delta(order + n + 1) ** n) if n else g
    jj = J(order + 1)
    P = [0] * (n + 1)
    jpows = [QSeries.constant(1).truncate(order)]
    for _ in range(n):
        jpows.append(jpows[-1] * jj)
    for m in range(n, -1, -1):
        cf = h.coeff(-m)
        if cf != 0:
            P[m] = cf
            h = h - jpows[m].scale(cf)
    for e, x in h.terms():
        raise NotAModularForm(f"not a holomorphic form of weight {weight}: residual {x} at q^{e}")
    deg = max((i for i, x in enumerate(P) if x != 0), default=-1)
    if deg < 0:
        raise NotAModularForm("zero expansion")
    scale = P[deg]
    inv = coeff_inverse(scale)
    monic = tuple(as_rational(x * inv) if x != 0 else Fraction(0) for x in P[: deg + 1])
    if is_rational(scale):
        scale = as_rational(scale)
    return FormFactorization(a, b, n, monic, scale, weight)


def c_monomial_split(f: QSeries) -> tuple[int, QSeries]:
    """Write a CPoly-coefficient series as c^p times a rational series."""
    power = None
    out = []
    for x in f.coeffs:
        if isinstance(x, CPoly):
            if not x:
                out.append(0)
                continue
            if not x.is_monomial():
                raise ValueError("coefficients are not a single power of c")
            (p, v), = x.terms.items()
            if power is None:
                power = p
            elif p != power:
                raise ValueError("mixed powers of c")
            out.append(v)
        else:
            if x != 0:
                if power not in (None, 0):
                    raise ValueError("mixed powers of c")
                power = 0
            out.append(x)
    return power or 0, QSeries(out, f.start, f.N, f.prec, f.var)


# --------------------------------------------------------------------------
# ansatz for meromorphic Q and R


def _p(name: str) -> MPoly:
    return MPoly.var(name)


def ansatz_q(ts: Sequence = ()) -> list[tuple[MPoly, Generator]]:
    """General weight-4 Q with admissible poles at i, rho and the t-points."""
    terms = [
        (_p("r_inf"), Generator(e4=1)),
        (_p("r_i"), Generator(e4=1, d0=1, e6=-2)),
        (_p("r_rho"), Generator(d0=1, e4=-2)),
    ]
    for j, t in enumerate(ts, 1):
        terms.append((_p(f"r_z{j}_2"), Generator(e4=1, d0=2, ft=((t, -2),))))
        terms.append((_p(f"r_z{j}_1"), Generator(e4=1, d0=1, ft=((t, -1),))))
    return terms


def ansatz_r(ts: Sequence = ()) -> list[tuple[MPoly, Generator]]:
    """General weight-6 R with admissible poles at i, rho and the t-points."""
    terms = [
        (_p("s_inf"), Generator(e6=1)),
        (_p("s_i3"), Generator(d0=2, e6=-3)),
        (_p("s_i1"), Generator(d0=1, e6=-1)),
        (_p("s_rho"), Generator(e6=1, d0=1, e4=-3)),
    ]
    for j, t in enumerate(ts, 1):
        for k in (1, 2, 3):
            terms.append((_p(f"s_z{j}_{k}"), Generator(e6=1, d0=k, ft=((t, -k),))))
    return terms


def combine(terms: Sequence[tuple], values: dict | None = None, order: int | None = None) -> QSeries:
    """Expand sum coeff*generator, substituting rational parameter values."""
    order = default_order() if order is None else order
    out = QSeries.constant(0).truncate(order)
    for cf, gen in terms:
        if isinstance(cf, MPoly):
            cf = cf.evaluate(values or {}) if values is not None else cf
        if isinstance(cf, MPoly) and not cf.is_constant():
            out = out + gen.expand(order).map_coeffs(lambda x, cf=cf: cf * x if x != 0 else 0)
        else:
            v = as_rational(cf)
            if v:
                out = out + gen.expand(order).scale(v)
    return out.truncate(order)
