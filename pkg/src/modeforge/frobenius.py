"""Frobenius analysis of third-order equations at a regular singular point.

Every equation is handled in theta form (theta = x d/dx):

    L = p(theta) + A(x) theta + B(x),   A = sum A_j x^j,  B = sum B_j x^j.

For the local x-equation y''' + Q~ y' + ((1/2)Q~' + R~) y = 0 multiply by
x^3: p(s) = s(s-1)(s-2), A_j = a_(j-2), B_j = b_(j-3).  At the cusp,
D_q^3 + Q D_q + ((1/2)D_q Q + R) already has this shape with p(s) = s^3.

Series solutions y(x; alpha) = x^alpha sum c_n(alpha) x^n satisfy

    f(alpha+n) c_n + sum_{k<n} [(alpha+k) A_(n-k) + B_(n-k)] c_k = 0,

f(s) = p(s) + A_0 s + B_0.  Derivatives in alpha come from running the
recursion over truncated jets alpha + eps (eps^3 = 0).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import (
    CPoly,
    QSeries,
    as_rational,
    coeff_inverse,
    default_order,
    is_rational,
    rational_roots,
)

APPARENT = "Apparent"
NOT_APPARENT = "NotApparent"
COMPLETELY_NOT_APPARENT = "CompletelyNotApparent"


# --------------------------------------------------------------------------
# jets


class Jet:
    """v0 + v1 eps + v2 eps^2 with eps^3 = 0."""

    __slots__ = ("v0", "v1", "v2")

    def __init__(self, v0, v1=0, v2=0):
        self.v0, self.v1, self.v2 = v0, v1, v2

    def __add__(self, o):
        if isinstance(o, Jet):
            return Jet(self.v0 + o.v0, self.v1 + o.v1, self.v2 + o.v2)
        return Jet(self.v0 + o, self.v1, self.v2)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v0, -self.v1, -self.v2)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if isinstance(o, Jet):
            return Jet(self.v0 * o.v0,
                       self.v0 * o.v1 + self.v1 * o.v0,
                       self.v0 * o.v2 + self.v1 * o.v1 + self.v2 * o.v0)
        if is_rational(o) and o == 0:
            return Jet(0)
        return Jet(self.v0 * o, self.v1 * o, self.v2 * o)

    __rmul__ = __mul__

    def inv(self) -> "Jet":
        i0 = coeff_inverse(self.v0)
        return Jet(i0, -(self.v1 * i0 * i0), (self.v1 * self.v1 * i0 - self.v2) * i0 * i0)

    def __repr__(self):
        return f"Jet({self.v0}, {self.v1}, {self.v2})"


# --------------------------------------------------------------------------
# log series


class LogSeries:
    """sum_k Lambda^k s_k with Lambda = ln x (theta Lambda = 1), degree <= 2."""

    __slots__ = ("parts",)

    def __init__(self, parts: dict):
        self.parts = {k: s for k, s in parts.items() if s is not None}

    @classmethod
    def plain(cls, s: QSeries) -> "LogSeries":
        return cls({0: s})

    @property
    def degree(self) -> int:
        live = [k for k, s in self.parts.items() if not s.is_zero()]
        return max(live) if live else -1

    def part(self, k: int) -> QSeries | None:
        return self.parts.get(k)

    def __add__(self, o: "LogSeries") -> "LogSeries":
        out = dict(self.parts)
        for k, s in o.parts.items():
            out[k] = out[k] + s if k in out else s
        return LogSeries(out)

    def __sub__(self, o: "LogSeries") -> "LogSeries":
        return self + o.scale(-1)

    def scale(self, a) -> "LogSeries":
        return LogSeries({k: s.scale(a) for k, s in self.parts.items()})

    def mul_series(self, f: QSeries) -> "LogSeries":
        return LogSeries({k: f * s for k, s in self.parts.items()})

    def __mul__(self, o):
        if isinstance(o, QSeries):
            return self.mul_series(o)
        if not isinstance(o, LogSeries):
            return self.scale(o)
        out: dict = {}
        for i, s in self.parts.items():
            for j, t in o.parts.items():
                p = s * t
                out[i + j] = out[i + j] + p if i + j in out else p
        return LogSeries(out)

    def free_part(self) -> QSeries:
        """The Lambda^0 part, asserting all higher parts vanish."""
        for k, s in self.parts.items():
            if k and not s.is_zero():
                raise ValueError(f"Lambda^{k} terms do not cancel")
        return self.parts[0]

    def theta(self) -> "LogSeries":
        out: dict = {}
        for k, s in self.parts.items():
            d = s.dq()
            out[k] = out[k] + d if k in out else d
            if k:
                t = s.scale(k)
                out[k - 1] = out[k - 1] + t if k - 1 in out else t
        return LogSeries(out)

    def map(self, fn) -> "LogSeries":
        return LogSeries({k: fn(s) for k, s in self.parts.items()})

    def is_zero(self) -> bool:
        return all(s.is_zero() for s in self.parts.values())

    def __repr__(self):
        inner = ", ".join(f"L^{k}: {s.to_text(4)}" for k, s in sorted(self.parts.items()))
        return f"LogSeries({inner})"


# --------------------------------------------------------------------------
# operators


@dataclass
class ThetaOperator:
    kind: str  # "interior" or "cusp"
    A: QSeries
    B: QSeries

    @property
    def var(self) -> str:
        return self.A.var

    def p(self, s):
        if self.kind == "cusp":
            return s * s * s
        return s * (s - 1) * (s - 2)

    def A_j(self, j: int):
        return self.A.coeff(j)

    def B_j(self, j: int):
        return self.B.coeff(j)

    def f(self, s):
        return self.p(s) + self.A_j(0) * s + self.B_j(0)

    @property
    def n_max(self) -> int:
        vals = [s.valid for s in (self.A, self.B) if s.prec is not None]
        return int(min(vals)) if vals else default_order()

    def indicial_coeffs(self) -> list:
        """Coefficients (low to high) of f."""
        a0, b0 = self.A_j(0), self.B_j(0)
        if self.kind == "cusp":
            return [b0, a0, 0, 1]
        return [b0, a0 + 2, -3, 1]

    @classmethod
    def from_local(cls, data) -> "ThetaOperator":
        """From Q~ and (1/2)Q~' + R~ as produced by taylor.local_ode_data."""
        A = data.q.shift(2)
        B = data.b.shift(3)
        for s, name in ((A, "Q~"), (B, "(1/2)Q~'+R~")):
            v = s.valuation()
            if v is not None and v < 0:
                raise ValueError(f"{name} has a pole beyond the Fuchsian bound")
        return cls("interior", A.with_var("x"), B.with_var("x"))

    @classmethod
    def from_cusp(cls, Q: QSeries, R: QSeries) -> "ThetaOperator":
        B = Q.dq().scale(Fraction(1, 2)) + R
        return cls("cusp", Q, B)

    @classmethod
    def from_coeffs(cls, kind: str, A: Sequence, B: Sequence, var: str = "x") -> "ThetaOperator":
        n = min(len(A), len(B)) - 1
        return cls(kind, QSeries(list(A), 0, 1, n, var), QSeries(list(B), 0, 1, n, var))

    def apply(self, y: LogSeries) -> LogSeries:
        t1 = y.theta()
        t2 = t1.theta()
        t3 = t2.theta()
        if self.kind == "cusp":
            head = t3
        else:
            head = t3 - t2.scale(3) + t1.scale(2)
        return head + t1.mul_series(self.A) + y.mul_series(self.B)

    def annihilates(self, y: LogSeries) -> bool:
        return self.apply(y).is_zero()


# --------------------------------------------------------------------------
# indicial data


@dataclass(frozen=True)
class LocalExponents:
    k1: Fraction
    k2: Fraction
    k3: Fraction

    @property
    def m1(self) -> int:
        return int(self.k2 - self.k1)

    @property
    def m2(self) -> int:
        return int(self.k3 - self.k2)

    def gaps(self) -> tuple[int, int]:
        """kappa^(j+1) - kappa^(j) - 1 for j = 1, 2."""
        return self.m1 - 1, self.m2 - 1

    def as_tuple(self) -> tuple:
        return (self.k1, self.k2, self.k3)


@dataclass
class Indicial:
    coeffs: list
    roots: list  # sorted with multiplicity
    supported: bool
    reason: str = ""

    def exponents(self) -> LocalExponents:
        if not self.supported:
            raise ValueError(f"unsupported exponent configuration: {self.reason}")
        return LocalExponents(*self.roots)


def indicial_from_coeffs(coeffs: Sequence) -> Indicial:
    cs = [as_rational(x) for x in coeffs]
    roots = []
    for r, m in rational_roots(cs):
        roots.extend([r] * m)
    roots.sort()
    if len(roots) != 3:
        return Indicial(cs, roots, False, "indicial roots are not all rational")
    if any((3 * r).denominator != 1 for r in roots):
        return Indicial(cs, roots, False, "exponents outside (1/3)Z")
    if any((roots[i + 1] - roots[i]).denominator != 1 for i in range(2)):
        return Indicial(cs, roots, False, "exponent differences are not integral")
    return Indicial(cs, roots, True)


def indicial(a_m2, b_m3, kind: str = "interior") -> Indicial:
    """Indicial polynomial s(s-1)(s-2) + a s + b (interior) or s^3 + a s + b (cusp)."""
    a, b = as_rational(a_m2), as_rational(b_m3)
    if kind == "cusp":
        return indicial_from_coeffs([b, a, 0, 1])
    return indicial_from_coeffs([b, a + 2, -3, 1])


# --------------------------------------------------------------------------
# recursion


@dataclass
class RecursionResult:
    alpha: Fraction
    coeffs: list  # Jets; c_n(alpha) with alpha-derivatives
    obstructions: dict  # resonance n -> Jet of R_n(alpha)

    def values(self) -> list:
        return [c.v0 for c in self.coeffs]

    def derivs(self, k: int) -> list:
        if k == 1:
            return [c.v1 for c in self.coeffs]
        if k == 2:
            return [2 * c.v2 for c in self.coeffs]
        raise ValueError("only first and second alpha-derivatives are tracked")

    def obstruction(self, n: int):
        return self.obstructions[n].v0

    def obstruction_deriv(self, n: int):
        return self.obstructions[n].v1


def _f_jet(op: ThetaOperator, s) -> Jet:
    return op.f(Jet(s, 1))


def run_recursion(op: ThetaOperator, alpha, n_max: int | None = None,
                  choices: dict | None = None) -> RecursionResult:
    alpha = as_rational(alpha)
    n_max = op.n_max if n_max is None else n_max
    if n_max > op.n_max:
        raise ValueError(f"coefficients requested through n={n_max}, operator known through {op.n_max}")
    choices = choices or {}
    a = Jet(alpha, 1)
    A = [op.A_j(j) for j in range(n_max + 1)]
    Bc = [op.B_j(j) for j in range(n_max + 1)]
    c = [Jet(1)]
    obst: dict = {}
    for n in range(1, n_max + 1):
        S = Jet(0)
        for k in range(n):
            w = (a + k) * A[n - k] + Bc[n - k]
            if not (w.v0 == 0 and w.v1 == 0):
                S = S + w * c[k]
        fn = _f_jet(op, alpha + n)
        if fn.v0 == 0:
            ch = choices.get(n, 0)
            obst[n] = S + fn * ch
            c.append(Jet(ch))
        else:
            c.append(-(S * fn.inv()))
    return RecursionResult(alpha, c, obst)


def recursion_Rn(op: ThetaOperator, alpha, n_max: int, choices: dict | None = None) -> RecursionResult:
    """c_n(alpha) and the obstruction values at resonances (free slots from choices)."""
    return run_recursion(op, alpha, n_max, choices)


# --------------------------------------------------------------------------
# classification


def _series(vals: list, alpha: Fraction, var: str) -> QSeries:
    return QSeries(vals, 0, 1, len(vals) - 1, var).shift(alpha)


def _y(rec: RecursionResult, var: str) -> LogSeries:
    return LogSeries({0: _series(rec.values(), rec.alpha, var)})


def _dy(rec: RecursionResult, var: str) -> LogSeries:
    y = _series(rec.values(), rec.alpha, var)
    return LogSeries({1: y, 0: _series(rec.derivs(1), rec.alpha, var)})


def _d2y(rec: RecursionResult, var: str) -> LogSeries:
    y = _series(rec.values(), rec.alpha, var)
    d1 = _series(rec.derivs(1), rec.alpha, var)
    return LogSeries({2: y, 1: d1.scale(2), 0: _series(rec.derivs(2), rec.alpha, var)})


def _div(a, b):
    return a * coeff_inverse(b)


@dataclass
class LocalStructure:
    exponents: LocalExponents
    tag: str
    basis: list  # three LogSeries
    witness: dict = field(default_factory=dict)
    branch: str = ""
    recursions: dict = field(default_factory=dict)


def classify(op: ThetaOperator, exponents: LocalExponents | None = None,
             n_max: int | None = None, choices: dict | None = None) -> LocalStructure:
    """Solution structure at the singular point, with an explicit basis."""
    if exponents is None:
        exponents = indicial_from_coeffs(op.indicial_coeffs()).exponents()
    k1, k2, k3 = exponents.as_tuple()
    if (k2 - k1).denominator != 1 or (k3 - k2).denominator != 1:
        raise ValueError("exponent differences must be integral")
    m1, m2 = exponents.m1, exponents.m2
    n_max = op.n_max if n_max is None else n_max
    choices = choices or {}
    v = op.var
    r3 = run_recursion(op, k3, n_max, choices.get(3))
    f3 = _f_jet(op, k3)
    f3p, f3pp = f3.v1, 2 * f3.v2
    recs = {3: r3}
    w: dict = {"f'(k3)": f3p, "f''(k3)": f3pp}

    if m1 == 0 and m2 == 0:
        basis = [_y(r3, v), _dy(r3, v), _d2y(r3, v)]
        return LocalStructure(exponents, COMPLETELY_NOT_APPARENT, basis, w, "equal", recs)

    if m2 == 0:
        r1 = run_recursion(op, k1, n_max, choices.get(1))
        recs[1] = r1
        R1 = r1.obstruction(m1)
        w["R_m1(k1)"] = R1
        if R1 == 0:
            basis = [_y(r3, v), _dy(r3, v), _y(r1, v)]
            return LocalStructure(exponents, NOT_APPARENT, basis, w, "upper_pair/vanishing", recs)
        third = _d2y(r3, v) - _y(r1, v).scale(_div(f3pp, R1))
        basis = [_y(r3, v), _dy(r3, v), third]
        return LocalStructure(exponents, COMPLETELY_NOT_APPARENT, basis, w, "upper_pair/obstructed", recs)

    r2 = run_recursion(op, k2, n_max, choices.get(2))
    recs[2] = r2
    R2, R2p = r2.obstruction(m2), r2.obstruction_deriv(m2)
    w["R_m2(k2)"] = R2
    w["R'_m2(k2)"] = R2p

    if m1 == 0:
        if R2 == 0:
            third = _dy(r2, v) - _dy(r3, v).scale(_div(R2p, f3p))
            basis = [_y(r3, v), _y(r2, v), third]
            return LocalStructure(exponents, NOT_APPARENT, basis, w, "lower_pair/vanishing", recs)
        second = _dy(r3, v) - _y(r2, v).scale(_div(f3p, R2))
        coef = _div(f3pp * R2 - 2 * f3p * R2p, R2 * R2)
        third = _d2y(r3, v) - _dy(r2, v).scale(_div(2 * f3p, R2)) - _y(r2, v).scale(coef)
        basis = [_y(r3, v), second, third]
        return LocalStructure(exponents, COMPLETELY_NOT_APPARENT, basis, w, "lower_pair/obstructed", recs)

    r1 = run_recursion(op, k1, n_max, choices.get(1))
    recs[1] = r1
    f2p = _f_jet(op, k2).v1
    R1 = r1.obstruction(m1)
    R12 = r1.obstruction(m1 + m2)
    w.update({"f'(k2)": f2p, "R_m1(k1)": R1, "R_m1+m2(k1)": R12})
    y1, y2, y3 = _y(r1, v), _y(r2, v), _y(r3, v)

    if R2 == 0:
        if R1 == 0 and R12 == 0:
            return LocalStructure(exponents, APPARENT, [y3, y2, y1], w, "distinct/split/apparent", recs)
        if R1 == 0:
            third = _dy(r3, v) - y1.scale(_div(f3p, R12))
            return LocalStructure(exponents, NOT_APPARENT, [y3, y2, third], w, "distinct/split/upper_log", recs)
        X = _div(R1 * R2p - f2p * R12, f3p * R1)
        third = _dy(r2, v) - y1.scale(_div(f2p, R1)) - _dy(r3, v).scale(X)
        return LocalStructure(exponents, NOT_APPARENT, [y3, y2, third], w, "distinct/split/lower_log", recs)

    second = _dy(r3, v) - y2.scale(_div(f3p, R2))
    if R1 == 0 and R12 == 0:
        return LocalStructure(exponents, NOT_APPARENT, [y3, second, y1], w, "distinct/log/free_lower", recs)
    if R1 == 0:
        third = y1 - y2.scale(_div(R12, R2))
        return LocalStructure(exponents, NOT_APPARENT, [y3, second, third], w, "distinct/log/combined_lower", recs)
    C1 = _div(2 * f3p * f2p, R2 * R1)
    C2 = _div(f3pp - _div(2 * f3p * R2p, R2) + _div(2 * f3p * f2p * R12, R2 * R1), R2)
    third = _d2y(r3, v) - _dy(r2, v).scale(_div(2 * f3p, R2)) + y1.scale(C1) - y2.scale(C2)
    return LocalStructure(exponents, COMPLETELY_NOT_APPARENT, [y3, second, third], w, "distinct/log/squared", recs)


def verify_basis(op: ThetaOperator, structure: LocalStructure) -> list[bool]:
    return [op.annihilates(y) for y in structure.basis]


# --------------------------------------------------------------------------
# cusp basis


@dataclass
class CuspBasis:
    structure: LocalStructure
    y_plus: QSeries
    Y_minus: LogSeries | None  # Lambda^2 y+ + Lambda u1 + u0
    Y_perp: LogSeries | None  # Lambda y+ + v0
    eta1: QSeries | None
    eta2: QSeries | None
    eta3: QSeries | None

    @property
    def normalized(self) -> bool:
        return self.Y_minus is not None


def _ccoef(s: QSeries, a) -> QSeries:
    return s.map_coeffs(lambda x: CPoly({0: x}) * a if x != 0 else 0)


def cusp_basis(op: ThetaOperator, n_max: int | None = None, choices: dict | None = None) -> CuspBasis:
    """(Y-, Y_perp, y+) at the cusp, with eta_j over CPoly (z = (c/2) Lambda)."""
    if op.kind != "cusp":
        raise ValueError("cusp_basis needs the cusp operator")
    st = classify(op, n_max=n_max, choices=choices)
    y_plus = st.basis[0].part(0)
    if st.tag != COMPLETELY_NOT_APPARENT:
        return CuspBasis(st, y_plus, None, None, None, None, None)
    ym, yp = st.basis[2], st.basis[1]
    lead = ym.part(2)
    # Lambda^2 coefficient is y(k3) exactly in every completely-not-apparent branch
    if not (lead - y_plus).is_zero():
        raise AssertionError("Lambda^2 part is not y+")
    if not (yp.part(1) - y_plus).is_zero():
        raise AssertionError("Lambda part of the second solution is not y+")
    zero = y_plus.scale(0)
    u1 = ym.part(1) if ym.part(1) is not None else zero
    u0 = ym.part(0) if ym.part(0) is not None else zero
    v0 = yp.part(0) if yp.part(0) is not None else zero
    c = CPoly({1: 1})
    eta1 = _ccoef(u1, c * Fraction(1, 2))
    eta2 = _ccoef(u0, c * c * Fraction(1, 4))
    eta3 = _ccoef(v0, c * Fraction(1, 2))
    return CuspBasis(st, y_plus, ym, yp, eta1, eta2, eta3)


# --------------------------------------------------------------------------
# synthetic operators with prescribed obstructions


def synthetic_operator(kappas: Sequence, vanish: Sequence = (), nonzero: Sequence = (),
                       n_max: int = 12, seed: int = 0, spread: int = 3) -> ThetaOperator:
    """Random small-integer operator with the given exponents.

    ``vanish`` lists (alpha, n) whose obstruction R_n(alpha) must be zero;
    the last free coefficients A_n, B_n are tuned to force this.  ``nonzero``
    lists (alpha, n) that must stay nonzero (the seed is advanced until so).
    """
    ks = sorted(as_rational(k) for k in kappas)
    e1 = sum(ks)
    e2 = ks[0] * ks[1] + ks[0] * ks[2] + ks[1] * ks[2]
    e3 = ks[0] * ks[1] * ks[2]
    if e1 == 3:
        kind, A0 = "interior", e2 - 2
    elif e1 == 0:
        kind, A0 = "cusp", e2
    else:
        raise ValueError("exponents must sum to 3 (interior) or 0 (cusp)")
    B0 = -e3
    vanish = [(as_rational(a), int(n)) for a, n in vanish]
    nonzero = [(as_rational(a), int(n)) for a, n in nonzero]
    for attempt in range(200):
        rng = random.Random(seed * 1000 + attempt)
        A = [A0] + [Fraction(rng.randint(-spread, spread)) for _ in range(n_max)]
        Bv = [B0] + [Fraction(rng.randint(-spread, spread)) for _ in range(n_max)]
        for n in sorted({n for _, n in vanish}):
            alphas = sorted({a for a, m in vanish if m == n})
            op = ThetaOperator.from_coeffs(kind, A, Bv)
            vals = [run_recursion(op, a, n).obstruction(n) for a in alphas]
            # R_n(alpha) depends on (A_n, B_n) through alpha*A_n + B_n
            if len(alphas) == 1:
                Bv[n] -= vals[0]
            elif len(alphas) == 2:
                (a1, a2), (v1, v2) = alphas, vals
                dA = -(v1 - v2) / (a1 - a2)
                dB = -v1 - a1 * dA
                A[n] += dA
                Bv[n] += dB
            else:
                raise ValueError("at most two obstructions can share an index")
        op = ThetaOperator.from_coeffs(kind, A, Bv)
        if all(run_recursion(op, a, n).obstruction(n) == 0 for a, n in vanish) and \
                all(run_recursion(op, a, n).obstruction(n) != 0 for a, n in nonzero):
            return op
    raise RuntimeError("could not build a synthetic operator with the requested obstructions")


def det3(rows: Sequence[Sequence[LogSeries]]) -> LogSeries:
    (a, b, c), (d, e, f), (g, h, i) = rows
    return (a * (e * i - f * h)) - (b * (d * i - f * g)) + (c * (d * h - e * g))
