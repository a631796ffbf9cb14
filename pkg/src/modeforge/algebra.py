"""Exact arithmetic foundation.

Rationals are ``fractions.Fraction`` (plain ``int`` is accepted wherever a
rational is).  On top of that this module provides

* ``CPoly``  Laurent polynomials in the formal constant c = 1/(pi i),
* ``MPoly``  sparse multivariate polynomials over Q with named variables,
* ``Frac``   quotients of ``MPoly``,
* ``QSeries`` truncated series in q^(1/N) with tracked validity,

plus a few exact linear-algebra helpers used across the package.
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Rational = Fraction

DEFAULT_ORDER = 64


def default_order() -> int:
    """Working q-order; the environment variable MODEFORGE_ORDER overrides 64."""
    raw = os.environ.get("MODEFORGE_ORDER")
    if raw is None or raw.strip() == "":
        return DEFAULT_ORDER
    value = int(raw)
    if value < 0:
        raise ValueError("MODEFORGE_ORDER must be non-negative")
    return value


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, CPoly) and x.is_scalar():
        return as_rational(x.scalar())
    if isinstance(x, MPoly) and x.is_constant():
        return x.constant_value()
    if isinstance(x, Frac) and x.is_constant():
        return x.constant_value()
    raise TypeError(f"not a rational: {x!r}")


def is_rational(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _simplify(x):
    if type(x) is Fraction and x.denominator == 1:
        return x.numerator
    return x


def fmt_rational(x) -> str:
    x = as_rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def coeff_inverse(x):
    """Multiplicative inverse of a coefficient-ring element."""
    if is_rational(x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return Fraction(1) / x
    if isinstance(x, (CPoly, MPoly, Frac)):
        return x.inv()
    # foreign field elements (sympy fraction fields)
    return 1 / x


# --------------------------------------------------------------------------
# Laurent polynomials in c = 1/(pi i)


class CPoly:
    """Laurent polynomial in the transcendental symbol c = 1/(pi i)."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        t = {}
        if terms:
            for p, v in terms.items():
                if v != 0:
                    t[int(p)] = _simplify(as_rational(v))
        self.terms = t

    @classmethod
    def monomial(cls, coeff, power: int) -> "CPoly":
        return cls({power: coeff})

    @staticmethod
    def _lift(x):
        if isinstance(x, CPoly):
            return x
        if is_rational(x):
            return CPoly({0: x})
        return None

    def is_scalar(self) -> bool:
        return all(p == 0 for p in self.terms)

    def scalar(self):
        if not self.is_scalar():
            raise ValueError(f"{self} is not c-free")
        return self.terms.get(0, 0)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def powers(self) -> list[int]:
        return sorted(self.terms)

    def coeff(self, power: int):
        return self.terms.get(power, 0)

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        t = dict(self.terms)
        for p, v in o.terms.items():
            t[p] = t.get(p, 0) + v
        return CPoly(t)

    __radd__ = __add__

    def __neg__(self):
        return CPoly({p: -v for p, v in self.terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if is_rational(other):
            if other == 0:
                return CPoly()
            return CPoly({p: v * other for p, v in self.terms.items()})
        if not isinstance(other, CPoly):
            return NotImplemented
        t: dict = {}
        for p, v in self.terms.items():
            for q, w in other.terms.items():
                t[p + q] = t.get(p + q, 0) + v * w
        return CPoly(t)

    __rmul__ = __mul__

    def inv(self) -> "CPoly":
        if len(self.terms) != 1:
            raise ValueError(f"only monomials in c are invertible, got {self}")
        (p, v), = self.terms.items()
        return CPoly({-p: Fraction(1) / v})

    def __truediv__(self, other):
        if is_rational(other):
            return self * (Fraction(1) / other)
        if isinstance(other, CPoly):
            return self * other.inv()
        return NotImplemented

    def __rtruediv__(self, other):
        if is_rational(other):
            return self.inv() * other
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        out = CPoly({0: 1})
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        return f"CPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for p in sorted(self.terms):
            v = fmt_rational(self.terms[p])
            if p == 0:
                parts.append(v)
            elif p == 1:
                parts.append(f"{v}*c")
            else:
                parts.append(f"{v}*c^{p}")
        return " + ".join(parts)


c = CPoly({1: 1})


# --------------------------------------------------------------------------
# sparse multivariate polynomials


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted((v, e) for v, e in d.items() if e))


class MPoly:
    """Sparse polynomial over Q in named variables.

    Monomials are sorted tuples of (variable, exponent) pairs, so polynomials
    over different variable lists combine without an explicit ring object.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        t = {}
        if terms:
            for m, v in terms.items():
                if v != 0:
                    t[tuple(m)] = _simplify(as_rational(v))
        self.terms = t

    @classmethod
    def var(cls, name: str) -> "MPoly":
        return cls({((name, 1),): 1})

    @classmethod
    def const(cls, x) -> "MPoly":
        return cls({(): x})

    @staticmethod
    def _lift(x):
        if isinstance(x, MPoly):
            return x
        if is_rational(x):
            return MPoly({(): x})
        return None

    def variables(self) -> list[str]:
        vs = set()
        for m in self.terms:
            for v, _ in m:
                vs.add(v)
        return sorted(vs)

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return Fraction(self.terms.get((), 0))

    def degree(self, variables: Iterable[str] | None = None) -> int:
        """Total degree in the given variables (all variables by default); -1 for 0."""
        if not self.terms:
            return -1
        vs = None if variables is None else set(variables)
        best = 0
        for m in self.terms:
            d = sum(e for v, e in m if vs is None or v in vs)
            best = max(best, d)
        return best

    def leading_form(self, variables: Iterable[str]) -> "MPoly":
        """Sum of the terms of top total degree in ``variables``."""
        vs = set(variables)
        d = self.degree(vs)
        return MPoly({m: v for m, v in self.terms.items()
                      if sum(e for x, e in m if x in vs) == d})

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        t = dict(self.terms)
        for m, v in o.terms.items():
            t[m] = t.get(m, 0) + v
        return MPoly(t)

    __radd__ = __add__

    def __neg__(self):
        return MPoly({m: -v for m, v in self.terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if is_rational(other):
            if other == 0:
                return MPoly()
            return MPoly({m: v * other for m, v in self.terms.items()})
        if not isinstance(other, MPoly):
            return NotImplemented
        t: dict = {}
        for m1, v1 in self.terms.items():
            for m2, v2 in other.terms.items():
                m = _mono_mul(m1, m2)
                t[m] = t.get(m, 0) + v1 * v2
        return MPoly(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of MPoly")
        out = MPoly({(): 1})
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inv(self):
        if self.is_constant() and self.terms:
            return MPoly({(): Fraction(1) / self.constant_value()})
        return Frac(MPoly({(): 1}), self)

    def __truediv__(self, other):
        if is_rational(other):
            return self * (Fraction(1) / other)
        if isinstance(other, MPoly):
            if other.is_constant():
                return self * (Fraction(1) / other.constant_value())
            return Frac(self, other)
        return NotImplemented

    def __rtruediv__(self, other):
        if is_rational(other):
            return Frac(MPoly.const(other), self)
        return NotImplemented

    def subs(self, assignment: dict):
        """Substitute values (rationals, MPoly or Frac) for some variables."""
        out = 0
        for m, v in self.terms.items():
            term = v
            rest = []
            for x, e in m:
                if x in assignment:
                    term = term * (assignment[x] ** e)
                else:
                    rest.append((x, e))
            if rest:
                term = term * MPoly({tuple(rest): 1})
            out = out + term
        if is_rational(out):
            return MPoly.const(out)
        return out

    def evaluate(self, assignment: dict):
        val = self.subs(assignment)
        if isinstance(val, (MPoly, Frac)) and val.is_constant():
            return val.constant_value()
        return val

    def coefficient(self, monomial: dict) -> Fraction:
        key = tuple(sorted((v, e) for v, e in monomial.items() if e))
        return Fraction(self.terms.get(key, 0))

    def __eq__(self, other):
        if isinstance(other, Frac):
            return other == self
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        def key(item):
            m = item[0]
            return (-sum(e for _, e in m), m)
        return sorted(self.terms.items(), key=key)

    def __repr__(self):
        return f"MPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, v in self.sorted_terms():
            mono = "*".join(x if e == 1 else f"{x}^{e}" for x, e in m)
            coef = fmt_rational(v)
            if not mono:
                parts.append(coef)
            elif v == 1:
                parts.append(mono)
            elif v == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{coef}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


# --------------------------------------------------------------------------
# fractions of multivariate polynomials


def _to_sympy_ring(polys: Sequence[MPoly]):
    from sympy import QQ
    from sympy.polys.rings import ring

    names = sorted({v for p in polys for v in p.variables()})
    if not names:
        names = ["_z"]
    R, *_ = ring(",".join(names), QQ)
    idx = {n: i for i, n in enumerate(names)}
    out = []
    for p in polys:
        d = {}
        for m, v in p.terms.items():
            e = [0] * len(names)
            for x, k in m:
                e[idx[x]] = k
            v = Fraction(v)
            d[tuple(e)] = QQ(v.numerator, v.denominator)
        out.append(R.from_dict(d) if d else R.zero)
    return names, out


def _from_sympy(names, p) -> MPoly:
    t = {}
    for e, v in p.terms():
        m = tuple(sorted((names[i], k) for i, k in enumerate(e) if k))
        t[m] = Fraction(int(v.numerator), int(v.denominator))
    return MPoly(t)


class Frac:
    """Quotient of two ``MPoly``; equality by cross-multiplication.

    Construction cancels the gcd (via sympy's sparse polynomial rings) and
    makes the denominator's leading coefficient 1, so representations are
    canonical.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1, normalize: bool = True):
        num = MPoly._lift(num) if not isinstance(num, MPoly) else num
        den = MPoly._lift(den) if not isinstance(den, MPoly) else den
        if num is None or den is None:
            raise TypeError("Frac needs MPoly or rational parts")
        if not den:
            raise ZeroDivisionError("zero denominator")
        if normalize:
            num, den = self._normalize(num, den)
        self.num = num
        self.den = den

    @staticmethod
    def _normalize(num: MPoly, den: MPoly):
        if not num:
            return MPoly(), MPoly.const(1)
        if den.is_constant():
            return num * (Fraction(1) / den.constant_value()), MPoly.const(1)
        names, (pn, pd) = _to_sympy_ring([num, den])
        _, cn, cd = pn.cofactors(pd)
        lc = cd.LC
        num2 = _from_sympy(names, cn)
        den2 = _from_sympy(names, cd)
        lc = Fraction(int(lc.numerator), int(lc.denominator))
        return num2 * (1 / lc), den2 * (1 / lc)

    @staticmethod
    def _lift(x):
        if isinstance(x, Frac):
            return x
        if isinstance(x, MPoly):
            return Frac(x, 1, normalize=False)
        if is_rational(x):
            return Frac(MPoly.const(x), 1, normalize=False)
        return None

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_mpoly(self) -> MPoly:
        if not self.den.is_constant():
            raise ValueError(f"{self} is not a polynomial")
        return self.num * (1 / self.den.constant_value())

    def variables(self) -> list[str]:
        return sorted(set(self.num.variables()) | set(self.den.variables()))

    def __bool__(self):
        return bool(self.num)

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return Frac(self.num + o.num, self.den)
        return Frac(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return Frac(-self.num, self.den, normalize=False)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if is_rational(other):
            return Frac(self.num * other, self.den, normalize=False) if other else Frac(0)
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Frac(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inv(self) -> "Frac":
        if not self.num:
            raise ZeroDivisionError("inverse of zero fraction")
        return Frac(self.den, self.num)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inv()

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        return Frac(self.num ** n, self.den ** n, normalize=False)

    def subs(self, assignment: dict):
        return self.num.subs(assignment) / self.den.subs(assignment)

    def evaluate(self, assignment: dict):
        val = self.subs(assignment)
        if isinstance(val, (MPoly, Frac)) and val.is_constant():
            return val.constant_value()
        return val

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.num * o.den == o.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"Frac({self})"

    def __str__(self):
        if self.den.is_constant():
            return str(self.num)
        return f"({self.num})/({self.den})"


# --------------------------------------------------------------------------
# convolution kernels


def _kind(xs: Sequence) -> str:
    k = "q"
    for x in xs:
        t = type(x)
        if t is int or t is Fraction:
            continue
        if t is CPoly:
            k = "c"
            continue
        return "g"
    return k


def _kron(a: list[int], b: list[int], n: int) -> list[int]:
    """First n coefficients of the integer polynomial product a*b.

    Kronecker substitution: pack both operands into one big integer each,
    multiply once, and unpack with signed digits.
    """
    la, lb = len(a), len(b)
    if la * lb <= 256:
        out = [0] * n
        for i, x in enumerate(a):
            if x:
                for j in range(min(lb, n - i)):
                    out[i + j] += x * b[j]
        return out
    ma = max(abs(x) for x in a)
    mb = max(abs(x) for x in b)
    if ma == 0 or mb == 0:
        return [0] * n
    bits = (ma * mb * min(la, lb)).bit_length() + 2
    A = 0
    for x in reversed(a):
        A = (A << bits) + x
    B = 0
    for x in reversed(b):
        B = (B << bits) + x
    P = A * B
    mask = (1 << bits) - 1
    half = 1 << (bits - 1)
    out = []
    for _ in range(n):
        low = P & mask
        if low >= half:
            low -= 1 << bits
        out.append(low)
        P = (P - low) >> bits
    return out


def _common_den(xs: Sequence) -> tuple[list[int], int]:
    d = 1
    for x in xs:
        if type(x) is Fraction and x.denominator != 1:
            d = lcm(d, x.denominator)
    if d == 1:
        return [int(x) if type(x) is int else x.numerator for x in xs], 1
    return [x * d if type(x) is int else x.numerator * (d // x.denominator) for x in xs], d


def _conv_rational(a, b, n):
    ai, da = _common_den(a)
    bi, db = _common_den(b)
    prod = _kron(ai, bi, n)
    d = da * db
    if d == 1:
        return prod
    return [_simplify(Fraction(v, d)) for v in prod]


def _c_split(xs) -> dict:
    comps: dict = {}
    n = len(xs)
    for k, x in enumerate(xs):
        if type(x) is CPoly:
            for p, v in x.terms.items():
                comps.setdefault(p, [0] * n)[k] = v
        elif x != 0:
            comps.setdefault(0, [0] * n)[k] = x
    return comps


def _c_join(comps: dict, n: int) -> list:
    out = []
    for k in range(n):
        out.append(CPoly({p: v[k] for p, v in comps.items() if v[k] != 0}))
    return out


def _conv(a: Sequence, b: Sequence, n: int) -> list:
    a = list(a[:n])
    b = list(b[:n])
    if n <= 0:
        return []
    if not a or not b:
        return [0] * n
    ka, kb = _kind(a), _kind(b)
    if ka == "q" and kb == "q":
        out = _conv_rational(a, b, n)
        return out + [0] * (n - len(out))
    if ka != "g" and kb != "g":
        ca, cb = _c_split(a), _c_split(b)
        comps: dict = {}
        for p, xa in ca.items():
            for q, xb in cb.items():
                prod = _conv_rational(xa, xb, n)
                acc = comps.get(p + q)
                if acc is None:
                    comps[p + q] = list(prod)
                else:
                    for k, v in enumerate(prod):
                        if v:
                            acc[k] = acc[k] + v
        return _c_join(comps, n)
    out = [0] * n
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j in range(min(len(b), n - i)):
            y = b[j]
            if y == 0:
                continue
            out[i + j] = out[i + j] + x * y
    return out


def _inv_list(a: Sequence, n: int) -> list:
    """First n coefficients of 1/a for a power series a with invertible a[0]."""
    if n <= 0:
        return []
    a = list(a[:n]) + [0] * max(0, n - len(a))
    kind = _kind(a)
    if kind == "c":
        comps = _c_split(a)
        if len(comps) == 1:
            (p, xs), = comps.items()
            inv = _inv_list(xs, n)
            return [CPoly({-p: v}) for v in inv]
    if kind == "q":
        # Newton iteration b <- b(2 - ab), doubling the known length
        b = [Fraction(1) / Fraction(a[0])]
        m = 1
        while m < n:
            m = min(2 * m, n)
            ab = _conv(a[:m], b, m)
            corr = [-x for x in ab]
            corr[0] = corr[0] + 2
            b = _conv(b, corr, m)
        return [_simplify(x) if type(x) is Fraction else x for x in b]
    b0 = coeff_inverse(a[0])
    b = [b0]
    for k in range(1, n):
        s = 0
        for i in range(1, k + 1):
            if a[i] != 0:
                s = s + a[i] * b[k - i]
        b.append(-(b0 * s))
    return b


# --------------------------------------------------------------------------
# truncated q-series


def _min_prec(*ps):
    vals = [p for p in ps if p is not None]
    return min(vals) if vals else None


class QSeries:
    """Truncated series in q^(1/N).

    ``coeffs[k]`` is the coefficient of q^((start + k)/N).  ``prec`` is the
    numerator (over N) of the last exponent known to be correct, or ``None``
    for an exact finite expansion.  Coefficients may be rationals, ``CPoly``,
    ``MPoly`` or ``Frac``.
    """

    __slots__ = ("N", "start", "coeffs", "prec", "var")

    def __init__(self, coeffs: Sequence = (), start: int = 0, N: int = 1,
                 prec: int | None = None, var: str = "q"):
        if N <= 0:
            raise ValueError("exponent denominator must be positive")
        cs = [_simplify(x) if type(x) is Fraction else x for x in coeffs]
        if prec is None:
            while cs and cs[-1] == 0:
                cs.pop()
        else:
            n = max(prec - start + 1, 0)
            if len(cs) > n:
                cs = cs[:n]
            elif len(cs) < n:
                cs = cs + [0] * (n - len(cs))
        self.N = N
        self.start = start
        self.coeffs = cs
        self.prec = prec
        self.var = var

    # construction helpers -------------------------------------------------

    @classmethod
    def from_terms(cls, terms: dict, valid=None, var: str = "q") -> "QSeries":
        """Build from {exponent: coefficient}; ``valid`` is an exponent or None."""
        exps = [as_rational(e) for e in terms]
        N = 1
        for e in exps:
            N = lcm(N, e.denominator)
        if valid is not None:
            N = lcm(N, as_rational(valid).denominator)
        nums = {int(e * N): v for e, v in zip(exps, terms.values())}
        prec = None if valid is None else int(as_rational(valid) * N)
        if not nums:
            start = 0 if prec is None else min(0, prec)
            return cls([], start, N, prec, var)
        start = min(nums)
        if prec is not None and prec < start:
            start = prec
        top = max(nums) if prec is None else prec
        cs = [nums.get(k, 0) for k in range(start, top + 1)]
        return cls(cs, start, N, prec, var)

    @classmethod
    def constant(cls, value, valid=None, var: str = "q") -> "QSeries":
        return cls.from_terms({0: value}, valid, var)

    @classmethod
    def monomial(cls, value, exponent, valid=None, var: str = "q") -> "QSeries":
        return cls.from_terms({as_rational(exponent): value}, valid, var)

    # basic data -------------------------------------------------------------

    @property
    def e0(self) -> Fraction:
        return Fraction(self.start, self.N)

    @property
    def valid(self) -> Fraction | None:
        return None if self.prec is None else Fraction(self.prec, self.N)

    def is_exact(self) -> bool:
        return self.prec is None

    def __len__(self):
        return len(self.coeffs)

    def exponent(self, k: int) -> Fraction:
        return Fraction(self.start + k, self.N)

    def terms(self):
        for k, x in enumerate(self.coeffs):
            if x != 0:
                yield Fraction(self.start + k, self.N), x

    def coeff(self, e):
        e = as_rational(e)
        num = e * self.N
        if num.denominator != 1:
            return 0
        k = int(num) - self.start
        if self.prec is not None and int(num) > self.prec:
            raise ValueError(f"coefficient of q^{e} requested beyond validity {self.valid}")
        if k < 0 or k >= len(self.coeffs):
            return 0
        return self.coeffs[k]

    def __getitem__(self, e):
        return self.coeff(e)

    def leading(self):
        """(exponent, coefficient) of the first nonzero known term, or None."""
        for k, x in enumerate(self.coeffs):
            if x != 0:
                return Fraction(self.start + k, self.N), x
        return None

    def valuation(self) -> Fraction | None:
        lead = self.leading()
        return None if lead is None else lead[0]

    def strip(self) -> "QSeries":
        """Drop leading zero coefficients (keeps validity)."""
        k = 0
        while k < len(self.coeffs) and self.coeffs[k] == 0:
            k += 1
        if k == 0:
            return self
        if k == len(self.coeffs):
            return self
        return QSeries(self.coeffs[k:], self.start + k, self.N, self.prec, self.var)

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coeffs)

    def regrid(self, N2: int) -> "QSeries":
        if N2 == self.N:
            return self
        if N2 % self.N:
            raise ValueError("new exponent denominator must be a multiple")
        s = N2 // self.N
        cs = [0] * ((len(self.coeffs) - 1) * s + 1) if self.coeffs else []
        for k, x in enumerate(self.coeffs):
            cs[k * s] = x
        prec = None if self.prec is None else self.prec * s
        return QSeries(cs, self.start * s, N2, prec, self.var)

    def truncate(self, valid) -> "QSeries":
        """Lower the validity to the exponent ``valid``."""
        v = as_rational(valid)
        N = lcm(self.N, v.denominator)
        s = self.regrid(N)
        p = int(v * N)
        if s.prec is not None and p > s.prec:
            p = s.prec
        return QSeries(s.coeffs, s.start, N, p, self.var)

    def with_var(self, var: str) -> "QSeries":
        return QSeries(self.coeffs, self.start, self.N, self.prec, var)

    def map_coeffs(self, fn) -> "QSeries":
        return QSeries([fn(x) for x in self.coeffs], self.start, self.N, self.prec, self.var)

    def _finite_prec(self, extra: int | None = None) -> int:
        if self.prec is not None:
            return self.prec
        order = default_order() if extra is None else extra
        return self.start + order * self.N

    # arithmetic -------------------------------------------------------------

    @staticmethod
    def _unify(a: "QSeries", b: "QSeries"):
        if a.N == b.N:
            return a, b
        N = lcm(a.N, b.N)
        return a.regrid(N), b.regrid(N)

    def _add(self, other: "QSeries", sign: int) -> "QSeries":
        a, b = self._unify(self, other)
        start = min(a.start, b.start)
        prec = _min_prec(a.prec, b.prec)
        if prec is None:
            top = max(a.start + len(a.coeffs), b.start + len(b.coeffs)) - 1
        else:
            top = prec
        n = max(top - start + 1, 0)
        cs = [0] * n
        for k, x in enumerate(a.coeffs):
            i = a.start + k - start
            if i < n:
                cs[i] = x
        for k, x in enumerate(b.coeffs):
            i = b.start + k - start
            if i < n and x != 0:
                try:
                    cs[i] = cs[i] + x if sign > 0 else cs[i] - x
                except TypeError as exc:
                    raise ValueError("coefficient ring mismatch") from exc
        return QSeries(cs, start, a.N, prec, self.var)

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other)
        return self._add(other, 1)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other)
        return self._add(other, -1)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return self.map_coeffs(lambda x: -x)

    def scale(self, s) -> "QSeries":
        if is_rational(s) and s == 0:
            return QSeries([], self.start, self.N, self.prec, self.var)
        try:
            return self.map_coeffs(lambda x: x * s if x != 0 else x)
        except TypeError as exc:
            raise ValueError("coefficient ring mismatch") from exc

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        a, b = self._unify(self, other)
        start = a.start + b.start
        pa = None if a.prec is None else a.prec + b.start
        pb = None if b.prec is None else b.prec + a.start
        prec = _min_prec(pa, pb)
        if prec is None:
            n = len(a.coeffs) + len(b.coeffs) - 1 if a.coeffs and b.coeffs else 0
        else:
            n = max(prec - start + 1, 0)
        try:
            cs = _conv(a.coeffs, b.coeffs, n)
        except TypeError as exc:
            raise ValueError("coefficient ring mismatch") from exc
        return QSeries(cs, start, a.N, prec, self.var)

    def __rmul__(self, other):
        return self.scale(other)

    def shift(self, exponent) -> "QSeries":
        """Multiply by q^exponent."""
        e = as_rational(exponent)
        N = lcm(self.N, e.denominator)
        s = self.regrid(N)
        d = int(e * N)
        return QSeries(s.coeffs, s.start + d, N, None if s.prec is None else s.prec + d, self.var)

    def inv(self, order: int | None = None) -> "QSeries":
        """Multiplicative inverse; exact inputs are expanded ``order`` steps."""
        s = self.strip()
        if not s.coeffs or s.coeffs[0] == 0:
            raise ValueError("series has no invertible leading coefficient within its validity")
        try:
            coeff_inverse(s.coeffs[0])
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"non-invertible leading coefficient {s.coeffs[0]}") from exc
        prec = s._finite_prec(order)
        rel = prec - s.start
        new_prec = -s.start + rel
        cs = _inv_list(s.coeffs, rel + 1)
        return QSeries(cs, -s.start, s.N, new_prec, self.var)

    def __truediv__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(coeff_inverse(other))
        o = other.strip()
        if o.is_exact() and len(o.coeffs) == 1:
            lead = o.leading()
            return self.shift(-lead[0]).scale(coeff_inverse(lead[1]))
        if self.is_exact() or not o.is_exact():
            return self * o.inv()
        # exact divisor: expand its inverse as far as the numerator is valid
        a, b = self._unify(self, o)
        need = max(a.prec - a.start, 0)
        return a * b.inv(order=-(-need // b.N))

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, r):
        if isinstance(r, int):
            if r == 0:
                return QSeries.constant(1, var=self.var)
            if r < 0:
                return self.inv() ** (-r)
            out = None
            base = self
            n = r
            while n:
                if n & 1:
                    out = base if out is None else out * base
                n >>= 1
                if n:
                    base = base * base
            return out
        r = as_rational(r)
        if r.denominator == 1:
            return self ** int(r)
        return self.pow_rational(r)

    def pow_rational(self, r, order: int | None = None) -> "QSeries":
        """Formal power for a unit-normalized series (leading coefficient 1)."""
        r = as_rational(r)
        s = self.strip()
        if not s.coeffs:
            raise ValueError("power of a series with no known nonzero term")
        if s.coeffs[0] != 1:
            raise ValueError("series_pow_rational needs leading coefficient 1; extract the scale first")
        if r == 0:
            return QSeries.constant(1, var=self.var).truncate(Fraction(s._finite_prec(order) - s.start, s.N))
        prec = s._finite_prec(order)
        rel = prec - s.start
        a = s.coeffs[: rel + 1] + [0] * max(0, rel + 1 - len(s.coeffs))
        b = [Fraction(1)]
        for k in range(1, rel + 1):
            acc = 0
            for j in range(1, k + 1):
                if a[j] != 0:
                    acc = acc + a[j] * b[k - j] * ((r + 1) * j - k)
            b.append(acc * Fraction(1, k) if acc != 0 else 0)
        lead = r * s.e0
        N2 = lcm(s.N, lead.denominator)
        body = QSeries(b, 0, s.N, rel, self.var).regrid(N2)
        return body.shift(lead)

    def dq(self) -> "QSeries":
        """q d/dq applied termwise."""
        cs = []
        for k, x in enumerate(self.coeffs):
            e = Fraction(self.start + k, self.N)
            cs.append(x * e if x != 0 and e != 0 else 0)
        return QSeries(cs, self.start, self.N, self.prec, self.var)

    def ddx(self) -> "QSeries":
        """Ordinary derivative in the series variable."""
        d = self.dq()
        return d.shift(-1)

    # comparison -------------------------------------------------------------

    def agrees(self, other, through=None) -> bool:
        """Equality on the common range of validity (optionally capped)."""
        if not isinstance(other, QSeries):
            other = QSeries.constant(other)
        diff = self - other
        if through is not None:
            diff = diff.truncate(through)
        return diff.is_zero()

    def __eq__(self, other):
        if isinstance(other, QSeries) or is_rational(other) or isinstance(other, (CPoly, MPoly, Frac)):
            try:
                return self.agrees(other)
            except ValueError:
                return False
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        v = "exact" if self.prec is None else f"valid through {self.var}^{fmt_rational(self.valid)}"
        return f"QSeries({self.to_text(8)}; {v})"

    def to_text(self, max_terms: int | None = None) -> str:
        parts = []
        for e, x in self.terms():
            parts.append((e, x))
        if max_terms is not None and len(parts) > max_terms:
            parts = parts[:max_terms]
            tail = True
        else:
            tail = False
        out = ""
        for idx, (e, x) in enumerate(parts):
            mono = _fmt_mono(self.var, e)
            if is_rational(x):
                neg = x < 0
                mag = -x if neg else x
                cs = fmt_rational(mag)
                body = cs if not mono else (mono if mag == 1 else cs + mono)
            else:
                neg = False
                body = f"({x})" + (("*" + mono) if mono else "")
            if idx == 0:
                out = ("-" if neg else "") + body
            else:
                out += (" - " if neg else " + ") + body
        if not out:
            out = "0"
        if tail:
            out += " + ..."
        return out

    def __str__(self):
        return self.to_text()


def _fmt_mono(var: str, e: Fraction) -> str:
    if e == 0:
        return ""
    if e == 1:
        return var
    return f"{var}^{fmt_rational(e)}" if e.denominator == 1 and e > 0 else f"{var}^({fmt_rational(e)})"


def series_mul(a: QSeries, b: QSeries) -> QSeries:
    return a * b


def series_inv(a: QSeries, order: int | None = None) -> QSeries:
    return a.inv(order)


def series_pow_rational(a: QSeries, r, order: int | None = None) -> QSeries:
    return a.pow_rational(r, order)


def series_dq(a: QSeries) -> QSeries:
    return a.dq()


# --------------------------------------------------------------------------
# exact linear algebra over fields (rationals, Frac)


def rref(rows: list[list]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for col in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = coeff_inverse(m[r][col])
        m[r] = [x * inv if x != 0 else x for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m, pivots


def nullspace(rows: list[list], ncols: int | None = None) -> list[list]:
    if not rows:
        n = ncols or 0
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    m, pivots = rref(rows)
    n = len(rows[0])
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for fcol in free:
        v = [0] * n
        v[fcol] = 1
        for i, pcol in enumerate(pivots):
            v[pcol] = -m[i][fcol]
        basis.append(v)
    return basis


def solve_linear(rows: list[list], rhs: list) -> tuple[list | None, list[list]]:
    """Solve rows * x = rhs exactly.

    Returns (particular solution or None when inconsistent, nullspace basis).
    """
    n = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    m, pivots = rref(aug)
    if n in pivots:
        return None, []
    x = [0] * n
    for i, pcol in enumerate(pivots):
        x[pcol] = m[i][n]
    return x, nullspace(rows, n)


def rational_roots(coeffs: Sequence) -> list[tuple[Fraction, int]]:
    """Rational roots with multiplicity of sum coeffs[k] x^k (exact)."""
    from sympy import Poly, QQ, Rational as SR, symbols

    x = symbols("x")
    cs = [as_rational(v) for v in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return []
    p = Poly([SR(v.numerator, v.denominator) for v in reversed(cs)], x, domain=QQ)
    out = []
    for fac, mult in p.factor_list()[1]:
        if fac.degree() == 1:
            a, b = fac.all_coeffs()
            root = -Fraction(int(b.p), int(b.q)) / Fraction(int(a.p), int(a.q))
            out.append((root, mult))
    out.sort()
    return out


def poly_from_roots(roots: Iterable) -> list[Fraction]:
    """Coefficients (low to high) of prod (x - r)."""
    p = [Fraction(1)]
    for r in roots:
        r = as_rational(r)
        q = [Fraction(0)] * (len(p) + 1)
        for i, v in enumerate(p):
            q[i + 1] += v
            q[i] -= r * v
        p = q
    return p
