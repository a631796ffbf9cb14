"""Apparentness obstructions for MODEs with prescribed exponents.

Given exponents at the cusp, i, rho and m generic points z_j (with
t_j = E4^3/E6^2 at z_j), the indicial equations fix r_inf, s_inf, r_i, s_i3,
r_rho, s_rho and r_zj_2, s_zj_3.  The remaining 3m+1 parameters

    s_i1, r_zj_1, s_zj_2, s_zj_1

must make every interior point apparent.  At a point with exponents
k1 < k2 < k3 and alpha = k_a the recursion

    f(alpha+n) c_n + sum_{k<n} [(alpha+k) a_(n-k-2) + b_(n-k-3)] c_k = 0

stalls at n' = k_b - k_a, where the sum itself must vanish: that sum is the
obstruction polynomial P_(a,b).  For (1,3) the free slot at n = k2 - k1 is 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import Frac, MPoly, as_rational, is_rational
from .frobenius import LocalExponents, ThetaOperator
from .modforms import ansatz_q, ansatz_r
from .taylor import POINT_I, POINT_RHO, PointClass, generic_point, local_ode_data

DIFFERENCE_CAP = 30
PAIRS = ((1, 2), (1, 3), (2, 3))
REGULAR = LocalExponents(Fraction(0), Fraction(1), Fraction(2))


class SpecError(ValueError):
    pass


def _exps(x) -> LocalExponents:
    if isinstance(x, LocalExponents):
        return x
    a, b, c = sorted(as_rational(v) for v in x)
    return LocalExponents(a, b, c)


def _sym(k: LocalExponents):
    e2 = k.k1 * k.k2 + k.k1 * k.k3 + k.k2 * k.k3
    e3 = k.k1 * k.k2 * k.k3
    return k.k1 + k.k2 + k.k3, e2, e3


@dataclass
class ExponentSpec:
    inf: LocalExponents
    i: LocalExponents = REGULAR
    rho: LocalExponents = REGULAR
    points: tuple = ()  # ((t, LocalExponents), ...)

    def __post_init__(self):
        self.inf = _exps(self.inf)
        self.i = _exps(self.i)
        self.rho = _exps(self.rho)
        self.points = tuple((t if isinstance(t, str) else as_rational(t), _exps(k)) for t, k in self.points)

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def ts(self) -> tuple:
        return tuple(t for t, _ in self.points)

    @property
    def i_congruence(self) -> bool:
        """{3 kappa_i} = {0, 0, 1} mod 2."""
        return sorted(int(3 * k) % 2 for k in _list(self.i)) == [0, 0, 1]

    @property
    def rho_congruence(self) -> bool:
        """{kappa_rho} = {0, 1, 2} mod 3."""
        return sorted(int(k) % 3 for k in _list(self.rho)) == [0, 1, 2]

    def structural_errors(self) -> list[str]:
        errs = []
        if sum(_list(self.inf)) != 0:
            errs.append("cusp exponents must sum to 0")
        for name, k in [("i", self.i), ("rho", self.rho)] + [(f"t={t}", k) for t, k in self.points]:
            ks = _list(k)
            if sum(ks) != 3:
                errs.append(f"exponents at {name} must sum to 3")
            if any((3 * x).denominator != 1 for x in ks):
                errs.append(f"exponents at {name} must lie in (1/3)Z")
            if any((ks[j + 1] - ks[j]).denominator != 1 for j in range(2)):
                errs.append(f"exponent differences at {name} must be integers")
        for x in _list(self.inf):
            if (3 * x).denominator != 1:
                errs.append("cusp exponents must lie in (1/3)Z")
                break
        if any((b - a).denominator != 1 for a, b in zip(_list(self.inf), _list(self.inf)[1:])):
            errs.append("cusp exponent differences must be integers")
        if any(k.k1 != int(k.k1) for k in (self.rho,)):
            errs.append("exponents at rho must be integers")
        return errs

    def violations(self) -> list[str]:
        out = list(self.structural_errors())
        if not self.i_congruence:
            out.append("{3 kappa_i} is not {0,0,1} mod 2")
        if not self.rho_congruence:
            out.append("{kappa_rho} is not {0,1,2} mod 3")
        return out


def _list(k: LocalExponents) -> list:
    return [k.k1, k.k2, k.k3]


@dataclass
class AnsatzParams:
    fixed: dict
    free: list
    ts: tuple
    flags: dict = field(default_factory=dict)  # congruence name -> bool

    def q_terms(self) -> list:
        return [(self._value(p), g) for p, g in ansatz_q(self.ts)]

    def r_terms(self) -> list:
        return [(self._value(p), g) for p, g in ansatz_r(self.ts)]

    def _value(self, p: MPoly):
        name = str(p)
        if name in self.fixed:
            return self.fixed[name]
        return p


def fix_indicial(spec: ExponentSpec, strict: bool = True) -> AnsatzParams:
    """Indicial parameters from the exponents; congruence checks only when strict."""
    errs = spec.structural_errors()
    if errs:
        raise SpecError("; ".join(errs))
    flags = {"i_congruence": spec.i_congruence, "rho_congruence": spec.rho_congruence}
    if strict:
        for name, ok in flags.items():
            if not ok:
                raise SpecError(f"violated congruence: {name}")
    fixed = {}
    _, e2, e3 = _sym(spec.inf)
    fixed["r_inf"], fixed["s_inf"] = e2, -e3
    _, e2, e3 = _sym(spec.i)
    r = (e2 - 2) / 4
    fixed["r_i"], fixed["s_i3"] = r, (e3 - 4 * r) / 8
    _, e2, e3 = _sym(spec.rho)
    r = (2 - e2) / 9
    fixed["r_rho"], fixed["s_rho"] = r, (-e3 - 9 * r) / 27
    free = ["s_i1"]
    for j, (t, k) in enumerate(spec.points, 1):
        tv = MPoly.var(t) if isinstance(t, str) else t
        _, e2, e3 = _sym(k)
        r = tv * (e2 - 2)
        fixed[f"r_z{j}_2"] = r
        fixed[f"s_z{j}_3"] = tv * tv * (-e3) + r * tv
        free += [f"r_z{j}_1", f"s_z{j}_2", f"s_z{j}_1"]
    return AnsatzParams(fixed, free, spec.ts, flags)


# --------------------------------------------------------------------------
# obstruction polynomials


@dataclass
class Obstruction:
    point: str
    pair: tuple
    poly: object  # MPoly, Frac, or rational
    difference: int

    @property
    def is_zero(self) -> bool:
        return self.poly == 0 if is_rational(self.poly) else not self.poly


@dataclass
class ObstructionSystem:
    spec: ExponentSpec
    params: AnsatzParams
    entries: list  # Obstruction

    def at(self, point: str) -> list:
        return [e for e in self.entries if e.point == point]

    def nonzero(self) -> list:
        return [e for e in self.entries if not e.is_zero]

    def get(self, point: str, pair: tuple) -> Obstruction:
        for e in self.entries:
            if e.point == point and e.pair == tuple(pair):
                return e
        raise KeyError((point, pair))


def _recursion_sum(op: ThetaOperator, alpha: Fraction, n_prime: int, zero_slots: Sequence[int]):
    """The stalled sum at n' (c_0 = 1, chosen slots set to 0)."""
    A = [op.A_j(j) for j in range(n_prime + 1)]
    B = [op.B_j(j) for j in range(n_prime + 1)]
    c = [Fraction(1)]
    for n in range(1, n_prime + 1):
        S = 0
        for k in range(n):
            if c[k] == 0 if is_rational(c[k]) else not c[k]:
                continue
            w = A[n - k] * (alpha + k) + B[n - k]
            if is_rational(w) and w == 0:
                continue
            S = S + w * c[k]
        if n == n_prime:
            return _clean(S)
        fn = op.f(alpha + n)
        if fn == 0:
            if n not in zero_slots:
                raise ValueError(f"unexpected resonance at n={n}")
            c.append(Fraction(0))
        else:
            c.append(_clean(S * (Fraction(-1) / fn)))
    return Fraction(0)


def _clean(x):
    if isinstance(x, Frac) and x.is_polynomial():
        x = x.as_mpoly()
    if isinstance(x, MPoly) and x.is_constant():
        return x.constant_value()
    return x


def _point_list(spec: ExponentSpec) -> list[tuple[str, PointClass, LocalExponents]]:
    pts = [("i", POINT_I, spec.i), ("rho", POINT_RHO, spec.rho)]
    for j, (t, k) in enumerate(spec.points, 1):
        pts.append((f"z{j}", generic_point(t), k))
    return pts


def obstruction_polynomials(spec: ExponentSpec, params: AnsatzParams | None = None,
                            cap: int = DIFFERENCE_CAP, strict: bool = False) -> ObstructionSystem:
    params = fix_indicial(spec, strict=strict) if params is None else params
    entries = []
    for name, point, k in _point_list(spec):
        ks = _list(k)
        top = int(k.k3 - k.k1)
        if top > cap:
            raise ValueError(f"exponent difference {top} at {name} exceeds the cap {cap}")
        if k.k1 == k.k2 or k.k2 == k.k3:
            raise ValueError(f"repeated exponent at {name}: apparentness is impossible")
        data = local_ode_data(params.q_terms(), params.r_terms(), point, top)
        op = ThetaOperator.from_local(data)
        f0 = [op.f(x) for x in ks]
        if any(v != 0 for v in f0):
            raise AssertionError(f"indicial polynomial at {name} does not vanish at the prescribed exponents")
        for a, b in PAIRS:
            alpha = ks[a - 1]
            n_prime = int(ks[b - 1] - alpha)
            slots = [int(k.k2 - k.k1)] if (a, b) == (1, 3) else []
            poly = _recursion_sum(op, alpha, n_prime, slots)
            entries.append(Obstruction(name, (a, b), poly, n_prime))
    return ObstructionSystem(spec, params, entries)


# --------------------------------------------------------------------------
# degrees and verification


def _free_degree(poly, free: Sequence[str]) -> int:
    if is_rational(poly):
        return 0 if poly != 0 else -1
    if isinstance(poly, Frac):
        poly = poly.num
    return poly.degree(free) if poly else -1


@dataclass
class DegreeLine:
    point: str
    pair: tuple
    degree: int
    expected: int | None
    leading: object

    @property
    def ok(self) -> bool:
        return self.expected is None or self.degree == self.expected


def expected_degree(point: str, pair: tuple, k: LocalExponents) -> int | None:
    ks = _list(k)
    d = int(ks[pair[1] - 1] - ks[pair[0] - 1])
    if point == "i":
        return d // 2 if d % 2 == 0 else -1
    if point == "rho":
        return None if d % 3 == 0 else -1
    if pair == (1, 3):
        return d - 1
    return d


def degree_report(system: ObstructionSystem) -> list[DegreeLine]:
    free = system.params.free
    exps = {name: k for name, _, k in _point_list(system.spec)}
    out = []
    for e in system.entries:
        deg = _free_degree(e.poly, free)
        exp = expected_degree(e.point, e.pair, exps[e.point])
        lead = None
        if deg > 0:
            num = e.poly.num if isinstance(e.poly, Frac) else e.poly
            lead = num.leading_form(free)
        out.append(DegreeLine(e.point, e.pair, deg, exp, lead))
    return out


@dataclass
class Verification:
    ok: bool
    residuals: list  # (point, pair, value)


def _evaluate(poly, assignment: dict):
    if is_rational(poly):
        return as_rational(poly)
    v = poly.evaluate(assignment)
    return _clean(v)


def verify_candidate(system: ObstructionSystem, assignment: dict) -> Verification:
    needed = set()
    for e in system.entries:
        if not e.is_zero and not is_rational(e.poly):
            num = e.poly.num if isinstance(e.poly, Frac) else e.poly
            needed |= set(num.variables())
    missing = sorted(x for x in needed if x not in assignment)
    if missing:
        raise ValueError(f"assignment misses {missing}")
    vals = {k: as_rational(v) for k, v in assignment.items()}
    res = []
    for e in system.entries:
        v = _evaluate(e.poly, vals)
        res.append((e.point, e.pair, v))
    return Verification(all(v == 0 for _, _, v in res), res)


def univariate_roots(poly, var: str) -> list[tuple[Fraction, int]]:
    """Rational roots of a polynomial in one free symbol."""
    from .algebra import rational_roots

    if isinstance(poly, Frac):
        poly = poly.num
    if not isinstance(poly, MPoly) or set(poly.variables()) != {var}:
        raise ValueError("univariate polynomial expected")
    deg = poly.degree([var])
    coeffs = [poly.coefficient({var: d} if d else {}) for d in range(deg + 1)]
    return rational_roots(coeffs)


def spec_from_mode(mode, report: dict) -> ExponentSpec:
    """Exponent data read off a MODE (see mode.exponents_everywhere)."""
    points = []
    for name, r in report.items():
        if name.startswith("t="):
            points.append((as_rational(name[2:]), r.exponents))
    return ExponentSpec(report["inf"].exponents, report["i"].exponents, report["rho"].exponents, tuple(points))


def assignment_from_mode(mode, params: AnsatzParams) -> dict:
    """Free-parameter values of a MODE with a fitted closed form."""
    if mode.closed is None:
        raise ValueError("the MODE has no closed form")
    vals = mode.closed.values
    return {name: vals.get(name, Fraction(0)) for name in params.free}
