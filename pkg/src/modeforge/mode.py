"""Normalized third-order MODEs built from solution data.

For three solutions y_j (polynomials in Lambda = ln q with Q[c]-valued
series parts) the monic annihilator D^3 + p2 D^2 + p1 D + p0 has

    p2 = -DW/W,  p1 = det[y, D^2y, D^3y]/W,  p0 = -det[Dy, D^2y, D^3y]/W,

W = det[y, Dy, D^2y].  Substituting y = W^(1/3) u removes D^2 and leaves
D^3 u + Q D u + ((1/2) D Q + R) u = 0 with psi = DW/(3W) and

    Q = p1 + 3 D psi - 3 psi^2,
    (1/2) D Q + R = D^2 psi - 2 psi^3 + p1 psi + p0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import CPoly, QSeries, as_rational, default_order, is_rational, solve_linear
from .frobenius import (
    APPARENT,
    LocalExponents,
    LogSeries,
    ThetaOperator,
    classify,
    det3,
    indicial_from_coeffs,
)
from .modforms import (
    Generator,
    InsufficientOrder,
    ansatz_q,
    ansatz_r,
    c_monomial_split,
    factor_form,
)
from .taylor import POINT_I, POINT_RHO, PointClass, generic_point, local_ode_data

CLOSED_FORM_CHECK = 40


@dataclass
class Inventory:
    """Orders of the seed Wronskian at i, rho, the cusp and generic t-points."""

    ord_i: int
    ord_rho: int
    ord_inf: int
    t_points: list = field(default_factory=list)  # [(t, multiplicity)]
    residual_P: tuple = (1,)  # factor of P(j) with no rational roots

    def kappa1(self) -> dict:
        out = {"i": Fraction(-self.ord_i, 3), "rho": Fraction(-self.ord_rho, 3)}
        for t, m in self.t_points:
            out[f"t={t}"] = Fraction(-m, 3)
        return out


@dataclass
class ClosedForm:
    """Q and R as combinations of the ansatz generators."""

    ts: tuple
    values: dict  # parameter name -> Fraction

    def q_terms(self) -> list:
        return [(self.values.get(str(p), Fraction(0)), g) for p, g in ansatz_q(self.ts)]

    def r_terms(self) -> list:
        return [(self.values.get(str(p), Fraction(0)), g) for p, g in ansatz_r(self.ts)]

    def nonzero(self) -> dict:
        return {k: v for k, v in self.values.items() if v != 0}


@dataclass
class ModeData:
    Q: QSeries
    R: QSeries
    cusp: LocalExponents | None = None
    inventory: Inventory | None = None
    provenance: str = "ansatz"
    W: QSeries | None = None  # rational part of the seed Wronskian
    W_cpow: int = 0
    W_weight: int | None = None
    closed: ClosedForm | None = None

    def operator(self) -> ThetaOperator:
        return ThetaOperator.from_cusp(self.Q, self.R)

    @property
    def valid(self) -> Fraction:
        return min(self.Q.valid, self.R.valid)


class DependentSolutions(ValueError):
    pass


def _as_log(y) -> LogSeries:
    if isinstance(y, LogSeries):
        return y
    return LogSeries.plain(y)


def _to_rational(s: QSeries, name: str) -> QSeries:
    def conv(x):
        if isinstance(x, CPoly):
            if not x:
                return 0
            if not x.is_scalar():
                raise ValueError(f"{name} keeps a nonzero power of c: {x}")
            return x.scalar()
        return x
    return s.map_coeffs(conv)


def _normal_form(ys: list[LogSeries]):
    d1 = [y.theta() for y in ys]
    d2 = [y.theta() for y in d1]
    d3 = [y.theta() for y in d2]
    W = det3([ys, d1, d2]).free_part()
    M1 = det3([ys, d2, d3]).free_part()
    M0 = det3([d1, d2, d3]).free_part()
    if W.leading() is None:
        raise DependentSolutions("Wronskian vanishes to validity order: inputs are dependent")
    winv = W.inv()
    dW = W.dq()
    psi = (dW * winv).scale(Fraction(1, 3))
    p1 = M1 * winv
    p0 = -(M0 * winv)
    Q = p1 + psi.dq().scale(3) - (psi * psi).scale(3)
    S = psi.dq().dq() - (psi * psi * psi).scale(2) + p1 * psi + p0
    R = S - Q.dq().scale(Fraction(1, 2))
    return W, Q, R


def mode_from_solutions(y1, y2, y3, check: bool = True, provenance: str = "ansatz") -> ModeData:
    ys = [_as_log(y) for y in (y1, y2, y3)]
    W, Q, R = _normal_form(ys)
    Q = _to_rational(Q, "Q")
    R = _to_rational(R, "R")
    if Q.valid < 0 or R.valid < 0:
        raise InsufficientOrder("inputs too short to determine Q and R; raise the order by ord W + 4")
    try:
        cpow, wr = c_monomial_split(W)
    except ValueError:
        cpow, wr = 0, None
    mode = ModeData(Q, R, provenance=provenance, W=wr, W_cpow=cpow)
    mode.cusp = cusp_exponents(mode)
    if check:
        annihilation_check(mode, ys, W)
    return mode


def annihilation_check(mode: ModeData, ys: list[LogSeries], W: QSeries) -> None:
    """Each y_j W^(-1/3) must be killed by the normalized operator."""
    if mode.W is None:
        raise ValueError("annihilation check needs W to be a single power of c")
    w = mode.W.strip()
    v, lead = w.leading()
    # W = lead q^v (1 + ...); the constant lead^(-1/3) is irrelevant
    u = w.shift(-v).scale(Fraction(1) / lead).pow_rational(Fraction(-1, 3)).shift(-v / 3)
    u = u.map_coeffs(lambda x: CPoly({0: x}) if x != 0 else 0)
    op = mode.operator()
    for j, y in enumerate(ys):
        if not op.apply(y.mul_series(u)).is_zero():
            raise AssertionError(f"solution {j + 1} is not annihilated by the constructed MODE")


def cusp_exponents(mode: ModeData) -> LocalExponents:
    return indicial_from_coeffs(mode.operator().indicial_coeffs()).exponents()


# --------------------------------------------------------------------------
# closed forms


def fit_closed_form(mode: ModeData, ts: Sequence = (), through: int = CLOSED_FORM_CHECK) -> ClosedForm | None:
    """Solve for the ansatz coefficients and confirm agreement through q^through."""
    ts = tuple(as_rational(t) for t in ts)
    out = {}
    for series, terms in ((mode.Q, ansatz_q(ts)), (mode.R, ansatz_r(ts))):
        if series.valid < through:
            raise InsufficientOrder(f"mode valid through q^{series.valid}, need q^{through}")
        cols = [g.expand(through + 1) for _, g in terms]
        lo = min(int(c.e0) for c in cols + [series])
        rows, rhs = [], []
        for n in range(lo, through + 1):
            rows.append([col.coeff(n) for col in cols])
            rhs.append(series.coeff(n))
        x, null = solve_linear(rows, rhs)
        if x is None or null:
            return None
        for (p, _), v in zip(terms, x):
            out[str(p)] = as_rational(v)
    return ClosedForm(ts, out)


def closed_series(terms: Sequence, order: int) -> QSeries:
    total = QSeries.constant(0).truncate(order)
    for cf, g in terms:
        if cf:
            total = total + g.expand(order + 4).scale(cf)
    return total.truncate(order)


# --------------------------------------------------------------------------
# singularities


def singular_inventory(mode: ModeData, W: QSeries | None = None, weight: int | None = None) -> Inventory:
    W = mode.W if W is None else W
    weight = mode.W_weight if weight is None else weight
    if W is None or weight is None:
        raise ValueError("singular_inventory needs the seed Wronskian and its weight")
    fac = factor_form(W, weight)
    o = fac.orders()
    roots = o["t_roots"]
    ex = fac.expanded()
    residual = _divide_roots(ex.P, roots)
    inv = Inventory(o["i"], o["rho"], o["inf"], list(roots), tuple(residual))
    mode.inventory = inv
    return inv


def _divide_roots(P: tuple, roots: list) -> tuple:
    """P(j) with the factors (j - j(t))^m of the rational t-roots removed."""
    p = [as_rational(x) for x in P]
    for t, m in roots:
        j = 1728 * t / (t - 1)
        for _ in range(m):
            q = [Fraction(0)] * (len(p) - 1)
            acc = Fraction(0)
            for i in range(len(p) - 1, 0, -1):
                acc = acc * j + p[i]
                q[i - 1] = acc
            p = q
    return tuple(p)


def _points(inv: Inventory) -> list[tuple[str, PointClass]]:
    pts = [("i", POINT_I), ("rho", POINT_RHO)]
    for t, _ in inv.t_points:
        pts.append((f"t={t}", generic_point(t)))
    return pts


@dataclass
class PointReport:
    exponents: LocalExponents
    tag: str | None
    branch: str | None = None


def exponents_everywhere(mode: ModeData, order: int = 12) -> dict:
    """Exponents and apparentness at the cusp, i, rho and every t-point."""
    out = {}
    st = classify(mode.operator(), mode.cusp, n_max=min(order, int(mode.valid)))
    out["inf"] = PointReport(mode.cusp, st.tag, st.branch)
    if mode.closed is None:
        return out
    ts = mode.closed.ts
    pts = [("i", POINT_I), ("rho", POINT_RHO)] + [(f"t={t}", generic_point(t)) for t in ts]
    for name, pt in pts:
        data = local_ode_data(mode.closed.q_terms(), mode.closed.r_terms(), pt, order)
        op = ThetaOperator.from_local(data)
        ind = indicial_from_coeffs(op.indicial_coeffs())
        exps = ind.exponents()
        if exps == LocalExponents(Fraction(0), Fraction(1), Fraction(2)) and not _has_pole(data):
            out[name] = PointReport(exps, APPARENT, "regular")
            continue
        st = classify(op, exps, n_max=order)
        out[name] = PointReport(exps, st.tag, st.branch)
    return out


def _has_pole(data) -> bool:
    return any(e < 0 for e, _ in data.q.terms()) or any(e < 0 for e, _ in data.b.terms())


# --------------------------------------------------------------------------
# seeds


def work_order(target: int, ord_w: int = 0) -> int:
    return target + int(ord_w) + 6


def mode_from_quasi(f, target: int = CLOSED_FORM_CHECK, check: bool = True, fit: bool = True) -> ModeData:
    """The MODE of a depth-<=2 quasimodular form; f is expanded to cover target."""
    from .quasi import h_vector

    hv = h_vector(f)
    mode = mode_from_solutions(hv.h1, hv.h2, hv.h3, check=check, provenance="quasi-seed")
    mode.W_weight = 3 * f.weight
    if mode.W is not None:
        inv = singular_inventory(mode)
        if fit and not inv.residual_P[1:]:
            mode.closed = fit_closed_form(mode, [t for t, _ in inv.t_points], through=min(target, int(mode.valid)))
    return mode


def triple_wronskian(f: QSeries, g: QSeries, h: QSeries) -> QSeries:
    ys = [LogSeries.plain(s) for s in (f, g, h)]
    d1 = [y.theta() for y in ys]
    d2 = [y.theta() for y in d1]
    return det3([ys, d1, d2]).free_part()


def mode_from_triple(f: QSeries, g: QSeries, h: QSeries, weight: int,
                     target: int = CLOSED_FORM_CHECK, check: bool = True, fit: bool = True) -> ModeData:
    """The MODE whose solutions are (f, g, h) scaled by W^(-1/3)."""
    mode = mode_from_solutions(f, g, h, check=check, provenance="triple-seed")
    mode.W_weight = 3 * (weight + 2)
    inv = singular_inventory(mode)
    if fit and not inv.residual_P[1:]:
        mode.closed = fit_closed_form(mode, [t for t, _ in inv.t_points], through=min(target, int(mode.valid)))
    return mode


def is_rational_mode(mode: ModeData) -> bool:
    return all(is_rational(x) for x in mode.Q.coeffs + mode.R.coeffs)


def default_target() -> int:
    return min(default_order(), CLOSED_FORM_CHECK)


# --------------------------------------------------------------------------
# oracles


def extremal_closed_form(k: int) -> ClosedForm:
    """Closed Q and R for the MODE of the extremal depth-2 form of weight k."""
    if k < 6 or k % 2:
        raise ValueError("extremal weights are even and at least 6")
    if k % 4 == 0:
        return ClosedForm((), {"r_inf": Fraction(-k * k, 48), "s_inf": Fraction(-k ** 3, 864)})
    r = k - 2
    return ClosedForm((), {
        "r_inf": Fraction(-r * r, 48),
        "r_i": Fraction(-1, 3),
        "s_inf": Fraction(-r ** 3, 864),
        "s_i3": Fraction(5, 54),
        "s_i1": Fraction(12 - r * r, 144),
    })


def closed_form_mismatches(mode: ModeData, expected: ClosedForm, through: int = CLOSED_FORM_CHECK) -> list[str]:
    """Names of Q, R whose expansion disagrees with the expected closed form through q^through."""
    out = []
    for name, series, terms in (("Q", mode.Q, expected.q_terms()), ("R", mode.R, expected.r_terms())):
        if series.valid < through:
            raise InsufficientOrder(f"{name} valid through q^{series.valid}, need q^{through}")
        if not series.agrees(closed_series(terms, through), through):
            out.append(name)
    return out
