"""SU(3) Toda solutions from three modular forms.

With y_j = f_j / W^(1/3), W the z-Wronskian of (f, g, h), the pair

    e^(-U1) = (1/4) (l^2/m |y1|^2 + m^2/l |y2|^2 + 1/(l m) |y3|^2),
    e^(-U2) = (1/4) (l m |W(y1,y2)|^2 + m/l^2 |W(y2,y3)|^2 + l/m^2 |W(y3,y1)|^2),

W(a, b) = a' b - b' a, solves Delta U1 + e^(2U1-U2) = 0 and the mirror
equation off the singular set.  Since W(y_i, y_j) = W(f_i, f_j) W^(-2/3),
only |W|^(2/3) and |W|^(4/3) are needed.  z-derivatives are 2 pi i D_q.

The exact layer (series) is rational; the numeric layer is complex double.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import QSeries, as_rational, rref
from .modforms import E4, E6, J, Delta, Delta0, factor_form

TWO_PI_I = 2j * math.pi
RHO = complex(-0.5, math.sqrt(3) / 2)
I = 1j


class SingularGrid(ValueError):
    pass


# --------------------------------------------------------------------------
# exact layer


@dataclass
class TripleSeed:
    weight: int
    forms: tuple  # three QSeries
    names: tuple = ("f", "g", "h")

    def __post_init__(self):
        rows = [[s.coeff(n) for n in range(int(min(x.valid for x in self.forms)) + 1)] for s in self.forms]
        _, piv = rref(rows)
        if len(piv) < 3:
            raise ValueError("the three forms are linearly dependent")


def weight24_seed(order: int = 64) -> TripleSeed:
    e4, d = E4(order), Delta(order)
    return TripleSeed(24, ((e4 ** 6).truncate(order), (e4 ** 3 * d).truncate(order), (d * d).truncate(order)),
                      ("E4^6", "E4^3 Delta", "Delta^2"))


def wronskian2(a: QSeries, b: QSeries) -> QSeries:
    """D a * b - D b * a (the D_q version of W(a, b))."""
    return a.dq() * b - b.dq() * a


def triple_wronskian(seed: TripleSeed) -> QSeries:
    f, g, h = seed.forms
    d1 = [s.dq() for s in (f, g, h)]
    d2 = [s.dq() for s in d1]
    (a, b, c), (d, e, ff), (gg, hh, ii) = (f, d1[0], d2[0]), (g, d1[1], d2[1]), (h, d1[2], d2[2])
    return a * (e * ii - ff * hh) - b * (d * ii - ff * gg) + c * (d * hh - e * gg)


# --------------------------------------------------------------------------
# numeric evaluation


@dataclass
class NumericSeries:
    """Float image of a QSeries with integral exponents, for Horner evaluation."""

    coeffs: np.ndarray
    start: int
    order: int

    @classmethod
    def from_series(cls, s: QSeries) -> "NumericSeries":
        if s.N != 1:
            raise ValueError("numeric evaluation needs integral exponents")
        top = int(s.valid) if s.prec is not None else s.start + len(s.coeffs) - 1
        vals = [float(as_rational(s.coeff(n))) for n in range(s.start, top + 1)]
        return cls(np.array(vals, dtype=float), s.start, top)

    def __call__(self, q):
        out = np.zeros_like(q, dtype=complex)
        for c in self.coeffs[::-1]:
            out = out * q + c
        return out * q ** self.start if self.start else out

    def tail_bound(self, q) -> float:
        """Size of the first omitted term, extrapolated from the last few."""
        aq = float(np.max(np.abs(q)))
        tail = self.coeffs[-3:]
        n = self.order
        growth = max(abs(float(tail[-1])), abs(float(tail[-2])) * 1.5, abs(float(tail[-3])) * 2.25, 1.0)
        return 2.0 * growth * aq ** (n + 1)


def eval_series(s: QSeries, tau, tol: float = 1e-12) -> tuple[complex, float]:
    """Value at tau in H (q = e^(2 pi i tau)) and an estimate of the truncation tail."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    ns = NumericSeries.from_series(s)
    q = np.array([cmath.exp(TWO_PI_I * tau)])
    val = complex(ns(q)[0])
    tail = ns.tail_bound(q)
    scale = max(abs(val), 1.0)
    if tail > tol * scale:
        raise ValueError(f"tail bound {tail:.2e} above tolerance; raise the series order")
    return val, tail


# --------------------------------------------------------------------------
# singular set


def _sl2_images(p: complex, box: tuple, margin: float, depth: int = 4) -> list[complex]:
    """Images of p under SL(2,Z) near the box (x0, x1, y0, y1)."""
    x0, x1, y0, y1 = box
    out = set()
    for c in range(0, depth + 1):
        for d in range(-depth, depth + 1):
            if c == 0 and d != 1:
                continue
            if math.gcd(c, d) != 1:
                continue
            # any a, b with ad - bc = 1; the image is then translated by integers
            if c == 0:
                a, b = 1, 0
            else:
                a = pow(d, -1, c) if c > 1 else 0
                b = (a * d - 1) // c
            z = (a * p + b) / (c * p + d)
            if z.imag < y0 - margin or z.imag > y1 + margin:
                continue
            for n in range(math.floor(x0 - margin - z.real) - 1, math.ceil(x1 + margin - z.real) + 2):
                w = z + n
                if x0 - margin <= w.real <= x1 + margin:
                    out.add((round(w.real, 12), round(w.imag, 12)))
    return [complex(x, y) for x, y in sorted(out)]


def singular_points(box: tuple, margin: float, has_i: bool = True, has_rho: bool = True,
                    extra: Sequence[complex] = ()) -> list[complex]:
    pts = []
    if has_i:
        pts += _sl2_images(I, box, margin)
    if has_rho:
        pts += _sl2_images(RHO, box, margin)
    for p in extra:
        pts += _sl2_images(complex(p), box, margin)
    return pts


def solve_j(j0: complex, order: int = 64, tol: float = 1e-12) -> complex:
    """A point of the standard fundamental domain with j(z) = j0."""
    jn = NumericSeries.from_series(J(order))
    xs = np.linspace(-0.5, 0.5, 41)
    ys = np.linspace(math.sqrt(3) / 2, max(2.0, math.log(abs(j0) + 1) / (2 * math.pi) + 1), 81)
    X, Y = np.meshgrid(xs, ys)
    Z = X + 1j * Y
    Z = Z[np.abs(Z) >= 1 - 1e-12]
    vals = np.abs(jn(np.exp(TWO_PI_I * Z)) - j0)
    z = complex(Z[int(np.argmin(vals))])
    for _ in range(60):
        h = 1e-6
        f0 = complex(jn(np.array([cmath.exp(TWO_PI_I * z)]))[0]) - j0
        fp = complex(jn(np.array([cmath.exp(TWO_PI_I * (z + h))]))[0]) - j0
        fm = complex(jn(np.array([cmath.exp(TWO_PI_I * (z - h))]))[0]) - j0
        step = f0 / ((fp - fm) / (2 * h))
        z -= step
        if z.imag <= 0.3:
            raise ValueError(f"Newton for j = {j0} left the usable half-plane")
        if abs(step) < tol:
            return z
    raise ValueError(f"no convergence solving j(z) = {j0}")


def locate_singular_points(data: "TodaData", box: tuple, margin: float) -> list[complex]:
    """Zeros of the seed Wronskian near the box, from its factorization in E4, E6, Delta and j."""
    fac = factor_form(data.W, 3 * (data.seed.weight + 2)).expanded()
    extra = []
    if len(fac.P) > 1:
        for j0 in np.roots([float(x) for x in fac.P[::-1]]):
            extra.append(solve_j(complex(j0)))
    return singular_points(box, margin, has_i=fac.b > 0, has_rho=fac.a > 0, extra=extra)


# --------------------------------------------------------------------------
# fields


@dataclass
class Grid:
    x0: float
    x1: float
    y0: float
    y1: float
    n: int

    @property
    def h(self) -> float:
        return (self.x1 - self.x0) / (self.n - 1)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(self.x0, self.x1, self.n), np.linspace(self.y0, self.y1, self.n)

    def refined(self) -> "Grid":
        return Grid(self.x0, self.x1, self.y0, self.y1, 2 * self.n - 1)


@dataclass
class TodaData:
    """Exact series feeding the numeric layer."""

    seed: TripleSeed
    W: QSeries
    pairs: tuple  # W(f,g), W(g,h), W(h,f) with D_q
    numeric: dict = field(default_factory=dict)

    @classmethod
    def build(cls, seed: TripleSeed) -> "TodaData":
        f, g, h = seed.forms
        W = triple_wronskian(seed)
        if W.leading() is None:
            raise ValueError("the Wronskian vanishes: dependent triple")
        pairs = (wronskian2(f, g), wronskian2(g, h), wronskian2(h, f))
        num = {name: NumericSeries.from_series(s) for name, s in
               zip(("f", "g", "h", "W", "Wfg", "Wgh", "Whf"), (f, g, h, W) + pairs)}
        return cls(seed, W, pairs, num)


def exp_minus_u(data: TodaData, z, lam: float, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """e^(-U1), e^(-U2) at the points z (any array shape)."""
    z = np.asarray(z, dtype=complex)
    q = np.exp(TWO_PI_I * z)
    ev = {k: v(q) for k, v in data.numeric.items()}
    # z-derivatives: W_z = (2 pi i)^3 W_D, W(a, b)_z = 2 pi i W_D(a, b)
    wz = np.abs(ev["W"]) * (2 * math.pi) ** 3
    s1 = (lam ** 2 / mu * np.abs(ev["f"]) ** 2 + mu ** 2 / lam * np.abs(ev["g"]) ** 2
          + np.abs(ev["h"]) ** 2 / (lam * mu))
    s2 = (lam * mu * np.abs(ev["Wfg"]) ** 2 + mu / lam ** 2 * np.abs(ev["Wgh"]) ** 2
          + lam / mu ** 2 * np.abs(ev["Whf"]) ** 2) * (2 * math.pi) ** 2
    e1 = 0.25 * s1 / wz ** (2.0 / 3.0)
    e2 = 0.25 * s2 / wz ** (4.0 / 3.0)
    return e1, e2


def U_values(data: TodaData, z, lam: float, mu: float) -> tuple[np.ndarray, np.ndarray]:
    e1, e2 = exp_minus_u(data, z, lam, mu)
    return -np.log(e1), -np.log(e2)


@dataclass
class TodaField:
    lam: float
    mu: float
    grid: Grid
    U1: np.ndarray  # indexed [iy, ix]
    U2: np.ndarray
    mask: np.ndarray  # True where the node is at least `margin` from the singular set
    singular: list

    @property
    def u1(self) -> np.ndarray:
        return 2 * self.U1 - self.U2

    @property
    def u2(self) -> np.ndarray:
        return 2 * self.U2 - self.U1

    def residuals(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """5-point residuals at interior nodes whose stencil stays clear of the singular set."""
        h = self.grid.h

        def lap(U):
            return (U[1:-1, 2:] + U[1:-1, :-2] + U[2:, 1:-1] + U[:-2, 1:-1] - 4 * U[1:-1, 1:-1]) / h ** 2

        U1, U2 = self.U1, self.U2
        c1, c2 = U1[1:-1, 1:-1], U2[1:-1, 1:-1]
        r1 = lap(U1) + np.exp(2 * c1 - c2)
        r2 = lap(U2) + np.exp(2 * c2 - c1)
        m = self.mask
        ok = m[1:-1, 1:-1] & m[1:-1, 2:] & m[1:-1, :-2] & m[2:, 1:-1] & m[:-2, 1:-1]
        return r1, r2, ok

    def max_residual(self) -> tuple[float, float]:
        r1, r2, ok = self.residuals()
        return float(np.max(np.abs(r1[ok]))), float(np.max(np.abs(r2[ok])))


def toda_fields(data: TodaData, lam: float, mu: float, grid: Grid, margin: float = 0.05,
                singular: Sequence[complex] | None = None) -> TodaField:
    if lam <= 0 or mu <= 0:
        raise ValueError("lambda and mu must be positive")
    if grid.y0 <= 0:
        raise ValueError("grid must lie in the upper half-plane")
    box = (grid.x0, grid.x1, grid.y0, grid.y1)
    if singular is None:
        singular = singular_points(box, margin)
    xs, ys = grid.axes()
    X, Y = np.meshgrid(xs, ys)
    Z = X + 1j * Y
    mask = np.ones(Z.shape, dtype=bool)
    for p in singular:
        dist = np.abs(Z - p)
        if np.min(dist) < 1e-9:
            raise SingularGrid(f"grid node lies on the singular point {p}")
        mask &= dist >= margin
    U1, U2 = U_values(data, Z, lam, mu)
    if not (np.all(np.isfinite(U1)) and np.all(np.isfinite(U2))):
        raise SingularGrid("non-finite field values on the grid")
    return TodaField(lam, mu, grid, U1, U2, mask, list(singular))


def refinement_ratio(data: TodaData, lam: float, mu: float, grid: Grid, margin: float = 0.05,
                     singular: Sequence[complex] | None = None) -> tuple[float, float]:
    """max residual at h over max residual at h/2 on the same rectangle."""
    coarse = toda_fields(data, lam, mu, grid, margin, singular)
    fine = toda_fields(data, lam, mu, grid.refined(), margin, singular)
    a1, a2 = coarse.max_residual()
    b1, b2 = fine.max_residual()
    return a1 / b1, a2 / b2


def automorphy_defect(data: TodaData, z: complex, lam: float = 1.0, mu: float = 1.0) -> tuple[float, float]:
    """U_j(-1/z) - U_j(z) - 4 ln|z| for j = 1, 2."""
    z = complex(z)
    pts = np.array([z, -1 / z])
    U1, U2 = U_values(data, pts, lam, mu)
    corr = 4 * math.log(abs(z))
    return float(U1[1] - U1[0] - corr), float(U2[1] - U2[0] - corr)


# --------------------------------------------------------------------------
# plane picture


def plane_series(order: int = 64) -> tuple[QSeries, QSeries, QSeries]:
    """E4^3, Delta0 and E4^2 E6 (w = E4^3/Delta0, w' = -2 pi i E4^2 E6/Delta0)."""
    e4, e6 = E4(order), E6(order)
    return (e4 ** 3).truncate(order), Delta0(order + 1), (e4 * e4 * e6).truncate(order)


@dataclass
class PlaneData:
    w: np.ndarray
    v1: np.ndarray
    v2: np.ndarray


def w_values(z, order: int = 64) -> tuple[np.ndarray, np.ndarray]:
    a, d0, b = (NumericSeries.from_series(s) for s in plane_series(order))
    q = np.exp(TWO_PI_I * np.asarray(z, dtype=complex))
    A, D, Bv = a(q), d0(q), b(q)
    return A / D, -TWO_PI_I * Bv / D


def plane_transform(data: TodaData, z, lam: float = 1.0, mu: float = 1.0) -> PlaneData:
    z = np.asarray(z, dtype=complex)
    w, dw = w_values(z)
    if np.any(np.abs(dw) < 1e-12):
        raise ValueError("sample at a critical point of w")
    U1, U2 = U_values(data, z, lam, mu)
    u1, u2 = 2 * U1 - U2, 2 * U2 - U1
    corr = 2 * np.log(np.abs(dw))
    return PlaneData(w, u1 - corr, u2 - corr)


def m_values(k1, k2, k3, cusp: bool = False) -> tuple[int, int]:
    """(m1, m2) from exponents: differences minus 1 inside H, the differences at the cusp."""
    d1, d2 = as_rational(k2) - as_rational(k1), as_rational(k3) - as_rational(k2)
    if cusp:
        return int(d1), int(d2)
    return int(d1) - 1, int(d2) - 1


def predicted_slopes(exps_i, exps_rho, exps_inf) -> dict:
    """Coefficients of ln|w - p| for v_k at w = 1, 0 and of ln|w| as |w| -> infinity."""
    mi = m_values(*exps_i)
    mr = m_values(*exps_rho)
    mc = m_values(*exps_inf, cusp=True)
    return {
        "w=1": tuple(Fraction(m - 1) for m in mi),
        "w=0": tuple(Fraction(2 * (m - 2), 3) for m in mr),
        "inf": tuple(Fraction(-2 * (m + 1)) for m in mc),
    }


def measured_slope_far(data: TodaData, x: float = 0.1, y1: float = 2.5, y2: float = 3.5,
                       lam: float = 1.0, mu: float = 1.0) -> tuple[float, float]:
    z = np.array([complex(x, y1), complex(x, y2)])
    p = plane_transform(data, z, lam, mu)
    lw = np.log(np.abs(p.w))
    return (float((p.v1[1] - p.v1[0]) / (lw[1] - lw[0])), float((p.v2[1] - p.v2[0]) / (lw[1] - lw[0])))


def measured_slope_near(data: TodaData, point: complex, r1: float = 1e-2, r2: float = 1e-3,
                        angle: float = 0.7, lam: float = 1.0, mu: float = 1.0) -> tuple[float, float]:
    """Slope of v_k against ln|w - w(point)| along a ray into the point."""
    z = np.array([point + r1 * cmath.exp(1j * angle), point + r2 * cmath.exp(1j * angle)])
    p = plane_transform(data, z, lam, mu)
    w0 = w_values(np.array([point]))[0][0]
    lw = np.log(np.abs(p.w - w0))
    return (float((p.v1[1] - p.v1[0]) / (lw[1] - lw[0])), float((p.v2[1] - p.v2[0]) / (lw[1] - lw[0])))


def plot_rows(field: TodaField) -> list[tuple]:
    """(x, y, U1, U2, u1, u2, residual1, residual2) per interior node (NaN where masked)."""
    r1, r2, ok = field.residuals()
    xs, ys = field.grid.axes()
    u1, u2 = field.u1, field.u2
    rows = []
    for iy in range(1, len(ys) - 1):
        for ix in range(1, len(xs) - 1):
            good = ok[iy - 1, ix - 1]
            rows.append((float(xs[ix]), float(ys[iy]), float(field.U1[iy, ix]), float(field.U2[iy, ix]),
                         float(u1[iy, ix]), float(u2[iy, ix]),
                         float(r1[iy - 1, ix - 1]) if good else float("nan"),
                         float(r2[iy - 1, ix - 1]) if good else float("nan")))
    return rows
