"""Print the MODE of each extremal quasimodular form in a weight range.

    python3 scripts/extremal_table.py --kmin 6 --kmax 20
"""
import argparse
import time
from dataclasses import dataclass

from modeforge.algebra import fmt_rational
from modeforge.frobenius import LocalExponents
from modeforge.mode import closed_form_mismatches, exponents_everywhere, extremal_closed_form, mode_from_quasi
from modeforge.modforms import factor_form
from modeforge.quasi import extremal


@dataclass
class TableConfig:
    kmin: int = 6
    kmax: int = 20
    order: int = 64


def exps(k: LocalExponents) -> str:
    return "{" + ", ".join(fmt_rational(x) for x in k.as_tuple()) + "}"


def row(k: int, order: int) -> str:
    t0 = time.perf_counter()
    m = mode_from_quasi(extremal(k, order))
    rep = exponents_everywhere(m)
    fac = factor_form(m.W, m.W_weight).expanded()
    ok = not closed_form_mismatches(m, extremal_closed_form(k))
    vals = " ".join(f"{n}={fmt_rational(v)}" for n, v in sorted(m.closed.nonzero().items()))
    return (f"k={k:3d}  W ~ E4^{fac.a} E6^{fac.b} Delta^{fac.d}  "
            f"inf {exps(rep['inf'].exponents)}  i {exps(rep['i'].exponents)}  rho {exps(rep['rho'].exponents)}  "
            f"closed form {'ok' if ok else 'MISMATCH'}  [{vals}]  {time.perf_counter() - t0:.2f}s")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--kmin", type=int, default=TableConfig.kmin)
    p.add_argument("--kmax", type=int, default=TableConfig.kmax)
    p.add_argument("--order", type=int, default=TableConfig.order)
    cfg = TableConfig(**vars(p.parse_args()))
    for k in range(max(6, cfg.kmin + cfg.kmin % 2), cfg.kmax + 1, 2):
        print(row(k, cfg.order))


if __name__ == "__main__":
    main()
