"""Wall-clock timings of the main pipelines.

    python3 scripts/timing.py --order 64
"""
import argparse
import time
from dataclasses import dataclass

from modeforge.existence import ExponentSpec, obstruction_polynomials
from modeforge.mode import exponents_everywhere, mode_from_quasi, mode_from_triple
from modeforge.modforms import Delta, E4, E6
from modeforge.quasi import extremal
from modeforge.toda import Grid, TodaData, toda_fields, weight24_seed


@dataclass
class TimingConfig:
    order: int = 64
    weights: tuple = (6, 12, 18, 24)


def timed(label, fn):
    t0 = time.perf_counter()
    out = fn()
    print(f"{label:40s} {time.perf_counter() - t0:7.2f}s")
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--order", type=int, default=TimingConfig.order)
    cfg = TimingConfig(order=p.parse_args().order)
    n = cfg.order
    timed(f"E4, E6, Delta to q^{n}", lambda: (E4(n), E6(n), Delta(n)))
    for k in cfg.weights:
        m = timed(f"extremal MODE k={k}", lambda k=k: mode_from_quasi(extremal(k, n)))
        timed(f"  exponents everywhere k={k}", lambda m=m: exponents_everywhere(m))
    e4, d = E4(n), Delta(n)
    timed("weight-24 triple MODE", lambda: mode_from_triple(e4 ** 6, e4 ** 3 * d, d * d, 24))
    spec = ExponentSpec((-1, 0, 1), points=((2, (-2, 1, 4)),))
    timed("generic-point obstruction system", lambda: obstruction_polynomials(spec))
    data = timed("Toda data (weight 24)", lambda: TodaData.build(weight24_seed(n)))
    timed("Toda fields on a 41x41 grid", lambda: toda_fields(data, 1.0, 1.0, Grid(-0.3, 0.3, 0.9, 1.5, 41)))


if __name__ == "__main__":
    main()
