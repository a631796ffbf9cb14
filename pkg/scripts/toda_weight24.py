"""Toda fields of the weight-24 triple on a grid, written to CSV, plus slope checks.

    python3 scripts/toda_weight24.py --out toda24.csv
"""
import argparse
import csv
from dataclasses import dataclass

from modeforge.modforms import Delta, E4
from modeforge.mode import exponents_everywhere, mode_from_triple
from modeforge.toda import (
    RHO,
    Grid,
    TodaData,
    automorphy_defect,
    locate_singular_points,
    measured_slope_far,
    measured_slope_near,
    plot_rows,
    predicted_slopes,
    refinement_ratio,
    toda_fields,
    weight24_seed,
)


@dataclass
class TodaConfig:
    lam: float = 1.0
    mu: float = 1.0
    x0: float = -0.3
    x1: float = 0.3
    y0: float = 0.9
    y1: float = 1.5
    n: int = 41
    margin: float = 0.05
    out: str = "toda24.csv"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(TodaConfig()).items():
        p.add_argument(f"--{name}", type=type(default), default=default)
    cfg = TodaConfig(**vars(p.parse_args()))

    data = TodaData.build(weight24_seed())
    grid = Grid(cfg.x0, cfg.x1, cfg.y0, cfg.y1, cfg.n)
    box = (cfg.x0, cfg.x1, cfg.y0, cfg.y1)
    sing = locate_singular_points(data, box, cfg.margin)
    field = toda_fields(data, cfg.lam, cfg.mu, grid, cfg.margin, sing)
    r1, r2 = field.max_residual()
    q1, q2 = refinement_ratio(data, cfg.lam, cfg.mu, grid, cfg.margin, sing)
    print(f"grid h={grid.h:.4f}, {int(field.mask.sum())} unmasked nodes, singular points {sing}")
    print(f"max residual {r1:.3e} / {r2:.3e}, refinement ratio {q1:.3f} / {q2:.3f}")
    for z in (0.1 + 1.1j, -0.2 + 1.3j):
        d1, d2 = automorphy_defect(data, z, cfg.lam, cfg.mu)
        print(f"automorphy defect at {z}: {d1:.1e} {d2:.1e}")

    e4, d = E4(64), Delta(64)
    rep = exponents_everywhere(mode_from_triple(e4 ** 6, e4 ** 3 * d, d * d, 24))
    pred = predicted_slopes(*(rep[k].exponents.as_tuple() for k in ("i", "rho", "inf")))
    near_i = measured_slope_near(data, 1j)
    near_rho = measured_slope_near(data, RHO)
    far = measured_slope_far(data)
    print(f"slopes: w=1 measured {near_i[0]:.3f} {near_i[1]:.3f}; "
          f"w=0 measured {near_rho[0]:.3f} {near_rho[1]:.3f}; "
          f"inf measured {far[0]:.3f} {far[1]:.3f}")
    print("predicted: " + "; ".join(f"{k} {float(a):.3f} {float(b):.3f}" for k, (a, b) in pred.items()))

    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "U1", "U2", "u1", "u2", "res1", "res2"])
        w.writerows(plot_rows(field))
    print(f"wrote {cfg.out}")


if __name__ == "__main__":
    main()
