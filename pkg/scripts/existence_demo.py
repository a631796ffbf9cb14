"""Build apparentness obstruction systems for the bundled exponent specs.

    python3 scripts/existence_demo.py data/*_spec.json
"""
import argparse
import json
from dataclasses import dataclass, field

from modeforge.algebra import fmt_rational
from modeforge.cli import parse_spec
from modeforge.existence import degree_report, obstruction_polynomials, univariate_roots


@dataclass
class DemoConfig:
    specs: list = field(default_factory=list)
    allow_violations: bool = True


def describe(path: str, strict: bool) -> None:
    with open(path) as fh:
        spec = parse_spec(json.load(fh), strict=strict)
    sysm = obstruction_polynomials(spec, strict=strict)
    print(f"{path}: free parameters {sysm.params.free}, congruences {sysm.params.flags}")
    for line, e in zip(degree_report(sysm), sysm.entries):
        txt = "0" if e.is_zero else str(e.poly)
        if len(txt) > 70:
            txt = txt[:67] + "..."
        roots = ""
        free = [v for v in sysm.params.free if v in txt]
        if len(free) == 1 and not e.is_zero:
            try:
                roots = " roots " + ", ".join(fmt_rational(r) for r, _ in univariate_roots(e.poly, free[0]))
            except ValueError:
                pass
        print(f"  {e.point:6s} {e.pair}  deg {line.degree:2d} (expected {line.expected})  {txt}{roots}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("specs", nargs="+")
    p.add_argument("--strict", action="store_true", help="reject specs that break the congruences")
    args = p.parse_args()
    cfg = DemoConfig(args.specs, not args.strict)
    for path in cfg.specs:
        describe(path, strict=not cfg.allow_violations)


if __name__ == "__main__":
    main()
