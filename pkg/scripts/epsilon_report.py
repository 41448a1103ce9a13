#!/usr/bin/env python3
"""Sweep the scaled-window integral over a grid and audit its two lanes.

Writes the plotting CSV (x, series, asymptotic, bound) and prints a
summary: where each lane is live, the worst series-vs-asymptotic gap
against the reported bounds on the overlap region, and inverse
round-trip residuals.  Run from the repository root:

    python3 scripts/epsilon_report.py --x-min 1 --x-max 1e6 --points 60
"""

import argparse
import sys
from pathlib import Path

from qgenus.analytic import (epsilon_inverse, epsilon_num, epsilon_rows,
                             write_epsilon_csv)


def grid(x_min: float, x_max: float, points: int, linear: bool):
    if linear:
        step = (x_max - x_min) / (points - 1)
        return [x_min + i * step for i in range(points)]
    ratio = x_max / x_min
    return [x_min * ratio ** (i / (points - 1)) for i in range(points)]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--x-min", type=float, default=1.0)
    ap.add_argument("--x-max", type=float, default=1e6)
    ap.add_argument("--points", type=int, default=60)
    ap.add_argument("--linear", action="store_true",
                    help="arithmetic instead of geometric spacing")
    ap.add_argument("--out", type=Path, default=Path("epsilon_table.csv"))
    args = ap.parse_args()
    if args.points < 2:
        ap.error("--points must be at least 2")
    if not args.linear and args.x_min <= 0:
        ap.error("geometric spacing needs --x-min > 0")

    xs = grid(args.x_min, args.x_max, args.points, args.linear)
    with open(args.out, "w") as fh:
        write_epsilon_csv(fh, xs)
    print(f"wrote {len(xs)} rows to {args.out}")

    rows = epsilon_rows(xs)
    both = [r for r in rows
            if r["series"] is not None and r["asymptotic"] is not None]
    print(f"lanes: series on {sum(r['series'] is not None for r in rows)} "
          f"points, asymptotic on "
          f"{sum(r['asymptotic'] is not None for r in rows)}, "
          f"overlap {len(both)}")

    worst = None
    for r in both:
        gap = abs(r["series"].value - r["asymptotic"].value)
        if gap > r["bound"]:
            print(f"  OUT OF BOUND at x = {r['x']:g}: gap {gap:.3e} "
                  f"> bound {r['bound']:.3e}")
        frac = gap / r["bound"] if r["bound"] else float("inf")
        if worst is None or frac > worst[0]:
            worst = (frac, r["x"], gap, r["bound"])
    if worst:
        frac, x, gap, bound = worst
        print(f"worst overlap gap: x = {x:g}, gap {gap:.3e} vs bound "
              f"{bound:.3e} ({frac:.2f} of budget)")

    print("inverse round trips:")
    bad = 0
    for x in (-6.0, -2.0, -0.5, 0.5, 2.0, 6.0):
        y = epsilon_num(x).value
        back = epsilon_inverse(y).value
        resid = abs(back - x)
        flag = ""
        if resid > 1e-10:
            bad += 1
            flag = "  <-- exceeds 1e-10"
        print(f"  eps({x:+.1f}) = {y:.12g}; inverse back to "
              f"{back:+.12g} (residual {resid:.1e}){flag}")
    if bad:
        print(f"{bad} round trips out of tolerance", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
