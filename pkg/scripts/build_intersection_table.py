#!/usr/bin/env python3
"""Build (or extend) the intersection-number table and spot-audit it.

Fills the closed recursion degree by degree, persists the versioned JSON
cache atomically, and cross-checks every genus-0 entry against the
closed form (n-3)!/prod(d_j!) plus a sample of string-equation
transports.  Run from the repository root:

    python3 scripts/build_intersection_table.py --degree 5 --check
"""

import argparse
import os
import sys
import tempfile
import time
from pathlib import Path

from qgenus.virasoro import (IntersectionTable, genus_of,
                             genus_zero_closed_form, index_stats,
                             string_oracle)


def default_cache() -> Path:
    root = os.environ.get("QGENUS_CACHE_DIR")
    base = Path(root).expanduser() if root else Path.home() / ".cache" / "qgenus"
    return base / "intersection.json"


def load(path: Path) -> IntersectionTable:
    if path.exists():
        try:
            return IntersectionTable.loads(path.read_text())
        except Exception as e:  # corrupt, stale format, whatever: rebuild
            print(f"warning: ignoring unusable cache {path}: {e}",
                  file=sys.stderr)
    return IntersectionTable()


def save(path: Path, table: IntersectionTable) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name)
    with os.fdopen(fd, "w") as fh:
        fh.write(table.dumps())
    os.replace(tmp, path)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degree", type=int, default=5,
                    help="total degree to complete the table through")
    ap.add_argument("--cache", type=Path, default=None,
                    help="cache file (default: the CLI's cache location)")
    ap.add_argument("--check", action="store_true",
                    help="re-derive genus-0 entries from the closed form "
                         "and run string-equation transports")
    args = ap.parse_args()
    if not 0 <= args.degree <= 8:
        ap.error("--degree outside the desk-scale window [0, 8]")

    path = args.cache or default_cache()
    table = load(path)
    t0 = time.perf_counter()
    table.build_through(args.degree)
    dt = time.perf_counter() - t0
    save(path, table)

    by_degree: dict[int, int] = {}
    for K, _ in table.entries():
        s = index_stats(K)[1]
        by_degree[s] = by_degree.get(s, 0) + 1
    print(f"table complete through degree {table.complete_through} "
          f"({sum(by_degree.values())} entries, {dt:.2f}s this run)")
    for s in sorted(by_degree):
        print(f"  degree {s}: {by_degree[s]} entries")
    print(f"cache: {path}")

    if not args.check:
        return 0

    bad = 0
    genus0 = 0
    for K, v in sorted(table.entries()):
        if genus_of(K) == 0:
            genus0 += 1
            want = genus_zero_closed_form(K)
            if v != want:
                bad += 1
                print(f"MISMATCH {K}: recursion {v} vs closed form {want}")
    print(f"genus-0 closed form: {genus0} entries checked, "
          f"{bad} mismatches")

    transports = 0
    for K, got in sorted(table.entries()):
        if K and K[0] >= 1 and K != (3,):
            want = string_oracle(table, K)
            transports += 1
            if got != want:
                bad += 1
                print(f"STRING MISMATCH {K}: {got} vs {want}")
    print(f"string-equation transports: {transports} checked")
    if bad:
        print(f"{bad} inconsistencies found", file=sys.stderr)
        return 1
    print("all audits clean")
    return 0


if __name__ == "__main__":
    sys.exit(main())
