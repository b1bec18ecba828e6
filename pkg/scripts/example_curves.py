"""Error curves and 1-vs-2 worker speedups on the three 4x4 examples.

Writes ``compare.csv`` (example, series, axis, x, error) into ``--out`` and
prints a speedup table.
"""

import argparse
from pathlib import Path

from diter.catalog import example_p
from diter.cli import rows_to_csv
from diter.experiments import COMPARE_METHODS, compare_rows, pid_speedup


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--target", type=float, default=1e-8)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = ("A1", "A2", "A3")
    rows = compare_rows(names, COMPARE_METHODS, args.target)
    (out / "compare.csv").write_text(rows_to_csv(("example", "series", "axis", "x", "error"), rows))

    print(f"{'example':8} {'1 PID':>7} {'2 PIDs':>7} {'speedup':>8}")
    for name in names:
        s = pid_speedup(example_p(name), args.target)
        print(f"{name:8} {s.one:7g} {s.two:7g} {s.ratio:8.3f}")
    print(f"curves written to {out / 'compare.csv'}")


if __name__ == "__main__":
    main()
