"""Run the nine-case classical and Bayesian tables and print coverage.

    python scripts/reproduce_tables.py --output runs/tables --seed 2024 [--set replicates=20]
"""

import argparse
import sys

from fracsde.cli import main as cli_main
from fracsde.io import read_csv


def coverage(table: str, lo_h: str, hi_h: str, lo_b: str, hi_b: str) -> None:
    header, rows, _ = read_csv(table)
    col = {k: i for i, k in enumerate(header)}
    for r in rows:
        if r[col["status"]] != "ok":
            print(f"  case {r[col['case']]}: {r[col['status']]}")
            continue
        h0, b0 = float(r[col["h0"]]), float(r[col["beta0"]])
        cov_h = float(r[col[lo_h]]) <= h0 <= float(r[col[hi_h]])
        cov_b = float(r[col[lo_b]]) <= b0 <= float(r[col[hi_b]])
        print(f"  case {r[col['case']]}: H covered={cov_h} beta covered={cov_b}")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--output", default="runs/tables")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--config")
    ap.add_argument("--set", action="append", default=[])
    args = ap.parse_args()
    argv = ["reproduce-tables", "--output", args.output, "--seed", str(args.seed)]
    if args.config:
        argv += ["--config", args.config]
    for s in args.set:
        argv += ["--set", s]
    rc = cli_main(argv)
    print("classical intervals:")
    coverage(f"{args.output}/table1.csv", "ci_h_lo", "ci_h_hi", "ci_beta_lo", "ci_beta_hi")
    try:
        print("credible intervals:")
        coverage(f"{args.output}/table2.csv", "bci_h_lo", "bci_h_hi", "bci_beta_lo", "bci_beta_hi")
    except FileNotFoundError:
        print("  (Bayesian table disabled)")
    return rc


if __name__ == "__main__":
    sys.exit(main())
