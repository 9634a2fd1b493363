#!/usr/bin/env python3
"""Transient-plate convergence study for both free-surface rules.

An impulsively started bottom wall drives a channel capped by a stress-free
surface; the numerical profiles are compared against the Fourier-series
solution at T = 1/64, 1/8, 3/8 and 3/4 diffusive time units on channels of
height 8, 16, 32, 64.

Usage:
    python scripts/plate_study.py [--rules fsl fsk] [--out out/plate]
"""

import argparse
import time
from pathlib import Path

from fslbm.scenarios import (error_csv_rows, format_order,
                             plate_transient_scenario, run_plate_study,
                             write_error_csv)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rules", nargs="+", default=["fsl", "fsk"])
    ap.add_argument("--out", default="out/plate")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for rule in args.rules:
        sc = plate_transient_scenario(rule)
        t0 = time.perf_counter()
        study = run_plate_study(sc)
        elapsed = time.perf_counter() - t0
        for T, reports in sorted(study.items()):
            errs = " ".join(f"dx={r.resolution:g}:{r.L2:.3e}" for r in reports)
            print(f"{rule} T={T:g}: {errs} -> order "
                  f"{format_order(reports[0].observed_order)}")
            rows.extend(error_csv_rows(f"{sc.name}-T{T:g}", rule, reports))
        print(f"{rule}: {elapsed:.1f} s")
    write_error_csv(out / "errors.csv", rows)
    print(f"wrote {out / 'errors.csv'}")


if __name__ == "__main__":
    main()
