"""Regenerate src/flatdichotomy/data/bessel_reference.csv with mpmath (50 digits)."""

import csv
import os

import mpmath as mp

mp.mp.dps = 50
ORDERS = (0, 1, 1.5, 3, 4, 7)
S_GRID = [0.0, 0.1, 0.5, 1.0, 2.5, 5.0, 7.5, 10.0, 11.5, 12.0, 12.5, 15.0, 17.5, 20.0,
          25.0, 30.0, 37.5, 45.0, 50.0, 60.0, 75.0, 90.0, 100.0]
REL_TOL = 1e-8

here = os.path.dirname(os.path.abspath(__file__))
path = os.path.join(here, "..", "src", "flatdichotomy", "data", "bessel_reference.csv")
with open(path, "w", newline="") as fh:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["nu", "s", "expected", "tolerance"])
    for nu in ORDERS:
        for s in S_GRID:
            val = mp.besselj(mp.mpf(nu), mp.mpf(s))
            w.writerow([nu, s, mp.nstr(val, 20), f"{REL_TOL * abs(float(val)):.3e}"])
