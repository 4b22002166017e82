"""2-D sweep over (P_bar, d_bar) for contour plots of the average RAoI.

    python3 scripts/contour_sweep.py [--table cyclic:0x3 | path.json] [--T 200000]

Any saved table file (for instance one exported from a learned code) can be
passed with --table.
"""

import argparse
import os

from raoi.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--table", default="cyclic:0x3")
    ap.add_argument("--T", default="200000")
    ap.add_argument("--threads", default="0")
    a = ap.parse_args()
    os.makedirs("results", exist_ok=True)
    out = "results/contour.csv"
    main(["sweep", "--table", a.table, "--policies", "srp,dpp", "--P-grid", "1:6:0.5",
          "--d-grid", "0.45:0.95:0.05", "--T", a.T, "--threads", a.threads, "--out", out])
    print(f"wrote {out}")
