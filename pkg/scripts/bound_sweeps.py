"""Average RAoI against the power bound (d_bar = 0.99) and against the
distortion bound (P_bar = 2), for SRP and DPP on the PPV, cyclic CRC-1 and
cyclic genie-verdict tables.

    python3 scripts/bound_sweeps.py [--T 1000000] [--threads 0]
"""

import argparse
import os

from raoi.cli import main

TABLES = {
    "ppv": ["--table", "ppv"],
    "cyclic_crc1": ["--table", "cyclic:0x3", "--detection", "crc"],
    "cyclic_genie": ["--table", "cyclic:0x3", "--detection", "genie"],
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", default="1000000")
    ap.add_argument("--threads", default="0")
    a = ap.parse_args()
    os.makedirs("results", exist_ok=True)
    common = ["--policies", "srp,dpp", "--T", a.T, "--threads", a.threads]
    for name, flags in TABLES.items():
        main(["sweep", *flags, *common, "--d-bar", "0.99", "--P-grid", "1:10",
              "--out", f"results/power_{name}.csv"])
        main(["sweep", *flags, *common, "--P-bar", "2", "--d-grid", "0.4:0.99:0.01",
              "--out", f"results/distortion_{name}.csv"])
        print(f"wrote results/*_{name}.csv")
