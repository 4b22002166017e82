"""CRC length study: cyclic code with a 1-bit versus a 3-bit CRC, SRP and
DPP against the power bound (d_bar = 0.99).

    python3 scripts/crc_length_study.py [--T 1000000] [--threads 0]
"""

import argparse
import os

from raoi.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", default="1000000")
    ap.add_argument("--threads", default="0")
    a = ap.parse_args()
    os.makedirs("results", exist_ok=True)
    for name, crc in (("crc1", "0x3"), ("crc3", "0xB")):
        out = f"results/crc_length_{name}.csv"
        main(["sweep", "--table", f"cyclic:{crc}", "--policies", "srp,dpp", "--d-bar", "0.99",
              "--P-grid", "1:10", "--T", a.T, "--threads", a.threads, "--out", out])
        print(f"wrote {out}")
