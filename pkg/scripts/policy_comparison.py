"""Policy comparison across code families (PRR / SRP / DPP).

    python3 scripts/policy_comparison.py [--dl-table dl.json] [--threads 0]

Writes results/policy_comparison.csv and prints the comparison with reference values.
"""

import os
import sys

from raoi.cli import main

if __name__ == "__main__":
    os.makedirs("results", exist_ok=True)
    sys.exit(main(["repro-table2", "--out", "results/policy_comparison.csv", *sys.argv[1:]]))
