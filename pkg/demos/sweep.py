"""Parameter sweep through the command line, serial and parallel.

Run: python3 demos/sweep.py [OUTDIR]
"""
import csv
import json
import sys
import tempfile
from pathlib import Path

from singular_ode.cli import main

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
out.mkdir(parents=True, exist_ok=True)
grid = {"l": [0], "alpha": [0.3, 1, 2], "beta": [1, 2], "c": [1], "d": [1], "ics": [[1, 0], [0, 1]], "t_end": 100}
(out / "grid.json").write_text(json.dumps(grid))

for jobs in (1, 4):
    main(["sweep", "--grid", str(out / "grid.json"), "--jobs", str(jobs), "--out", str(out / f"sweep{jobs}.csv")])
same = (out / "sweep1.csv").read_bytes() == (out / "sweep4.csv").read_bytes()
print(f"results in {out}; jobs 1 and 4 identical: {same}\n")

with open(out / "sweep1.csv") as fh:
    for row in csv.DictReader(fh):
        expo = row["exponent_E"] and f"{float(row['exponent_E']):+.3f}"
        print(f"alpha={float(row['alpha']):<4g} beta={float(row['beta']):<3g} ic=({row['u0']}, {row['du0']}): "
              f"{row['regime_empirical']:26s} E exponent {expo}")
