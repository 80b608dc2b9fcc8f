"""Fixed-point construction of a solution with the fast decay rate.

Run: python3 demos/fast_solution.py [OUTDIR]
"""
import sys
from pathlib import Path

import numpy as np

from singular_ode import Params, build_fast_solution, equation_residual
from singular_ode.model import asymptotic_constants

p = Params(0, 0.3, 2, 1, 1)
sol = build_fast_solution(p)
for key, value in sol.summary().items():
    print(f"{key:18s} {value}")
print(f"{'equation residual':18s} {equation_residual(p, sol):.3e}")

# t^(1/(alpha-l)) |u'| should settle on the predicted constant
k_du = asymptotic_constants(p)[1]
for t in (10, 100, 1000, 5000):
    i = np.searchsorted(sol.du.nodes, t)
    tt = sol.du.nodes[i]
    print(f"t = {tt:8.1f}: t^(1/0.3)|u'| / K = {tt ** (1 / 0.3) * abs(sol.du.values[i]) / k_du:.5f}")

if len(sys.argv) > 1:
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    sol.u.to_csv(out / "fast_u.csv")
    sol.du.to_csv(out / "fast_du.csv")
    print(f"wrote {out}/fast_u.csv, {out}/fast_du.csv")
