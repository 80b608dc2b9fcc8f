"""Energy decay and power-law rates for an oscillatory case.

Run: python3 demos/energy_decay.py
"""
import numpy as np

from singular_ode import Params, energy_audit, fit_decay_exponent, integrate
from singular_ode.model import fast_energy_exponent

p = Params(l=0, alpha=1, beta=1, c=1, d=1)
traj = integrate(p, u0=1.0, du0=0.0, t_end=200.0, tol=1e-9)
print(f"{len(traj)} samples, status {traj.status}, {len(traj.u_zeros)} zeros of u")

audit = energy_audit(p, traj)
print(f"largest energy increase {audit.max_energy_increase:.2e}")
print(f"energy law residual     {audit.dissipation_residual:.2e}")

# E should fall like t^-2 here
for window in [(25, 50), (50, 100), (100, 200)]:
    est = fit_decay_exponent((traj.t, traj.E), window)
    print(f"E exponent on {window}: {est.exponent:+.4f}  (R^2 {est.goodness:.4f})")
print(f"predicted: {fast_energy_exponent(p):+.4f}")

# t^2 E stays bounded away from zero
m = traj.t >= 20
print("min/max of t^2 E on [20, 200]:", np.round([np.min(traj.t[m] ** 2 * traj.E[m]), np.max(traj.t[m] ** 2 * traj.E[m])], 3))
