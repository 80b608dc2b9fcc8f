"""Predicted and observed oscillation class on either side of the critical damping.

Run: python3 demos/oscillation_classes.py
"""
from singular_ode import Params, alpha_star, classify_empirical, classify_theoretical, critical_c0, integrate

cases = {
    "oscillatory": Params(0, 1, 1, 1, 1),
    "non-oscillatory": Params(1, 1.2, 3, 1, 1),
}
for name, p in cases.items():
    traj = integrate(p, 1.0, -0.3, 300.0)
    print(f"{name:16s} alpha*={alpha_star(p):.3f}  predicted {classify_theoretical(p)}, "
          f"observed {classify_empirical(p, traj)}, {len(traj.u_zeros)} zeros")

# at alpha = alpha* the outcome depends on c against c0
base = Params(0, 1 / 3, 1, 1, 1)
c0 = critical_c0(base)
print(f"\ncritical exponent alpha = 1/3, c0 = {c0:.4f}")
for c in (0.5, 1.0, 2.0, 3.0, 5.0):
    p = Params(0, 1 / 3, 1, c, 1)
    traj = integrate(p, 1.0, 0.0, 300.0)
    print(f"  c = {c:3.1f}: {len(traj.u_zeros):2d} zeros of u on [0, 300], predicted {classify_theoretical(p)}")
