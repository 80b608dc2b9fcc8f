"""The smooth eps-regularized problem approaches the singular one as eps -> 0.

Run: python3 demos/regularization.py
"""
import numpy as np

from singular_ode import Params, integrate, integrate_regularized

p = Params(1, 1.5, 2, 1, 1)
te = np.linspace(0, 10, 501)
ref = integrate(p, 1.0, 0.0, 10.0, 1e-12, t_eval=te)
prev = None
for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5):
    reg = integrate_regularized(p, eps, 1.0, 0.0, 10.0, 1e-11, t_eval=te)
    dev = np.max(np.abs(reg.u - ref.u))
    ratio = "" if prev is None else f"  (x{prev / dev:.1f})"
    print(f"eps = {eps:7.0e}: max |u_eps - u| = {dev:.3e}{ratio}")
    prev = dev
