"""Acceptance criteria. Each test prints one ``criterion N: PASS|FAIL`` line.

Run ``python3 tests/test_acceptance.py`` for the summary lines alone, or
``pytest tests/test_acceptance.py -v`` for the usual report (the lines are
printed through pytest's capture).
"""
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from singular_ode.analysis import classify_empirical, dyadic_windows, energy_audit, fit_decay_exponent
from singular_ode.constructor import build_fast_solution
from singular_ode.integrator import integrate, integrate_regularized
from singular_ode.model import (
    Params,
    Regime,
    asymptotic_constants,
    classify_theoretical,
    critical_c0,
    fast_energy_exponent,
    slow_energy_exponent,
)
from singular_ode.regions import (
    PhasePoint,
    RegionSpec,
    field_zw,
    radial_component,
    region_certificate,
    region_invariance_test,
)

TOL = 1e-9
OSC = Params(0, 1, 1, 1, 1)
NONOSC = Params(1, 1.2, 3, 1, 1)
ALT = Params(0, 0.3, 2, 1, 1)


def line(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


def report(capsys, n, result):
    ok, detail = result
    with capsys.disabled():
        print("\n" + line(n, ok, detail))
    assert ok, line(n, ok, detail)


def nonosc_ics():
    rng = np.random.default_rng(12345)
    out = []
    while len(out) < 5:
        u0, du0 = rng.uniform(-1.5, 1.5, 2)
        if math.hypot(u0, du0) > 0.1:
            out.append((float(u0), float(du0)))
    return out


@pytest.fixture(scope="module")
def osc_run():
    return integrate(OSC, 1.0, 0.0, 200.0, TOL)


def check_1_energy_law():
    rng = np.random.default_rng(2024)
    worst_inc, worst_res = 0.0, 0.0
    for _ in range(20):
        l = rng.uniform(0, 1)
        p = Params(l, l + rng.uniform(0, 2), l + rng.uniform(0, 3), rng.uniform(0.5, 2), rng.uniform(0.5, 2))
        u0, du0 = rng.uniform(-1.5, 1.5, 2)
        audit = energy_audit(p, integrate(p, u0, du0, 100.0, TOL))
        worst_inc = max(worst_inc, audit.max_energy_increase)
        worst_res = max(worst_res, audit.dissipation_residual)
    ok = worst_inc <= 50 * TOL and worst_res <= 1e-5
    return ok, f"max energy increase {worst_inc:.3g} (<= {50 * TOL:g}), dissipation residual {worst_res:.3g} (<= 1e-5)"


def check_2_oscillatory(osc_run):
    traj = osc_run
    emp, theo = classify_empirical(OSC, traj), classify_theoretical(OSC)
    zu, zd = traj.u_zeros, traj.du_zeros
    windows = dyadic_windows(traj.t_end, 10.0)
    per_window = [int(np.count_nonzero((zu >= a) & (zu <= b))) for a, b in windows]
    pairs = list(zip(zd[:-1], zd[1:]))
    interlaced = sum(1 for a, b in pairs if np.count_nonzero((zu > a) & (zu < b)) == 1)
    ok = emp == theo == Regime.OSCILLATORY and min(per_window) >= 1 and pairs and interlaced == len(pairs)
    return ok, f"empirical {emp}, theoretical {theo}, zeros per window {per_window}, interlaced {interlaced}/{len(pairs)}"


def check_3_fast_rate(osc_run):
    traj = osc_run
    est = fit_decay_exponent((traj.t, traj.E), (50.0, 200.0))
    target = fast_energy_exponent(OSC)
    m = traj.t >= 20.0
    stat = traj.t[m] ** 2 * traj.E[m]
    audit = energy_audit(OSC, traj)
    ok = abs(est.exponent - target) <= 0.10 * abs(target) and stat.min() > 0 and audit.tail_liminf_statistic > 0
    return ok, f"E exponent {est.exponent:.4f} vs {target:g} (10%), min t^2 E on [20, 200] = {stat.min():.4g}"


def check_4_nonoscillatory():
    classes, patterns = [], []
    for u0, du0 in nonosc_ics():
        traj = integrate(NONOSC, u0, du0, 300.0, TOL)
        classes.append(classify_empirical(NONOSC, traj))
        m = traj.t >= 150.0
        patterns.append(bool(np.all(np.sign(traj.u[m]) * np.sign(traj.du[m]) == -1)))
    ok = all(c == Regime.NON_OSCILLATORY for c in classes) and all(patterns)
    return ok, f"classes {[str(c) for c in classes]}, sign pattern {patterns}"


def check_5_slow_rate():
    slow, fast = slow_energy_exponent(NONOSC), fast_energy_exponent(NONOSC)
    expos = []
    for u0, du0 in nonosc_ics():
        traj = integrate(NONOSC, u0, du0, 3000.0, TOL)
        expos.append(fit_decay_exponent((traj.t, traj.E), (1500.0, 3000.0)).exponent)
    near_slow = sum(abs(e - slow) <= 0.15 * abs(slow) for e in expos)
    near_fast = sum(abs(e - fast) <= 0.15 * abs(fast) for e in expos)
    ok = near_slow >= 4 and near_fast == 0
    return ok, f"exponents {[round(e, 3) for e in expos]}, {near_slow}/5 within 15% of {slow:.4f}, {near_fast} near {fast:g}"


def check_6_critical_constant():
    base = Params(0, 1 / 3, 1, 1, 1)
    c0 = critical_c0(base)
    low = integrate(Params(0, 1 / 3, 1, 1, 1), 1.0, 0.0, 300.0, TOL)
    high = integrate(Params(0, 1 / 3, 1, 3, 1), 1.0, 0.0, 300.0, TOL)
    low_class = classify_empirical(low.params, low)
    ok = (
        math.isclose(c0, 2.4764, abs_tol=5e-5)
        and low_class == Regime.OSCILLATORY
        and len(low.u_zeros) >= 5
        and len(high.u_zeros) <= 1
    )
    return ok, f"c0 {c0:.5f}, c=1: {low_class} with {len(low.u_zeros)} zeros, c=3: {len(high.u_zeros)} zeros"


def check_7_constructor():
    sol = build_fast_solution(ALT, T_max=1e4)
    t, du = sol.du.nodes, np.abs(sol.du.values)
    T = 1e4
    est = fit_decay_exponent((t, du), (T / 4, T / 2))
    target = -1 / (ALT.alpha - ALT.l)
    k_du = asymptotic_constants(ALT)[1]
    late = (t >= T / 4) & (t <= T / 2)
    ratio = t[late] ** (1 / (ALT.alpha - ALT.l)) * du[late] / k_du
    ok = (
        sol.max_bound_ratio <= 1 + 1e-12
        and sol.residual <= 1e-3
        and abs(est.exponent - target) <= 0.10 * abs(target)
        and ratio.min() >= 0.9
        and ratio.max() <= 1.1
    )
    return ok, (
        f"{sol.iterations} iterations, bound ratio {sol.max_bound_ratio:.6f}, residual {sol.residual:.3g}, "
        f"|u'| exponent {est.exponent:.4f} vs {target:.4f}, ratio in [{ratio.min():.4f}, {ratio.max():.4f}]"
    )


def check_8_region():
    rng = np.random.default_rng(8)
    worst = 0.0
    for z, w in rng.uniform(-1, 1, (10_000, 2)):
        exact = -ALT.c * (ALT.l + 2) / (2 * (ALT.l + 1)) * abs(w) ** (2 * (ALT.alpha + 2) / (ALT.l + 2))
        dz, dw = field_zw(ALT, PhasePoint(z, w))
        scale = max(abs(z * dz) + abs(w * dw), 1e-300)
        worst = max(worst, abs(radial_component(ALT, PhasePoint(z, w)) - exact) / scale)
    spec = RegionSpec(1e-3, 1.0)
    cert = region_certificate(ALT, spec, 1000)
    inv = region_invariance_test(ALT, spec, 50, 200.0, TOL)
    ok = worst <= 1e-12 and cert.passed and inv.fraction_contained == 1.0
    return ok, (
        f"radial identity rel err {worst:.2g}, certificate {'passes' if cert.passed else 'fails'}, "
        f"containment {inv.fraction_contained:.2f} over {len(inv.contained)} ICs"
    )


def check_9_regularized():
    p = Params(1, 1.5, 2, 1, 1)
    te = np.linspace(0.0, 10.0, 501)
    ref = integrate(p, 1.0, 0.0, 10.0, 1e-12, t_eval=te)
    devs = []
    for eps in (1e-2, 1e-3, 1e-4):
        reg = integrate_regularized(p, eps, 1.0, 0.0, 10.0, 1e-10, t_eval=te)
        devs.append(float(np.max(np.abs(reg.u - ref.u))))
    ok = devs[0] > devs[1] > devs[2]
    return ok, f"max |u_eps - u| for eps 1e-2, 1e-3, 1e-4: {[f'{d:.3g}' for d in devs]}"


def check_10_determinism(work):
    grid = {"l": [0], "alpha": [0.3, 1, 2], "beta": [1, 2, 3], "c": [0.5, 1, 2], "d": [1], "ics": [[1, 0]], "t_end": 100}
    (work / "grid.json").write_text(json.dumps(grid))
    outs = []
    for jobs in (1, 8):
        target = work / f"jobs{jobs}.csv"
        cmd = [sys.executable, "-m", "singular_ode.cli", "sweep", "--grid", str(work / "grid.json"),
               "--jobs", str(jobs), "--out", str(target)]
        subprocess.run(cmd, check=True)
        outs.append(target.read_bytes())
    rows = outs[0].count(b"\n") - 1
    ok = outs[0] == outs[1] and rows == 27
    return ok, f"{rows} rows, jobs 1 vs 8 byte-identical: {outs[0] == outs[1]}"


def test_criterion_1_energy_law(capsys):
    report(capsys, 1, check_1_energy_law())


def test_criterion_2_oscillatory(osc_run, capsys):
    report(capsys, 2, check_2_oscillatory(osc_run))


def test_criterion_3_fast_rate(osc_run, capsys):
    report(capsys, 3, check_3_fast_rate(osc_run))


def test_criterion_4_nonoscillatory(capsys):
    report(capsys, 4, check_4_nonoscillatory())


def test_criterion_5_slow_rate(capsys):
    report(capsys, 5, check_5_slow_rate())


def test_criterion_6_critical_constant(capsys):
    report(capsys, 6, check_6_critical_constant())


def test_criterion_7_constructor(capsys):
    report(capsys, 7, check_7_constructor())


def test_criterion_8_region(capsys):
    report(capsys, 8, check_8_region())


def test_criterion_9_regularized(capsys):
    report(capsys, 9, check_9_regularized())


def test_criterion_10_determinism(tmp_path, capsys):
    report(capsys, 10, check_10_determinism(tmp_path))


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    traj = integrate(OSC, 1.0, 0.0, 200.0, TOL)
    checks = [
        check_1_energy_law,
        lambda: check_2_oscillatory(traj),
        lambda: check_3_fast_rate(traj),
        check_4_nonoscillatory,
        check_5_slow_rate,
        check_6_critical_constant,
        check_7_constructor,
        check_8_region,
        check_9_regularized,
        lambda: check_10_determinism(Path(tempfile.mkdtemp())),
    ]
    results = [check() for check in checks]
    for n, (ok, detail) in enumerate(results, 1):
        print(line(n, ok, detail))
    sys.exit(0 if all(ok for ok, _ in results) else 1)
