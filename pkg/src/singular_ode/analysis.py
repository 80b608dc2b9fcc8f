"""Post-processing of trajectories: energy audit, decay fits, empirical
oscillation class and the polar (r, theta) diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError, ValidationError
from .integrator import State, Trajectory
from .model import REL_TOL, Params, Regime, alpha_star, apow, energy, spow

__all__ = [
    "RateEstimate",
    "PolarState",
    "AuditReport",
    "R2_CONCLUSIVE",
    "energy_audit",
    "fit_decay_exponent",
    "classify_empirical",
    "dyadic_windows",
    "to_polar",
    "polar_track",
    "polar_constants",
    "theta_rate",
]

#: coefficient of determination above which a rate fit is called conclusive (reported only)
R2_CONCLUSIVE = 0.995
MIN_FIT_SAMPLES = 8


@dataclass(frozen=True)
class RateEstimate:
    """``value ~ amplitude * t**exponent`` on ``window``."""

    exponent: float
    amplitude: float
    goodness: float
    window: tuple[float, float]

    @property
    def conclusive(self) -> bool:
        return self.goodness >= R2_CONCLUSIVE

    def as_dict(self) -> dict:
        out = asdict(self)
        out["window"] = list(self.window)
        return out


@dataclass(frozen=True)
class PolarState:
    r: float
    theta: float


@dataclass(frozen=True)
class AuditReport:
    max_energy_increase: float
    dissipation_residual: float
    tail_liminf_statistic: float | None
    samples_used: int

    def as_dict(self) -> dict:
        return asdict(self)


def _as_series(series) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, tuple) and len(series) == 2:
        t, v = series
    else:
        arr = np.asarray(series, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValidationError("series must be a (t, values) pair or an (n, 2) array")
        t, v = arr[:, 0], arr[:, 1]
    return np.asarray(t, dtype=float), np.asarray(v, dtype=float)


def fit_decay_exponent(series, window: tuple[float, float]) -> RateEstimate:
    """Least-squares line through ``(log t, log value)`` for samples with ``t`` in ``window``.

    Raises
    ------
    InsufficientDataError
        Fewer than 8 samples in the window.
    ValidationError
        A value in the window is not strictly positive.
    """
    t, v = _as_series(series)
    lo, hi = float(window[0]), float(window[1])
    if not (0 < lo < hi):
        raise ValidationError(f"window must satisfy 0 < lo < hi, got {window}")
    m = (t >= lo) & (t <= hi)
    if m.sum() < MIN_FIT_SAMPLES:
        raise InsufficientDataError(f"{int(m.sum())} samples in window [{lo}, {hi}], need {MIN_FIT_SAMPLES}")
    tv, vv = t[m], v[m]
    if np.any(~(vv > 0)):
        raise ValidationError("values in the fit window must be > 0")
    x, y = np.log(tv), np.log(vv)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    goodness = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateEstimate(float(slope), float(math.exp(intercept)), goodness, (lo, hi))


def energy_audit(p: Params, traj: Trajectory, tail_fraction: float = 0.1) -> AuditReport:
    """Check the energy law along ``traj``.

    ``dissipation_residual`` is ``max_k |E_k - E_0 + c Q_k|``. ``Q_k`` is the
    dissipation integral accumulated by the integrator when available,
    otherwise trapezoidal quadrature of ``|u'|^(alpha+2)`` over the samples.
    ``tail_liminf_statistic`` is the minimum of ``t**((l+2)/(alpha-l)) E`` over
    samples in the last ``tail_fraction`` of the time span; it is ``None``
    when ``alpha <= l``.
    """
    if len(traj) == 0:
        raise ValidationError("empty trajectory")
    if not 0 < tail_fraction <= 1:
        raise ValidationError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    t, E = traj.t, traj.E
    dE = np.diff(E)
    max_inc = float(max(0.0, dE.max())) if len(dE) else 0.0
    if traj.dissipation is not None:
        Q = traj.dissipation
    else:
        g = apow(traj.du, p.alpha + 2.0)
        Q = np.concatenate(([0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(t))))
    residual = float(np.max(np.abs(E - E[0] + p.c * Q)))
    stat = None
    if p.strict_gap:
        t0, t1 = float(t[0]), float(t[-1])
        cut = t1 - tail_fraction * (t1 - t0)
        m = (t >= cut) & (t > 0)
        if m.any():
            stat = float(np.min(t[m] ** ((p.l + 2.0) / (p.alpha - p.l)) * E[m]))
        else:
            stat = 0.0
    return AuditReport(max_inc, residual, stat, len(t))


def dyadic_windows(t_end: float, t_start: float) -> list[tuple[float, float]]:
    """Windows ``[T, 2T]`` with ``2T <= t_end`` anchored at ``t_end``, ``T >= t_start``, latest first."""
    out = []
    T = t_end / 2.0
    while T >= t_start:
        out.append((T, 2.0 * T))
        T /= 2.0
    return out


def classify_empirical(
    p: Params,
    traj: Trajectory,
    min_window_zeros: int = 1,
    *,
    t_window_min: float = 10.0,
    t_min: float = 100.0,
) -> Regime:
    """Oscillation class read off a single trajectory.

    * Oscillatory: every dyadic window ``[T, 2T]`` (``T >= t_window_min``,
      anchored at the end of the run) holds at least ``min_window_zeros``
      zeros of u.
    * At most one zero of u over a span ``>= t_min`` is read as the critical
      class when ``alpha`` sits on ``alpha*``; off the critical exponent such
      a run is non-oscillatory if the sign pattern below holds.
    * NonOscillatoryFiniteZeros: no zero of u or u' in the final half and
      ``sign(u) sign(u') = -1`` there.
    * OutsideTheory otherwise, and for the zero trajectory.

    Raises :class:`InsufficientDataError` if the run spans fewer than two
    dyadic windows, i.e. ``t_end < 4 * t_window_min``.
    """
    t0, t1 = float(traj.t[0]), float(traj.t[-1])
    windows = dyadic_windows(t1, t_window_min)
    if t0 != 0.0 or len(windows) < 2:
        raise InsufficientDataError(
            f"classification needs a run from t=0 covering at least two dyadic windows "
            f"(t_end >= {4 * t_window_min}); got [{t0}, {t1}]"
        )
    if traj.E[0] == 0.0:
        return Regime.OUTSIDE
    zu, zdu = traj.u_zeros, traj.du_zeros
    if all(np.count_nonzero((zu >= a) & (zu <= b)) >= min_window_zeros for a, b in windows):
        return Regime.OSCILLATORY
    half = 0.5 * t1
    few_zeros = len(zu) <= 1 and t1 >= t_min
    at_critical = math.isclose(p.alpha, alpha_star(p), rel_tol=REL_TOL)
    if few_zeros and at_critical:
        return Regime.CRITICAL
    m = traj.t >= half
    quiet = not np.any(zu >= half) and not np.any(zdu >= half)
    if quiet and np.all(np.sign(traj.u[m]) * np.sign(traj.du[m]) == -1):
        return Regime.NON_OSCILLATORY
    if few_zeros:
        return Regime.CRITICAL
    return Regime.OUTSIDE


def polar_constants(p: Params) -> tuple[float, float, float]:
    """``(k, A, B)``: position scale of the polar map and the two coefficients of theta'."""
    b2, l2, l1 = p.beta + 2.0, p.l + 2.0, p.l + 1.0
    k = math.sqrt(p.d * l2 / (b2 * l1))
    A = p.c * l2 / (2.0 * l1)
    B = p.d * l2 / (2.0 * l1) * (b2 * l1 / (p.d * l2)) ** ((p.beta + 1.0) / b2)
    return k, A, B


def _polar_arrays(p: Params, u, du):
    k, _, _ = polar_constants(p)
    z = k * spow(u, p.beta / 2.0 + 1.0)
    w = spow(du, p.l / 2.0 + 1.0)
    r = np.hypot(z, w)
    theta = np.where(r > 0, np.arctan2(w, z), 0.0)
    return r, theta


def to_polar(p: Params, s: State) -> PolarState:
    """Polar coordinates with ``r cos(theta) = k |u|^(beta/2) u`` and ``r sin(theta) = |u'|^(l/2) u'``.

    ``r**2 = (l+2)/(l+1) * E``; the origin maps to ``theta = 0``.
    """
    r, theta = _polar_arrays(p, s.u, s.du(p.l))
    theta = float(theta)
    if theta == -math.pi:
        theta = math.pi
    return PolarState(float(r), theta)


def polar_track(p: Params, traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """``r`` and the continuous lift of ``theta`` along the samples of ``traj``."""
    r, theta = _polar_arrays(p, traj.u, traj.du)
    return r, np.unwrap(theta)


def theta_rate(p: Params, ps: PolarState) -> float:
    """Angular velocity theta' at a polar state (undefined where sin(theta) = 0)."""
    s, c = math.sin(ps.theta), math.cos(ps.theta)
    # sin(pi) evaluates to 1.2e-16
    if abs(s) <= 4 * np.finfo(float).eps or ps.r == 0.0:
        raise DomainError("theta' is singular where sin(theta) = 0")
    _, A, B = polar_constants(p)
    l2, b2 = p.l + 2.0, p.beta + 2.0
    gap = 2.0 * (p.alpha - p.l) / l2
    damp = A * ps.r**gap * s * c * abs(s) ** gap
    restore = B * ps.r ** (2.0 * (p.beta + 1.0) / b2 - 2.0 * (p.l + 1.0) / l2) * abs(c) ** (p.beta / b2) * abs(s) ** (-p.l / l2)
    return -damp - restore
