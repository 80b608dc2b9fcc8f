"""Adaptive integration through the singular points of the equation.

The solver never forms u''. It advances the pair ``(u, p)`` with the flux
``p = |u'|^l u'``, which stays C^1 along solutions, so the right-hand side

    u' = sign(p) |p|^(1/(l+1)),      p' = -c sign(p) |p|^((alpha+1)/(l+1)) - d |u|^beta u

is continuous everywhere. Near ``p = 0`` the first component is only
Hoelder continuous, which is handled by a step cap rather than by event
surgery. A third component accumulates the dissipation integral
``int |u'|^(alpha+2) dt`` with the same stepper, for the energy audit.
"""
from __future__ import annotations

import csv
import enum
import io
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameterError, StepSizeError, ValidationError
from .model import Params, energy, spow

__all__ = [
    "DEFAULT_TOL",
    "State",
    "Status",
    "Trajectory",
    "Step",
    "dopri5",
    "vector_field",
    "vector_field_regularized",
    "integrate",
    "integrate_regularized",
    "locate_zeros",
    "flux_to_velocity",
    "velocity_to_flux",
    "CSV_HEADER",
]

DEFAULT_TOL = 1e-9
DEFAULT_ENERGY_FLOOR = 1e-24
CSV_HEADER = ("t", "u", "du", "p", "E")

# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension of order 4; row i gives the theta-polynomial weight of stage i
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

_SAFETY = 0.9
# PI controller exponents (Gustafsson-type, beta = 0.04 for a 5th-order pair)
_PI_BETA = 0.04
_PI_ALPHA = 0.2 - 0.75 * _PI_BETA
_FAC_MIN, _FAC_MAX = 0.2, 10.0


class Status(str, enum.Enum):
    COMPLETED = "Completed"
    ENERGY_FLOOR = "EnergyFloorReached"
    STEP_FAILURE = "StepFailure"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class State:
    """Point ``(t, u, p)`` with ``p = |u'|^l u'``."""

    t: float
    u: float
    p: float

    def du(self, l: float) -> float:
        return flux_to_velocity(self.p, l)


def flux_to_velocity(p, l):
    """Inverse of ``u' -> |u'|^l u'``."""
    return spow(p, 1.0 / (l + 1.0))


def velocity_to_flux(du, l):
    return spow(du, l + 1.0)


@dataclass
class Step:
    """One accepted step of :func:`dopri5` with its dense output."""

    t0: float
    y0: list
    t1: float
    y1: list
    k: list

    @property
    def h(self) -> float:
        return self.t1 - self.t0

    def __call__(self, t: float, i: int | None = None):
        """Interpolated state at ``t`` in ``[t0, t1]`` (component ``i`` if given)."""
        h = self.t1 - self.t0
        th = (t - self.t0) / h
        powers = (th, th * th, th * th * th, th * th * th * th)
        weights = [sum(row[j] * powers[j] for j in range(4)) for row in _P]
        idx = range(len(self.y0)) if i is None else (i,)
        out = [self.y0[n] + h * sum(w * kk[n] for w, kk in zip(weights, self.k)) for n in idx]
        return out if i is None else out[0]


def _initial_step(rhs, t0, y0, f0, span, atol, rtol):
    scale = [atol + rtol * abs(v) for v in y0]
    d0 = max(abs(v) / s for v, s in zip(y0, scale))
    d1 = max(abs(v) / s for v, s in zip(f0, scale))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = [v + h0 * f for v, f in zip(y0, f0)]
    f1 = rhs(t0 + h0, y1)
    d2 = max(abs(a - b) / s for a, b, s in zip(f1, f0, scale)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def dopri5(
    rhs: Callable[[float, list], list],
    t0: float,
    y0: Sequence[float],
    t_end: float,
    *,
    atol: float,
    rtol: float,
    h_max: float = math.inf,
    h_min: float = 0.0,
    h_cap: Callable[[float, list], float] | None = None,
    h_check: Callable[[list, list, float], float] | None = None,
    breakpoints: Sequence[float] = (),
) -> Iterator[Step]:
    """Yield accepted Dormand-Prince 5(4) steps from ``t0`` to ``t_end``.

    The local error estimate is measured in the max-norm against
    ``atol + rtol * |y|``; the step size follows a PI controller. Steps never
    cross an entry of ``breakpoints`` (they land on it exactly), and
    ``h_cap(t, y)`` may lower the step limit state-dependently.
    ``h_check(y, y_new, h)`` returns the largest admissible size of a trial
    step; larger trial steps are rejected and retried at 0.9 times that size.
    It covers error sources the embedded estimate cannot see.

    Raises :class:`StepSizeError` when the step would have to drop below ``h_min``.
    """
    n = len(y0)
    t = float(t0)
    y = [float(v) for v in y0]
    span = t_end - t0
    if span <= 0:
        return
    stops = sorted(b for b in breakpoints if t0 < b < t_end)
    stops.append(t_end)
    stop_i = 0
    f = rhs(t, y)
    h = min(_initial_step(rhs, t, y, f, span, atol, rtol), h_max)
    err_prev = 1e-4
    while t < t_end:
        limit = h_max
        if h_cap is not None:
            limit = min(limit, h_cap(t, y))
        h = min(h, limit)
        while stops[stop_i] <= t:
            stop_i += 1
        target = stops[stop_i]
        landing = False
        if t + h >= target - 1e-13 * max(1.0, abs(target)):
            h = target - t
            landing = True
        rejected = False
        while True:
            if h < h_min:
                raise StepSizeError(f"step size {h:.3e} below minimum {h_min:.3e} at t={t:.17g}")
            k = [f]
            for s in range(1, 6):
                a = _A[s]
                ys = [y[m] + h * sum(a[j] * k[j][m] for j in range(s)) for m in range(n)]
                k.append(rhs(t + _C[s] * h, ys))
            y_new = [y[m] + h * sum(_B[j] * k[j][m] for j in range(6)) for m in range(n)]
            t_new = target if landing else t + h
            f_new = rhs(t_new, y_new)
            k.append(f_new)
            err = 0.0
            for m in range(n):
                e = h * sum(_E[j] * k[j][m] for j in range(7))
                sc = atol + rtol * max(abs(y[m]), abs(y_new[m]))
                err = max(err, abs(e) / sc)
            if not math.isfinite(err):
                err = 1e10
            if h_check is not None and err <= 1.0:
                h_ok = h_check(y, y_new, h)
                if h < h_ok:
                    break
                rejected = True
                landing = False
                h = 0.9 * h_ok
                continue
            if err <= 1.0:
                break
            rejected = True
            landing = False
            h *= max(_FAC_MIN, _SAFETY * err ** (-0.2))
        step = Step(t, y, t_new, y_new, k)
        t, y, f = t_new, y_new, f_new
        yield step
        if err == 0.0:
            fac = _FAC_MAX
        else:
            fac = _SAFETY * err ** (-_PI_ALPHA) * err_prev ** _PI_BETA
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
        if rejected:
            fac = min(fac, 1.0)
        err_prev = max(err, 1e-4)
        h_next = h * fac
        if landing and stop_i < len(stops) - 1:
            # restart from the breakpoint with the step that was planned before landing
            h_next = max(h_next, step.h)
        h = h_next


def vector_field(p: Params, s: State) -> tuple[float, float]:
    """``(u', p')`` of the flux formulation at state ``s``."""
    du, dp, _ = _flux_rhs(p)(s.t, [s.u, s.p])
    return du, dp


def _flux_rhs(p: Params):
    inv = 1.0 / (p.l + 1.0)
    qa = (p.alpha + 1.0) / (p.l + 1.0)
    ad = p.alpha + 2.0
    c, d, beta = p.c, p.d, p.beta

    def rhs(t, y):
        u, pf = y[0], y[1]
        if pf == 0.0:
            du = 0.0
            damp = 0.0
        else:
            a = abs(pf)
            du = math.copysign(a ** inv, pf)
            damp = math.copysign(a ** qa, pf)
        return [du, -c * damp - d * abs(u) ** beta * u, abs(du) ** ad]

    return rhs


def vector_field_regularized(p: Params, eps: float, u: float, du: float) -> tuple[float, float]:
    """``(u', u'')`` of the epsilon-regularized equation."""
    if not eps > 0:
        raise ValidationError(f"eps must be > 0, got {eps}")
    return tuple(_regularized_rhs(p, eps)(0.0, [u, du])[:2])


def _regularized_rhs(p: Params, eps: float):
    c, d, l, alpha, beta = p.c, p.d, p.l, p.alpha, p.beta
    ad = alpha + 2.0

    def rhs(t, y):
        u, v = y[0], y[1]
        av = abs(v)
        num = c * av ** alpha * v + d * abs(u) ** beta * u
        return [v, -num / (eps + (l + 1.0) * av ** l), av ** ad]

    return rhs


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution with zero events.

    Arrays are read-only. ``dissipation`` holds the accumulated integral of
    ``|u'|^(alpha+2)`` when the trajectory was produced by this module; it is
    ``None`` for trajectories loaded from CSV.
    """

    t: np.ndarray
    u: np.ndarray
    p: np.ndarray
    du: np.ndarray
    E: np.ndarray
    u_zeros: np.ndarray
    du_zeros: np.ndarray
    params: Params
    tol: float
    status: Status = Status.COMPLETED
    dissipation: np.ndarray | None = None
    eps: float | None = None
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("t", "u", "p", "du", "E", "u_zeros", "du_zeros", "dissipation"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def state(self, k: int) -> State:
        return State(float(self.t[k]), float(self.u[k]), float(self.p[k]))

    def to_csv(self, sink) -> None:
        """Write ``t,u,du,p,E`` rows with 17 significant digits to a path or text stream."""
        if isinstance(sink, (str, os.PathLike)):
            with open(sink, "w", newline="") as fh:
                self.to_csv(fh)
            return
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in zip(self.t, self.u, self.du, self.p, self.E):
            w.writerow([format(float(x), ".17g") for x in row])

    def csv_text(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, source, params: Params, tol: float = DEFAULT_TOL) -> "Trajectory":
        """Load samples written by :meth:`to_csv`; zero events are re-extracted."""
        if isinstance(source, (str, os.PathLike)):
            with open(source, newline="") as fh:
                return cls.from_csv(fh, params, tol)
        reader = csv.reader(source)
        header = tuple(next(reader, ()))
        if header != CSV_HEADER:
            raise ValidationError(f"trajectory CSV header must be {','.join(CSV_HEADER)}, got {','.join(header)}")
        rows = np.array([[float(x) for x in r] for r in reader if r], dtype=float).reshape(-1, 5)
        t, u, du, pf, E = rows.T
        if len(t) == 0:
            raise ValidationError("trajectory CSV has no samples")
        return cls(
            t=t, u=u, p=pf, du=du, E=E,
            u_zeros=_sign_change_times(t, u), du_zeros=_sign_change_times(t, du),
            params=params, tol=tol,
        )


class _ZeroTracker:
    """Sign-change bookkeeping for one state component across dense steps."""

    _THETAS = (0.0, 0.25, 0.5, 0.75, 1.0)

    def __init__(self, index: int, y0: float, xtol: float):
        self.index = index
        self.last_sign = _sign(y0)
        self.pending: float | None = None
        self.xtol = xtol
        self.times: list[float] = []

    def update(self, step: Step) -> None:
        i = self.index
        h = step.h
        prev_t = None
        for th in self._THETAS:
            if th == 0.0:
                tau, val = step.t0, step.y0[i]
            elif th == 1.0:
                tau, val = step.t1, step.y1[i]
            else:
                tau = step.t0 + th * h
                val = step(tau, i)
            s = _sign(val)
            if s == 0:
                if self.last_sign != 0 and self.pending is None:
                    self.pending = tau
                continue
            if self.last_sign != 0 and s != self.last_sign:
                if self.pending is not None:
                    self.times.append(self.pending)
                elif prev_t is not None:
                    self.times.append(self._refine(step, prev_t, tau))
            self.pending = None
            self.last_sign = s
            prev_t = tau

    def _refine(self, step: Step, a: float, b: float) -> float:
        i = self.index
        fa, fb = step(a, i), step(b, i)
        if fa == 0.0:
            return a
        if fb == 0.0 or fa * fb > 0:
            # dense output disagrees with the node signs at roundoff level
            return b
        return brentq(lambda s: step(s, i), a, b, xtol=self.xtol, rtol=4 * np.finfo(float).eps)


def _sign(x: float) -> int:
    x = float(x)
    return (x > 0) - (x < 0)


def _sign_change_times(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Times where ``x`` changes sign, linearly interpolated between adjacent samples."""
    out = []
    last_k = None
    last_s = 0
    for k in range(len(t)):
        s = _sign(x[k])
        if s == 0:
            continue
        if last_s != 0 and s != last_s:
            if k - last_k > 1:
                # exact zeros in between: take the first one
                out.append(float(t[last_k + 1]))
            else:
                x0, x1 = x[last_k], x[k]
                out.append(float(t[last_k] + (t[k] - t[last_k]) * x0 / (x0 - x1)))
        last_s, last_k = s, k
    return np.array(out, dtype=float)


def locate_zeros(traj: Trajectory, which: str = "U") -> np.ndarray:
    """Sign changes of ``u`` (``which="U"``) or ``u'`` (``which="DU"``) in the stored samples."""
    key = which.upper()
    if key not in ("U", "DU"):
        raise ValidationError(f"which must be 'U' or 'DU', got {which!r}")
    if len(traj) == 0:
        raise ValidationError("empty trajectory")
    return _sign_change_times(traj.t, traj.u if key == "U" else traj.du)


def _run(
    rhs,
    y0: list,
    t_end: float,
    tol: float,
    params: Params,
    *,
    to_flux: Callable[[float], float],
    t_eval,
    energy_floor: float,
    h_min: float,
    h_max: float,
    h_cap,
    h_check,
    eps: float | None,
    settings: dict,
) -> Trajectory:
    l = params.l
    inv = 1.0 / (l + 1.0)

    def du_of(y):
        return flux_to_velocity(y[1], l) if eps is None else y[1]

    def E_of(y):
        return float(energy(params, y[0], du_of(y)))

    E0 = E_of(y0)
    floor = energy_floor * E0
    ts, ys = [0.0], [list(y0)]
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval.ndim != 1 or np.any(np.diff(t_eval) <= 0) or t_eval[0] < 0 or t_eval[-1] > t_end:
            raise ValidationError("t_eval must be strictly increasing inside [0, t_end]")
        ts, ys = [], []
        if t_eval[0] == 0.0:
            ts, ys = [0.0], [list(y0)]
        ev_i = len(ts)
    trackers = [_ZeroTracker(0, y0[0], tol), _ZeroTracker(1, y0[1], tol)]
    status = Status.COMPLETED
    try:
        for step in dopri5(rhs, 0.0, y0, t_end, atol=tol, rtol=tol, h_max=h_max, h_min=h_min,
                           h_cap=h_cap, h_check=h_check):
            for tr in trackers:
                tr.update(step)
            if t_eval is None:
                ts.append(step.t1)
                ys.append(step.y1)
            else:
                while ev_i < len(t_eval) and t_eval[ev_i] <= step.t1:
                    ts.append(float(t_eval[ev_i]))
                    ys.append(step(float(t_eval[ev_i])))
                    ev_i += 1
            if E0 > 0 and E_of(step.y1) < floor:
                status = Status.ENERGY_FLOOR
                if t_eval is not None and (not ts or ts[-1] < step.t1):
                    ts.append(step.t1)
                    ys.append(step.y1)
                break
    except StepSizeError:
        status = Status.STEP_FAILURE
    Y = np.array(ys, dtype=float).reshape(-1, 3)
    u = Y[:, 0]
    if eps is None:
        pf = Y[:, 1]
        du = flux_to_velocity(pf, l)
    else:
        du = Y[:, 1]
        pf = to_flux(du)
    return Trajectory(
        t=np.array(ts), u=u, p=pf, du=du, E=energy(params, u, du),
        u_zeros=np.array(trackers[0].times), du_zeros=np.array(trackers[1].times),
        params=params, tol=tol, status=status, dissipation=Y[:, 2], eps=eps,
        settings=settings,
    )


def _kink_step(a: float, k: float, g: float, scale: float) -> float:
    """Largest h with ``a k^g h^(1+g) <= scale``: error bound for integrating
    ``a sign(s)|k s|^g`` over a step that reaches its zero. Odd integer powers are smooth."""
    r = round(g)
    size = a * k**g
    if size == 0.0 or (abs(g - r) < 1e-12 and r % 2 == 1):
        return math.inf
    return (scale / size) ** (1.0 / (1.0 + g))


def _check_run_args(t_end, tol):
    if not (t_end > 0 and math.isfinite(t_end)):
        raise ValidationError(f"t_end must be positive and finite, got {t_end}")
    if not tol > 0:
        raise ValidationError(f"tol must be > 0, got {tol}")


def integrate(
    p: Params,
    u0: float,
    du0: float,
    t_end: float,
    tol: float = DEFAULT_TOL,
    *,
    t_eval=None,
    energy_floor: float = DEFAULT_ENERGY_FLOOR,
    h_min: float | None = None,
    h_max: float | None = None,
    h_max_singular: float | None = None,
    p_small: float | None = None,
) -> Trajectory:
    """Integrate from ``u(0) = u0, u'(0) = du0`` up to ``t_end``.

    Parameters
    ----------
    tol : float
        Local error bound per step (absolute and relative), also the time
        accuracy of the zero events.
    t_eval : array_like, optional
        Report samples at these times (dense output) instead of at the steps.
    energy_floor : float
        Stop with ``Status.ENERGY_FLOOR`` once ``E < energy_floor * E(0)``.
    h_max_singular, p_small : float, optional
        While ``|p| < p_small`` the step is capped at ``h_max_singular``.
        Defaults ``1e-3 * t_end`` and ``1e-8 * max(1, |p0|)``.

    Returns
    -------
    Trajectory
        ``status`` tells whether the run completed, stopped at the energy
        floor or failed on step-size underflow (``h < h_min``, default
        ``1e-14 * t_end``).
    """
    if not p.well_posed:
        raise InvalidParameterError(
            f"integration needs l <= min(alpha, beta); got l={p.l}, alpha={p.alpha}, beta={p.beta}"
        )
    _check_run_args(t_end, tol)
    p0 = float(velocity_to_flux(du0, p.l))
    h_min = 1e-14 * t_end if h_min is None else h_min
    h_max = t_end if h_max is None else h_max
    h_sing = 1e-3 * t_end if h_max_singular is None else h_max_singular
    p_small = 1e-8 * max(1.0, abs(p0)) if p_small is None else p_small

    def cap(t, y):
        return h_sing if abs(y[1]) < p_small else math.inf

    g_du = 1.0 / (p.l + 1.0)
    g_damp = (p.alpha + 1.0) / (p.l + 1.0)
    g_diss = (p.alpha + 2.0) / (p.l + 1.0)
    g_rest = p.beta + 1.0

    def kink(y, y_new, h):
        # the power terms are only Hoelder-smooth where p or u vanishes; a step that crosses
        # or nearly touches such a zero integrates a |k s|^g kink the embedded estimate misses
        lim = math.inf
        dp = abs(y_new[1] - y[1])
        if min(abs(y[1]), abs(y_new[1])) <= dp and dp > 0:
            k = dp / h
            lim = min(
                lim,
                _kink_step(1.0, k, g_du, tol * (1 + max(abs(y[0]), abs(y_new[0])))),
                _kink_step(p.c, k, g_damp, tol * (1 + max(abs(y[1]), abs(y_new[1])))),
                _kink_step(1.0, k, g_diss, tol * (1 + max(abs(y[2]), abs(y_new[2])))),
            )
        du = abs(y_new[0] - y[0])
        if min(abs(y[0]), abs(y_new[0])) <= du and du > 0:
            lim = min(lim, _kink_step(p.d, du / h, g_rest, tol * (1 + max(abs(y[1]), abs(y_new[1])))))
        return lim

    settings = dict(tol=tol, t_end=t_end, energy_floor=energy_floor, h_min=h_min,
                    h_max=h_max, h_max_singular=h_sing, p_small=p_small)
    return _run(
        _flux_rhs(p), [float(u0), p0, 0.0], t_end, tol, p,
        to_flux=lambda v: v, t_eval=t_eval, energy_floor=energy_floor,
        h_min=h_min, h_max=h_max, h_cap=cap, h_check=kink, eps=None, settings=settings,
    )


def integrate_regularized(
    p: Params,
    eps: float,
    u0: float,
    du0: float,
    t_end: float,
    tol: float = DEFAULT_TOL,
    *,
    t_eval=None,
    energy_floor: float = DEFAULT_ENERGY_FLOOR,
    h_min: float | None = None,
    h_max: float | None = None,
) -> Trajectory:
    """Integrate ``(eps + (l+1)|u'|^l) u'' + c|u'|^alpha u' + d|u|^beta u = 0`` in ``(u, u')``.

    Same contract as :func:`integrate`; ``p`` is stored as ``|u'|^l u'`` of
    the computed velocity. The regularized problem is smooth, so no
    well-posedness restriction applies.
    """
    if not eps > 0:
        raise ValidationError(f"eps must be > 0, got {eps}")
    _check_run_args(t_end, tol)
    h_min = 1e-14 * t_end if h_min is None else h_min
    h_max = t_end if h_max is None else h_max
    settings = dict(tol=tol, t_end=t_end, energy_floor=energy_floor, h_min=h_min, h_max=h_max, eps=eps)
    return _run(
        _regularized_rhs(p, eps), [float(u0), float(du0), 0.0], t_end, tol, p,
        to_flux=lambda v: velocity_to_flux(v, p.l), t_eval=t_eval,
        energy_floor=energy_floor, h_min=h_min, h_max=h_max, h_cap=None, h_check=None, eps=eps,
        settings=settings,
    )
