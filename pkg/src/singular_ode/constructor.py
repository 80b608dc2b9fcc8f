"""Constructive fast solutions for ``l < alpha < alpha*`` (c = d = 1).

With ``v = |u'|^(l+1)`` a positive decreasing solution of the equation
with stiffness ``eps`` corresponds to a fixed point of

    v' + v^((alpha+1)/(l+1)) = eps * K(v),   v(1) = phi,
    K(v)(t) = (int_t^inf v^(1/(l+1)) ds)^(beta+1),

and ``u(t) = int_{t+1}^inf v^(1/(l+1)) ds``. The fixed point is reached by
monotone iteration from ``v = 0``; every iterate stays below the explicit
super-solution ``w`` of :func:`singular_ode.model.comparison_bound`.

Internally the forced ODE is solved for ``V = v / w`` in log time
``s = log t``, where it becomes

    dV/ds = e V - ((l+2)/(alpha-l)) V^q + t^((alpha+1)/(alpha-l)) f / W,

``e = (l+1)/(alpha-l)``, ``W = w(1)``. The comparison bound is ``V <= 1``.
"""
from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundViolationError, ConvergenceError, DomainError, ValidationError
from .integrator import dopri5
from .model import Params, alpha_star, comparison_bound

__all__ = [
    "TailMode",
    "GridFunction",
    "FastSolution",
    "geometric_grid",
    "operator_K",
    "solve_forced_ode",
    "continuity_constant",
    "max_admissible_eps",
    "build_fast_solution",
    "equation_residual",
]


class TailMode(str, enum.Enum):
    TRUNCATE = "Truncate"
    BOUND_TAIL = "BoundTail"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples ``values[i]`` of a function at strictly increasing ``nodes[i]``."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        values = np.array(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise ValidationError("nodes and values must be 1-d arrays of equal length")
        if len(nodes) < 2 or np.any(np.diff(nodes) <= 0):
            raise ValidationError("nodes must be strictly increasing (at least two)")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(values))):
            raise ValidationError("grid function must be finite")
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def h_grid(self) -> float:
        """Largest relative node spacing ``max (t_{i+1} - t_i) / max(t_i, 1)``."""
        return float(np.max(np.diff(self.nodes) / np.maximum(np.abs(self.nodes[:-1]), 1.0)))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,value\n")
            for t, v in zip(self.nodes, self.values):
                fh.write(f"{format(float(t), '.17g')},{format(float(v), '.17g')}\n")


def geometric_grid(T_max: float = 1e4, n: int = 2000) -> np.ndarray:
    """``n`` nodes ``q**i`` from 1 to ``T_max``."""
    if not T_max > 1 or n < 5:
        raise ValidationError("need T_max > 1 and at least 5 nodes")
    nodes = np.geomspace(1.0, T_max, n)
    nodes[0], nodes[-1] = 1.0, float(T_max)
    return nodes


def _check_regime(p: Params) -> None:
    if not (p.l < p.alpha < alpha_star(p)):
        raise DomainError(
            f"fast-solution construction needs l < alpha < alpha*; got l={p.l}, alpha={p.alpha}, "
            f"alpha*={alpha_star(p)}"
        )
    if p.c != 1.0 or p.d != 1.0:
        raise DomainError("fast-solution construction is normalized to c = d = 1")


def _bound_scale(p: Params) -> float:
    return comparison_bound(p, 1.0)


def _tail_integral(p: Params, T: float) -> float:
    """``int_T^inf w(s)^(1/(l+1)) ds`` in closed form."""
    gap = p.alpha - p.l
    k = 1.0 / gap
    return _bound_scale(p) ** (1.0 / (p.l + 1.0)) * T ** (1.0 - k) / (k - 1.0)


def _tail_from(p: Params, v: GridFunction, tail_mode: TailMode) -> np.ndarray:
    """``int_{t_i}^{T_max} v^(1/(l+1))`` by the trapezoidal rule, plus the tail term."""
    g = v.values ** (1.0 / (p.l + 1.0))
    seg = 0.5 * (g[1:] + g[:-1]) * np.diff(v.nodes)
    inner = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
    if TailMode(tail_mode) is TailMode.BOUND_TAIL:
        inner = inner + _tail_integral(p, float(v.nodes[-1]))
    return inner


def operator_K(p: Params, v: GridFunction, tail_mode: TailMode = TailMode.BOUND_TAIL) -> GridFunction:
    """``K(v)(t) = (int_t^inf v^(1/(l+1)) ds)^(beta+1)`` at the nodes of ``v``.

    The integral over ``[t, T_max]`` is trapezoidal. ``Truncate`` drops the
    tail beyond ``T_max``; ``BoundTail`` adds the closed-form integral of the
    comparison bound there, which over-estimates it.
    """
    _check_regime(p)
    if np.any(v.values < 0):
        raise ValidationError("operator_K needs a nonnegative grid function")
    return GridFunction(v.nodes, _tail_from(p, v, tail_mode) ** (p.beta + 1.0))


def _y_weight(p: Params, t):
    return np.asarray(t, dtype=float) ** ((p.alpha + 1.0) / (p.alpha - p.l))


def solve_forced_ode(
    p: Params,
    source: GridFunction,
    phi: float,
    grid=None,
    *,
    tol: float = 1e-11,
) -> GridFunction:
    """Solve ``v' + v^((alpha+1)/(l+1)) = f``, ``v(1) = phi`` on the nodes of ``grid``.

    ``f`` is the linear interpolant of ``source``. Requires
    ``0 <= phi <= W`` and ``sup t^((alpha+1)/(alpha-l)) f <= W / (alpha-l)``
    with ``W = ((l+2)/(alpha-l))^((l+1)/(alpha-l))``; under these bounds the
    solution lies between 0 and the comparison bound.
    """
    _check_regime(p)
    nodes = source.nodes if grid is None else np.asarray(grid, dtype=float)
    if nodes[0] != 1.0:
        raise ValidationError("the forced problem starts at t = 1")
    if nodes[-1] > source.nodes[-1] or np.any(np.diff(nodes) <= 0):
        raise ValidationError("grid must be increasing and covered by the source nodes")
    W = _bound_scale(p)
    gap = p.alpha - p.l
    slack = 1.0 + 1e-12
    if not (0.0 <= phi <= W * slack):
        raise BoundViolationError(f"phi must lie in [0, {W!r}], got {phi!r}")
    if np.any(source.values < 0):
        raise BoundViolationError("source must be nonnegative")
    f_norm = float(np.max(_y_weight(p, source.nodes) * source.values))
    if f_norm > W / gap * slack:
        raise BoundViolationError(f"source weighted norm {f_norm!r} exceeds {W / gap!r}")

    e = (p.l + 1.0) / gap
    damp = (p.l + 2.0) / gap
    q = (p.alpha + 1.0) / (p.l + 1.0)
    ew = (p.alpha + 1.0) / gap
    sn = source.nodes.tolist()
    sv = source.values.tolist()
    last = len(sn) - 1

    def forcing(t):
        i = min(max(bisect.bisect_right(sn, t) - 1, 0), last - 1)
        t0, t1 = sn[i], sn[i + 1]
        f = sv[i] + (sv[i + 1] - sv[i]) * (t - t0) / (t1 - t0)
        return t**ew * f / W

    def rhs(s, y):
        V = y[0]
        Vq = V**q if V > 0 else 0.0
        return [e * V - damp * Vq + forcing(math.exp(s))]

    s_nodes = np.log(nodes)
    s_nodes[0] = 0.0
    out = np.empty(len(nodes))
    out[0] = phi / W
    j = 1
    for step in dopri5(rhs, 0.0, [phi / W], float(s_nodes[-1]), atol=tol, rtol=tol,
                       h_min=1e-14, breakpoints=s_nodes[1:-1].tolist()):
        while j < len(nodes) and s_nodes[j] <= step.t1:
            out[j] = step.y1[0] if s_nodes[j] == step.t1 else step(float(s_nodes[j]), 0)
            j += 1
    V = np.clip(out, 0.0, None)
    return GridFunction(nodes, W * V * nodes ** (-e))


def continuity_constant(p: Params, nodes, tail_mode: TailMode = TailMode.BOUND_TAIL) -> float:
    """Numerical ``C`` with ``||K(w)||_Y = C ||w||_X^((beta+1)/(l+1))`` for the comparison bound ``w``."""
    _check_regime(p)
    nodes = np.asarray(nodes, dtype=float)
    w = GridFunction(nodes, comparison_bound(p, nodes))
    Kw = operator_K(p, w, tail_mode)
    y_norm = float(np.max(_y_weight(p, nodes) * Kw.values))
    return y_norm / _bound_scale(p) ** ((p.beta + 1.0) / (p.l + 1.0))


def max_admissible_eps(p: Params, nodes, tail_mode: TailMode = TailMode.BOUND_TAIL) -> float:
    """Largest ``eps`` with ``eps C W^((beta+1)/(l+1)) <= W / (alpha - l)``."""
    W = _bound_scale(p)
    c_est = continuity_constant(p, nodes, tail_mode)
    return W / ((p.alpha - p.l) * c_est * W ** ((p.beta + 1.0) / (p.l + 1.0)))


@dataclass(frozen=True, eq=False)
class FastSolution:
    """Result of :func:`build_fast_solution`.

    ``u`` and ``du`` are sampled at ``t = node - 1`` (``t >= 0``). ``residual``
    is the largest violation of the integro-differential equation at interior
    nodes, in units of the comparison bound (``Y``-weighted, divided by ``W``).
    """

    v: GridFunction
    u: GridFunction
    du: GridFunction
    residual: float
    iterations: int
    eps_fp: float
    eps_max: float
    c_est: float
    phi: float
    tail_mode: TailMode
    changes: list = field(default_factory=list)
    max_bound_ratio: float = 0.0
    max_monotone_drop: float = 0.0

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "eps_fp": self.eps_fp,
            "eps_max": self.eps_max,
            "c_est": self.c_est,
            "phi": self.phi,
            "tail_mode": str(self.tail_mode),
            "T_max": float(self.v.nodes[-1]),
            "nodes": len(self.v),
            "max_bound_ratio": self.max_bound_ratio,
            "max_monotone_drop": self.max_monotone_drop,
            "final_change": self.changes[-1] if self.changes else 0.0,
        }


def _five_point_derivative(y: np.ndarray, h: float) -> np.ndarray:
    """d/ds on a uniform grid, interior nodes only (two dropped at each end)."""
    return (-y[4:] + 8.0 * y[3:-1] - 8.0 * y[1:-3] + y[:-4]) / (12.0 * h)


def _integro_residual(p: Params, v: GridFunction, forcing: GridFunction) -> float:
    gap = p.alpha - p.l
    W = _bound_scale(p)
    e = (p.l + 1.0) / gap
    s = np.log(v.nodes)
    h = float(np.mean(np.diff(s)))
    V = v.values * v.nodes**e / W
    F = _y_weight(p, v.nodes) * forcing.values / W
    dV = _five_point_derivative(V, h)
    q = (p.alpha + 1.0) / (p.l + 1.0)
    Vi = V[2:-2]
    r = dV - e * Vi + (p.l + 2.0) / gap * Vi**q - F[2:-2]
    return float(np.max(np.abs(r)))


def build_fast_solution(
    p: Params,
    phi: float | None = None,
    eps_fp: float | None = None,
    T_max: float = 1e4,
    max_iter: int = 100,
    fp_tol: float = 1e-10,
    *,
    n_nodes: int = 2000,
    tail_mode: TailMode = TailMode.BOUND_TAIL,
    ode_tol: float = 1e-11,
) -> FastSolution:
    """Iterate ``v_{n+1} = solve_forced_ode(eps_fp * K(v_n), phi)`` from ``v_0 = 0``.

    Defaults: ``phi`` at the comparison-bound cap ``W``, ``eps_fp`` half of
    :func:`max_admissible_eps`. Convergence is declared when the change
    between iterates, ``sup t^((l+1)/(alpha-l)) |v_{n+1} - v_n| / W``, is at
    most ``fp_tol``.

    Raises
    ------
    ConvergenceError
        ``max_iter`` iterations without reaching ``fp_tol``.
    BoundViolationError
        ``phi`` above the cap or ``eps_fp`` above the admissible value.
    """
    _check_regime(p)
    if not (p.alpha - p.l) < 1.0:
        raise DomainError("construction needs alpha - l < 1")
    nodes = geometric_grid(T_max, n_nodes)
    W = _bound_scale(p)
    phi = W if phi is None else float(phi)
    c_est = continuity_constant(p, nodes, tail_mode)
    eps_max = max_admissible_eps(p, nodes, tail_mode)
    eps_fp = 0.5 * eps_max if eps_fp is None else float(eps_fp)
    if not 0.0 <= eps_fp <= eps_max:
        raise BoundViolationError(f"eps_fp must lie in [0, {eps_max!r}], got {eps_fp!r}")
    e = (p.l + 1.0) / (p.alpha - p.l)
    x_weight = nodes**e / W
    w_nodes = comparison_bound(p, nodes)

    v = GridFunction(nodes, np.zeros_like(nodes))
    changes: list[float] = []
    bound_ratio = 0.0
    drop = 0.0
    converged = False
    n = 0
    for n in range(1, max_iter + 1):
        forcing = GridFunction(nodes, eps_fp * operator_K(p, v, tail_mode).values)
        v_new = solve_forced_ode(p, forcing, phi, tol=ode_tol)
        bound_ratio = max(bound_ratio, float(np.max(v_new.values / w_nodes)))
        diff = (v_new.values - v.values) * x_weight
        drop = max(drop, float(max(0.0, -diff.min())))
        change = float(np.max(np.abs(diff)))
        changes.append(change)
        v = v_new
        if change <= fp_tol:
            converged = True
            break
    if not converged:
        raise ConvergenceError(f"no convergence after {max_iter} iterations (last change {changes[-1]:.3e})")

    forcing = GridFunction(nodes, eps_fp * operator_K(p, v, tail_mode).values)
    residual = _integro_residual(p, v, forcing)
    g = v.values ** (1.0 / (p.l + 1.0))
    u_vals = _tail_from(p, v, tail_mode)
    t_shift = nodes - 1.0
    return FastSolution(
        v=v,
        u=GridFunction(t_shift, u_vals),
        du=GridFunction(t_shift, -g),
        residual=residual,
        iterations=n,
        eps_fp=eps_fp,
        eps_max=eps_max,
        c_est=c_est,
        phi=phi,
        tail_mode=TailMode(tail_mode),
        changes=changes,
        max_bound_ratio=bound_ratio,
        max_monotone_drop=drop,
    )


def equation_residual(p: Params, sol: FastSolution) -> float:
    """Violation of ``(|u'|^l u')' + |u'|^alpha u' + eps |u|^beta u = 0`` at interior nodes.

    Computed from the reconstructed ``u`` and ``u'`` alone (flux derivative by
    five-point differences in ``log(t + 1)``), and reported in the same
    units as :attr:`FastSolution.residual`.
    """
    gap = p.alpha - p.l
    W = _bound_scale(p)
    tau = sol.du.nodes + 1.0
    s = np.log(tau)
    h = float(np.mean(np.diff(s)))
    du = sol.du.values
    flux = np.abs(du) ** p.l * du
    dflux = _five_point_derivative(flux, h) / tau[2:-2]
    damping = np.abs(du[2:-2]) ** p.alpha * du[2:-2]
    source = sol.eps_fp * np.abs(sol.u.values[2:-2]) ** p.beta * sol.u.values[2:-2]
    r = dflux + damping + source
    return float(np.max(np.abs(_y_weight(p, tau[2:-2]) * r / W)))
