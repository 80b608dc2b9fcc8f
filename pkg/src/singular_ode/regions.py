"""Positively invariant sector trapping slow solutions.

In the coordinates ``z = k |u|^(beta/2) u`` and ``w = |u'|^(l/2) u'`` the
region

    S = { z < 0,  z^2 + w^2 < eps_r^2,  0 < w / |z| < M }

is positively invariant when ``l < alpha < alpha*`` and ``eps_r`` is small.
:func:`region_certificate` samples the field on the three boundary pieces;
:func:`region_invariance_test` integrates initial data from inside ``S``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import fit_decay_exponent
from .errors import DomainError, InsufficientDataError, ValidationError
from .integrator import DEFAULT_TOL, integrate
from .model import Params, alpha_star, fast_energy_exponent, slow_energy_exponent, spow

__all__ = [
    "PhasePoint",
    "RegionSpec",
    "PieceResult",
    "Certificate",
    "InvarianceReport",
    "field_zw",
    "field_coefficient",
    "to_phase",
    "from_phase",
    "radial_component",
    "region_certificate",
    "largest_certified_radius",
    "region_invariance_test",
]


@dataclass(frozen=True)
class PhasePoint:
    z: float
    w: float


@dataclass(frozen=True)
class RegionSpec:
    eps_r: float
    M: float

    def __post_init__(self):
        if not (self.eps_r > 0 and self.M > 0):
            raise ValidationError(f"eps_r and M must be > 0, got {self.eps_r}, {self.M}")

    def violation(self, z, w):
        """Signed distance-like excess outside the closure of the sector (<= 0 inside)."""
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        return np.maximum.reduce([
            z,
            np.hypot(z, w) - self.eps_r,
            -w,
            (w + self.M * z) / math.hypot(1.0, self.M),
        ])


def _position_scale(p: Params) -> float:
    return math.sqrt(p.d * (p.l + 2.0) / ((p.beta + 2.0) * (p.l + 1.0)))


def field_coefficient(p: Params) -> float:
    """``a = d(l+2)/(2(l+1)) * ((beta+2)(l+1)/(d(l+2)))**((beta+1)/(beta+2))``."""
    ratio = (p.beta + 2.0) * (p.l + 1.0) / (p.d * (p.l + 2.0))
    return p.d * (p.l + 2.0) / (2.0 * (p.l + 1.0)) * ratio ** ((p.beta + 1.0) / (p.beta + 2.0))


def to_phase(p: Params, u, du):
    """``(z, w)`` of a state ``(u, u')``; arrays allowed."""
    z = _position_scale(p) * spow(u, p.beta / 2.0 + 1.0)
    w = spow(du, p.l / 2.0 + 1.0)
    return z, w


def from_phase(p: Params, z, w):
    """Inverse of :func:`to_phase`."""
    u = spow(np.asarray(z, dtype=float) / _position_scale(p), 2.0 / (p.beta + 2.0))
    du = spow(w, 2.0 / (p.l + 2.0))
    return u, du


def field_zw(p: Params, pt: PhasePoint) -> tuple[float, float]:
    """Vector field ``(z', w')`` of the equation in the ``(z, w)`` plane (``w != 0`` if ``l > 0``)."""
    z, w = float(pt.z), float(pt.w)
    if w == 0.0 and p.l > 0:
        raise DomainError("w' is singular at w = 0 when l > 0")
    a = field_coefficient(p)
    l2, b2 = p.l + 2.0, p.beta + 2.0
    zb = abs(z) ** (p.beta / b2)
    sw = math.copysign(1.0, w) if w != 0.0 else 0.0
    dz = a * zb * abs(w) ** (2.0 / l2) * sw
    w_neg = abs(w) ** (-p.l / l2) if p.l > 0 else 1.0
    dw = -a * w_neg * zb * z - p.c * l2 / (2.0 * (p.l + 1.0)) * abs(w) ** ((2.0 * p.alpha - p.l + 2.0) / l2) * sw
    return dz, dw


def radial_component(p: Params, pt: PhasePoint) -> float:
    """``z z' + w w'`` evaluated from the field."""
    dz, dw = field_zw(p, pt)
    return pt.z * dz + pt.w * dw


@dataclass(frozen=True)
class PieceResult:
    name: str
    samples: int
    worst_margin: float
    passed: bool


@dataclass(frozen=True)
class Certificate:
    spec: RegionSpec
    exponent_gap: float
    pieces: tuple[PieceResult, ...]

    @property
    def passed(self) -> bool:
        return all(pc.passed for pc in self.pieces)

    def as_dict(self) -> dict:
        return {
            "eps_r": self.spec.eps_r,
            "M": self.spec.M,
            "exponent_gap": self.exponent_gap,
            "passed": self.passed,
            "pieces": [asdict(pc) for pc in self.pieces],
        }


def _check_regime(p: Params) -> None:
    if not (p.l < p.alpha < alpha_star(p)):
        raise DomainError(
            f"the slow-solution sector needs l < alpha < alpha*; got l={p.l}, alpha={p.alpha}, "
            f"alpha*={alpha_star(p)}"
        )


def region_certificate(p: Params, spec: RegionSpec, n_samples: int = 1000) -> Certificate:
    """Sample the field on the boundary of the sector and report per-piece margins.

    Pieces and their (normalized) margins, all required to be positive:

    ``arc``    ``-(z z' + w w') / eps_r`` on the circle of radius ``eps_r``,
    ``ray``    inward component ``-(w' + M z') / (|F| sqrt(1+M^2))`` on
               ``w = M|z|``, ``lambda`` on a log grid
               ``[1e-6 eps_r, eps_r / sqrt(1+M^2)]``,
    ``axis``   ``w' / |F|`` at ``w = 1e-8 M |z|`` for ``|z|`` on a log grid
               ``[1e-6 eps_r, eps_r]``.
    """
    _check_regime(p)
    if n_samples < 2:
        raise ValidationError("n_samples must be >= 2")
    eps, M = spec.eps_r, spec.M
    gap = p.beta / (p.beta + 2.0) - (2.0 * p.alpha - p.l) / (p.l + 2.0)

    psi_max = math.atan(M)
    arc = []
    for j in range(n_samples):
        psi = psi_max * (j + 0.5) / n_samples
        pt = PhasePoint(-eps * math.cos(psi), eps * math.sin(psi))
        arc.append(-radial_component(p, pt) / eps)

    norm = math.hypot(1.0, M)
    ray = []
    for lam in np.geomspace(1e-6 * eps, eps / norm, n_samples):
        dz, dw = field_zw(p, PhasePoint(-lam, M * lam))
        ray.append(-(dw + M * dz) / (math.hypot(dz, dw) * norm))

    axis = []
    for r in np.geomspace(1e-6 * eps, eps, n_samples):
        dz, dw = field_zw(p, PhasePoint(-r, 1e-8 * M * r))
        axis.append(dw / math.hypot(dz, dw))

    pieces = tuple(
        PieceResult(name, n_samples, float(min(vals)), bool(min(vals) > 0.0))
        for name, vals in (("arc", arc), ("ray", ray), ("axis", axis))
    )
    return Certificate(spec, gap, pieces)


def largest_certified_radius(p: Params, M: float, radii, n_samples: int = 1000) -> float | None:
    """Largest entry of ``radii`` whose certificate passes (``None`` if none does)."""
    best = None
    for r in sorted(float(x) for x in radii):
        if region_certificate(p, RegionSpec(r, M), n_samples).passed:
            best = r
    return best


@dataclass(frozen=True)
class InvarianceReport:
    spec: RegionSpec
    T: float
    tol: float
    initial_points: list = field(default_factory=list)
    contained: list = field(default_factory=list)
    max_violation: list = field(default_factory=list)
    exponents: list = field(default_factory=list)
    statuses: list = field(default_factory=list)
    slow_exponent: float | None = None
    fast_exponent: float | None = None

    @property
    def fraction_contained(self) -> float | None:
        return None if not self.contained else sum(self.contained) / len(self.contained)

    @property
    def closer_to_slow(self) -> int:
        """Number of fitted exponents nearer the slow rate than the fast rate."""
        return sum(
            1 for e in self.exponents
            if e is not None and abs(e - self.slow_exponent) < abs(e - self.fast_exponent)
        )

    def as_dict(self) -> dict:
        return {
            "eps_r": self.spec.eps_r,
            "M": self.spec.M,
            "T": self.T,
            "tol": self.tol,
            "fraction_contained": self.fraction_contained,
            "slow_exponent": self.slow_exponent,
            "fast_exponent": self.fast_exponent,
            "closer_to_slow": self.closer_to_slow,
            "runs": [
                {"z0": z0, "w0": w0, "contained": c, "max_violation": v, "exponent": e, "status": s}
                for (z0, w0), c, v, e, s in zip(
                    self.initial_points, self.contained, self.max_violation, self.exponents, self.statuses
                )
            ],
        }


def sample_sector(spec: RegionSpec, n: int, seed: int = 0) -> list[tuple[float, float]]:
    """``n`` points strictly inside the sector, drawn with a fixed seed."""
    rng = np.random.default_rng(seed)
    psi_max = math.atan(spec.M)
    rho = spec.eps_r * rng.uniform(0.05, 0.95, n)
    psi = psi_max * rng.uniform(0.02, 0.98, n)
    return [(float(-r * math.cos(s)), float(r * math.sin(s))) for r, s in zip(rho, psi)]


def region_invariance_test(
    p: Params,
    spec: RegionSpec,
    n_ics: int,
    T: float,
    tol: float = DEFAULT_TOL,
    *,
    seed: int = 0,
    fit_window: tuple[float, float] | None = None,
) -> InvarianceReport:
    """Integrate ``n_ics`` initial points from inside the sector for time ``T``.

    A sample counts as contained when it lies within ``tol * eps_r`` of the
    closed sector. The energy decay exponent of each run is fitted on
    ``fit_window`` (default ``[T/4, T]``) for comparison with the slow and
    fast rates.
    """
    _check_regime(p)
    report = InvarianceReport(
        spec, T, tol, slow_exponent=slow_energy_exponent(p), fast_exponent=fast_energy_exponent(p)
    )
    if n_ics <= 0:
        return report
    window = (T / 4.0, T) if fit_window is None else fit_window
    for z0, w0 in sample_sector(spec, n_ics, seed):
        u0, du0 = from_phase(p, z0, w0)
        traj = integrate(p, float(u0), float(du0), T, tol)
        z, w = to_phase(p, traj.u, traj.du)
        worst = float(np.max(spec.violation(z, w)))
        try:
            expo = fit_decay_exponent((traj.t, traj.E), window).exponent
        except (InsufficientDataError, ValidationError):
            expo = None
        report.initial_points.append((z0, w0))
        report.contained.append(bool(worst <= tol * spec.eps_r))
        report.max_violation.append(worst)
        report.exponents.append(expo)
        report.statuses.append(str(traj.status))
    return report
