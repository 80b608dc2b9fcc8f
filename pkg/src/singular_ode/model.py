"""Parameters and closed-form quantities of the equation

    (|u'|^l u')' + c |u'|^alpha u' + d |u|^beta u = 0.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError

__all__ = [
    "REL_TOL",
    "Params",
    "Regime",
    "alpha_star",
    "critical_c0",
    "classify_theoretical",
    "energy",
    "asymptotic_constants",
    "comparison_bound",
    "fast_energy_exponent",
    "slow_energy_exponent",
    "spow",
    "apow",
]

#: relative tolerance for equality with the thresholds alpha* and c0
REL_TOL = 1e-12


def apow(x, e):
    """|x|**e, elementwise for arrays."""
    return np.abs(x) ** e


def spow(x, e):
    """sign(x) * |x|**e with sign(0) = 0, elementwise for arrays."""
    return np.sign(x) * np.abs(x) ** e


@dataclass(frozen=True)
class Params:
    """Coefficients ``(l, alpha, beta, c, d)`` of the equation."""

    l: float
    alpha: float
    beta: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("l", "alpha", "beta", "c", "d"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be a finite real, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.l < 0:
            raise InvalidParameterError(f"l must be >= 0, got {self.l}")
        for name in ("alpha", "beta", "c", "d"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def well_posed(self) -> bool:
        """Uniqueness regime ``l <= min(alpha, beta)``."""
        return self.l <= min(self.alpha, self.beta)

    @property
    def strict_gap(self) -> bool:
        """Decay-rate regime ``l < alpha``."""
        return self.l < self.alpha

    def replace(self, **changes) -> "Params":
        fields = asdict(self)
        fields.update(changes)
        return Params(**fields)

    def as_dict(self) -> dict:
        return asdict(self)


class Regime(str, enum.Enum):
    OSCILLATORY = "Oscillatory"
    NON_OSCILLATORY = "NonOscillatoryFiniteZeros"
    CRITICAL = "CriticalAtMostOneZero"
    OUTSIDE = "OutsideTheory"

    def __str__(self) -> str:
        return self.value


def alpha_star(p: Params) -> float:
    """Critical damping exponent ``(beta*(l+1) + l) / (beta + 2)``."""
    return (p.beta * (p.l + 1.0) + p.l) / (p.beta + 2.0)


def critical_c0(p: Params) -> float:
    """Critical damping coefficient at ``alpha = alpha_star``.

    Returns ``(beta+2) * ((beta+2)(l+1) / ((beta+1)(l+2)))**((beta+1)/(beta+2)) * d**(1/(beta+2))``.
    The d-dependence is the one forced by the scaling ``u -> lambda*u``,
    under which the oscillation property is invariant; for ``d = 1`` it is
    the textbook constant ``3 * (3/4)**(2/3)`` (l = 0, beta = 1).
    """
    b = p.beta
    core = (b + 2.0) * (p.l + 1.0) / ((b + 1.0) * (p.l + 2.0))
    return (b + 2.0) * core ** ((b + 1.0) / (b + 2.0)) * p.d ** (1.0 / (b + 2.0))


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=0.0)


def classify_theoretical(p: Params) -> Regime:
    """Regime predicted from the parameters alone, without integrating."""
    if not (p.l < p.alpha and p.l <= p.beta):
        return Regime.OUTSIDE
    a_star = alpha_star(p)
    if _close(p.alpha, a_star):
        c0 = critical_c0(p)
        if p.c < c0 and not _close(p.c, c0):
            return Regime.OSCILLATORY
        return Regime.CRITICAL
    if p.alpha > a_star:
        return Regime.OSCILLATORY
    return Regime.NON_OSCILLATORY


def energy(p: Params, u, du):
    """``(l+1)/(l+2) |du|^(l+2) + d/(beta+2) |u|^(beta+2)``; works on arrays."""
    return (p.l + 1.0) / (p.l + 2.0) * apow(du, p.l + 2.0) + p.d / (p.beta + 2.0) * apow(u, p.beta + 2.0)


def fast_energy_exponent(p: Params) -> float:
    """Exponent of the fast decay ``E ~ t**(-(l+2)/(alpha-l))``."""
    if not p.strict_gap:
        raise DomainError("fast decay exponent needs l < alpha")
    return -(p.l + 2.0) / (p.alpha - p.l)


def slow_energy_exponent(p: Params) -> float:
    """Exponent of the slow decay ``E ~ t**(-(alpha+1)(beta+2)/(beta-alpha))``."""
    if not p.alpha < p.beta:
        raise DomainError("slow decay exponent needs alpha < beta")
    return -(p.alpha + 1.0) * (p.beta + 2.0) / (p.beta - p.alpha)


def asymptotic_constants(p: Params) -> tuple[float, float]:
    """Limits ``(K_u, K_du)`` of ``t**((1-alpha+l)/(alpha-l)) |u|`` and ``t**(1/(alpha-l)) |u'|``
    along fast solutions.
    """
    if not (p.l < p.alpha < alpha_star(p)):
        raise DomainError(
            f"asymptotic constants need l < alpha < alpha*; got l={p.l}, alpha={p.alpha}, "
            f"alpha*={alpha_star(p)}"
        )
    gap = p.alpha - p.l
    if not gap < 1.0:
        raise DomainError("asymptotic constants need alpha < l + 1")
    k_du = ((p.l + 1.0) / (p.c * gap)) ** (1.0 / gap)
    k_u = gap / (1.0 - gap) * k_du
    return k_u, k_du


def comparison_bound(p: Params, t):
    """Super-solution ``((l+2)/(alpha-l))**((l+1)/(alpha-l)) * t**(-(l+1)/(alpha-l))``, t >= 1."""
    if not p.strict_gap:
        raise DomainError("comparison bound needs l < alpha")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 1.0):
        raise DomainError("comparison bound is defined for t >= 1")
    gap = p.alpha - p.l
    expo = (p.l + 1.0) / gap
    out = ((p.l + 2.0) / gap) ** expo * t_arr ** (-expo)
    return float(out) if out.ndim == 0 else out
