"""Profiles ``a(s)`` defining the quasilinear operator

    Q[u] = div( a(|grad u|) / |grad u| * grad u ),

together with their inverse and the structural checks

    (a1)  a(0) = 0,  a'(s) > 0 for s > 0
    (a2)  a(s) <= C (s^(p-1) + 1)
    (a3)  a(s) >= s^q  on [0, delta].
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, RangeError

__all__ = [
    "AProfile",
    "ConditionResult",
    "ConditionReport",
    "p_laplacian",
    "minimal",
    "custom",
    "evaluate",
    "derivative",
    "inverse",
    "energy_density",
    "check_conditions",
    "profile_from_config",
    "TOL_INV",
]

TOL_INV = 1e-12


@dataclass(frozen=True)
class AProfile:
    kind: str
    a: Callable
    a_prime: Callable
    sup_a: float = math.inf
    growth_p: float = 2.0
    growth_C: float = 1.0
    growth_q: float = 1.0
    delta: float = 1.0
    p: Optional[float] = None
    # closed forms; None means "use the generic numerical route"
    closed_inverse: Optional[Callable] = field(default=None, repr=False)
    closed_energy: Optional[Callable] = field(default=None, repr=False)

    def to_dict(self):
        d = {
            "kind": self.kind,
            "sup_a": self.sup_a if math.isfinite(self.sup_a) else "inf",
            "growth_p": self.growth_p,
            "growth_C": self.growth_C,
            "growth_q": self.growth_q,
            "delta": self.delta,
        }
        if self.p is not None:
            d["p"] = self.p
        return d


def p_laplacian(p):
    """Profile ``a(s) = s^(p-1)`` of the p-Laplacian, ``p > 1``."""
    p = float(p)
    if not p > 1.0:
        raise DomainError(f"p-Laplacian requires p > 1, got {p}")
    e = p - 1.0

    def a(s):
        return np.power(s, e)

    def a_prime(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return e * np.power(s, e - 1.0)

    return AProfile(
        kind="p_laplacian",
        a=a,
        a_prime=a_prime,
        sup_a=math.inf,
        growth_p=p,
        growth_C=1.0,
        growth_q=e,
        delta=1.0,
        p=p,
        closed_inverse=lambda y: np.power(y, 1.0 / e),
        closed_energy=lambda s: np.power(s, p) / p,
    )


def minimal():
    """Minimal hypersurface profile ``a(s) = s / sqrt(1 + s^2)``.

    The (a3) pair ``q = 2, delta = 0.5`` comes from a brute-force scan:
    ``s/sqrt(1+s^2) >= s^2`` holds exactly for ``s^2 (1+s^2) <= 1``,
    i.e. up to ``s ~ 0.786``; ``q = 1`` fails for every ``s > 0``.
    """

    def a(s):
        s = np.asarray(s, dtype=float)
        return s / np.sqrt(1.0 + s * s)

    def a_prime(s):
        s = np.asarray(s, dtype=float)
        return np.power(1.0 + s * s, -1.5)

    def a_inv(y):
        y = np.asarray(y, dtype=float)
        return y / np.sqrt(1.0 - y * y)

    return AProfile(
        kind="minimal",
        a=a,
        a_prime=a_prime,
        sup_a=1.0,
        growth_p=1.0,
        growth_C=1.0,
        growth_q=2.0,
        delta=0.5,
        closed_inverse=a_inv,
        closed_energy=lambda s: np.sqrt(1.0 + np.asarray(s, dtype=float) ** 2) - 1.0,
    )


def custom(a, a_prime, sup_a=math.inf, growth_p=2.0, growth_C=1.0, growth_q=1.0, delta=1.0):
    """Wrap user-supplied ``a`` and ``a'``; both must be given explicitly."""
    if a_prime is None:
        raise DomainError("custom profiles must supply a_prime")
    return AProfile(
        kind="custom",
        a=a,
        a_prime=a_prime,
        sup_a=float(sup_a),
        growth_p=float(growth_p),
        growth_C=float(growth_C),
        growth_q=float(growth_q),
        delta=float(delta),
    )


def _check_nonneg(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("profile argument must be nonnegative")
    return arr


def evaluate(profile, s):
    arr = _check_nonneg(s)
    out = profile.a(arr)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


def derivative(profile, s):
    arr = _check_nonneg(s)
    out = profile.a_prime(arr)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


def _bisect_inverse(a, y, tol):
    lo, hi = 0.0, 1.0
    while float(a(hi)) < y:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise RangeError(f"could not bracket a^-1({y})")
    while True:
        mid = 0.5 * (lo + hi)
        am = float(a(mid))
        if abs(am - y) <= tol or mid in (lo, hi):
            return mid
        if am < y:
            lo = mid
        else:
            hi = mid


def inverse(profile, y, tol=TOL_INV):
    """Return ``s`` with ``a(s) = y``; requires ``0 <= y < sup_a``."""
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("inverse argument must be nonnegative")
    if np.any(arr >= profile.sup_a):
        raise RangeError(
            f"y = {np.max(arr)} is not below sup a = {profile.sup_a}; "
            "the barrier constant is too large for this profile"
        )
    if profile.closed_inverse is not None:
        out = profile.closed_inverse(arr)
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)
    if arr.ndim == 0:
        return _bisect_inverse(profile.a, float(arr), tol)
    return np.array([_bisect_inverse(profile.a, float(v), tol) for v in arr.ravel()]).reshape(arr.shape)


def energy_density(profile, s):
    """``A(s) = int_0^s a``, the convex density whose minimizers solve Q = 0."""
    arr = _check_nonneg(s)
    if profile.closed_energy is not None:
        out = profile.closed_energy(arr)
    else:
        flat = [quad(lambda x: float(profile.a(x)), 0.0, float(v))[0] for v in arr.ravel()]
        out = np.array(flat).reshape(arr.shape)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    worst_margin: float
    worst_at: float


@dataclass(frozen=True)
class ConditionReport:
    a1: ConditionResult
    a2: ConditionResult
    a3: ConditionResult

    @property
    def passed(self):
        return self.a1.passed and self.a2.passed and self.a3.passed

    def to_dict(self):
        return {
            name: {"passed": r.passed, "worst_margin": r.worst_margin, "worst_at": r.worst_at}
            for name, r in (("a1", self.a1), ("a2", self.a2), ("a3", self.a3))
        }


def _worst(margins, nodes, slack):
    if margins.size == 0:
        return ConditionResult(True, math.inf, math.nan)
    i = int(np.argmin(margins))
    return ConditionResult(bool(margins[i] >= -slack[i]), float(margins[i]), float(nodes[i]))


def check_conditions(profile, sample_grid):
    grid = np.asarray(sample_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("sample grid must be nonempty")
    if np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise DomainError("sample grid must be sorted and nonnegative")
    a_vals = np.asarray(profile.a(grid), dtype=float)
    slack = 1e-14 * (1.0 + np.abs(a_vals))

    pos = grid > 0
    a1 = _worst(np.asarray(profile.a_prime(grid[pos]), dtype=float), grid[pos], slack[pos])
    a0 = float(profile.a(0.0))
    if a0 != 0.0:
        a1 = ConditionResult(False, -abs(a0), 0.0)

    with np.errstate(divide="ignore"):
        bound = profile.growth_C * (np.power(grid, profile.growth_p - 1.0) + 1.0)
    a2 = _worst(bound - a_vals, grid, slack)

    win = grid <= profile.delta
    a3 = _worst(a_vals[win] - np.power(grid[win], profile.growth_q), grid[win], slack[win])
    return ConditionReport(a1, a2, a3)


def profile_from_config(cfg):
    """Build a preset from ``{"kind": ..., "p": ...}``."""
    kind = cfg.get("kind", "p_laplacian")
    if kind == "p_laplacian":
        if "p" not in cfg:
            raise DomainError("p_laplacian profile needs p")
        return p_laplacian(cfg["p"])
    if kind == "minimal":
        return minimal()
    raise DomainError(f"unknown profile kind {kind!r}")
