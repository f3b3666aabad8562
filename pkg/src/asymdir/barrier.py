"""Barrier supersolutions built from the distance ``s`` to a convex complement.

With ``v = g(s)`` and

    g(s) = int_s^inf a^{-1}( c cosh^{1-n}(k t) ) dt

one has ``Q[v] = -(c cosh^{1-n} ks)' - c cosh^{1-n}(ks) * Laplacian(s)``, which
is ``<= 0`` as soon as ``Laplacian(s) >= (n-1) k tanh(ks)``.  The global
barrier is ``Sigma = min(g(s), C)`` inside the set and ``C`` outside.

Symbols: ``height_C`` is the barrier height; ``growth_C`` (on the profile) is
the unrelated constant of the growth condition.
"""

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import operator as op
from .errors import CalibrationError, DomainError, RangeError, VerificationError

__all__ = [
    "BarrierSpec",
    "GValue",
    "ResidualReport",
    "make_spec",
    "tail_bound",
    "tail_validity",
    "tail_cut",
    "g_eval",
    "g_detail",
    "g_values",
    "calibrate_c",
    "sigma_eval",
    "sigma_values",
    "laplacian_lower_bound",
    "verify_supersolution",
    "barrier_table",
]


@dataclass(frozen=True)
class BarrierSpec:
    profile: op.AProfile
    k: float
    n: int
    height_C: float
    c: Optional[float] = None
    abs_tol: float = 1e-10
    rel_tol: float = 1e-12
    tail_cut_T: Optional[float] = None

    def __post_init__(self):
        if self.k <= 0:
            raise DomainError("k must be positive")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError("n = dim M must be an integer >= 2")
        if self.height_C <= 0:
            raise DomainError("barrier height must be positive")
        if self.c is None:
            object.__setattr__(self, "c", float(op.evaluate(self.profile, 2.0 * self.height_C)))
        if not 0.0 < self.c < self.profile.sup_a:
            raise RangeError(f"barrier constant c = {self.c} must lie in (0, sup a = {self.profile.sup_a})")

    @property
    def tau(self):
        """Solution of ``c cosh^{1-n}(k tau) = delta`` (0 when ``delta >= c``)."""
        return _level_time(self, self.profile.delta)

    def with_c(self, c):
        return dataclasses.replace(self, c=float(c))

    def to_dict(self):
        return {
            "profile": self.profile.to_dict(),
            "k": self.k,
            "n": self.n,
            "height_C": self.height_C,
            "c": self.c,
            "tau": self.tau,
            "abs_tol": self.abs_tol,
            "tail_cut_T": tail_cut(self),
        }


def make_spec(profile, k, n, height_C, calibrate=True, **kw):
    spec = BarrierSpec(profile, float(k), int(n), float(height_C), **kw)
    return spec.with_c(calibrate_c(spec)) if calibrate else spec


def _level_time(spec, level):
    if level >= spec.c:
        return 0.0
    return math.acosh((spec.c / level) ** (1.0 / (spec.n - 1))) / spec.k


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _weight(spec, t):
    return spec.c * np.exp((1 - spec.n) * _log_cosh(spec.k * np.asarray(t, dtype=float)))


def _integrand(spec, t):
    return op.inverse(spec.profile, _weight(spec, t))


def _tail_rate(spec):
    return spec.k * (spec.n - 1) / spec.profile.growth_q


def tail_bound(spec, T):
    """Upper bound for ``int_T^inf a^{-1}(c cosh^{1-n} kt) dt``.

    Uses ``a^{-1}(y) <= y^{1/q}`` (valid for ``y <= a(delta)``) and
    ``cosh x >= e^x / 2``.  Only meaningful for ``T >= tail_validity(spec)``.
    """
    q = spec.profile.growth_q
    lam = _tail_rate(spec)
    return (2.0 ** (spec.n - 1) * spec.c) ** (1.0 / q) / lam * math.exp(-lam * T)


def tail_validity(spec):
    """Smallest ``T`` from which the tail bound is certified."""
    return _level_time(spec, float(op.evaluate(spec.profile, spec.profile.delta)))


def tail_cut(spec):
    T_valid = tail_validity(spec)
    if spec.tail_cut_T is not None:
        if spec.tail_cut_T < T_valid:
            raise DomainError(f"tail cut {spec.tail_cut_T} is below the validity threshold {T_valid}")
        return float(spec.tail_cut_T)
    lam = _tail_rate(spec)
    K = tail_bound(spec, 0.0)
    T_abs = math.log(K / (0.01 * spec.abs_tol)) / lam
    return max(T_valid, T_abs)


def _quad_pieces(spec, a, b):
    if b <= a:
        return 0.0
    pieces = max(1, min(64, int(math.ceil((b - a) * spec.k))))
    edges = np.linspace(a, b, pieces + 1)
    fn = lambda t: float(_integrand(spec, t))  # noqa: E731
    total = 0.0
    with warnings.catch_warnings():
        # near-singular integrands (c close to sup a) hit roundoff below 1e-13
        warnings.simplefilter("ignore", IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += quad(fn, lo, hi, epsabs=1e-3 * spec.abs_tol, epsrel=spec.rel_tol, limit=400)[0]
    return total


@dataclass(frozen=True)
class GValue:
    value: float
    quadrature: float
    upper: float
    tail_bound: float


def _upper_limit(spec, s):
    # far enough that the certified tail is negligible relative to the integrand at s
    return max(tail_cut(spec), s + 40.0 / _tail_rate(spec))


def g_detail(spec, s):
    if s < 0:
        raise DomainError("g is defined for s >= 0")
    U = _upper_limit(spec, float(s))
    qv = _quad_pieces(spec, float(s), U)
    return GValue(qv, qv, U, tail_bound(spec, U))


def g_eval(spec, s):
    return g_detail(spec, s).value


def g_values(spec, s):
    """Vectorized ``g`` by cumulative quadrature between sorted nodes."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("g is defined for s >= 0")
    flat = s.ravel()
    order = np.argsort(flat)
    nodes = flat[order]
    out = np.empty_like(nodes)
    if nodes.size == 0:
        return out.reshape(s.shape)
    top = nodes[-1]
    acc = g_eval(spec, top)
    out[-1] = acc
    for i in range(nodes.size - 2, -1, -1):
        if nodes[i] != nodes[i + 1]:
            acc += _quad_pieces(spec, nodes[i], nodes[i + 1])
        out[i] = acc
    res = np.empty_like(out)
    res[order] = out
    return res.reshape(s.shape)


def calibrate_c(spec, growth=2.0, max_scan=2000):
    """Smallest ``c`` (scan from ``a(2C)`` then bisection) with ``g(0) >= 2C``."""
    target = 2.0 * spec.height_C
    sup = spec.profile.sup_a
    c0 = spec.c if spec.c is not None else float(op.evaluate(spec.profile, target))

    def g0(c):
        return g_eval(spec.with_c(c), 0.0)

    best = g0(c0)
    if best >= target:
        return c0
    lo, hi = c0, None
    for j in range(1, max_scan):
        if math.isfinite(sup):
            c = sup - (sup - c0) * growth ** (-j)
            if c >= sup * (1.0 - 1e-12):
                break
        else:
            c = c0 * growth**j
            if c > 1e300:
                break
        val = g0(c)
        best = max(best, val)
        if val >= target:
            hi = c
            break
        lo = c
    if hi is None:
        raise CalibrationError(
            f"no admissible c below sup a = {sup}: sup of achievable g(0) ~ {best:.6g} < {target}",
            best_value=best,
        )
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if g0(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def sigma_eval(spec, dist):
    if dist is None or (isinstance(dist, str) and dist == "outside"):
        return spec.height_C
    return min(g_eval(spec, float(dist)), spec.height_C)


def sigma_values(spec, dist, inside):
    """Vectorized barrier: ``min(g(dist), C)`` where ``inside``, else ``C``."""
    dist = np.asarray(dist, dtype=float)
    inside = np.asarray(inside, dtype=bool)
    out = np.full(dist.shape, float(spec.height_C))
    if np.any(inside):
        out[inside] = np.minimum(g_values(spec, dist[inside]), spec.height_C)
    return out


def laplacian_lower_bound(spec, s):
    return (spec.n - 1) * spec.k * np.tanh(spec.k * np.asarray(s, dtype=float))


@dataclass(frozen=True)
class ResidualReport:
    s: np.ndarray
    residual: np.ndarray
    tol: float
    max_residual: float
    worst_at: float
    fd_max_deviation: float
    fd_tol: float

    @property
    def passed(self):
        fd_ok = not (self.fd_max_deviation > self.fd_tol)
        return bool(self.max_residual <= self.tol and fd_ok)

    def to_dict(self):
        return {
            "passed": self.passed,
            "max_residual": self.max_residual,
            "worst_at": self.worst_at,
            "tol": self.tol,
            "fd_max_deviation": self.fd_max_deviation,
            "fd_tol": self.fd_tol,
        }


def _fd_operator(spec, s, lap):
    """``-F' - lap * F`` with ``F = a(|g'|)`` from central differences of ``g``."""
    h = np.minimum(1e-3, s / 4.0)
    pts = np.concatenate([s - 2 * h, s - h, s, s + h, s + 2 * h])
    gv = g_values(spec, pts).reshape(5, -1)
    gm2, gm1, _, gp1, gp2 = gv
    a = spec.profile.a
    F_minus = a(np.abs((gv[2] - gm2) / (2 * h)))
    F_plus = a(np.abs((gp2 - gv[2]) / (2 * h)))
    F_mid = a(np.abs((gp1 - gm1) / (2 * h)))
    return -(F_plus - F_minus) / (2 * h) - lap * F_mid


def verify_supersolution(spec, grid, laplacian=None, strict=True, fd_check=True):
    """Residual ``Q[v]`` of ``v = g(s)`` on a grid of distances.

    ``laplacian`` (callable ``s -> Laplacian(s)``) defaults to the comparison
    lower bound ``(n-1) k tanh(ks)``.  ``Q[v] <= tol`` at every node is
    required; the finite-difference route recomputes ``Q[v]`` from ``g``
    itself and must agree with the analytic one.
    """
    s = np.asarray(grid, dtype=float)
    if s.size == 0 or np.any(s <= 0):
        raise DomainError("grid must lie in (0, inf)")
    k, n, c = spec.k, spec.n, spec.c
    lap = laplacian_lower_bound(spec, s) if laplacian is None else np.asarray(laplacian(s), dtype=float) + 0.0 * s
    ks = k * s
    w = _weight(spec, s)  # c cosh^{1-n}(ks)
    flux_drop = (n - 1) * c * k * np.exp(-n * _log_cosh(ks)) * np.sinh(ks)
    residual = flux_drop - w * lap
    tol = 1e-10 * c * k
    i = int(np.argmax(residual))
    fd_dev, fd_tol = math.nan, 1e-4 * c * k
    if fd_check:
        fd = _fd_operator(spec, s, lap)
        fd_dev = float(np.max(np.abs(fd - residual)))
    report = ResidualReport(s, residual, tol, float(residual[i]), float(s[i]), fd_dev, fd_tol)
    if strict and not report.passed:
        raise VerificationError(
            f"supersolution check failed: residual {report.max_residual:.3e} at s = {report.worst_at:.6g}"
            f" (fd deviation {fd_dev:.3e})",
            report,
        )
    return report


def barrier_table(spec, s_grid):
    """Rows ``(s, g(s), Sigma(s), residual)`` for CSV export."""
    s = np.asarray(s_grid, dtype=float)
    g = g_values(spec, s)
    res = verify_supersolution(spec, s[s > 0], strict=False, fd_check=False).residual
    resid = np.full(s.shape, math.nan)
    resid[s > 0] = res
    return np.column_stack([s, g, np.minimum(g, spec.height_C), resid])
