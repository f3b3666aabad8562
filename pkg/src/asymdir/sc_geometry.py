"""Rotationally symmetric hypersurfaces ``S_R`` and their convexity.

The generating curve solves

    r'(t)     = cosh(kR) sin(theta(t))
    theta'(t) = k sinh(kR) / sinh(k r(t))^2,     r(0) = R, theta(0) = 0,

and conserves ``cos(theta) tanh(k r) = tanh(kR)``.  In the hyperbolic metric
``S_R`` is totally geodesic; for any warping with curvature ``<= -k^2`` its
second fundamental form with respect to the normal

    N = -f theta' d/dr + (r'/f) d/dtheta_n

is nonnegative.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import manifold
from .errors import DomainError, IntegratorError, PreconditionError

__all__ = [
    "SRCurve",
    "ConvexityCertificate",
    "vector_field",
    "integrate_sr_ode",
    "curve_state",
    "embed_sr",
    "second_fundamental_form",
    "certify_convexity",
    "sc_witness",
    "asymptotic_angle",
]


def vector_field(R, k):
    ch, sh = math.cosh(k * R), math.sinh(k * R)

    def rhs(t, y):
        r, th = y
        return [ch * math.sin(th), k * sh / math.sinh(k * r) ** 2]

    return rhs


def asymptotic_angle(R, k):
    """Limit of ``|theta(t)|`` as ``t -> +-inf``: ``arccos(tanh kR)``."""
    return math.acos(math.tanh(k * R))


@dataclass(frozen=True)
class SRCurve:
    R: float
    k: float
    t: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    r_prime: np.ndarray
    theta_prime: np.ndarray
    t_span: tuple
    integrator_tol: float
    residual: np.ndarray
    _branches: tuple = field(repr=False, compare=False, default=())

    @property
    def max_residual(self):
        return float(np.max(np.abs(self.residual)))

    def table(self):
        """Rows ``(t, r, theta, residual)`` for CSV export."""
        return np.column_stack([self.t, self.r, self.theta, self.residual])


def _first_integral_residual(R, k, r, theta):
    return np.cos(theta) * np.tanh(k * r) - math.tanh(k * R)


def integrate_sr_ode(R, k, t_span=None, tol=1e-10, samples=2001):
    """Integrate both branches from ``t = 0`` with an adaptive 8(5,3) Runge-Kutta pair.

    The first integral is monitored, never enforced.
    """
    if R <= 0 or k <= 0:
        raise DomainError("R and k must be positive")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if t_span is None:
        t_span = (-20.0 / k, 20.0 / k)
    t_min, t_max = float(t_span[0]), float(t_span[1])
    if not t_min <= 0.0 <= t_max:
        raise DomainError("t_span must contain 0")
    rhs = vector_field(R, k)
    branches = []
    for end in (t_max, t_min):
        if end == 0.0:
            branches.append(None)
            continue
        sol = solve_ivp(rhs, (0.0, end), [R, 0.0], method="DOP853", rtol=tol, atol=tol * 1e-2, dense_output=True)
        if not sol.success:
            raise IntegratorError(f"integration to t = {end} failed: {sol.message}")
        branches.append(sol.sol)

    t = np.linspace(t_min, t_max, samples)
    if not np.any(t == 0.0):
        t = np.sort(np.append(t, 0.0))
    r, th = _interpolate(branches, t, R)
    ch, sh = math.cosh(k * R), math.sinh(k * R)
    rp = ch * np.sin(th)
    thp = k * sh / np.sinh(k * r) ** 2
    res = _first_integral_residual(R, k, r, th)
    curve = SRCurve(R, k, t, r, th, rp, thp, (t_min, t_max), tol, res, tuple(branches))
    worst = curve.max_residual
    if worst > 10 * tol:
        raise IntegratorError(f"first integral drift {worst:.3e} exceeds {10 * tol:.1e}", worst)
    return curve


def _interpolate(branches, t, R):
    t = np.asarray(t, dtype=float)
    fwd, bwd = branches
    r = np.full(t.shape, float(R))
    th = np.zeros(t.shape)
    for mask, sol in ((t > 0, fwd), (t < 0, bwd)):
        if np.any(mask):
            y = sol(t[mask])
            r[mask], th[mask] = y[0], y[1]
    return r, th


def curve_state(curve, t):
    """``(r, theta, r', theta')`` at parameter ``t`` (dense output)."""
    t = float(t)
    lo, hi = curve.t_span
    if not lo <= t <= hi:
        raise DomainError(f"t = {t} outside span {curve.t_span}")
    rr, tt = _interpolate(curve._branches, np.array([t]), curve.R)
    r, th = float(rr[0]), float(tt[0])
    k, R = curve.k, curve.R
    return r, th, math.cosh(k * R) * math.sin(th), k * math.sinh(k * R) / math.sinh(k * r) ** 2


def embed_sr(curve, angles, t):
    """Point of ``S_R`` in ambient coordinates for ``(t, theta_1..theta_{n-1})``."""
    r, th, _, _ = curve_state(curve, t)
    return manifold.spherical_to_cartesian(r, list(np.atleast_1d(angles)) + [th])


def second_fundamental_form(wf, curve, t, sphere_angle=math.pi / 2, n=3, normalized=False):
    """Unnormalized ``(h_TT, [h_11, ..., h_{n-1,n-1}])`` of ``S_R`` at parameter ``t``.

    ``h_TT = f theta' (f f_r theta'^2 - r'') + (r'/f) (f^2 theta')'`` and
    ``h_ii = f^2 P_i (f_r theta' - (r'/f) cot theta)``, where ``theta = theta(t)``
    is the polar angle of the point and ``P_i`` is the product of ``sin^2`` of
    the angles ``theta_{i+1}..theta_n``.  The intermediate sphere angles are all
    set to ``sphere_angle``.  ``r' cot(theta)`` is evaluated as
    ``cosh(kR) cos(theta)`` so the formula is regular at ``t = 0``.

    With ``normalized=True`` the values are divided by ``|T|^2 |N|`` and
    ``|V_i|^2 |N|`` (note ``|N| = |T|``): the sign is unchanged, but the
    ``f^2`` growth that amplifies integrator error far out on the curve is
    removed.
    """
    s_ang = math.sin(sphere_angle)
    if abs(s_ang) < 1e-12:
        raise DomainError("sphere angle at 0 or pi: coordinate frame degenerates")
    if n < 1:
        raise DomainError("n must be >= 1")
    k, R = curve.k, curve.R
    r, th, rp, thp = curve_state(curve, t)
    ch = math.cosh(k * R)
    f = float(wf.f(r))
    fr = float(wf.f_prime(r))
    rpp = ch * math.cos(th) * thp
    thpp = -2.0 * rp * thp * k / math.tanh(k * r)
    d_f2thp = 2.0 * f * fr * rp * thp + f * f * thpp
    h_tt = f * thp * (f * fr * thp * thp - rpp) + (rp / f) * d_f2thp
    bracket = fr * thp - ch * math.cos(th) / f
    if normalized:
        norm_T = math.hypot(rp, f * thp)
        return h_tt / norm_T**3, [bracket / norm_T] * (n - 1)
    h_ii = []
    for i in range(1, n):
        P = math.sin(th) ** 2 * s_ang ** (2 * (n - 1 - i))
        h_ii.append(f * f * P * bracket)
    return h_tt, h_ii


@dataclass(frozen=True)
class ConvexityCertificate:
    wf: manifold.WarpingFunction
    curve: SRCurve
    min_h_TT: float
    min_h_ii: float
    raw_min_h_TT: float
    raw_min_h_ii: float
    grid: dict
    tol: float

    @property
    def verdict(self):
        return "pass" if self.min_h_TT >= -self.tol and self.min_h_ii >= -self.tol else "fail"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "min_h_TT": self.min_h_TT,
            "min_h_ii": self.min_h_ii,
            "raw_min_h_TT": self.raw_min_h_TT,
            "raw_min_h_ii": self.raw_min_h_ii,
            "tol": self.tol,
            "R": self.curve.R,
            "k": self.curve.k,
            "warping": self.wf.to_dict(),
            "grid": self.grid,
        }


def certify_convexity(wf, R, k, t_grid, angle_grid, tol=1e-8, n=3, integrator_tol=1e-10):
    """Evaluate the second fundamental form over ``t_grid x angle_grid``.

    The verdict uses the normalized scalars; raw minima are kept for reference.
    Rejects warpings failing the comparison inequalities on the radii the
    curve visits.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    angle_grid = np.asarray(angle_grid, dtype=float)
    span = (min(0.0, float(t_grid.min())), max(0.0, float(t_grid.max())))
    curve = integrate_sr_ode(R, k, span, integrator_tol)
    r_hi = float(np.nanmax(curve.r[np.isfinite(curve.r)])) if np.any(np.isfinite(curve.r)) else R
    cmp_grid = np.linspace(min(R, r_hi) * 1e-3, max(r_hi, R), 1000)
    report = manifold.comparison_check(wf, cmp_grid)
    if not report.passed:
        raise PreconditionError(f"warping violates the curvature comparison: {report.to_dict()}")
    mins = np.full(4, math.inf)  # normalized TT, ii; raw TT, ii
    for t in t_grid:
        for ang in angle_grid:
            for j, normalized in ((0, True), (2, False)):
                h_tt, h_ii = second_fundamental_form(wf, curve, t, ang, n, normalized)
                mins[j] = min(mins[j], h_tt)
                if h_ii:
                    mins[j + 1] = min(mins[j + 1], min(h_ii))
    grid = {
        "t_min": float(t_grid.min()),
        "t_max": float(t_grid.max()),
        "n_t": int(t_grid.size),
        "angle_min": float(angle_grid.min()),
        "angle_max": float(angle_grid.max()),
        "n_angle": int(angle_grid.size),
        "n": n,
    }
    return ConvexityCertificate(wf, curve, *map(float, mins), grid, tol)


def sc_witness(wf, k, alpha, t_span=None, tol=1e-10):
    """Radius ``R = artanh(cos alpha)/k`` whose ``S_R`` has asymptotic half-angle ``alpha``."""
    if not 0.0 < alpha < math.pi / 2:
        raise DomainError("alpha must lie in (0, pi/2)")
    R = math.atanh(math.cos(alpha)) / k
    return R, integrate_sr_ode(R, k, t_span, tol)
