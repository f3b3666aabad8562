"""Discrete Dirichlet problems for ``Q[u] = 0`` on 2-D rotationally symmetric
models, plus exact oracles.

Discretization
--------------
Nodes sit on rings ``r_i`` and angles ``t_j = 2 pi j / n_t``.  Each polar cell
is split into two right triangles whose legs follow the coordinate lines; on a
triangle the gradient is taken from the two leg differences

    |grad u|^2 = (du/dr)^2 + (du/dt)^2 / f(r_edge)^2,

and the discrete energy is ``sum_T w_T A(|grad u|_T)`` with ``A' = a`` and
``w_T`` the triangle's share of ``int f dr dt``.  Because each gradient
component is a plain difference of two nodal values, truncating ``u`` at any
level never increases the energy; the unique minimizer therefore satisfies
the discrete maximum and comparison principles exactly.

The pole of a ball is one extra unknown shared by the innermost triangle fan.
"""

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq
from scipy.sparse.linalg import spsolve

from . import barrier as bar
from . import manifold
from . import operator as op
from .errors import DomainError, NonConvergenceError, PreconditionError, RangeError

__all__ = [
    "PolarGrid",
    "DirichletProblem",
    "DiscreteSolution",
    "RadialSolution",
    "CascadeReport",
    "ComparisonResult",
    "SandwichReport",
    "solve_ball",
    "solve_radial",
    "exhaustion_solve",
    "comparison_check_discrete",
    "barrier_sandwich_report",
    "poisson_oracle",
    "hyperbolic_disk_radius",
    "data_continuity",
    "geodesic_signed_distance",
]


@dataclass(frozen=True)
class PolarGrid:
    R: float
    n_r: int
    n_t: int
    wf: manifold.WarpingFunction
    r_in: float = 0.0

    def __post_init__(self):
        if self.n_r < 8:
            raise DomainError("n_r must be >= 8")
        if self.n_t < 4 or self.n_t % 2:
            raise DomainError("n_t must be even and >= 4")
        if not 0.0 <= self.r_in < self.R:
            raise DomainError("need 0 <= r_in < R")

    @property
    def is_ball(self):
        return self.r_in == 0.0

    @property
    def dr(self):
        return (self.R - self.r_in) / self.n_r

    @property
    def dt(self):
        return 2.0 * math.pi / self.n_t

    @property
    def radii(self):
        """Ring radii including the boundary ring(s); for a ball ring 0 is the pole."""
        return self.r_in + self.dr * np.arange(self.n_r + 1)

    @property
    def angles(self):
        return self.dt * np.arange(self.n_t)

    @property
    def n_nodes(self):
        return 1 + self.n_r * self.n_t if self.is_ball else (self.n_r + 1) * self.n_t

    def index(self, i, j):
        """Global index of ring ``i`` and angle ``j`` (ring 0 of a ball is the pole)."""
        j = np.mod(j, self.n_t)
        if self.is_ball:
            return np.where(np.asarray(i) == 0, 0, 1 + (np.asarray(i) - 1) * self.n_t + j)
        return np.asarray(i) * self.n_t + j

    def node_coords(self):
        """``(r, t)`` of every node in global order."""
        r = self.radii
        if self.is_ball:
            rr = np.concatenate([[0.0], np.repeat(r[1:], self.n_t)])
            tt = np.concatenate([[0.0], np.tile(self.angles, self.n_r)])
        else:
            rr = np.repeat(r, self.n_t)
            tt = np.tile(self.angles, self.n_r + 1)
        return rr, tt

    def boundary_mask(self):
        rr, _ = self.node_coords()
        mask = np.isclose(rr, self.R, rtol=0, atol=1e-12 * self.R)
        if not self.is_ball:
            mask |= np.isclose(rr, self.r_in, rtol=0, atol=1e-12 * self.R)
        return mask

    def to_rings(self, u):
        """Reshape a nodal vector to ``(n_rings, n_t)``; a ball's pole row is constant."""
        u = np.asarray(u)
        if self.is_ball:
            return np.vstack([np.full(self.n_t, u[0]), u[1:].reshape(self.n_r, self.n_t)])
        return u.reshape(self.n_r + 1, self.n_t)

    def area_weights(self):
        """Per-cell ``f(r_mid) dr dt``; all positive by construction."""
        r = self.radii
        return self.wf.f(0.5 * (r[:-1] + r[1:])) * self.dr * self.dt


def _operators(grid):
    """Sparse leg-difference operators and triangle weights."""
    n_r, n_t = grid.n_r, grid.n_t
    dr, dt = grid.dr, grid.dt
    r = grid.radii
    f = np.asarray(grid.wf.f(r), dtype=float)
    if grid.is_ball:
        f[0] = 0.0
    ii, jj = np.meshgrid(np.arange(n_r), np.arange(n_t), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    A = grid.index(ii, jj)
    B = grid.index(ii + 1, jj)
    C = grid.index(ii, jj + 1)
    D = grid.index(ii + 1, jj + 1)
    fa, fb = f[ii], f[ii + 1]
    n_cells = ii.size
    N = grid.n_nodes

    inv_fa = np.divide(1.0, fa, out=np.zeros_like(fa), where=fa > 0)
    inv_fb = 1.0 / fb
    rows = np.arange(n_cells)
    # lower triangles: radial leg A->B, angular leg A->C on ring i
    Dr_lo = sp.csr_matrix(
        (np.concatenate([-np.ones(n_cells), np.ones(n_cells)]) / dr, (np.tile(rows, 2), np.concatenate([A, B]))),
        shape=(n_cells, N),
    )
    Dt_lo = sp.csr_matrix(
        (np.concatenate([-inv_fa, inv_fa]) / dt, (np.tile(rows, 2), np.concatenate([A, C]))),
        shape=(n_cells, N),
    )
    # upper triangles: radial leg C->D, angular leg B->D on ring i+1
    Dr_up = sp.csr_matrix(
        (np.concatenate([-np.ones(n_cells), np.ones(n_cells)]) / dr, (np.tile(rows, 2), np.concatenate([C, D]))),
        shape=(n_cells, N),
    )
    Dt_up = sp.csr_matrix(
        (np.concatenate([-inv_fb, inv_fb]) / dt, (np.tile(rows, 2), np.concatenate([B, D]))),
        shape=(n_cells, N),
    )
    Dr = sp.vstack([Dr_lo, Dr_up]).tocsr()
    Dt = sp.vstack([Dt_lo, Dt_up]).tocsr()
    Dr.sum_duplicates()
    Dt.sum_duplicates()
    Dr.eliminate_zeros()
    Dt.eliminate_zeros()
    w = np.concatenate([(2.0 * fa + fb), (fa + 2.0 * fb)]) * dr * dt / 6.0
    # nodal areas: a third of each incident triangle
    tri_nodes = np.concatenate([np.stack([A, B, C], 1), np.stack([D, C, B], 1)])
    mass = np.zeros(N)
    np.add.at(mass, tri_nodes.ravel(), np.repeat(w / 3.0, 3))
    return Dr, Dt, w, mass


@dataclass(frozen=True)
class DirichletProblem:
    wf: manifold.WarpingFunction
    profile: op.AProfile
    boundary: Optional[Callable] = None  # angle -> value on the outer circle
    inner_boundary: Optional[Callable] = None  # annulus only
    asymptotic_data: Optional[Callable] = None
    delta_reg: Optional[float] = None
    max_newton: int = 60
    tol_newton: float = 1e-10
    damping_floor: float = 2.0**-20
    check_preconditions: bool = True


@dataclass
class DiscreteSolution:
    grid: PolarGrid
    u: np.ndarray
    energy: float
    residual_norm: float
    newton_iters: int
    energies: list = field(default_factory=list)
    boundary_min: float = 0.0
    boundary_max: float = 0.0

    @property
    def rings(self):
        return self.grid.to_rings(self.u)

    def max_principle_violation(self):
        """Largest excursion of any node beyond the boundary range (<= 0 means none)."""
        return float(max(np.max(self.u) - self.boundary_max, self.boundary_min - np.min(self.u)))

    def table(self):
        rr, tt = self.grid.node_coords()
        return np.column_stack([rr, tt, self.u])


def _as_callable(data):
    if callable(data):
        return data
    arr = np.asarray(data, dtype=float)
    return lambda t: arr


def _flux_coefficient(profile, s):
    """``a(s)/s`` with the removable value at ``s = 0`` set to 0 (gradient use only)."""
    a = np.asarray(profile.a(s), dtype=float)
    return np.divide(a, s, out=np.zeros_like(a), where=s > 0)


def _check_preconditions(problem, grid):
    report = op.check_conditions(problem.profile, np.linspace(0.0, 10.0, 201))
    if not report.passed:
        raise PreconditionError(f"profile fails structural conditions: {report.to_dict()}")
    rs = np.linspace(grid.R / 1000.0, grid.R, 200)
    cmp = manifold.comparison_check(problem.wf, rs)
    if not cmp.passed:
        raise PreconditionError(f"warping violates the curvature comparison: {cmp.to_dict()}")


def _harmonic_guess(Dr, Dt, w, free, u):
    L = (Dr.T @ sp.diags(w) @ Dr + Dt.T @ sp.diags(w) @ Dt).tocsr()
    Lff = L[free][:, free]
    rhs = -(L @ u)[free]
    out = u.copy()
    out[free] += spsolve(Lff.tocsc(), rhs)
    return out


def solve_ball(problem, grid, initial=None):
    """Minimize the discrete energy with damped Newton.

    Newton steps use a Hessian regularized with ``sqrt(|grad u|^2 + delta^2)``;
    the energy, the line search and the reported residual are unregularized.
    The residual is ``max_i |dE/du_i| / mass_i`` scaled by ``a(range/width)``.
    """
    if problem.check_preconditions:
        _check_preconditions(problem, grid)
    if problem.boundary is None:
        raise DomainError("solve_ball needs boundary values")
    if grid.wf is not problem.wf and grid.wf.to_dict() != problem.wf.to_dict():
        raise DomainError("grid and problem use different warping functions")
    rr, tt = grid.node_coords()
    bmask = grid.boundary_mask()
    u = np.zeros(grid.n_nodes)
    outer = bmask & np.isclose(rr, grid.R)
    u[outer] = _as_callable(problem.boundary)(tt[outer])
    if not grid.is_ball:
        if problem.inner_boundary is None:
            raise DomainError("annulus needs inner boundary values")
        inner = bmask & ~outer
        u[inner] = _as_callable(problem.inner_boundary)(tt[inner])
    bvals = u[bmask]
    b_min, b_max = float(bvals.min()), float(bvals.max())
    data_range = b_max - b_min
    free = np.flatnonzero(~bmask)
    Dr, Dt, w, _ = _operators(grid)
    profile = problem.profile

    def energy(v):
        s = np.hypot(Dr @ v, Dt @ v)
        return float(np.sum(w * op.energy_density(profile, s)))

    if data_range == 0.0:
        u[free] = b_min
        return DiscreteSolution(grid, u, energy(u), 0.0, 0, [energy(u)], b_min, b_max)

    width = grid.R - grid.r_in
    scale = float(profile.a(data_range / width))
    delta = problem.delta_reg if problem.delta_reg is not None else 1e-8 * data_range / grid.R

    def gradient(v):
        gr, gt = Dr @ v, Dt @ v
        phi = _flux_coefficient(profile, np.hypot(gr, gt))
        return Dr.T @ (w * phi * gr) + Dt.T @ (w * phi * gt)

    # Jacobi scaling: nodal correction of the linearization at slope ``range/width``,
    # relative to the data range
    diag = np.asarray(Dr.T.multiply(Dr.T).dot(w) + Dt.T.multiply(Dt.T).dot(w)).ravel()
    node_scale = diag * scale * width

    def residual(g):
        return float(np.max(np.abs(g[free]) / node_scale[free]))

    if initial is not None:
        u[free] = np.asarray(initial, dtype=float)[free]
    else:
        u = _harmonic_guess(Dr, Dt, w, free, u)

    E = energy(u)
    g = gradient(u)
    res = residual(g)
    energies = [E]
    it = 0
    while res > problem.tol_newton:
        if it >= problem.max_newton:
            raise NonConvergenceError(f"Newton did not converge in {it} iterations (residual {res:.3e})", res)
        gr, gt = Dr @ u, Dt @ u
        sd = np.sqrt(gr * gr + gt * gt + delta * delta)
        a_sd = np.asarray(profile.a(sd), dtype=float)
        phi = a_sd / sd
        psi = (np.asarray(profile.a_prime(sd), dtype=float) - phi) / (sd * sd)
        Hrr = sp.diags(w * (phi + psi * gr * gr))
        Htt = sp.diags(w * (phi + psi * gt * gt))
        Hrt = sp.diags(w * psi * gr * gt)
        H = Dr.T @ Hrr @ Dr + Dt.T @ Htt @ Dt + Dr.T @ Hrt @ Dt + Dt.T @ Hrt @ Dr
        H = H.tocsr()[free][:, free].tocsc()
        d = -spsolve(H, g[free])
        slope = float(g[free] @ d)
        step = 1.0
        while True:
            trial = u.copy()
            trial[free] += step * d
            E_new = energy(trial)
            g_new = gradient(trial)
            res_new = residual(g_new)
            armijo = E_new <= E + 1e-4 * step * slope
            # energy differences below roundoff: accept when the residual drops
            flat = abs(E_new - E) <= 1e-13 * max(1.0, abs(E)) and res_new < res
            if armijo or flat:
                break
            step *= 0.5
            if step < problem.damping_floor:
                raise NonConvergenceError(
                    f"line search stalled at iteration {it} (residual {res:.3e})", res
                )
        u, E, g, res = trial, E_new, g_new, res_new
        energies.append(E)
        it += 1
    return DiscreteSolution(grid, u, E, res, it, energies, b_min, b_max)


# -- exact radial reduction ---------------------------------------------------


@dataclass(frozen=True)
class RadialSolution:
    """``u(r) = u_in + int_{r_in}^r a^{-1}(c_flux f(t)^{-n}) dt``, sign-adjusted."""

    profile: op.AProfile
    wf: manifold.WarpingFunction
    n: int
    r_in: float
    r_out: float
    u_in: float
    u_out: float
    c_flux: float
    sign: float

    def slope(self, r):
        r = np.asarray(r, dtype=float)
        return self.sign * op.inverse(self.profile, self.c_flux * np.asarray(self.wf.f(r), dtype=float) ** (-self.n))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        if np.any(flat < self.r_in - 1e-12) or np.any(flat > self.r_out + 1e-12):
            raise DomainError("radius outside [r_in, r_out]")
        order = np.argsort(flat)
        out = np.empty_like(flat)
        acc, prev = self.u_in, self.r_in
        fn = lambda t: float(self.slope(t))  # noqa: E731
        for idx in order:
            x = min(max(flat[idx], self.r_in), self.r_out)
            if x > prev:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", IntegrationWarning)
                    acc += quad(fn, prev, x, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
                prev = x
            out[idx] = acc
        return out.reshape(r.shape) if r.ndim else float(out[0])


def solve_radial(profile, wf, n, r_in, r_out, u_in, u_out):
    """Radial solution of ``Q[u] = 0`` between two spheres.

    For radial ``u``, ``Q[u] = 0`` iff ``f(r)^n a(u'(r)) = c_flux``; the flux is
    found by bracketing root search so that ``u(r_out) = u_out``.
    """
    if not 0.0 < r_in < r_out:
        raise DomainError("need 0 < r_in < r_out")
    if n < 1:
        raise DomainError("n must be >= 1")
    rise = u_out - u_in
    sign = 1.0 if rise >= 0 else -1.0
    rise = abs(rise)
    if rise == 0.0:
        return RadialSolution(profile, wf, n, r_in, r_out, u_in, u_out, 0.0, 1.0)
    f_in = float(wf.f(r_in))
    c_sup = profile.sup_a * f_in**n

    def total(c):
        fn = lambda t: float(op.inverse(profile, c * float(wf.f(t)) ** (-n)))  # noqa: E731
        with warnings.catch_warnings():
            # near the flux limit the integrand is steep; roundoff stalls below 1e-13
            warnings.simplefilter("ignore", IntegrationWarning)
            return quad(fn, r_in, r_out, epsabs=1e-15, epsrel=1e-13, limit=400)[0]

    if math.isfinite(c_sup):
        hi = c_sup * (1.0 - 1e-15)
        best = total(hi)
        if best < rise:
            raise RangeError(
                f"infeasible: radial rise {rise} exceeds the maximal achievable {best:.6g} "
                f"(flux bounded by sup a * f(r_in)^n = {c_sup:.6g})"
            )
    else:
        hi = 1.0
        while total(hi) < rise:
            hi *= 2.0
            if hi > 1e300:
                raise RangeError("could not bracket the flux")
    c = brentq(lambda c: total(c) - rise, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return RadialSolution(profile, wf, n, r_in, r_out, u_in, u_out, c, sign)


# -- oracles ------------------------------------------------------------------


def hyperbolic_disk_radius(r, k=1.0):
    """Euclidean radius in the Poincare disk of a point at hyperbolic distance ``r``."""
    return np.tanh(k * np.asarray(r, dtype=float) / 2.0)


def poisson_oracle(phi, rho, t, rho_boundary=1.0, n_samples=4096):
    """Euclidean harmonic extension of ``phi`` from the circle of radius
    ``rho_boundary``, evaluated by the Fourier form of the Poisson integral."""
    ts = 2.0 * math.pi * np.arange(n_samples) / n_samples
    coeffs = np.fft.rfft(np.asarray(phi(ts), dtype=float)) / n_samples
    m = np.arange(coeffs.size)
    weights = np.where(m == 0, 1.0, 2.0)
    if n_samples % 2 == 0:
        weights[-1] = 1.0
    # modes at roundoff level contribute nothing; skip them
    keep = np.abs(coeffs) > 1e-15 * max(np.max(np.abs(coeffs)), 1e-300)
    m, coeffs, weights = m[keep], coeffs[keep], weights[keep]
    x = np.asarray(rho, dtype=float) / rho_boundary
    t = np.asarray(t, dtype=float)
    x, t = np.broadcast_arrays(x, t)
    out = np.zeros(x.shape)
    for mm, c, wgt in zip(m, coeffs, weights):
        out += wgt * np.real(c * np.exp(1j * mm * t)) * x**mm
    return out


def data_continuity(phi, n_t):
    """Largest jump between adjacent samples at ``n_t`` and ``2 n_t`` angles."""
    out = []
    for n in (n_t, 2 * n_t):
        v = np.asarray(phi(2.0 * math.pi * np.arange(n) / n), dtype=float)
        out.append(float(np.max(np.abs(np.diff(np.append(v, v[0]))))))
    return tuple(out)


# -- exhaustion ---------------------------------------------------------------


@dataclass
class CascadeReport:
    radii: list
    d: list
    iters: list
    residuals: list
    max_principle: list
    tol_cascade: float
    times: list

    @property
    def decreasing(self):
        return all(b < a for a, b in zip(self.d[:-1], self.d[1:]))

    @property
    def converged(self):
        return bool(self.d) and self.d[-1] <= self.tol_cascade

    def to_dict(self):
        return {
            "R_k": self.radii,
            "d_k": self.d,
            "iters": self.iters,
            "residuals": self.residuals,
            "max_principle_ok": self.max_principle,
            "decreasing": self.decreasing,
            "converged": self.converged,
            "tol_cascade": self.tol_cascade,
            "seconds": self.times,
        }


def exhaustion_solve(problem, radii, n_r_per_unit=32, n_t=128, tol_cascade=1e-2, mp_tol=None):
    """Solve on growing balls with boundary data ``phi(angle)`` and compare the
    successive solutions on the smallest ball.

    The asymptotic data is extended radially (constant along rays).  All balls
    share the radial spacing, so the nodes of the first ball are common to
    every grid.  Each ball is warm-started from its own harmonic solve.
    """
    phi = problem.asymptotic_data
    if phi is None:
        raise DomainError("exhaustion_solve needs asymptotic data")
    radii = [float(R) for R in radii]
    if any(b <= a for a, b in zip(radii[:-1], radii[1:])):
        raise DomainError("radii must be increasing")
    mp_tol = problem.tol_newton if mp_tol is None else mp_tol
    sols, iters, resid, mp, times = [], [], [], [], []
    for R in radii:
        n_r = int(round(R * n_r_per_unit))
        grid = PolarGrid(R, n_r, n_t, problem.wf)
        t0 = time.perf_counter()
        sol = solve_ball(DirichletProblem(**{**problem.__dict__, "boundary": phi}), grid)
        times.append(time.perf_counter() - t0)
        sols.append(sol)
        iters.append(sol.newton_iters)
        resid.append(sol.residual_norm)
        mp.append(sol.max_principle_violation() <= mp_tol)
    n_inner = 1 + int(round(radii[0] * n_r_per_unit)) * n_t
    d = [float(np.max(np.abs(b.u[:n_inner] - a.u[:n_inner]))) for a, b in zip(sols[:-1], sols[1:])]
    return sols[-1], CascadeReport(radii, d, iters, resid, mp, tol_cascade, times), sols


@dataclass(frozen=True)
class ComparisonResult:
    ordered: bool
    worst_violation: float
    worst_index: int


def comparison_check_discrete(sol_u, sol_v, tol=1e-10):
    """Verify ``u <= v`` at every node given ``u <= v`` on the boundary."""
    if sol_u.grid.n_nodes != sol_v.grid.n_nodes or sol_u.grid.R != sol_v.grid.R or sol_u.grid.n_t != sol_v.grid.n_t:
        raise DomainError("solutions live on different grids")
    bmask = sol_u.grid.boundary_mask()
    if np.any(sol_u.u[bmask] > sol_v.u[bmask] + tol):
        raise PreconditionError("boundary values of u must not exceed those of v")
    diff = sol_u.u - sol_v.u
    i = int(np.argmax(diff))
    return ComparisonResult(bool(diff[i] <= tol), float(max(diff[i], 0.0)), i)


# -- barrier sandwich ---------------------------------------------------------


def geodesic_signed_distance(r, t, d0, x_angle, k=1.0):
    """Signed distance to the geodesic perpendicular to the ray at angle
    ``x_angle`` at distance ``d0`` from the pole (positive on the far side)."""
    r = np.asarray(r, dtype=float)
    val = np.sinh(k * r) * math.cosh(k * d0) * np.cos(np.asarray(t) - x_angle) - np.cosh(k * r) * math.sinh(k * d0)
    return np.arcsinh(val) / k


@dataclass(frozen=True)
class SandwichReport:
    passed: bool
    worst_slack: float
    worst_node: int
    n_inside: int
    epsilon: float
    window_half_angle: float
    allowance: float

    def to_dict(self):
        return dict(self.__dict__)


def barrier_sandwich_report(solution, spec, d0, x_angle, phi, epsilon=None, allowance=1e-8):
    """Check ``|u(q) - phi(x)| <= eps + Sigma(q)`` on all nodes of ``Omega``.

    ``Omega`` is the side of the geodesic at distance ``d0`` that contains the
    ideal point ``x``; its distance function has ``Laplacian s = k tanh(ks)``
    exactly, so the barrier built from ``spec`` applies verbatim.
    """
    grid = solution.grid
    wf = grid.wf
    if wf.kind != "hyperbolic":
        raise PreconditionError("sandwich report needs the hyperbolic warping")
    if spec.n != 2 or abs(spec.k - wf.k) > 1e-14:
        raise PreconditionError("barrier must be built for dim 2 and the warping's k")
    ts = np.linspace(0.0, 2.0 * math.pi, 4097)
    phi_max = float(np.max(np.abs(phi(ts))))
    if spec.height_C < phi_max:
        raise PreconditionError(f"barrier height {spec.height_C} below max|phi| = {phi_max}")
    half = math.acos(math.tanh(wf.k * d0))
    phi_x = float(phi(np.array([x_angle]))[0])
    if epsilon is None:
        window = x_angle + np.linspace(-half, half, 2001)
        epsilon = float(np.max(np.abs(phi(window) - phi_x)))
    rr, tt = grid.node_coords()
    s = geodesic_signed_distance(rr, tt, d0, x_angle, wf.k)
    inside = s > 0
    if not np.any(inside):
        return SandwichReport(True, math.inf, -1, 0, epsilon, half, allowance)
    sigma = bar.sigma_values(spec, s[inside], np.ones(int(inside.sum()), bool))
    slack = epsilon + sigma - np.abs(solution.u[inside] - phi_x)
    j = int(np.argmin(slack))
    node = int(np.flatnonzero(inside)[j])
    return SandwichReport(bool(slack[j] >= -allowance), float(slack[j]), node, int(inside.sum()), epsilon, half, allowance)
