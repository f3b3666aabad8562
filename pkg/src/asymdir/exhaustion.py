"""Scalar skeleton of the convex exhaustion schedule.

The geometric sets of the construction are not represented.  What is
computed are the quantities every claim about them reduces to:

* the bump ``phi`` (quintic smoothstep on ``[1/2, 1]``) and its bound ``L``;
* ``m = max_{R>=1} e^{-kR} R^{1+eps}`` and ``beta = k / (2L (m(k+1) + coth(k/2)))``;
* step sizes ``eps_R = beta R^{1+eps} e^{-kR}`` and the radius recursion
  ``r_{n+1} = r_n + eps_n``;
* viewing half-angles ``theta_R = arcsin(sinh k / sinh kR) <= C_ang e^{-kR}``
  with ``C_ang = 8 sinh k``, and the resulting angle budget.

For realistic parameters ``r_0`` is in the thousands and ``eps_n`` underflows
double precision, so the tail of the recursion is accounted for with
integral bounds instead of being iterated.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, PreconditionError

__all__ = [
    "BumpFunction",
    "ExhaustionSchedule",
    "build_bump",
    "compute_m",
    "compute_beta",
    "epsilon_step",
    "log_epsilon_step",
    "hessian_certificate",
    "r_tilde",
    "c_ang",
    "theta_R",
    "bucket_bound",
    "bucket_series",
    "log10_steps_upper",
    "run_schedule",
    "choose_r0",
]


# -- bump -------------------------------------------------------------------


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


@dataclass(frozen=True)
class BumpFunction:
    kind: str
    L: float
    max_d1: float
    max_d2: float

    def eval(self, rho):
        return _smoothstep(2.0 * np.asarray(rho, dtype=float) - 1.0)

    def d1(self, rho):
        x = np.asarray(2.0 * np.asarray(rho, dtype=float) - 1.0)
        inside = (x > 0) & (x < 1)
        return np.where(inside, 2.0 * 30.0 * x * x * (1.0 - x) ** 2, 0.0)

    def d2(self, rho):
        x = np.asarray(2.0 * np.asarray(rho, dtype=float) - 1.0)
        inside = (x > 0) & (x < 1)
        return np.where(inside, 4.0 * 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x), 0.0)


def build_bump(grid_points=10_000):
    """Quintic smoothstep rescaled to ``[1/2, 1]``; ``L = max(max|phi'|, max|phi''|)``.

    ``max|phi'| = 2 * 15/8`` at ``rho = 3/4``; ``max|phi''| = 4 * 10/sqrt(3)`` at
    ``x = (3 +- sqrt 3)/6`` of the unit smoothstep.  Both are cross-checked on a grid.
    """
    d1 = 2.0 * 15.0 / 8.0
    d2 = 4.0 * 10.0 / math.sqrt(3.0)
    bump = BumpFunction("quintic_smoothstep", max(d1, d2), d1, d2)
    rho = np.linspace(0.0, 1.5, grid_points)
    if np.max(np.abs(bump.d1(rho))) > d1 * (1 + 1e-12) or np.max(np.abs(bump.d2(rho))) > d2 * (1 + 1e-12):
        raise AssertionError("bump derivative bound violated on grid")
    return bump


# -- constants ----------------------------------------------------------------


def compute_m(k, eps):
    if k <= 0 or eps <= 0:
        raise DomainError("k and eps must be positive")
    R = max(1.0, (1.0 + eps) / k)
    return math.exp(-k * R) * R ** (1.0 + eps)


def compute_beta(k, L, eps):
    if k <= 0 or L <= 0:
        raise DomainError("k and L must be positive")
    m = compute_m(k, eps)
    return k / (2.0 * L * (m * (k + 1.0) + 1.0 / math.tanh(k / 2.0)))


def log_epsilon_step(beta, k, eps, R):
    return math.log(beta) + (1.0 + eps) * math.log(R) - k * R


def epsilon_step(beta, k, eps, R):
    if R <= 0:
        raise DomainError("R must be positive")
    if beta == 0:
        return 0.0
    return math.exp(log_epsilon_step(beta, k, eps, R))


def hessian_certificate(k, L, eps, beta, R, a_R):
    """Lower bound ``k(1 - e L) - e L a_R coth(k/2) - e L`` with ``e = eps_R``.

    Requires ``k <= a_R <= e^{kR} / R^{1+eps}``.
    """
    if a_R < k:
        raise PreconditionError(f"a_R = {a_R} < k = {k}: curvature is not below -k^2")
    log_cap = k * R - (1.0 + eps) * math.log(R)
    if math.log(a_R) > log_cap + 1e-12:
        raise PreconditionError(f"a_R = {a_R} exceeds e^(kR)/R^(1+eps) = {math.exp(log_cap)}")
    e = epsilon_step(beta, k, eps, R)
    lower = k * (1.0 - e * L) - e * L * a_R / math.tanh(k / 2.0) - e * L
    return lower, bool(lower >= k / 2.0 - 1e-12)


# -- viewing angle ------------------------------------------------------------


def c_ang(k):
    return 8.0 * math.sinh(k)


def r_tilde(k):
    """Smallest radius with ``sinh^2(k r) >= 4 sinh^2(k)/3`` and ``r >= ln 2 / (2k)``."""
    return max(math.asinh(2.0 * math.sinh(k) / math.sqrt(3.0)) / k, math.log(2.0) / (2.0 * k))


def _log_sinh(x):
    return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0)


def theta_R(k, R):
    """``arcsin(sinh k / sinh kR)``, checked against both of its upper bounds."""
    if R < r_tilde(k) * (1.0 - 1e-12):
        raise DomainError(f"R = {R} below the validity radius {r_tilde(k)}")
    x = math.exp(math.log(math.sinh(k)) - _log_sinh(k * R))
    theta = math.asin(x)
    if theta > 2.0 * x * (1 + 1e-14) or theta > c_ang(k) * math.exp(-k * R) * (1 + 1e-14):
        raise AssertionError("viewing-angle bound violated")
    return theta


# -- angle budget -------------------------------------------------------------


def bucket_series(r0, eps, terms=10_000):
    """Upper bound for ``sum_{n>=0} (r0+n)^{-(1+eps)}``: partial sum plus integral tail."""
    n = np.arange(terms, dtype=float)
    partial = float(np.sum((r0 + n) ** (-(1.0 + eps))))
    return partial + (r0 + terms - 1.0) ** (-eps) / eps


def bucket_bound(k, eps, beta, r0, terms=10_000):
    """``(C_ang e / beta) sum_n (r0+n)^{-(1+eps)}``."""
    return c_ang(k) * math.e / beta * bucket_series(r0, eps, terms)


def log10_steps_upper(beta, k, eps, a, b):
    """``log10`` of ``1 + int_a^b dr / eps(r)``, an upper bound on the number of
    recursion steps needed to go from ``a`` past ``b`` when ``eps`` is
    decreasing on ``[a, b]``."""
    if b <= a:
        return 0.0
    # int_a^b e^{kr} / (beta r^{1+eps}) dr = e^{kb}/beta * int_a^b e^{-k(b-r)} r^{-(1+eps)} dr
    inner = quad(lambda r: math.exp(-k * (b - r)) * r ** (-(1.0 + eps)), a, b, epsrel=1e-12, limit=200)[0]
    log_int = k * b - math.log(beta) + math.log(inner)
    return float(np.logaddexp(0.0, log_int) / math.log(10.0))


@dataclass(frozen=True)
class ExhaustionSchedule:
    k: float
    eps: float
    alpha: float
    r0: float
    L: float
    beta: float
    m: float
    C_ang: float
    r_tilde: float
    steps: np.ndarray  # columns n, r_n, eps_n, theta_bound_n, partial direct budget
    direct_sum: float
    direct_tail: float
    bucket_bound: float
    reached_stop: bool
    stop_reason: str
    r_stop: float
    log10_steps_to_stop: float
    bucket_counts: dict = field(default_factory=dict)

    @property
    def direct_budget(self):
        return self.direct_sum + self.direct_tail

    @property
    def angle_budget(self):
        return self.bucket_bound

    @property
    def admissible(self):
        return self.direct_budget <= self.bucket_bound <= self.alpha

    @property
    def converged_r0(self):
        return self.bucket_bound <= self.alpha

    def constants(self):
        return {
            "k": self.k,
            "eps": self.eps,
            "alpha": self.alpha,
            "r0": self.r0,
            "L": self.L,
            "beta": self.beta,
            "m": self.m,
            "C_ang": self.C_ang,
            "r_tilde": self.r_tilde,
            "direct_sum": self.direct_sum,
            "direct_tail": self.direct_tail,
            "direct_budget": self.direct_budget,
            "bucket_bound": self.bucket_bound,
            "admissible": self.admissible,
            "executed_steps": int(self.steps.shape[0]),
            "reached_stop": self.reached_stop,
            "stop_reason": self.stop_reason,
            "r_stop": self.r_stop,
            "log10_steps_to_stop_upper": self.log10_steps_to_stop,
        }


def _direct_tail(k, eps, beta, r, e_max):
    """Bound on ``sum_{i>=N} C_ang e^{-k r_i}`` given ``r_N = r`` and steps ``<= e_max``.

    Each term equals ``(C_ang/beta) eps_i r_i^{-(1+eps)}`` and
    ``eps_i r_i^{-(1+eps)} <= (1 + eps_i/r_i)^{1+eps} int_{r_i}^{r_{i+1}} r^{-(1+eps)} dr``.
    """
    return c_ang(k) / beta * (1.0 + e_max / r) ** (1.0 + eps) * r ** (-eps) / eps


def run_schedule(k, eps, alpha, r0, max_steps=200_000, r_stop=None, bucket_terms=10_000):
    """Iterate ``r_{n+1} = r_n + eps_n`` and account for the angle budget.

    Stops at ``r_stop``, after ``max_steps``, or when ``eps_n`` is no longer
    representable next to ``r_n``.  In the last two cases the remaining step
    count up to ``r_stop`` is bounded by ``log10_steps_upper``.
    """
    rt = r_tilde(k)
    if r0 < rt * (1.0 - 1e-12):
        raise DomainError(f"r0 = {r0} below the validity radius {rt}")
    if not 0.0 < alpha < math.pi / 2:
        raise DomainError("alpha must lie in (0, pi/2)")
    bump = build_bump()
    L = bump.L
    beta = compute_beta(k, L, eps)
    m = compute_m(k, eps)
    C = c_ang(k)
    if r_stop is None:
        r_stop = r0 + 10.0

    rows = []
    r = float(r0)
    partial = 0.0
    reason = "r_stop"
    n = 0
    log_beta = math.log(beta)
    while r < r_stop:
        if n >= max_steps:
            reason = "max_steps"
            break
        e = math.exp(log_beta + (1.0 + eps) * math.log(r) - k * r)
        if r + e == r:
            reason = "underflow"
            break
        th = C * math.exp(-k * r)
        partial += th
        rows.append((n, r, e, th, partial))
        r += e
        n += 1
    steps = np.array(rows, dtype=float).reshape(-1, 5)
    reached = r >= r_stop
    e_next = epsilon_step(beta, k, eps, r)
    e_max = max(e_next, float(steps[:, 2].max()) if steps.size else 0.0)
    tail = _direct_tail(k, eps, beta, r, e_max)
    lo = max(r, (1.0 + eps) / k)
    log10_rest = 0.0 if reached else log10_steps_upper(beta, k, eps, lo, r_stop)
    if not reached and r < (1.0 + eps) / k:
        # below the hump eps is increasing: each step is at least eps(r)
        log10_rest = float(np.logaddexp(log10_rest * math.log(10.0), math.log(((1.0 + eps) / k - r) / e_next + 1.0)) / math.log(10.0))

    counts = {}
    if steps.size:
        bucket = np.floor(steps[:, 1] - r0).astype(int)
        for b in np.unique(bucket):
            counts[int(b)] = int(np.sum(bucket == b))
    return ExhaustionSchedule(
        k=k,
        eps=eps,
        alpha=alpha,
        r0=float(r0),
        L=L,
        beta=beta,
        m=m,
        C_ang=C,
        r_tilde=rt,
        steps=steps,
        direct_sum=partial,
        direct_tail=tail,
        bucket_bound=bucket_bound(k, eps, beta, r0, bucket_terms),
        reached_stop=bool(reached),
        stop_reason=reason,
        r_stop=float(r_stop),
        log10_steps_to_stop=log10_rest,
        bucket_counts=counts,
    )


def choose_r0(k, eps, alpha, spacing=0.5, max_points=10_000_000):
    """Smallest ``r0`` in ``{r_tilde + j*spacing}`` with bucket bound ``<= alpha``.

    The bound decreases in ``r0``, so the grid is searched by bisection.
    """
    if not 0.0 < alpha < math.pi / 2:
        raise DomainError("alpha must lie in (0, pi/2)")
    rt = r_tilde(k)
    beta = compute_beta(k, build_bump().L, eps)

    def ok(j):
        return bucket_bound(k, eps, beta, rt + j * spacing) <= alpha

    if ok(0):
        return rt
    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > max_points:
            raise DomainError(f"no admissible r0 within {max_points} grid points")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return rt + hi * spacing
