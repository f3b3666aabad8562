"""Rotationally symmetric model ``(R^{n+1}, dr^2 + f(r)^2 dw^2)``.

A warping function is carried as the analytic triple ``(f, f', f'')``; the
radial sectional curvature is ``-f''/f``.
"""

import ast
import math
import operator as _op
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from .errors import DomainError

__all__ = [
    "WarpingFunction",
    "ComparisonReport",
    "DivergenceReport",
    "hyperbolic",
    "sinh_scaled",
    "custom",
    "from_expressions",
    "parse_expression",
    "radial_curvature",
    "comparison_check",
    "pole_check",
    "metric_coefficients",
    "spherical_to_cartesian",
    "sphere_area",
    "rigoli_setti_divergence_test",
    "warping_from_config",
]


@dataclass(frozen=True)
class WarpingFunction:
    kind: str
    f: Callable
    f_prime: Callable
    f_double_prime: Callable
    k: float
    r_max: float = 10.0
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, "k": self.k, "r_max": self.r_max, **self.params}


def hyperbolic(k, r_max=10.0):
    """Constant curvature ``-k^2``: ``f(r) = sinh(kr)/k``."""
    return sinh_scaled(k, k=k, r_max=r_max, kind="hyperbolic")


def sinh_scaled(q, k=None, r_max=10.0, kind="sinh_scaled"):
    """``f(r) = sinh(qr)/q`` (curvature ``-q^2``), declared with bound ``k <= q``."""
    q = float(q)
    k = q if k is None else float(k)
    if q <= 0 or k <= 0:
        raise DomainError("warping parameters must be positive")
    if q < k:
        raise DomainError(f"sinh_scaled needs q >= k, got q={q}, k={k}")
    params = {"q": q} if kind == "sinh_scaled" else {}
    return WarpingFunction(
        kind=kind,
        f=lambda r: np.sinh(q * np.asarray(r, dtype=float)) / q,
        f_prime=lambda r: np.cosh(q * np.asarray(r, dtype=float)),
        f_double_prime=lambda r: q * np.sinh(q * np.asarray(r, dtype=float)),
        k=k,
        r_max=float(r_max),
        params=params,
    )


def custom(f, f_prime, f_double_prime, k, r_max=10.0, **params):
    return WarpingFunction("custom", f, f_prime, f_double_prime, float(k), float(r_max), dict(params))


# -- expression strings ----------------------------------------------------

_FUNCS = {
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
}
_BINOPS = {
    ast.Add: _op.add,
    ast.Sub: _op.sub,
    ast.Mult: _op.mul,
    ast.Div: _op.truediv,
    ast.Pow: _op.pow,
}
_UNARY = {ast.USub: _op.neg, ast.UAdd: _op.pos}


def parse_expression(text, variable="r", constants=None):
    """Compile an arithmetic expression in one variable to a numpy callable.

    Supports ``+ - * / ^`` (``**`` also accepted), parentheses, numeric
    literals, the functions sinh cosh tanh exp log sin cos sqrt, the
    constants ``pi``, ``e`` and any names given in ``constants``.
    """
    env = {"pi": math.pi, "e": math.e}
    env.update(constants or {})
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise DomainError(f"cannot parse expression {text!r}: {exc.msg}") from None

    def check(node):
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            check(node.operand)
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS) or node.keywords:
                raise DomainError(f"unsupported function call in {text!r}")
            if len(node.args) != 1:
                raise DomainError(f"functions take one argument in {text!r}")
            check(node.args[0])
        elif isinstance(node, ast.Name):
            if node.id != variable and node.id not in env:
                raise DomainError(f"unknown name {node.id!r} in {text!r}")
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            pass
        else:
            raise DomainError(f"unsupported syntax in {text!r}")

    check(tree)

    def ev(node, x):
        if isinstance(node, ast.Expression):
            return ev(node.body, x)
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](ev(node.left, x), ev(node.right, x))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](ev(node.operand, x))
        if isinstance(node, ast.Call):
            return _FUNCS[node.func.id](ev(node.args[0], x))
        if isinstance(node, ast.Name):
            return x if node.id == variable else env[node.id]
        return float(node.value)

    def fn(r):
        x = np.asarray(r, dtype=float)
        return ev(tree, x) + 0.0 * x

    return fn


def from_expressions(f, f_prime, f_double_prime, k, r_max=10.0):
    return custom(
        parse_expression(f),
        parse_expression(f_prime),
        parse_expression(f_double_prime),
        k,
        r_max,
        expressions=[f, f_prime, f_double_prime],
    )


# -- geometry ---------------------------------------------------------------


def radial_curvature(wf, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radial curvature is undefined at the pole (r <= 0)")
    out = -wf.f_double_prime(r) / wf.f(r)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ComparisonReport:
    """Relative margins ``(lhs - rhs) / max(1, |rhs|)`` of the three inequalities."""

    log_derivative: float
    value: float
    derivative: float
    worst_at: dict
    tol: float

    @property
    def passed(self):
        return min(self.log_derivative, self.value, self.derivative) >= -self.tol

    def to_dict(self):
        return {
            "passed": self.passed,
            "log_derivative_margin": self.log_derivative,
            "value_margin": self.value,
            "derivative_margin": self.derivative,
            "worst_at": self.worst_at,
            "tol": self.tol,
        }


def comparison_check(wf, grid, tol=1e-10):
    """Check ``f'/f >= k coth(kr)``, ``f >= sinh(kr)/k``, ``f' >= cosh(kr)``."""
    r = np.asarray(grid, dtype=float)
    if r.size == 0 or np.any(r <= 0):
        raise DomainError("comparison grid must be nonempty and inside (0, r_max]")
    k = wf.k
    f, fp = wf.f(r), wf.f_prime(r)
    pairs = {
        "log_derivative": (fp / f, k / np.tanh(k * r)),
        "value": (f, np.sinh(k * r) / k),
        "derivative": (fp, np.cosh(k * r)),
    }
    margins, where = {}, {}
    for name, (lhs, rhs) in pairs.items():
        m = (lhs - rhs) / np.maximum(1.0, np.abs(rhs))
        i = int(np.argmin(m))
        margins[name] = float(m[i])
        where[name] = float(r[i])
    return ComparisonReport(worst_at=where, tol=tol, **margins)


def pole_check(wf, r_eps=1e-6, tol=1e-5):
    """One-sided check of ``f(0) = 0`` and ``f'(0) = 1`` from ``r = r_eps``."""
    f0 = float(wf.f(r_eps)) - r_eps * float(wf.f_prime(r_eps))
    fp0 = float(wf.f_prime(r_eps)) - r_eps * float(wf.f_double_prime(r_eps))
    return abs(f0) <= tol and abs(fp0 - 1.0) <= tol, f0, fp0


def metric_coefficients(wf, r, angles):
    """Diagonal metric ``(g_00, g_11, ..., g_nn)`` at ``(r, theta_1..theta_n)``."""
    if r <= 0:
        raise DomainError("metric coefficients need r > 0")
    th = np.asarray(angles, dtype=float)
    n = th.size
    f2 = float(wf.f(r)) ** 2
    out = np.empty(n + 1)
    out[0] = 1.0
    s2 = np.sin(th) ** 2
    for i in range(1, n):
        out[i] = f2 * np.prod(s2[i:])
    out[n] = f2
    return out


def spherical_to_cartesian(r, angles):
    """Map ``(r, theta_1..theta_n)`` to ``(x_1..x_{n+1})``; ``theta_n`` is the
    angle with the last axis."""
    th = np.asarray(angles, dtype=float)
    n = th.size
    if n == 0:
        raise DomainError("need at least one angle")
    # tail[j] = prod_{m=j}^{n} sin(theta_m) with 1-based m; tail[n+1] = 1
    tail = np.ones(n + 2)
    for j in range(n, 0, -1):
        tail[j] = tail[j + 1] * np.sin(th[j - 1])
    x = np.empty(n + 1)
    x[0] = r * np.sin(th[0]) * tail[2]
    x[1] = r * np.cos(th[0]) * tail[2]
    for j in range(3, n + 2):
        x[j - 1] = r * np.cos(th[j - 2]) * tail[j]
    return x


def sphere_area(n):
    """Area of the unit n-sphere ``S^n`` (``2 pi`` for n=1, ``4 pi`` for n=2)."""
    return 2.0 * math.pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0)


@dataclass(frozen=True)
class DivergenceReport:
    value: float
    cutoffs: tuple
    values: tuple
    last_relative_increase: float
    diverging: bool

    def to_dict(self):
        return {
            "value": self.value,
            "cutoffs": list(self.cutoffs),
            "values": list(self.values),
            "last_relative_increase": self.last_relative_increase,
            "diverging": self.diverging,
        }


def _chunked_quad(fn, a, b):
    # split at unit-ish lengths so exponentially decaying integrands are resolved
    edges = np.unique(np.concatenate([[a], np.geomspace(max(a, 1e-12), b, 40), [b]]))
    edges = edges[(edges >= a) & (edges <= b)]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += quad(fn, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    return total


def rigoli_setti_divergence_test(wf, n, p, s, r_cut, area=None, doublings=3, threshold=0.01):
    """Partial integral ``int_s^{r_cut} dr / |dB_r|^{1/(p-1)}`` and a divergence flag.

    ``|dB_r| = omega_n f(r)^n`` unless ``area`` overrides it.  The flag is set
    when doubling the largest cutoff still increases the integral by more than
    ``threshold`` (relative).  This is a diagnostic, not a proof.
    """
    if p < 2:
        raise DomainError("divergence diagnostic is stated for p >= 2")
    if s <= 0:
        raise DomainError("s must be positive (pole)")
    if r_cut < s:
        raise DomainError("need s <= r_cut")
    expo = 1.0 / (p - 1.0)
    if area is None:
        if s < 1e-6 and n * expo >= 1.0:
            raise DomainError("integrand has a non-integrable pole at r = 0")
        omega = sphere_area(n)

        def area(r):
            with np.errstate(over="ignore"):
                return omega * np.float64(wf.f(r)) ** n

    def integrand(r):
        a = area(r)
        # an overflowing area contributes nothing
        return float(a) ** (-expo) if np.isfinite(a) else 0.0

    if r_cut == s:
        return DivergenceReport(0.0, (r_cut,), (0.0,), 0.0, False)
    cutoffs = [r_cut * 2.0**j for j in range(doublings + 1)]
    values = [_chunked_quad(integrand, s, r_cut)]
    for lo, hi in zip(cutoffs[:-1], cutoffs[1:]):
        values.append(values[-1] + _chunked_quad(integrand, lo, hi))
    inc = values[-1] - values[-2]
    rel = inc / abs(values[-2]) if values[-2] != 0 else math.inf
    return DivergenceReport(values[0], tuple(cutoffs), tuple(values), rel, bool(rel > threshold))


def warping_from_config(cfg):
    kind = cfg.get("kind", "hyperbolic")
    r_max = float(cfg.get("r_max", 10.0))
    if kind == "hyperbolic":
        return hyperbolic(float(cfg.get("k", 1.0)), r_max)
    if kind == "sinh_scaled":
        return sinh_scaled(float(cfg["q"]), float(cfg.get("k", 1.0)), r_max)
    if kind == "custom":
        return from_expressions(cfg["f"], cfg["f_prime"], cfg["f_double_prime"], float(cfg.get("k", 1.0)), r_max)
    raise DomainError(f"unknown warping kind {kind!r}")
