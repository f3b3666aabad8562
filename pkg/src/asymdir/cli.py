"""Config-driven command line front end.

Config files use a flat TOML-like syntax::

    command = "solve"      # optional if given on the command line
    seed = 0

    [solve]
    warping = "hyperbolic"
    k = 1.0
    p = 2.0
    R = 2.0
    n_r = 64
    n_t = 128
    data = "cos(t)"

Only the section of the active command is read; keys are validated against
that command's schema.  Any key can be overridden by an environment variable
``ASYMDIR_<KEY>`` (upper case).  Exit codes: 0 pass, 1 check failed,
2 usage/config error, 3 numerical nonconvergence.
"""

import argparse
import ast
import json
import math
import os
import platform
import re
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import barrier as bar
from . import exhaustion as ex
from . import manifold as mf
from . import operator as op
from . import sc_geometry as scg
from . import solver as sv
from .errors import (
    AsymDirError,
    CalibrationError,
    ConfigError,
    DomainError,
    IntegratorError,
    NonConvergenceError,
    PreconditionError,
    VerificationError,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NONCONV = 0, 1, 2, 3
ENV_PREFIX = "ASYMDIR_"
TOP_LEVEL = {"command", "seed", "output_dir"}

# -- schema ------------------------------------------------------------------


def _pos(x):
    return x > 0


def _gt1(x):
    return x > 1


def _nonneg(x):
    return x >= 0


def _n_r(x):
    return x >= 8


def _n_t(x):
    return x >= 4 and x % 2 == 0


def _alpha(x):
    return 0 < x < math.pi / 2


def _increasing(xs):
    return len(xs) >= 2 and all(v > 0 for v in xs) and all(b > a for a, b in zip(xs[:-1], xs[1:]))


# key -> (type, default, validator, description of the valid range)
_WARPING = {
    "warping": ("str", "hyperbolic", lambda s: s in ("hyperbolic", "sinh_scaled", "custom"), "hyperbolic|sinh_scaled|custom"),
    "k": ("float", 1.0, _pos, "> 0"),
    "q": ("float", None, _pos, "> 0"),
    "f": ("str", None, None, ""),
    "f_prime": ("str", None, None, ""),
    "f_double_prime": ("str", None, None, ""),
    "r_max": ("float", 10.0, _pos, "> 0"),
}
_PROFILE = {
    "profile": ("str", None, lambda s: s in ("p_laplacian", "minimal"), "p_laplacian|minimal"),
    "p": ("float", None, _gt1, "> 1"),
}

SCHEMA = {
    "check-profile": {
        **_PROFILE,
        "s_max": ("float", 10.0, _pos, "> 0"),
        "n_samples": ("int", 1001, lambda n: n >= 2, ">= 2"),
    },
    "check-manifold": {
        **_WARPING,
        "n_samples": ("int", 1000, lambda n: n >= 2, ">= 2"),
        "r_min": ("float", 1e-3, _pos, "> 0"),
        "dim": ("int", 2, lambda n: n >= 1, ">= 1"),
        "p": ("float", 2.0, lambda p: p >= 2, ">= 2"),
        "s": ("float", 1.0, _pos, "> 0"),
        "r_cut": ("float", 100.0, _pos, "> 0"),
        "area": ("str", None, None, ""),
    },
    "barrier": {
        **_PROFILE,
        "k": ("float", 1.0, _pos, "> 0"),
        "dim": ("int", 2, lambda n: n >= 2, ">= 2"),
        "C": ("float", 1.0, _pos, "> 0"),
        "s_max": ("float", 20.0, _pos, "> 0"),
        "n_samples": ("int", 401, lambda n: n >= 2, ">= 2"),
    },
    "sr-curve": {
        "R": ("float", None, _pos, "> 0"),
        "k": ("float", 1.0, _pos, "> 0"),
        "t_min": ("float", None, lambda t: t <= 0, "<= 0"),
        "t_max": ("float", None, _nonneg, ">= 0"),
        "tol": ("float", 1e-10, _pos, "> 0"),
        "samples": ("int", 2001, lambda n: n >= 2, ">= 2"),
    },
    "certify-convexity": {
        **_WARPING,
        "R": ("float", 1.0, _pos, "> 0"),
        "t_max": ("float", None, _pos, "> 0"),
        "n_t": ("int", 200, lambda n: n >= 2, ">= 2"),
        "n_angle": ("int", 50, lambda n: n >= 1, ">= 1"),
        "angle_margin": ("float", 0.05, lambda a: 0 < a < math.pi / 2, "in (0, pi/2)"),
        "tol": ("float", 1e-8, _pos, "> 0"),
        "dim": ("int", 3, lambda n: n >= 2, ">= 2"),
        "integrator_tol": ("float", 1e-10, _pos, "> 0"),
    },
    "borbely": {
        "k": ("float", 1.0, _pos, "> 0"),
        "eps": ("float", 1.0, _pos, "> 0"),
        "alpha": ("float", math.pi / 4, _alpha, "in (0, pi/2)"),
        "r0": ("float", None, _pos, "> 0"),
        "spacing": ("float", 0.5, _pos, "> 0"),
        "max_steps": ("int", 200_000, lambda n: n >= 1, ">= 1"),
        "r_stop_offset": ("float", 10.0, _pos, "> 0"),
    },
    "solve": {
        **_WARPING,
        **_PROFILE,
        "R": ("float", 2.0, _pos, "> 0"),
        "r_in": ("float", 0.0, _nonneg, ">= 0"),
        "n_r": ("int", 64, _n_r, ">= 8"),
        "n_t": ("int", 128, _n_t, "even, >= 4"),
        "data": ("str", "cos(t)", None, ""),
        "inner_data": ("str", None, None, ""),
        "tol_newton": ("float", 1e-10, _pos, "> 0"),
        "max_newton": ("int", 60, lambda n: n >= 1, ">= 1"),
        "delta_reg": ("float", None, _pos, "> 0"),
    },
    "cascade": {
        **_WARPING,
        **_PROFILE,
        "radii": ("floatlist", [2.0, 3.0, 4.0, 5.0], _increasing, "positive, increasing, >= 2 entries"),
        "n_r_per_unit": ("int", 32, lambda n: n >= 4, ">= 4"),
        "n_t": ("int", 128, _n_t, "even, >= 4"),
        "data": ("str", "cos(t)", None, ""),
        "tol_cascade": ("float", 1e-2, _pos, "> 0"),
        "tol_newton": ("float", 1e-10, _pos, "> 0"),
        "max_newton": ("int", 60, lambda n: n >= 1, ">= 1"),
        "sandwich": ("bool", True, None, ""),
        "x_angle": ("float", 0.0, None, ""),
        "window": ("float", math.pi / 4, _alpha, "in (0, pi/2)"),
        "C": ("float", None, _pos, "> 0"),
    },
    "report": {},
}
COMMANDS = tuple(SCHEMA)


# -- parsing -----------------------------------------------------------------


def _strip_comment(line):
    out, quote = [], None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out).strip()


def _constant_expr(text):
    # an expression with no free variable, e.g. "pi/4"
    return float(mf.parse_expression(text, variable="\0")(0.0))


def _literal(text, line, bare_strings=False):
    raw = re.sub(r"\btrue\b", "True", re.sub(r"\bfalse\b", "False", text))
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        pass
    try:
        return _constant_expr(text)
    except DomainError:
        if bare_strings:
            return text
        raise ConfigError(f"cannot parse value {text!r}", line) from None


def _coerce(key, value, spec, line):
    kind, _, check, desc = spec
    try:
        if kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError
            value = float(value)
        elif kind == "int":
            if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
                raise TypeError
            value = int(value)
        elif kind == "str":
            if not isinstance(value, str):
                raise TypeError
        elif kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
        elif kind == "floatlist":
            if not isinstance(value, (list, tuple)):
                raise TypeError
            value = [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {kind}, got {value!r}", line) from None
    if kind == "float" and not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite", line)
    if check is not None and not check(value):
        raise ConfigError(f"{key} = {value!r} out of range ({desc})", line)
    return value


def parse_config(text, command=None, env=None):
    """Parse and validate a config document; returns a flat dict with defaults filled.

    ``command`` (from the command line) wins over a ``command`` key in the file.
    """
    top, sections, lines = {}, {}, {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = re.fullmatch(r"\[\s*([A-Za-z0-9_-]+)\s*\]", line)
        if m:
            current = m.group(1)
            if current not in SCHEMA:
                raise ConfigError(f"unknown section [{current}]", lineno)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", lineno)
            sections[current] = {}
            continue
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)", line)
        if not m:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, val = m.group(1), _literal(m.group(2).strip(), lineno)
        target = top if current is None else sections[current]
        if key in target:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        target[key] = val
        lines[(current, key)] = lineno

    for key in top:
        if key not in TOP_LEVEL:
            raise ConfigError(f"unknown top-level key {key!r}", lines[(None, key)])
    cmd = command or top.get("command")
    if cmd is None:
        raise ConfigError("no command given")
    if cmd not in SCHEMA:
        raise ConfigError(f"unknown command {cmd!r}", lines.get((None, "command")))
    schema = SCHEMA[cmd]
    given = dict(sections.get(cmd, {}))
    for key in given:
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} for {cmd}", lines[(cmd, key)])
    for name, val in sorted((env if env is not None else os.environ).items()):
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower()
        if key == "seed":
            top["seed"] = _literal(val, None)
            continue
        match = [k for k in schema if k.lower() == key]
        if not match:
            raise ConfigError(f"environment override {name} names no key of {cmd}")
        given[match[0]] = _literal(val, None, bare_strings=True)

    cfg = {}
    for key, spec in schema.items():
        line = lines.get((cmd, key))
        if key in given:
            cfg[key] = _coerce(key, given[key], spec, line)
        else:
            cfg[key] = spec[1]
    seed = top.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}", lines.get((None, "seed")))
    cfg = {"command": cmd, "seed": seed, "output_dir": top.get("output_dir"), **cfg}
    _validate(cfg, given, lines)
    return cfg


def _validate(cfg, given, lines):
    cmd = cfg["command"]
    line = lambda key: lines.get((cmd, key))  # noqa: E731
    if "profile" in SCHEMA[cmd] and "p" in SCHEMA[cmd]:
        if cfg["profile"] == "minimal" and "p" in given:
            raise ConfigError("p conflicts with profile = 'minimal'", line("p"))
        if cfg["profile"] is None:
            cfg["profile"] = "p_laplacian"
        if cfg["profile"] == "p_laplacian" and cfg["p"] is None:
            cfg["p"] = 2.0
    if "warping" in SCHEMA[cmd]:
        if cfg["warping"] == "sinh_scaled" and cfg["q"] is None:
            raise ConfigError("sinh_scaled warping needs q", line("warping"))
        if cfg["warping"] == "custom" and None in (cfg["f"], cfg["f_prime"], cfg["f_double_prime"]):
            raise ConfigError("custom warping needs f, f_prime and f_double_prime", line("warping"))
    if cmd == "sr-curve" and cfg["R"] is None:
        raise ConfigError("sr-curve needs R")
    if cmd == "solve":
        if cfg["r_in"] >= cfg["R"]:
            raise ConfigError("r_in must be below R", line("r_in"))
        if cfg["r_in"] > 0 and cfg["inner_data"] is None:
            raise ConfigError("annulus (r_in > 0) needs inner_data", line("r_in"))


# -- builders ----------------------------------------------------------------


def _profile(cfg):
    return op.minimal() if cfg["profile"] == "minimal" else op.p_laplacian(cfg["p"])


def _warping(cfg, r_max=None):
    r_max = cfg["r_max"] if r_max is None else max(r_max, cfg["r_max"])
    if cfg["warping"] == "hyperbolic":
        return mf.hyperbolic(cfg["k"], r_max)
    if cfg["warping"] == "sinh_scaled":
        return mf.sinh_scaled(cfg["q"], cfg["k"], r_max)
    return mf.from_expressions(cfg["f"], cfg["f_prime"], cfg["f_double_prime"], cfg["k"], r_max)


def _angle_fn(text):
    return mf.parse_expression(text, variable="t")


def write_csv(path, header, rows):
    np.savetxt(path, np.asarray(rows, dtype=float), delimiter=",", fmt="%.17g", header=",".join(header), comments="")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, payload):
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def versions():
    from . import __version__

    return {"asymdir": __version__, "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}


# -- commands ----------------------------------------------------------------


def cmd_check_profile(cfg, out):
    prof = _profile(cfg)
    s = np.linspace(0.0, cfg["s_max"], cfg["n_samples"])
    rep = op.check_conditions(prof, s)
    write_csv(out / "profile.csv", ["s", "a", "a_prime", "A"], np.column_stack([s, prof.a(s), prof.a_prime(s), op.energy_density(prof, s)]))
    return rep.passed, {"profile": prof.to_dict(), "conditions": rep.to_dict()}


def cmd_check_manifold(cfg, out):
    wf = _warping(cfg)
    r = np.linspace(cfg["r_min"], wf.r_max, cfg["n_samples"])
    cmp = mf.comparison_check(wf, r)
    pole = mf.pole_check(wf)
    area = None
    if cfg["area"] is not None:
        area_fn = mf.parse_expression(cfg["area"])
        area = lambda x: float(area_fn(x))  # noqa: E731
    div = mf.rigoli_setti_divergence_test(wf, cfg["dim"], cfg["p"], cfg["s"], cfg["r_cut"], area=area)
    k = wf.k
    write_csv(
        out / "manifold.csv",
        ["r", "f", "f_prime", "curvature", "log_derivative_margin", "value_margin", "derivative_margin"],
        np.column_stack([
            r, wf.f(r), wf.f_prime(r), mf.radial_curvature(wf, r),
            wf.f_prime(r) / wf.f(r) - k / np.tanh(k * r),
            wf.f(r) - np.sinh(k * r) / k,
            wf.f_prime(r) - np.cosh(k * r),
        ]),
    )
    result = {"warping": wf.to_dict(), "comparison": cmp.to_dict(), "pole": bool(pole), "divergence": div.to_dict()}
    return bool(cmp.passed and pole), result


def cmd_barrier(cfg, out):
    prof = _profile(cfg)
    spec = bar.make_spec(prof, cfg["k"], cfg["dim"], cfg["C"])
    s = np.linspace(0.0, cfg["s_max"], cfg["n_samples"])
    rep = bar.verify_supersolution(spec, s[1:], strict=False)
    write_csv(out / "barrier.csv", ["s", "g", "Sigma", "residual"], bar.barrier_table(spec, s))
    g0 = bar.g_eval(spec, 0.0)
    ok = rep.passed and g0 >= 2 * spec.height_C
    return ok, {"spec": spec.to_dict(), "g0": g0, "residual": rep.to_dict()}


def cmd_sr_curve(cfg, out):
    k, R = cfg["k"], cfg["R"]
    span = (cfg["t_min"] if cfg["t_min"] is not None else -20.0 / k, cfg["t_max"] if cfg["t_max"] is not None else 20.0 / k)
    curve = scg.integrate_sr_ode(R, k, span, cfg["tol"], cfg["samples"])
    write_csv(out / "sr_curve.csv", ["t", "r", "theta", "residual"], curve.table())
    alpha = scg.asymptotic_angle(R, k)
    result = {
        "R": R,
        "k": k,
        "t_span": list(span),
        "max_first_integral_residual": curve.max_residual,
        "asymptotic_angle": alpha,
        "theta_end": float(curve.theta[-1]),
        "r_end": float(curve.r[-1]),
        "theta_end_minus_limit": float(curve.theta[-1] - alpha),
    }
    return curve.max_residual <= 10 * cfg["tol"], result


def cmd_certify_convexity(cfg, out):
    k = cfg["k"]
    t_max = cfg["t_max"] if cfg["t_max"] is not None else 20.0 / k
    t_grid = np.linspace(-t_max, t_max, cfg["n_t"])
    a = cfg["angle_margin"]
    ang = np.linspace(a, math.pi - a, cfg["n_angle"])
    wf = _warping(cfg, r_max=cfg["R"] + t_max * math.cosh(k * cfg["R"]) + 1.0)
    cert = scg.certify_convexity(wf, cfg["R"], k, t_grid, ang, cfg["tol"], cfg["dim"], cfg["integrator_tol"])
    return cert.verdict == "pass", cert.to_dict()


def cmd_borbely(cfg, out):
    k, eps, alpha = cfg["k"], cfg["eps"], cfg["alpha"]
    r0 = cfg["r0"] if cfg["r0"] is not None else ex.choose_r0(k, eps, alpha, cfg["spacing"])
    sched = ex.run_schedule(k, eps, alpha, r0, cfg["max_steps"], r0 + cfg["r_stop_offset"])
    write_csv(out / "schedule.csv", ["n", "r_n", "eps_n", "theta_bound_n", "partial_direct"], sched.steps)
    write_json(out / "r0.json", {"r0": r0, "chosen": cfg["r0"] is None})
    finite = math.isfinite(sched.log10_steps_to_stop)
    return bool(sched.admissible and finite), {"r0": r0, "constants": sched.constants(), "bucket_counts": sched.bucket_counts}


def cmd_solve(cfg, out):
    prof = _profile(cfg)
    wf = _warping(cfg, r_max=cfg["R"])
    data = _angle_fn(cfg["data"])
    inner = _angle_fn(cfg["inner_data"]) if cfg["inner_data"] is not None else None
    problem = sv.DirichletProblem(
        wf, prof, boundary=data, inner_boundary=inner, delta_reg=cfg["delta_reg"],
        max_newton=cfg["max_newton"], tol_newton=cfg["tol_newton"],
    )
    grid = sv.PolarGrid(cfg["R"], cfg["n_r"], cfg["n_t"], wf, cfg["r_in"])
    sol = sv.solve_ball(problem, grid)
    write_csv(out / "solution.csv", ["r", "t", "u"], sol.table())
    mp = sol.max_principle_violation()
    result = {
        "energy": sol.energy,
        "residual_norm": sol.residual_norm,
        "newton_iters": sol.newton_iters,
        "energies": sol.energies,
        "max_principle_violation": mp,
    }
    return mp <= cfg["tol_newton"], result


def cmd_cascade(cfg, out):
    prof = _profile(cfg)
    radii = cfg["radii"]
    wf = _warping(cfg, r_max=radii[-1])
    data = _angle_fn(cfg["data"])
    problem = sv.DirichletProblem(wf, prof, asymptotic_data=data, max_newton=cfg["max_newton"], tol_newton=cfg["tol_newton"])
    sol, rep, _ = sv.exhaustion_solve(problem, radii, cfg["n_r_per_unit"], cfg["n_t"], cfg["tol_cascade"])
    write_csv(out / "solution.csv", ["r", "t", "u"], sol.table())
    write_json(out / "convergence.json", {"R_k": rep.radii, "d_k": rep.d, "iters": rep.iters})
    result = {"cascade": rep.to_dict(), "continuity": sv.data_continuity(data, cfg["n_t"])}
    ok = rep.decreasing and rep.converged and all(rep.max_principle)
    if cfg["sandwich"] and cfg["warping"] == "hyperbolic":
        C = cfg["C"] if cfg["C"] is not None else float(np.max(np.abs(data(np.linspace(0, 2 * math.pi, 4097)))))
        if C <= 0:
            C = 1.0
        spec = bar.make_spec(prof, wf.k, 2, C)
        d0 = math.atanh(math.cos(cfg["window"])) / wf.k
        sw = sv.barrier_sandwich_report(sol, spec, d0, cfg["x_angle"], data)
        result["sandwich"] = sw.to_dict()
        ok = ok and sw.passed
    return ok, result


def cmd_report(cfg, out):
    """A battery of fast structural checks across all modules."""
    checks = {}
    for name, prof in (("p=1.5", op.p_laplacian(1.5)), ("p=2", op.p_laplacian(2.0)), ("p=3", op.p_laplacian(3.0)), ("minimal", op.minimal())):
        checks[f"profile {name}"] = op.check_conditions(prof, np.linspace(0.0, 10.0, 1001)).passed
    r = np.linspace(1e-3, 10.0, 1000)
    for wf in (mf.hyperbolic(1.0), mf.sinh_scaled(1.5, 1.0), mf.sinh_scaled(2.0, 1.0)):
        checks[f"comparison {wf.kind} {wf.params or ''}".strip()] = mf.comparison_check(wf, r).passed
    for name, prof in (("p=2", op.p_laplacian(2.0)), ("minimal", op.minimal())):
        for n in (2, 3):
            spec = bar.make_spec(prof, 1.0, n, 0.5)
            checks[f"barrier {name} n={n}"] = bar.verify_supersolution(spec, np.linspace(0.01, 20, 200), strict=False).passed
    for R in (0.5, 1.0, 2.0):
        for k in (0.5, 1.0, 2.0):
            checks[f"sr first integral R={R} k={k}"] = scg.integrate_sr_ode(R, k).max_residual <= 1e-9
    r0 = ex.choose_r0(1.0, 1.0, math.pi / 4)
    sched = ex.run_schedule(1.0, 1.0, math.pi / 4, r0)
    checks["borbely admissible"] = sched.admissible
    checks["divergence r log r"] = mf.rigoli_setti_divergence_test(
        mf.hyperbolic(1.0), 1, 2.0, math.e, 100.0, area=lambda x: x * math.log(x)
    ).diverging
    checks["divergence hyperbolic"] = not mf.rigoli_setti_divergence_test(mf.hyperbolic(1.0), 1, 2.0, 1.0, 100.0).diverging
    checks = {k: bool(v) for k, v in checks.items()}
    return all(checks.values()), {"checks": checks}


HANDLERS = {
    "check-profile": cmd_check_profile,
    "check-manifold": cmd_check_manifold,
    "barrier": cmd_barrier,
    "sr-curve": cmd_sr_curve,
    "certify-convexity": cmd_certify_convexity,
    "borbely": cmd_borbely,
    "solve": cmd_solve,
    "cascade": cmd_cascade,
    "report": cmd_report,
}


def _exit_code(exc):
    if isinstance(exc, (NonConvergenceError, IntegratorError)):
        return EXIT_NONCONV
    if isinstance(exc, (PreconditionError, CalibrationError, VerificationError)):
        return EXIT_FAIL
    if isinstance(exc, (ConfigError, DomainError)):
        return EXIT_CONFIG
    return EXIT_FAIL


def run(cfg, output_dir):
    """Execute a validated config; returns ``(exit_code, payload)`` and writes artifacts."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    payload = {"command": cfg["command"], "config": cfg, "versions": versions()}
    try:
        ok, result = HANDLERS[cfg["command"]](cfg, out)
        code = EXIT_OK if ok else EXIT_FAIL
        payload.update(status="pass" if ok else "fail", result=result)
    except AsymDirError as exc:
        code = _exit_code(exc)
        payload.update(status="error", error={"type": type(exc).__name__, "message": str(exc)})
        for attr in ("residual", "worst_residual", "best_value"):
            if getattr(exc, attr, None) is not None:
                payload["error"][attr] = getattr(exc, attr)
    except (ArithmeticError, ValueError) as exc:
        code = EXIT_FAIL
        payload.update(status="error", error={"type": type(exc).__name__, "message": str(exc)})
    payload["exit_code"] = code
    payload["wall_time_s"] = time.perf_counter() - t0
    write_json(out / f"{cfg['command']}.json", payload)
    return code, payload


def build_parser():
    ap = argparse.ArgumentParser(prog="asymdir", description="Asymptotic Dirichlet problem experiments.")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="command (overrides the config's 'command')")
    ap.add_argument("--config", help="config file (flat TOML-like)")
    ap.add_argument("--output", help="output directory (default: config output_dir or ./asymdir-out)")
    ap.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"asymdir: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        cfg = parse_config(text, args.command)
    except ConfigError as exc:
        print(f"asymdir: config error: {exc}", file=sys.stderr)
        if args.output:
            Path(args.output).mkdir(parents=True, exist_ok=True)
            write_json(Path(args.output) / "error.json", {"status": "error", "error": {"type": "ConfigError", "message": str(exc)}, "exit_code": EXIT_CONFIG})
        return EXIT_CONFIG
    output = args.output or cfg.get("output_dir") or "asymdir-out"
    code, payload = run(cfg, output)
    if not args.quiet:
        msg = payload.get("status")
        if "error" in payload:
            msg += f" ({payload['error']['type']}: {payload['error']['message']})"
        print(f"asymdir {cfg['command']}: {msg} [exit {code}] -> {output}")
    return code


if __name__ == "__main__":
    sys.exit(main())
