import math

import mpmath
import numpy as np
import pytest

from asymdir import barrier as bar
from asymdir import operator as op
from asymdir.errors import CalibrationError, DomainError, RangeError, VerificationError


def test_p2_dim2_matches_closed_form():
    # a = id, n = 2: g(s) = int_s^inf c sech(kt) dt = (2c/k) arctan(e^{-ks})
    spec = bar.BarrierSpec(op.p_laplacian(2), 1.5, 2, 0.5)
    for s in (0.0, 0.3, 1.0, 4.0):
        assert bar.g_eval(spec, s) == pytest.approx(2 * spec.c / 1.5 * math.atan(math.exp(-1.5 * s)), abs=1e-12)


def test_g_at_zero_is_pi_over_two_for_unit_c():
    spec = bar.BarrierSpec(op.p_laplacian(2), 1.0, 2, 0.5, c=1.0)
    assert bar.g_eval(spec, 0.0) == pytest.approx(math.pi / 2, abs=1e-13)


def test_minimal_matches_high_precision_quadrature():
    spec = bar.BarrierSpec(op.minimal(), 1.0, 3, 0.25)
    c = spec.c
    mpmath.mp.dps = 30
    ref = mpmath.quad(lambda t: (c / mpmath.cosh(t) ** 2) / mpmath.sqrt(1 - (c / mpmath.cosh(t) ** 2) ** 2), [0.5, 5, mpmath.inf])
    assert bar.g_eval(spec, 0.5) == pytest.approx(float(ref), abs=1e-11)


def test_vectorized_matches_scalar():
    spec = bar.make_spec(op.p_laplacian(3), 1.0, 3, 0.5)
    s = np.array([3.0, 0.0, 1.2, 0.4])
    assert np.allclose(bar.g_values(spec, s), [bar.g_eval(spec, x) for x in s], atol=1e-12)


def test_g_decreasing():
    spec = bar.make_spec(op.minimal(), 1.0, 2, 0.5)
    g = bar.g_values(spec, np.linspace(0, 10, 50))
    assert np.all(np.diff(g) < 0)


@pytest.mark.parametrize("prof", [op.p_laplacian(2), op.p_laplacian(1.5), op.minimal()])
def test_tail_bound_dominates_tail(prof):
    spec = bar.make_spec(prof, 1.0, 3, 0.5)
    T = bar.tail_validity(spec) + 1.0
    assert bar.g_eval(spec, T) <= bar.tail_bound(spec, T)


def test_tail_cut_below_validity_rejected():
    spec = bar.BarrierSpec(op.minimal(), 1.0, 2, 0.5, c=0.9)
    T_valid = bar.tail_validity(spec)
    assert T_valid > 0
    bad = bar.BarrierSpec(op.minimal(), 1.0, 2, 0.5, c=0.9, tail_cut_T=0.5 * T_valid)
    with pytest.raises(DomainError):
        bar.tail_cut(bad)


def test_tail_cut_doubling_stable():
    spec = bar.make_spec(op.p_laplacian(2), 1.0, 2, 0.5)
    T = bar.tail_cut(spec)
    base = bar.g_eval(spec, 0.0)
    doubled = bar.g_eval(bar.BarrierSpec(spec.profile, 1.0, 2, 0.5, c=spec.c, tail_cut_T=2 * T), 0.0)
    assert abs(base - doubled) <= 1e-10


def test_c_must_be_below_sup():
    with pytest.raises(RangeError):
        bar.BarrierSpec(op.minimal(), 1.0, 2, 0.5, c=1.0)


@pytest.mark.parametrize("C", [0.5, 2.0])
def test_calibration_reaches_twice_height(C):
    for prof in (op.p_laplacian(2), op.p_laplacian(3), op.minimal()):
        try:
            spec = bar.make_spec(prof, 1.0, 2, C)
        except CalibrationError:
            assert prof.kind == "minimal"
            continue
        assert bar.g_eval(spec, 0.0) >= 2 * C * (1 - 1e-12)


def test_calibration_impossible_for_bounded_profile():
    with pytest.raises(CalibrationError) as info:
        bar.make_spec(op.minimal(), 2.0, 3, 100.0)
    assert info.value.best_value < 200.0


def test_sigma_caps_at_height():
    spec = bar.make_spec(op.p_laplacian(2), 1.0, 2, 0.5)
    assert bar.sigma_eval(spec, 0.0) == 0.5
    assert bar.sigma_eval(spec, None) == 0.5
    assert bar.sigma_eval(spec, 10.0) < 0.5
    out = bar.sigma_values(spec, np.array([0.0, 10.0, 10.0]), np.array([True, True, False]))
    assert out[0] == 0.5 and out[1] < 0.5 and out[2] == 0.5


@pytest.mark.parametrize("n", [2, 3])
def test_supersolution_residual_vanishes(profile, n):
    spec = bar.make_spec(profile, 1.0, n, 0.25)
    rep = bar.verify_supersolution(spec, np.linspace(0.05, 15.0, 80))
    assert rep.max_residual <= 1e-12
    assert rep.fd_max_deviation <= rep.fd_tol


def test_supersolution_detects_too_small_laplacian():
    spec = bar.make_spec(op.p_laplacian(2), 1.0, 2, 0.5)
    with pytest.raises(VerificationError):
        bar.verify_supersolution(spec, np.linspace(0.1, 5, 20), laplacian=lambda s: 0.5 * np.tanh(s))


def test_larger_laplacian_gives_strict_supersolution():
    spec = bar.make_spec(op.p_laplacian(2), 1.0, 2, 0.5)
    rep = bar.verify_supersolution(spec, np.linspace(0.1, 5, 20), laplacian=lambda s: 2.0 * np.tanh(s), fd_check=False)
    assert rep.passed
    assert np.all(rep.residual < 0)


def test_calibration_examples_p2():
    # g(0) = c pi/2 for a = id, n = 2, k = 1; the default a(2C) already suffices
    assert bar.make_spec(op.p_laplacian(2), 1.0, 2, 0.5).c == pytest.approx(1.0)
    assert bar.make_spec(op.p_laplacian(2), 1.0, 2, 2.0).c == pytest.approx(4.0)


def test_calibration_raises_c_when_default_is_short():
    # minimal, n = 3: a(2C) gives g(0) < 2C, so c must move toward sup a
    prof = op.minimal()
    default = bar.BarrierSpec(prof, 1.0, 3, 0.5)
    assert bar.g_eval(default, 0.0) < 1.0
    spec = bar.make_spec(prof, 1.0, 3, 0.5)
    assert spec.c > default.c
    assert bar.g_eval(spec, 0.0) == pytest.approx(1.0, abs=1e-10)
