import math

import numpy as np
import pytest
from scipy.special import zeta

from asymdir import exhaustion as ex
from asymdir.errors import DomainError, PreconditionError


def test_bump_bound():
    bump = ex.build_bump()
    assert bump.L == pytest.approx(40 / math.sqrt(3))
    assert bump.eval(0.5) == 0.0 and bump.eval(1.0) == 1.0
    # derivatives against central differences
    rho = np.linspace(0.55, 0.95, 9)
    h = 1e-6
    assert np.allclose(bump.d1(rho), (bump.eval(rho + h) - bump.eval(rho - h)) / (2 * h), atol=1e-6)
    assert np.allclose(bump.d2(rho), (bump.d1(rho + h) - bump.d1(rho - h)) / (2 * h), atol=1e-5)


def test_m_by_brute_force():
    R = np.linspace(1.0, 60.0, 600_001)
    for k, eps in ((1.0, 1.0), (3.0, 0.5), (0.5, 2.0)):
        assert ex.compute_m(k, eps) == pytest.approx(np.max(np.exp(-k * R) * R ** (1 + eps)), rel=1e-8)


def test_beta_values():
    L = ex.build_bump().L
    assert ex.compute_beta(1.0, L, 1.0) == pytest.approx(0.006668, rel=1e-4)
    m = ex.compute_m(1.0, 1.0)
    assert ex.compute_beta(1.0, 1.0, 1.0) == pytest.approx(1 / (2 * (2 * m + 1 / math.tanh(0.5))))


def test_epsilon_step():
    assert ex.epsilon_step(0.0067, 1.0, 1.0, 5.0) == pytest.approx(0.0067 * 25 * math.exp(-5))


def test_hessian_chain_at_extreme():
    L = ex.build_bump().L
    k, eps = 1.0, 1.0
    beta = ex.compute_beta(k, L, eps)
    for R in np.geomspace(1.0, 50.0, 60):
        a_R = math.exp(k * R) / R ** (1 + eps)
        if a_R < k:
            continue
        lower, ok = ex.hessian_certificate(k, L, eps, beta, R, a_R)
        assert ok and lower >= k / 2


def test_hessian_preconditions():
    L = ex.build_bump().L
    beta = ex.compute_beta(1.0, L, 1.0)
    with pytest.raises(PreconditionError):
        ex.hessian_certificate(1.0, L, 1.0, beta, 5.0, 0.5)
    with pytest.raises(PreconditionError):
        ex.hessian_certificate(1.0, L, 1.0, beta, 5.0, 1e6)


def test_theta_R_value_and_bounds():
    assert ex.theta_R(1.0, 5.0) == pytest.approx(math.asin(math.sinh(1) / math.sinh(5)), rel=1e-13)
    for R in np.linspace(ex.r_tilde(1.0), 30, 50):
        th = ex.theta_R(1.0, R)
        assert th <= 2 * math.sinh(1) / math.sinh(R)
        assert th <= 8 * math.sinh(1) * math.exp(-R)


def test_theta_R_below_validity():
    with pytest.raises(DomainError):
        ex.theta_R(1.0, 0.5 * ex.r_tilde(1.0))


def test_bucket_series_against_hurwitz_zeta():
    for r0, eps in ((10.0, 1.0), (3.5, 0.5), (100.0, 2.0)):
        val = ex.bucket_series(r0, eps)
        ref = zeta(1 + eps, r0)
        assert val >= ref
        assert val == pytest.approx(ref, rel=1e-3)


def test_choose_r0_is_minimal_on_grid():
    k, eps, alpha = 1.0, 1.0, math.pi / 4
    r0 = ex.choose_r0(k, eps, alpha)
    beta = ex.compute_beta(k, ex.build_bump().L, eps)
    assert ex.bucket_bound(k, eps, beta, r0) <= alpha
    assert ex.bucket_bound(k, eps, beta, r0 - 0.5) > alpha


def test_schedule_reaches_stop_from_r_tilde():
    rt = ex.r_tilde(1.0)
    sched = ex.run_schedule(1.0, 1.0, math.pi / 4, rt, max_steps=500_000)
    assert sched.reached_stop
    n = sched.steps.shape[0]
    assert math.log10(n) <= ex.log10_steps_upper(sched.beta, 1.0, 1.0, 2.0, rt + 10.0) + math.log10(2)
    # consistency of the recursion
    r = sched.steps[:, 1]
    assert np.allclose(np.diff(r), sched.steps[:-1, 2])


def test_schedule_at_chosen_r0_is_admissible():
    r0 = ex.choose_r0(1.0, 1.0, math.pi / 4)
    sched = ex.run_schedule(1.0, 1.0, math.pi / 4, r0)
    assert sched.admissible
    assert sched.stop_reason == "underflow"
    assert math.isfinite(sched.log10_steps_to_stop)


def test_small_step_recursion_counts_are_bounded():
    sched = ex.run_schedule(1.0, 1.0, math.pi / 4, 10.0, max_steps=1000)
    assert not sched.reached_stop and sched.stop_reason == "max_steps"
    assert 8 < sched.log10_steps_to_stop < 9
