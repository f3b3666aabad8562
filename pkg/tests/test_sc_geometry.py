import math

import numpy as np
import pytest

from asymdir import manifold as mf
from asymdir import sc_geometry as scg
from asymdir.errors import DomainError, PreconditionError


def test_first_integral_closed_form():
    # cos(theta) = tanh(kR) coth(kr) along the curve
    curve = scg.integrate_sr_ode(1.0, 1.0)
    assert np.allclose(np.cos(curve.theta), math.tanh(1.0) / np.tanh(curve.r), atol=1e-9)


def test_curve_symmetric_in_t():
    curve = scg.integrate_sr_ode(0.7, 1.3)
    for t in (0.5, 3.0, 10.0):
        rp, thp, _, _ = scg.curve_state(curve, t)
        rm, thm, _, _ = scg.curve_state(curve, -t)
        assert rp == pytest.approx(rm, rel=1e-9)
        assert thp == pytest.approx(-thm, abs=1e-9)


def test_minimum_radius_at_t0():
    curve = scg.integrate_sr_ode(2.0, 0.5)
    assert curve.r.min() == pytest.approx(2.0)


def test_asymptotic_angle_both_branches():
    R, k = 1.0, 1.0
    curve = scg.integrate_sr_ode(R, k, (-30.0, 30.0))
    alpha = scg.asymptotic_angle(R, k)
    assert curve.theta[-1] == pytest.approx(alpha, abs=1e-6)
    assert curve.theta[0] == pytest.approx(-alpha, abs=1e-6)


def test_curve_state_outside_span():
    curve = scg.integrate_sr_ode(1.0, 1.0, (-1.0, 1.0))
    with pytest.raises(DomainError):
        scg.curve_state(curve, 2.0)


def test_bad_parameters():
    with pytest.raises(DomainError):
        scg.integrate_sr_ode(-1.0, 1.0)
    with pytest.raises(DomainError):
        scg.integrate_sr_ode(1.0, 1.0, (0.5, 1.0))


def test_embedding_lies_on_sphere_of_radius_r():
    curve = scg.integrate_sr_ode(1.0, 1.0)
    x = scg.embed_sr(curve, [0.3], 2.0)
    r, _, _, _ = scg.curve_state(curve, 2.0)
    assert np.linalg.norm(x) == pytest.approx(r)


def test_hyperbolic_form_vanishes():
    wf = mf.hyperbolic(1.0, r_max=40.0)
    curve = scg.integrate_sr_ode(1.0, 1.0)
    for t in (-5.0, 0.0, 0.7, 5.0):
        h_tt, h_ii = scg.second_fundamental_form(wf, curve, t, 1.1, n=3, normalized=True)
        assert abs(h_tt) <= 1e-9
        assert max(abs(h) for h in h_ii) <= 1e-9


def test_steeper_warping_gives_positive_form():
    wf = mf.sinh_scaled(2.0, 1.0)
    curve = scg.integrate_sr_ode(1.0, 1.0)
    h_tt, h_ii = scg.second_fundamental_form(wf, curve, 0.5, math.pi / 2, n=3)
    assert h_tt > 0 and min(h_ii) > 0


def test_degenerate_sphere_angle():
    curve = scg.integrate_sr_ode(1.0, 1.0)
    with pytest.raises(DomainError):
        scg.second_fundamental_form(mf.hyperbolic(1.0), curve, 0.5, 0.0)


def test_certificate_rejects_warping_outside_comparison():
    wf = mf.from_expressions("r", "1", "0", 1.0)
    with pytest.raises(PreconditionError):
        scg.certify_convexity(wf, 1.0, 1.0, np.linspace(-2, 2, 5), np.linspace(0.5, 2.5, 3))


def test_sc_witness_angle():
    R, curve = scg.sc_witness(mf.hyperbolic(1.0), 1.0, math.pi / 4)
    assert scg.asymptotic_angle(R, 1.0) == pytest.approx(math.pi / 4)
    assert curve.theta[-1] == pytest.approx(math.pi / 4, abs=1e-6)
