import math

import numpy as np
import pytest

from asymdir import barrier as bar
from asymdir import manifold as mf
from asymdir import operator as op
from asymdir import solver as sv
from asymdir.errors import DomainError, NonConvergenceError, PreconditionError, RangeError


def _solve(profile, data, R=2.0, n_r=32, n_t=64, wf=None, **kw):
    wf = wf or mf.hyperbolic(1.0)
    grid = sv.PolarGrid(R, n_r, n_t, wf)
    return sv.solve_ball(sv.DirichletProblem(wf, profile, boundary=data, **kw), grid)


def test_grid_invariants():
    wf = mf.hyperbolic(1.0)
    with pytest.raises(DomainError):
        sv.PolarGrid(1.0, 4, 16, wf)
    with pytest.raises(DomainError):
        sv.PolarGrid(1.0, 16, 15, wf)
    g = sv.PolarGrid(1.0, 16, 32, wf)
    assert np.all(g.area_weights() > 0)
    assert g.index(3, 32) == g.index(3, 0)


def test_constant_data_exact(profile):
    sol = _solve(profile, lambda t: 0.7 + 0 * t)
    assert sol.newton_iters == 0
    assert np.all(sol.u == 0.7)


def test_harmonic_oracle_and_order():
    errs = []
    for n_r, n_t in ((16, 32), (32, 64)):
        sol = _solve(op.p_laplacian(2), np.cos, n_r=n_r, n_t=n_t)
        rr, tt = sol.grid.node_coords()
        exact = sv.poisson_oracle(np.cos, sv.hyperbolic_disk_radius(rr), tt, math.tanh(1.0))
        errs.append(np.max(np.abs(sol.u - exact)))
    assert errs[1] < 1e-3
    assert math.log2(errs[0] / errs[1]) >= 1.0


def test_poisson_oracle_modes():
    rho = np.array([0.0, 0.3, 0.9])
    t = np.array([0.1, 1.0, 2.0])
    assert np.allclose(sv.poisson_oracle(lambda s: np.cos(2 * s), rho, t), rho**2 * np.cos(2 * t), atol=1e-14)
    assert np.allclose(sv.poisson_oracle(lambda s: 3 + 0 * s, rho, t), 3.0)


def test_radial_p2_closed_form():
    # a = id, n = 1: u' = c / sinh r and int dr / sinh r = log tanh(r/2)
    rs = sv.solve_radial(op.p_laplacian(2), mf.hyperbolic(1.0), 1, 1.0, 2.0, 0.0, 1.0)
    F = lambda r: math.log(math.tanh(r / 2))  # noqa: E731
    assert rs(1.5) == pytest.approx((F(1.5) - F(1.0)) / (F(2.0) - F(1.0)), abs=1e-12)
    assert rs(2.0) == pytest.approx(1.0, abs=1e-12)


def test_radial_zero_rise():
    rs = sv.solve_radial(op.minimal(), mf.hyperbolic(1.0), 2, 1.0, 3.0, 0.4, 0.4)
    assert rs.c_flux == 0.0
    assert rs(2.0) == pytest.approx(0.4)


def test_radial_decreasing_data():
    up = sv.solve_radial(op.p_laplacian(3), mf.hyperbolic(1.0), 2, 1.0, 2.0, 0.0, 1.0)
    down = sv.solve_radial(op.p_laplacian(3), mf.hyperbolic(1.0), 2, 1.0, 2.0, 1.0, 0.0)
    r = np.linspace(1.0, 2.0, 7)
    assert np.allclose(down(r), 1.0 - up(r), atol=1e-12)


def test_radial_flux_identity():
    # f(r)^n a(u'(r)) is constant
    wf = mf.hyperbolic(1.0)
    prof = op.p_laplacian(1.5)
    rs = sv.solve_radial(prof, wf, 3, 0.5, 2.0, 0.0, 2.0)
    r = np.linspace(0.5, 2.0, 9)
    flux = wf.f(r) ** 3 * prof.a(rs.slope(r))
    assert np.allclose(flux, rs.c_flux, rtol=1e-12)


def test_radial_minimal_infeasible():
    with pytest.raises(RangeError):
        sv.solve_radial(op.minimal(), mf.hyperbolic(1.0), 1, 1.0, 2.0, 0.0, 1.1)


@pytest.mark.parametrize("prof", [op.p_laplacian(1.5), op.p_laplacian(2), op.p_laplacian(3), op.minimal()])
def test_annulus_matches_radial(prof):
    wf = mf.hyperbolic(1.0)
    rise = 0.5
    grid = sv.PolarGrid(2.0, 128, 4, wf, r_in=1.0)
    problem = sv.DirichletProblem(wf, prof, boundary=lambda t: rise + 0 * t, inner_boundary=lambda t: 0 * t)
    sol = sv.solve_ball(problem, grid)
    rs = sv.solve_radial(prof, wf, 1, 1.0, 2.0, 0.0, rise)
    assert np.max(np.abs(sol.rings[:, 0] - rs(grid.radii))) <= 1e-5


@pytest.mark.parametrize("prof", [op.p_laplacian(1.5), op.p_laplacian(3), op.minimal()])
def test_maximum_principle_rough_data(prof):
    sol = _solve(prof, lambda t: np.sign(np.cos(3 * t)), n_r=16, n_t=48)
    assert sol.max_principle_violation() <= 1e-10


def test_energy_monotone_in_newton():
    sol = _solve(op.minimal(), lambda t: 2 * np.cos(t), R=3.0)
    assert sol.newton_iters > 0
    E = np.array(sol.energies)
    assert np.all(np.diff(E) <= 1e-13 * np.abs(E[:-1]))


def test_rotation_equivariance():
    n_t, shift = 64, 8
    t0 = shift * 2 * math.pi / n_t
    data = lambda t: np.cos(t) + 0.5 * np.sin(2 * t)  # noqa: E731
    a = _solve(op.p_laplacian(3), data, n_t=n_t)
    b = _solve(op.p_laplacian(3), lambda t: data(t - t0), n_t=n_t)
    assert np.max(np.abs(np.roll(a.rings, shift, axis=1) - b.rings)) <= 1e-10


def test_comparison_ordered():
    u = _solve(op.p_laplacian(2), np.cos)
    v = _solve(op.p_laplacian(2), lambda t: np.cos(t) + 0.1)
    res = sv.comparison_check_discrete(u, v)
    assert res.ordered and res.worst_violation == 0.0
    same = sv.comparison_check_discrete(u, u)
    assert same.ordered and same.worst_violation == 0.0


def test_comparison_fault_injection():
    u = _solve(op.p_laplacian(2), np.cos)
    v = _solve(op.p_laplacian(2), lambda t: np.cos(t) + 0.1)
    v.u[100] = u.u[100] - 0.5
    res = sv.comparison_check_discrete(u, v)
    assert not res.ordered and res.worst_index == 100
    assert res.worst_violation == pytest.approx(0.5)


def test_comparison_rejects_mismatched_grids():
    u = _solve(op.p_laplacian(2), np.cos)
    v = _solve(op.p_laplacian(2), np.cos, n_r=16)
    with pytest.raises(DomainError):
        sv.comparison_check_discrete(u, v)
    with pytest.raises(PreconditionError):
        sv.comparison_check_discrete(_solve(op.p_laplacian(2), lambda t: np.cos(t) + 1), u)


def test_nonconvergence_reported():
    with pytest.raises(NonConvergenceError) as info:
        _solve(op.p_laplacian(3), lambda t: 3 * np.cos(t), max_newton=1)
    assert info.value.residual > 1e-10


def test_precondition_on_warping():
    wf = mf.from_expressions("r", "1", "0", 1.0)
    with pytest.raises(PreconditionError):
        _solve(op.p_laplacian(2), np.cos, wf=wf)


def test_cascade_constant_data():
    problem = sv.DirichletProblem(mf.hyperbolic(1.0), op.p_laplacian(2), asymptotic_data=lambda t: 0.3 + 0 * t)
    _, rep, _ = sv.exhaustion_solve(problem, [1.0, 1.5, 2.0], n_r_per_unit=8, n_t=16)
    assert rep.d == [0.0, 0.0]


def test_cascade_p2_matches_continuum_differences():
    # harmonic extension of cos t from B_R at radius r: tanh(r/2)/tanh(R/2) cos t,
    # so on B_1 the continuum d_k is tanh(1/2) |coth(R'/2) - coth(R/2)|
    problem = sv.DirichletProblem(mf.hyperbolic(1.0), op.p_laplacian(2), asymptotic_data=np.cos)
    radii = [1.0, 2.0, 3.0]
    _, rep, _ = sv.exhaustion_solve(problem, radii, n_r_per_unit=16, n_t=64)
    coth = lambda x: 1 / math.tanh(x)  # noqa: E731
    for (R, R2), d in zip(zip(radii[:-1], radii[1:]), rep.d):
        assert d == pytest.approx(math.tanh(0.5) * (coth(R / 2) - coth(R2 / 2)), rel=2e-2)
    assert rep.decreasing and all(rep.max_principle)


def test_cascade_rejects_unsorted_radii():
    problem = sv.DirichletProblem(mf.hyperbolic(1.0), op.p_laplacian(2), asymptotic_data=np.cos)
    with pytest.raises(DomainError):
        sv.exhaustion_solve(problem, [2.0, 1.0])


def test_data_continuity_refines():
    coarse, fine = sv.data_continuity(np.cos, 64)
    assert fine < 0.6 * coarse


def test_geodesic_distance_closed_form():
    # along the ray t = x the distance is r - d0
    r = np.array([0.5, 1.0, 3.0])
    assert np.allclose(sv.geodesic_signed_distance(r, 0.0, 1.0, 0.0), r - 1.0)


def test_sandwich_constant_zero():
    sol = _solve(op.p_laplacian(2), lambda t: 0 * t)
    spec = bar.make_spec(op.p_laplacian(2), 1.0, 2, 0.5)
    rep = sv.barrier_sandwich_report(sol, spec, 0.5, 0.0, lambda t: 0 * t)
    assert rep.passed and rep.n_inside > 0


def test_sandwich_cos():
    sol = _solve(op.p_laplacian(2), np.cos, R=4.0, n_r=64, n_t=128)
    spec = bar.make_spec(op.p_laplacian(2), 1.0, 2, 1.0)
    d0 = math.atanh(math.cos(math.pi / 4))
    rep = sv.barrier_sandwich_report(sol, spec, d0, 0.0, np.cos)
    assert rep.passed and rep.worst_slack > 0
    assert rep.epsilon == pytest.approx(1 - math.cos(math.pi / 4), abs=1e-6)


def test_sandwich_height_gate():
    sol = _solve(op.p_laplacian(2), np.cos)
    spec = bar.make_spec(op.p_laplacian(2), 1.0, 2, 0.5)
    with pytest.raises(PreconditionError):
        sv.barrier_sandwich_report(sol, spec, 0.5, 0.0, np.cos)


def test_steep_minimal_annulus_error_shrinks_under_refinement():
    # rise 1 is within 4% of the largest feasible rise; the slope reaches ~20 at r = 1
    wf = mf.hyperbolic(1.0)
    prof = op.minimal()
    rs = sv.solve_radial(prof, wf, 1, 1.0, 2.0, 0.0, 1.0)
    errs = []
    for n_r in (128, 256, 512):
        grid = sv.PolarGrid(2.0, n_r, 4, wf, r_in=1.0)
        sol = sv.solve_ball(sv.DirichletProblem(wf, prof, boundary=lambda t: 1.0 + 0 * t, inner_boundary=lambda t: 0 * t), grid)
        errs.append(np.max(np.abs(sol.rings[:, 0] - rs(grid.radii))))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.2 * errs[0]
