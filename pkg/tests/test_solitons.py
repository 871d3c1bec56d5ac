"""Bowl and shrinker profile construction, barriers, and diagnostics."""

import math

import numpy as np
import pytest

import gflowlab as gf
from gflowlab.errors import NonConvergence
from gflowlab.solitons import (estimate_c_lower, lambda_ceiling,
                               neck_constants, shrinker_upper_bound_fit,
                               solve_bowl, solve_shrinker)


# -- bowl ---------------------------------------------------------------------

def test_bowl_tip_curvature_sum(bowl_sum3, sum3):
    # umbilic tip: speed 1/2 at (m,...,m) forces m = 1/(2 F(1,1)) = 1/6
    assert bowl_sum3.tip_curvature == pytest.approx(1.0 / 6.0, rel=1e-6)


def test_bowl_tip_curvature_bh(bowl_bh3, bh3):
    # F(1,1) = 2/3 by pair summation, so the tip curvature is 3/4
    assert bh3.F11 == pytest.approx(2.0 / 3.0)
    assert bowl_bh3.tip_curvature == pytest.approx(0.75, rel=1e-6)


def test_bowl_gradient_tail(bowl_sum3):
    # zeta_rho ~ rho/4 - 2/rho at rho = 1000: deviation from the linear
    # part matches the -2/rho term to 5%
    dev = float(bowl_sum3.zeta_rho_at(1000.0)) - 1000.0 / 4.0
    assert dev == pytest.approx(-2.0 / 1000.0, rel=0.05)


def test_bowl_strictly_convex_increasing(bowl_sum3):
    # grid carries the exact tip node rho = 0
    assert bowl_sum3.rho[0] == 0.0 and bowl_sum3.zeta[0] == 0.0
    assert np.all(bowl_sum3.zeta_rho[1:] > 0)
    assert np.all(bowl_sum3.zeta_rhorho > 0)
    lo, hi = bowl_sum3.gradient_ratio_bounds()
    assert 0 < lo <= hi < math.inf


def test_bowl_residuals(bowl_sum3, bowl_bh3):
    # residuals are in units of the integrator's tolerance promise
    assert float(np.max(bowl_sum3.residual_norms())) <= 10.0
    assert float(np.max(bowl_bh3.residual_norms())) <= 10.0


def test_residual_detects_wrong_equation(shrinker_sum3_a50):
    # evaluating the shrinker data against the a = inf right-hand side
    # must blow the defect up by many orders of magnitude
    from gflowlab.solitons import _simpson_residuals
    p = shrinker_sum3_a50
    wrong = _simpson_residuals(p.speed, 0.0, p.rho, p.psi, p.psi_rho,
                               p.psi_rhorho, p.rtol, p.rtol * 1e-2)
    assert float(np.max(wrong)) > 1e6


def test_bowl_monitor_identity(bowl_sum3):
    assert bowl_sum3.monitor.identity_gap <= 1e-8
    assert bowl_sum3.monitor.bounded


def test_bowl_tolerance_study(sum3):
    # leading 6 digits of zeta(10) agree between tol 1e-10 and 1e-8
    za = float(solve_bowl(sum3, 12.0, tol=1e-10).zeta_at(10.0))
    zb = float(solve_bowl(sum3, 12.0, tol=1e-8).zeta_at(10.0))
    assert abs(za - zb) <= 1e-6 * abs(za)


def test_lambda_ceiling_finite(all_speeds):
    for sp in all_speeds:
        c = lambda_ceiling(sp)
        assert 0 < c < math.inf


# -- shrinker -----------------------------------------------------------------

def test_shrinker_tip_curvature(shrinker_sum3_a50, sum3):
    assert shrinker_sum3_a50.tip_curvature == pytest.approx(
        1.0 / (2.0 * sum3.F11), rel=1e-6)


def test_shrinker_lower_bound(shrinker_sum3_a50, sum3):
    # v^2 >= 2 F(0,1)(1 - z^2/a^2) at every z node, equality at the tip
    margin = shrinker_sum3_a50.lower_bound_margin()
    assert np.all(margin >= 0.0)
    assert margin[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(margin[:-1] > 0.0)


def test_shrinker_shape(shrinker_sum3_a50, sum3):
    prof = shrinker_sum3_a50
    sigma2 = 2.0 * sum3.F01
    assert np.all(prof.v[:-1] ** 2 < sigma2)
    assert prof.v[-1] == 0.0
    # strictly decreasing and concave in z
    assert np.all(np.diff(prof.v) < 0)
    dd = np.diff(prof.v[:-1], 2)
    assert np.all(dd < 1e-12)


def test_shrinker_barriers(shrinker_sum3_a50, sum3):
    prof = shrinker_sum3_a50
    w = prof.theta * prof.rho ** 2 / (4.0 * sum3.F11)
    assert np.all(prof.psi >= w - 1e-9 * (1 + prof.psi))
    assert np.all(prof.rho * prof.psi_rho - prof.psi >= -1e-9 * (1 + prof.psi))
    valid = prof.rho ** 2 < 2 * prof.a ** 2 * (sum3.F01
                                               - sum3.F11 / prof.Theta)
    W = prof.Theta * prof.rho ** 2 / (4.0 * sum3.F11)
    assert np.all(prof.psi[valid] <= W[valid] + 1e-9 * (1 + prof.psi[valid]))


def test_shrinker_monitor_and_residuals(shrinker_sum3_a50):
    assert shrinker_sum3_a50.monitor.identity_gap <= 1e-8
    assert shrinker_sum3_a50.monitor.bounded
    assert float(np.max(shrinker_sum3_a50.residual_norms())) <= 10.0


def test_shrinker_inversion_round_trip(shrinker_sum3_a50):
    # |h(v(z)) - z| <= 1e-10 by construction of the monotone inversion
    assert shrinker_sum3_a50.inversion_error <= 1e-10


def test_shrinker_mesh_refinement(sum3):
    coarse = solve_shrinker(sum3, 25.0, tol=1e-6)
    fine = solve_shrinker(sum3, 25.0, tol=5e-7)
    grid = np.geomspace(0.1, 30.0, 200)
    gap = np.max(np.abs(coarse.psi_at(grid) - fine.psi_at(grid))
                 / (1.0 + np.abs(fine.psi_at(grid))))
    assert gap <= coarse.cauchy_gap


def test_shrinker_nonconvergence_raises(sum3):
    with pytest.raises(NonConvergence):
        solve_shrinker(sum3, 25.0, tol=1e-16,
                       rho_k=[2.0 ** -k for k in range(4, 8)])


def test_shrinker_theta_window_checked(sum3, bh3):
    with pytest.raises(ValueError):
        solve_shrinker(sum3, 25.0, theta=1.2)
    # bh n=3 has Q = 2, so theta must exceed F(1,1)/Q = 1/3
    with pytest.raises(ValueError):
        solve_shrinker(bh3, 25.0, theta=0.2)


# -- w diagnostic --------------------------------------------------------------

def test_w_lower_bound_and_tip(shrinker_sum3_a100, sum3):
    diag = gf.shrinker_w_diagnostic(shrinker_sum3_a100)
    assert diag.lower_ok
    assert diag.min_margin > 0.0
    # tip limit 2 F(1,1)/F(0,1) = 3 for the sum speed with n = 3
    assert diag.tip_target == pytest.approx(3.0)
    assert diag.tip_limit == pytest.approx(3.0, rel=0.02)


def test_w_upper_barrier(shrinker_sum3_a100):
    diag = gf.shrinker_w_diagnostic(shrinker_sum3_a100)
    assert diag.upper_window is not None
    assert diag.upper_ok


def test_w_mid_neck_window(shrinker_sum3_a100, sum3):
    # w at the inner end of the window sits in (2, 2 + K w1]
    prof = shrinker_sum3_a100
    z0 = prof.z[0]
    w0 = prof.w[0]
    bound = 2.0 + prof.K * (1.0 / z0 ** 2
                            + 1.0 / (prof.a ** 2 - z0 ** 2))
    assert 2.0 < w0 <= bound


def test_neck_constants_sum(sum3):
    # dgamma^1(t,1,...,1) = 1 for the linear speed, so c = 1 and K = 17
    consts = neck_constants(sum3)
    assert consts["c"] == pytest.approx(1.0, rel=1e-9)
    assert consts["K"] == pytest.approx(17.0, rel=1e-9)
    assert consts["L0"] == pytest.approx(math.sqrt(17.0) + 1.0, rel=1e-9)


def test_c_lower_positive(all_speeds):
    for sp in all_speeds:
        assert 0 < estimate_c_lower(sp) <= 1.0 / sp.a_lin + 1e-9


# -- upper bound and convergence to the bowl -----------------------------------

def test_upper_bound_fit_sweep(sum3):
    profs = [gf.solve_shrinker(sum3, a, tol=1e-8)
             for a in (50.0, 100.0, 200.0, 400.0)]
    rep = gf.shrinker_upper_bound_check(profs, L=15.0)
    assert rep["stable"]
    cs = [r["C_fit"] for r in rep["rows"]]
    assert all(c > 0 for c in cs)
    assert max(cs[-3:]) <= 2.0 * min(cs[-3:])


def test_upper_bound_strict_inside(shrinker_sum3_a100):
    # at z = z_min the fitted inequality is strict for large a
    c = shrinker_upper_bound_fit(shrinker_sum3_a100, L=15.0)
    prof = shrinker_sum3_a100
    a = prof.a
    la = math.log(a) / a ** 2
    rhs = 2.0 * prof.speed.F01 * (
        1.0 - (1.0 - c * la) * (prof.z[0] ** 2 - c) / a ** 2)
    assert prof.v[0] ** 2 < rhs


def test_shrinker_to_bowl(sum3):
    rows = gf.shrinker_to_bowl_convergence(sum3, [20.0, 40.0, 80.0], M=10.0)
    gaps = [r["sup_gap"] for r in rows]
    dgaps = [r["sup_gap_rho"] for r in rows]
    assert gaps[0] > gaps[1] > gaps[2]
    assert dgaps[0] > dgaps[1] > dgaps[2]
    assert gaps[2] < 0.25 * gaps[0]


def test_shrinker_and_bowl_share_tip(sum3, bowl_sum3, shrinker_sum3_a50):
    # both tip curvatures equal 1/(2 F(1,1)) independent of a
    assert bowl_sum3.tip_curvature == pytest.approx(
        shrinker_sum3_a50.tip_curvature, rel=1e-5)


def test_w_finite_on_valid_profile(shrinker_sum3_a50):
    # w is only undefined where v^2 >= 2F(0,1), which a valid profile
    # never reaches
    diag = gf.shrinker_w_diagnostic(shrinker_sum3_a50)
    assert np.all(np.isfinite(diag.w))


def test_shrinker_other_speeds(bh3, sr24):
    # the construction and its diagnostics hold across the speed families
    for sp in (bh3, sr24):
        prof = solve_shrinker(sp, 40.0, tol=1e-8)
        target = 1.0 / (2.0 * sp.F11)
        assert prof.tip_curvature == pytest.approx(target, rel=1e-6)
        assert np.all(prof.lower_bound_margin() >= 0.0)
        diag = gf.shrinker_w_diagnostic(prof)
        assert diag.lower_ok
        assert diag.tip_limit == pytest.approx(2.0 * sp.F11 / sp.F01,
                                               rel=0.02)
        assert prof.monitor.bounded
        assert float(np.max(prof.residual_norms())) <= 10.0
