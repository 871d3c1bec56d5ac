"""Hermite eigenbasis, projections, gamma traces and mode classification."""

import math

import numpy as np
import pytest
import sympy

import gflowlab as gf
from gflowlab.errors import TruncationWarning, WindowTooShort
from gflowlab.flow import BoundaryCondition, RadialFlowState, cylinder_radius, run_flow
from gflowlab.spectral import (GammaTrace, build_basis, decompose, eigen_table,
                               eigenvalue, hermite_h, mode_sign, plus_decay_rate,
                               smooth_cutoff)


# -- eigenvalues ---------------------------------------------------------------

def test_eigenvalue_formula():
    # 1 - k/2 - l(l+n-2)/(2(n-1))
    assert eigenvalue(3, 0, 0) == 1.0
    assert eigenvalue(3, 1, 0) == 0.5
    assert eigenvalue(3, 2, 0) == 0.0
    assert eigenvalue(3, 3, 0) == -0.5
    assert eigenvalue(3, 0, 1) == 0.5
    assert eigenvalue(3, 1, 1) == 0.0
    assert eigenvalue(5, 0, 2) == pytest.approx(1.0 - 10.0 / 8.0)


def test_sign_table_all_n():
    positive = {(0, 0), (1, 0), (0, 1)}
    zero = {(2, 0), (1, 1)}
    for n in range(2, 7):
        for k in range(7):
            for l in range(7):
                expected = "+" if (k, l) in positive else \
                    ("0" if (k, l) in zero else "-")
                assert mode_sign(n, k, l) == expected, (n, k, l)


def test_eigen_table_shape():
    tab = eigen_table(3, 6, 6)
    assert tab.shape == (7, 7)
    assert tab[0, 0] == 1.0


# -- basis ----------------------------------------------------------------------

def test_gaussian_weight_normalization():
    # <1, 1> = integral of e^{-z^2/4a} = 2 sqrt(pi a)
    for a in (0.32, 1.0, 2.5):
        basis = build_basis(a, K=4)
        one = np.ones_like(basis.z)
        assert basis.norm_sq(one) == pytest.approx(
            2.0 * math.sqrt(math.pi * a), rel=1e-13)


def test_orthogonality(sum3):
    basis = build_basis(1.0, K=10, quad_order=40)
    assert basis.gram_error <= 1e-10
    h1 = hermite_h(1, basis.z / 2.0)
    h2 = hermite_h(2, basis.z / 2.0)
    assert abs(np.sum(basis.wz * h1 * h2)) <= 1e-10


def test_eigen_identity_sympy_oracle():
    # direct differentiation: (a d^2/dz^2 - z/2 d/dz) H_k(z/(2 sqrt a))
    # equals -(k/2) H_k(z/(2 sqrt a))
    a_val = sympy.Rational(7, 10)
    z = sympy.symbols("z")
    for k in (1, 2, 3, 5):
        hk = sympy.hermite(k, z / (2 * sympy.sqrt(a_val)))
        action = a_val * sympy.diff(hk, z, 2) - z / 2 * sympy.diff(hk, z)
        diff = sympy.simplify(action + sympy.Rational(k, 2) * hk)
        assert diff == 0


def test_eigen_identity_spectral():
    for a in (0.32, 1.0):
        basis = build_basis(a, K=8, quad_order=60)
        assert basis.eigen_identity_error() <= 1e-8


def test_operator_matrix_leakage():
    basis = build_basis(1.0, K=8, quad_order=60)
    mat = basis.operator_matrix()
    off = mat - np.diag(np.diag(mat))
    assert float(np.max(np.abs(off))) <= 1e-8


def test_quad_order_guard():
    with pytest.raises(ValueError):
        build_basis(1.0, K=10, quad_order=10)


def test_quadrature_scaling():
    # doubling quad_order leaves coefficients of band-limited input unchanged
    basis1 = build_basis(1.0, K=6, quad_order=40)
    basis2 = build_basis(1.0, K=6, quad_order=80)
    def u(z):
        return 0.3 * basis1.value(0, z) - 1.2 * basis1.value(3, z)
    c1 = decompose(basis1, u, 3).coeffs
    c2 = decompose(basis2, u, 3).coeffs
    assert float(np.max(np.abs(c1 - c2))) <= 1e-12


# -- decomposition ----------------------------------------------------------------

def test_constant_is_positive_mode():
    basis = build_basis(1.0, K=6)
    dec = decompose(basis, lambda z: np.ones_like(z), 3)
    assert dec.plus_sq == pytest.approx(dec.norm_sq, rel=1e-12)
    assert dec.zero_sq <= 1e-20 and dec.minus_sq <= 1e-20
    assert dec.mu[0] == 1.0


def test_h2_is_zero_mode():
    # z^2/a - 2 equals H_2 at the scaled argument, the annihilated direction
    a = 0.5
    basis = build_basis(a, K=6)
    dec = decompose(basis, lambda z: z ** 2 / a - 2.0, 3)
    assert dec.zero_sq / dec.norm_sq == pytest.approx(1.0, rel=1e-12)


def test_h3_is_negative_mode():
    basis = build_basis(1.0, K=6)
    dec = decompose(basis, lambda z: hermite_h(3, z / 2.0), 3)
    assert dec.minus_sq / dec.norm_sq == pytest.approx(1.0, rel=1e-12)
    assert eigenvalue(3, 3, 0) == -0.5


def test_round_trip_band_limited():
    basis = build_basis(1.0, K=8)
    rng = np.random.default_rng(3)
    coeffs = rng.normal(size=7)  # degree <= K - 2
    def u(z):
        return sum(c * basis.value(k, z) for k, c in enumerate(coeffs))
    dec = decompose(basis, u, 3)
    z = np.linspace(-8, 8, 100)
    err = np.max(np.abs(dec.reconstruct(z) - u(z)))
    assert err <= 1e-10
    assert dec.tail_energy <= 1e-10 * dec.norm_sq + 1e-18


def test_parseval_inequality():
    basis = build_basis(1.0, K=4)
    with pytest.warns(TruncationWarning):
        dec = decompose(basis, lambda z: np.cos(3.0 * z), 3)
    assert np.sum(dec.coeffs ** 2) <= dec.norm_sq * (1 + 1e-12)


def test_part_split_reconstructs():
    basis = build_basis(1.0, K=6)
    def u(z):
        return (basis.value(0, z) - 2.0 * basis.value(2, z)
                + 0.5 * basis.value(4, z))
    dec = decompose(basis, u, 3)
    total = dec.part("+") + dec.part("0") + dec.part("-")
    assert np.allclose(total, dec.coeffs)


# -- cutoff ------------------------------------------------------------------------

def test_cutoff_shape():
    assert smooth_cutoff(0.0) == 1.0
    assert smooth_cutoff(0.49) == 1.0
    assert smooth_cutoff(1.0) == 0.0
    assert smooth_cutoff(-1.2) == 0.0
    s = np.linspace(-2, 2, 401)
    chi = smooth_cutoff(s)
    # monotone away from the origin: s * chi'(s) <= 0
    dchi = np.gradient(chi, s)
    assert np.all(s * dchi <= 1e-12)


# -- gamma traces -------------------------------------------------------------------

@pytest.fixture(scope="module")
def trace_setup():
    sp = gf.SpeedFunction("sum", 3)
    sigma = cylinder_radius(sp)
    basis = build_basis(sp.a_lin, K=10, quad_order=90)
    delta = 0.06
    z = np.linspace(-18.0, 18.0, int(round(36 / delta)) + 1)

    def run(u0, T=9.0):
        st = RadialFlowState("rescaled", z, sigma + u0, 0.0, sp)
        dt0 = 0.4 * delta ** 2 / 2.0
        nsteps = int(math.ceil(T / dt0))
        return run_flow(st, T / nsteps, nsteps,
                        bc=BoundaryCondition(mode="frozen"),
                        record_every=max(1, int(nsteps // (T * 8))))

    return sp, basis, z, run


def test_trace_k0_seed_positive_dominated(trace_setup):
    sp, basis, z, run = trace_setup
    hist = run(1e-6 * basis.value(0, z))
    trace = gf.gamma_trace_from_run(hist, basis, r=0.3, L=10.0)
    ratio = (trace.Gamma_zero + trace.Gamma_minus) / trace.Gamma_plus
    assert ratio[-1] < 1e-3  # -> 0 into the tail
    assert np.all(np.diff(trace.Gamma) <= 1e-18)  # nonincreasing in k
    verdict = gf.merle_zaag_classifier(trace)
    assert verdict["verdict"] == "positive-dominated"
    # sandwich with the measured constant
    s = trace.gamma_plus + trace.gamma_zero + trace.gamma_minus
    C = trace.sandwich_constant
    assert np.all(s <= C * trace.gamma * (1 + 1e-12))
    assert np.all(s >= trace.gamma / C * (1 - 1e-12))


def test_trace_k2_seed_neutral(trace_setup):
    sp, basis, z, run = trace_setup
    hist = run(1e-4 * basis.value(2, z))
    trace = gf.gamma_trace_from_run(hist, basis, r=0.3, L=10.0)
    verdict = gf.merle_zaag_classifier(trace)
    assert verdict["verdict"] == "neutral-dominated"


def test_trace_k1_decay_factor(trace_setup):
    # Gamma^+_{k+1} <= e^{-1} Gamma^+_k with equality approached by the
    # slowest positive mode
    sp, basis, z, run = trace_setup
    hist = run(1e-5 * basis.value(1, z))
    trace = gf.gamma_trace_from_run(hist, basis, r=0.3, L=10.0)
    rate = plus_decay_rate(trace)
    assert rate["factor_per_window"] == pytest.approx(math.exp(-1.0),
                                                      rel=0.10)
    # per-window law holds up to the run's small error terms
    gp = trace.Gamma_plus
    assert np.all(gp[1:] <= math.exp(-1.0) * gp[:-1] * 1.05)


def test_trace_monotone_seed(trace_setup):
    sp, basis, z, run = trace_setup
    u0 = 1e-5 * (basis.value(1, z) + 0.1 * basis.value(3, z))
    assert np.all(np.diff(u0) > 0) or np.all(np.diff(u0) < 0)
    hist = run(u0)
    trace = gf.gamma_trace_from_run(hist, basis, r=0.3, L=10.0)
    assert gf.merle_zaag_classifier(trace)["verdict"] == "positive-dominated"


def test_trace_default_r_formula(trace_setup):
    # with the asymptotic default r = 1e-4 the cutoff radius delta^{-r}
    # stays near 1 for finite amplitudes; the trace is still well formed
    sp, basis, z, run = trace_setup
    hist = run(1e-4 * basis.value(0, z), T=4.0)
    trace = gf.gamma_trace_from_run(hist, basis, L=10.0)
    assert trace.r == 1e-4
    assert np.all(trace.gamma >= 0)
    assert np.all(np.diff(trace.Gamma) <= 1e-18)


def test_trace_window_too_short(trace_setup):
    sp, basis, z, run = trace_setup
    hist = run(1e-5 * basis.value(1, z), T=1.0)
    with pytest.raises(WindowTooShort):
        gf.gamma_trace_from_run(hist, basis, r=0.3, L=10.0)


# -- classifier on synthetic traces ---------------------------------------------

def test_classifier_synthetic_positive():
    k = np.arange(10)
    trace = GammaTrace.from_arrays(np.exp(-k), np.exp(-2.0 * k),
                                   np.exp(-3.0 * k))
    assert gf.merle_zaag_classifier(trace)["verdict"] == "positive-dominated"


def test_classifier_synthetic_neutral():
    k = np.arange(10)
    trace = GammaTrace.from_arrays(0.5 * np.exp(-2.0 * k), np.ones(10),
                                   np.exp(-3.0 * k))
    assert gf.merle_zaag_classifier(trace)["verdict"] == "neutral-dominated"


def test_classifier_synthetic_inconclusive():
    trace = GammaTrace.from_arrays(np.ones(10), 0.9 * np.ones(10),
                                   0.1 * np.ones(10))
    assert gf.merle_zaag_classifier(trace)["verdict"] == "inconclusive"


def test_classifier_needs_windows():
    trace = GammaTrace.from_arrays(np.ones(4), np.ones(4), np.ones(4))
    with pytest.raises(WindowTooShort):
        gf.merle_zaag_classifier(trace)
