"""Weighted-L^2 eigenstructure of the linearized rescaled flow.

The linearization at the cylinder is the drift-diffusion operator

    L u = a u_zz + Delta_{S^{n-1}} u / (2(n-1)) - z u_z / 2 + u,

symmetric for the measure e^{-z^2/4a} dz dtheta.  Its eigenfunctions are
H_k(z / (2 sqrt(a))) Y_l^m(theta) with eigenvalues
1 - k/2 - l(l+n-2)/(2(n-1)).  This module builds the Gauss-Hermite
machinery for the z-factor, projections onto the positive / zero / negative
eigenspaces, and the windowed tail traces used for mode-dominance
bookkeeping of rescaled-flow runs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.interpolate import PchipInterpolator

from .errors import QuadratureFailure, TruncationWarning, WindowTooShort


def eigenvalue(n: int, k: int, l: int) -> float:
    """mu_{k,l} = 1 - k/2 - l(l+n-2)/(2(n-1))."""
    if n < 2 or k < 0 or l < 0:
        raise ValueError("need n >= 2 and k, l >= 0")
    return 1.0 - 0.5 * k - l * (l + n - 2) / (2.0 * (n - 1.0))


def mode_sign(n: int, k: int, l: int) -> str:
    mu = eigenvalue(n, k, l)
    if mu > 0:
        return "+"
    if mu < 0:
        return "-"
    return "0"


def eigen_table(n: int, kmax: int, lmax: int) -> np.ndarray:
    """Eigenvalues mu_{k,l} for 0 <= k <= kmax, 0 <= l <= lmax."""
    return np.array([[eigenvalue(n, k, l) for l in range(lmax + 1)]
                     for k in range(kmax + 1)])


def hermite_h(k: int, x):
    """Physicists' Hermite polynomial H_k (raw, unnormalized)."""
    x = np.asarray(x, dtype=float)
    hkm1 = np.zeros_like(x)
    hk = np.ones_like(x)
    for j in range(k):
        hkm1, hk = hk, 2.0 * x * hk - 2.0 * j * hkm1
    return hk


@dataclass
class HermiteBasis:
    """Orthonormal Hermite-eigenfunction basis for the weight e^{-z^2/4a}.

    values[k] holds n_k(z_i) at the rescaled Gauss-Hermite nodes z_i with
    weights wz_i, so that <u, v> ~= sum_i wz_i u(z_i) v(z_i) and
    <n_j, n_k> = delta_jk.
    """

    a: float
    K: int
    quad_order: int
    z: np.ndarray
    wz: np.ndarray
    values: np.ndarray
    dvalues: np.ndarray
    d2values: np.ndarray
    gram_error: float

    def value(self, k: int, z):
        """Normalized eigenfunction n_k at arbitrary points."""
        x = np.asarray(z, dtype=float) / (2.0 * math.sqrt(self.a))
        norm = math.sqrt(2.0 * math.sqrt(math.pi * self.a) * 2.0 ** k
                         * math.factorial(k))
        return hermite_h(k, x) / norm

    def project(self, u_nodes: np.ndarray) -> np.ndarray:
        """Coefficients <u, n_k> for k = 0..K."""
        return self.values @ (self.wz * u_nodes)

    def norm_sq(self, u_nodes: np.ndarray) -> float:
        return float(np.sum(self.wz * u_nodes ** 2))

    def interpolate_samples(self, z_samples, u_samples) -> np.ndarray:
        """Sampled profile resampled onto the quadrature nodes (0 outside)."""
        interp = PchipInterpolator(z_samples, u_samples, extrapolate=False)
        vals = interp(self.z)
        return np.where(np.isnan(vals), 0.0, vals)

    def operator_matrix(self) -> np.ndarray:
        """Quadrature matrix of a d^2/dz^2 - z d/dz / 2 in the basis.

        Diagonal should be -k/2; off-diagonal leakage is a quadrature
        health check.
        """
        action = self.a * self.d2values - 0.5 * self.z * self.dvalues
        return self.values @ (action * self.wz).T

    def eigen_identity_error(self) -> float:
        mat = self.operator_matrix()
        target = np.diag([-0.5 * k for k in range(self.K + 1)])
        return float(np.max(np.abs(mat - target)))


def build_basis(a: float, K: int, quad_order: int | None = None) -> HermiteBasis:
    """Gauss-Hermite basis adapted to the weight e^{-z^2/4a}.

    Nodes are rescaled by z = 2 sqrt(a) x.  Requires quad_order >= 2K + 2 so
    that pairwise products of retained modes are integrated exactly; raises
    QuadratureFailure when the Gram matrix deviates from the identity.
    """
    if a <= 0:
        raise ValueError("scale a must be positive")
    if K < 0:
        raise ValueError("max degree K must be >= 0")
    if quad_order is None:
        quad_order = max(2 * K + 2, 40)
    if quad_order < 2 * K + 2:
        raise ValueError("quad_order must be at least 2K + 2")
    x, w = hermgauss(quad_order)
    s = 2.0 * math.sqrt(a)
    z = s * x
    wz = s * w

    nq = x.size
    vals = np.empty((K + 1, nq))
    # stable recurrence for orthonormal (wrt e^{-x^2} dx) Hermite functions
    psi_km1 = np.zeros(nq)
    psi_k = np.full(nq, math.pi ** -0.25)
    for k in range(K + 1):
        vals[k] = psi_k
        psi_km1, psi_k = psi_k, (x * psi_k * math.sqrt(2.0 / (k + 1))
                                 - psi_km1 * math.sqrt(k / (k + 1.0)))
    vals /= math.sqrt(s)

    dvals = np.zeros_like(vals)
    d2vals = np.zeros_like(vals)
    for k in range(1, K + 1):
        dvals[k] = math.sqrt(2.0 * k) / s * vals[k - 1]
    for k in range(1, K + 1):
        d2vals[k] = math.sqrt(2.0 * k) / s * dvals[k - 1]

    gram = vals @ (vals * wz).T
    gram_err = float(np.max(np.abs(gram - np.eye(K + 1))))
    basis = HermiteBasis(a=a, K=K, quad_order=quad_order, z=z, wz=wz,
                         values=vals, dvalues=dvals, d2values=d2vals,
                         gram_error=gram_err)
    if gram_err > 1e-10:
        raise QuadratureFailure(
            f"orthogonality defect {gram_err:.3g} exceeds 1e-10")
    return basis


POSITIVE_KS = (0, 1)
ZERO_KS = (2,)


@dataclass
class SpectralDecomposition:
    """Coefficients of a rotationally symmetric profile in the z-eigenbasis.

    The positive modes are k in {0, 1} (plus the l = 1 sphere mode, which a
    rotationally symmetric pipeline never populates), the zero mode is
    k = 2, and everything else is negative.
    """

    basis: HermiteBasis
    n: int
    coeffs: np.ndarray
    norm_sq: float
    tail_energy: float
    mu: np.ndarray = field(init=False)

    def __post_init__(self):
        self.mu = np.array([eigenvalue(self.n, k, 0)
                            for k in range(self.coeffs.size)])

    @property
    def plus_sq(self) -> float:
        return float(np.sum(self.coeffs[list(POSITIVE_KS)] ** 2))

    @property
    def zero_sq(self) -> float:
        return float(np.sum(self.coeffs[list(ZERO_KS)] ** 2))

    @property
    def minus_sq(self) -> float:
        return float(np.sum(self.coeffs[3:] ** 2))

    def reconstruct(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        for k, c in enumerate(self.coeffs):
            out += c * self.basis.value(k, z)
        return out

    def part(self, which: str):
        """Coefficient vector restricted to the +, 0 or - eigenspace."""
        c = np.zeros_like(self.coeffs)
        if which == "+":
            c[list(POSITIVE_KS)] = self.coeffs[list(POSITIVE_KS)]
        elif which == "0":
            c[list(ZERO_KS)] = self.coeffs[list(ZERO_KS)]
        elif which == "-":
            c[3:] = self.coeffs[3:]
        else:
            raise ValueError("which must be '+', '0' or '-'")
        return c


def decompose(basis: HermiteBasis, u, n: int,
              z_samples=None, tail_warn: float = 0.01) -> SpectralDecomposition:
    """Weighted-quadrature coefficients of a profile u (callable or samples).

    Emits TruncationWarning when the energy outside the retained modes
    exceeds ``tail_warn`` of the total.
    """
    if callable(u):
        u_nodes = np.asarray(u(basis.z), dtype=float)
    else:
        if z_samples is None:
            u_nodes = np.asarray(u, dtype=float)
            if u_nodes.size != basis.z.size:
                raise ValueError("pass z_samples along with sampled data")
        else:
            u_nodes = basis.interpolate_samples(np.asarray(z_samples),
                                                np.asarray(u))
    coeffs = basis.project(u_nodes)
    total = basis.norm_sq(u_nodes)
    tail = max(total - float(np.sum(coeffs ** 2)), 0.0)
    if total > 0 and tail > tail_warn * total:
        warnings.warn(
            f"tail energy {tail / total:.2%} of total exceeds {tail_warn:.0%}",
            TruncationWarning, stacklevel=2)
    return SpectralDecomposition(basis=basis, n=n, coeffs=coeffs,
                                 norm_sq=total, tail_energy=tail)


def smooth_cutoff(s):
    """C^3 polynomial smoothstep bump: 1 on [-1/2, 1/2], 0 off [-1, 1],
    with s * chi'(s) <= 0 everywhere."""
    s = np.abs(np.asarray(s, dtype=float))
    t = np.clip(2.0 * s - 1.0, 0.0, 1.0)
    ramp = 35 * t ** 4 - 84 * t ** 5 + 70 * t ** 6 - 20 * t ** 7
    return 1.0 - ramp


@dataclass
class GammaTrace:
    """Windowed tail traces of a rescaled-flow run.

    Window j covers run times [T-j-1, T-j] (counted backward from the end
    so that larger j means closer to the cylinder, mirroring the tau -> -inf
    convention); Gamma_k are suffix suprema over j >= k.
    """

    windows: np.ndarray
    gamma: np.ndarray
    gamma_plus: np.ndarray
    gamma_zero: np.ndarray
    gamma_minus: np.ndarray
    Gamma: np.ndarray
    Gamma_plus: np.ndarray
    Gamma_zero: np.ndarray
    Gamma_minus: np.ndarray
    delta: np.ndarray
    r: float
    L: float
    sandwich_constant: float

    @classmethod
    def from_arrays(cls, gamma_plus, gamma_zero, gamma_minus, r=1e-4, L=10.0,
                    delta=None):
        """Assemble a trace from raw per-window parts (synthetic inputs)."""
        gp = np.asarray(gamma_plus, dtype=float)
        g0 = np.asarray(gamma_zero, dtype=float)
        gm = np.asarray(gamma_minus, dtype=float)
        g = gp + g0 + gm
        if delta is None:
            delta = np.sqrt(g)

        def suffix_max(arr):
            return np.maximum.accumulate(arr[::-1])[::-1]

        return cls(windows=np.arange(g.size), gamma=g, gamma_plus=gp,
                   gamma_zero=g0, gamma_minus=gm, Gamma=suffix_max(g),
                   Gamma_plus=suffix_max(gp), Gamma_zero=suffix_max(g0),
                   Gamma_minus=suffix_max(gm), delta=np.asarray(delta),
                   r=r, L=L, sandwich_constant=1.0)


def gamma_trace_from_run(history, basis: HermiteBasis, r: float = 1e-4,
                         L: float = 10.0, min_windows: int = 2) -> GammaTrace:
    """Windowed weighted norms of u = v - sigma from a rescaled-flow run.

    Each window's profile is cut off by chi(delta_j^r z) before projecting,
    where delta_j is the running sup of |u| over |z| <= L from the window
    onward into the tail.  Note delta^{-r} grows extremely slowly for the
    default r; runs that want a wide cutoff window pass a larger r.
    """
    sigma = math.sqrt(2.0 * history.speed.F01)
    times = history.times
    T = float(times[-1])
    span = T - float(times[0])
    n_windows = int(math.floor(span))
    if n_windows < min_windows:
        raise WindowTooShort(
            f"run spans {span:.2f} time units, need >= {min_windows}")

    sel_L = np.abs(history.z) <= L
    sup_L = np.max(np.abs(history.snapshots[:, sel_L] - sigma), axis=1)

    gamma = np.zeros(n_windows)
    gplus = np.zeros(n_windows)
    gzero = np.zeros(n_windows)
    gminus = np.zeros(n_windows)
    delta = np.zeros(n_windows)
    ratios = []
    for j in range(n_windows):
        tail = times <= T - j
        delta[j] = float(np.max(sup_L[tail])) if np.any(tail) else 0.0
        in_win = (times >= T - j - 1) & (times <= T - j)
        best = np.zeros(4)
        for idx in np.where(in_win)[0]:
            u = history.snapshots[idx] - sigma
            u_nodes = basis.interpolate_samples(history.z, u)
            scale = delta[j] ** r if delta[j] > 0 else 1.0
            u_nodes = u_nodes * smooth_cutoff(scale * basis.z)
            c = basis.project(u_nodes)
            tot = basis.norm_sq(u_nodes)
            parts = np.array([tot,
                              float(np.sum(c[list(POSITIVE_KS)] ** 2)),
                              float(np.sum(c[list(ZERO_KS)] ** 2)),
                              float(np.sum(c[3:] ** 2))])
            if parts[0] > best[0]:
                best = parts
        gamma[j], gplus[j], gzero[j], gminus[j] = best
        if best[0] > 0:
            ratios.append((best[1] + best[2] + best[3]) / best[0])

    def suffix_max(arr):
        return np.maximum.accumulate(arr[::-1])[::-1]

    ratios = np.asarray(ratios) if ratios else np.array([1.0])
    sandwich = float(max(np.max(ratios), 1.0 / max(np.min(ratios), 1e-300)))
    return GammaTrace(windows=np.arange(n_windows), gamma=gamma,
                      gamma_plus=gplus, gamma_zero=gzero, gamma_minus=gminus,
                      Gamma=suffix_max(gamma), Gamma_plus=suffix_max(gplus),
                      Gamma_zero=suffix_max(gzero),
                      Gamma_minus=suffix_max(gminus), delta=delta, r=r, L=L,
                      sandwich_constant=sandwich)


def _log_ratio_stats(num, den, half: bool = True):
    """(slope, last, max) of log(num/den) over the later half of the windows."""
    valid = (num > 0) & (den > 0)
    k = np.arange(num.size)[valid]
    y = np.log(num[valid] / den[valid])
    if half and k.size >= 4:
        cut = k.size // 2
        k, y = k[cut:], y[cut:]
    if k.size < 2:
        return None, None, None
    A = np.vstack([k, np.ones_like(k, dtype=float)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(y[-1]), float(np.max(y))


def merle_zaag_classifier(trace: GammaTrace, slope_threshold: float = -0.1,
                          ratio_threshold: float = 0.1,
                          min_windows: int = 8) -> dict:
    """Mode-dominance verdict from the fitted decay of the non-dominant parts.

    A part dominates when the others' share either trends to zero (log-ratio
    slope below ``slope_threshold`` per window over the later half) or stays
    below ``ratio_threshold`` at every fitted window.  The latter clause
    covers runs whose contamination is a flat cutoff-mixing floor or a fixed
    seed admixture.  Inconclusive when neither part qualifies.
    """
    if trace.windows.size < min_windows:
        raise WindowTooShort(
            f"need >= {min_windows} windows, have {trace.windows.size}")
    rest_p = trace.Gamma_zero + trace.Gamma_minus
    rest_0 = trace.Gamma_plus + trace.Gamma_minus
    slope_p, last_p, max_p = _log_ratio_stats(rest_p, trace.Gamma_plus)
    slope_0, last_0, max_0 = _log_ratio_stats(rest_0, trace.Gamma_zero)
    log_thresh = math.log(ratio_threshold)

    def dominated(slope, last, peak):
        if slope is None:
            return False
        if slope < slope_threshold and last < 0:
            return True
        return peak < log_thresh

    verdict = "inconclusive"
    if dominated(slope_p, last_p, max_p):
        verdict = "positive-dominated"
    elif dominated(slope_0, last_0, max_0):
        verdict = "neutral-dominated"
    return {"verdict": verdict,
            "slope_vs_plus": slope_p, "slope_vs_zero": slope_0,
            "final_log_ratio_vs_plus": last_p,
            "final_log_ratio_vs_zero": last_0,
            "max_log_ratio_vs_plus": max_p,
            "max_log_ratio_vs_zero": max_0}


def plus_decay_rate(trace: GammaTrace) -> dict:
    """Fitted per-window decay factor of Gamma^+ into the tail.

    Under positive-mode dominance the factor is bounded by e^{-1}, with
    equality approached by the slowest positive mode (k = 1).
    """
    gp = trace.Gamma_plus
    valid = gp > 0
    k = np.arange(gp.size)[valid]
    y = np.log(gp[valid])
    if k.size < 3:
        raise WindowTooShort("need >= 3 windows with positive energy")
    A = np.vstack([k, np.ones_like(k, dtype=float)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return {"factor_per_window": float(math.exp(coef[0])),
            "bound": math.exp(-1.0)}
