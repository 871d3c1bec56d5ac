"""Hot numeric kernels, JIT-compiled with numba when available.

Every kernel in this module is plain numpy code.  When numba imports
successfully (and is not disabled) the kernels are compiled with ``@njit``;
otherwise the same source runs as vectorized numpy / plain Python.  Set

    GFLOWLAB_NO_NUMBA=1

to force the pure-numpy fallback path.  ``benchmarks/bench_kernels.py``
compares the two paths on the real workloads.

Speed kinds are encoded as integers so kernels stay monomorphic:

    0  sum          F(x, y) = x + p0*y
    1  bh           F(x, y) = 1 / (p0/(x+y) + p1/y)
    2  sigma_ratio  F(x, y) = y*(p0*y + p1*x) / (p1*y + p2*x)

with per-kind constants (p0, p1, p2) prepared by ``speeds.SpeedFunction``.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("GFLOWLAB_NO_NUMBA", "").strip().lower()
_DISABLED = _flag in {"1", "true", "yes", "numpy"}

NUMBA_ENABLED = False
if not _DISABLED:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if NUMBA_ENABLED:

    def jit(fn):
        return _njit(cache=True)(fn)

else:

    def jit(fn):
        return fn


KIND_SUM = 0
KIND_BH = 1
KIND_SIGMA = 2

# flow_run / integrate_profile status codes
STATUS_OK = 0
STATUS_STOP = 1
STATUS_CONE = 2
STATUS_UNDERFLOW = 3
STATUS_BUFFER = 4
STATUS_PINCH = 5
STATUS_CFL = 6


@jit
def speed_F(kind, p0, p1, p2, x, y):
    """Restriction F(x, y) = speed at the curvature vector (x, y, ..., y).

    Works elementwise on arrays as well as on scalars.
    """
    if kind == 0:
        return x + p0 * y
    if kind == 1:
        return 1.0 / (p0 / (x + y) + p1 / y)
    return y * (p0 * y + p1 * x) / (p1 * y + p2 * x)


@jit
def speed_Fx(kind, p0, p1, p2, x, y):
    """Partial derivative of the restriction in its first argument."""
    if kind == 0:
        return 1.0 + 0.0 * x
    if kind == 1:
        g = 1.0 / (p0 / (x + y) + p1 / y)
        return g * g * p0 / ((x + y) * (x + y))
    d = p1 * y + p2 * x
    return y * y * (p1 * p1 - p0 * p2) / (d * d)


@jit
def speed_f(kind, p0, p1, p2, y, z):
    """Closed-form partial inverse: the x with F(x, y) = z.

    Caller must guarantee F(0,1) < z/y < Q; no domain checks here.
    """
    if kind == 0:
        return z - p0 * y
    if kind == 1:
        d = 1.0 / z - p1 / y
        return p0 / d - y
    return y * (z * p1 - p0 * y) / (y * p1 - z * p2)


@jit
def _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2, rho, psi, psip):
    """Right-hand side of psi'' = (1+psi'^2) f(psi'/rho, 1/2 + (rho psi' - psi)/(2 a^2)).

    Returns (ok, psi', psi'').  The closed-form inverse extends smoothly a
    little below z/y = F(0,1) (where f turns negative), which trial stages of
    the integrator may graze: the profile rides asymptotically along that
    cone edge.  Membership of accepted states is enforced by the caller; a
    stage is only rejected near the genuine singularity at z/y = Q.
    """
    yarg = psip / rho
    zarg = 0.5 + 0.5 * inv_a2 * (rho * psip - psi)
    if yarg <= 0.0 or zarg <= 0.0:
        return False, 0.0, 0.0
    ratio = zarg / yarg
    if ratio >= 0.999999999 * Q or ratio <= 0.5 * F01:
        return False, 0.0, 0.0
    fval = speed_f(kind, p0, p1, p2, yarg, zarg)
    return True, psip, (1.0 + psip * psip) * fval


@jit
def integrate_profile(kind, p0, p1, p2, F01, Q, inv_a2,
                      rho0, psi0, psip0, rho_end, psi_stop,
                      rtol, atol, h_rho_cap, h_z_cap,
                      out_rho, out_psi, out_psip, out_psipp):
    """Adaptive Dormand-Prince 5(4) integration of a rotation-profile ODE.

    inv_a2 = 1/a^2 selects the self-shrinking profile; inv_a2 = 0 gives the
    translating one.  Every accepted node is recorded into the caller
    allocated out_* buffers. Stops at rho_end or once psi >= psi_stop.

    Returns (status, n_nodes) with status one of the STATUS_* codes.
    """
    rho = rho0
    psi = psi0
    psip = psip0

    ok, _, psipp = _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2, rho, psi, psip)
    if not ok:
        return STATUS_CONE, 0

    nmax = out_rho.shape[0]
    out_rho[0] = rho
    out_psi[0] = psi
    out_psip[0] = psip
    out_psipp[0] = psipp
    m = 1

    h = 0.01 * rho0
    while True:
        if rho >= rho_end:
            return STATUS_OK, m
        if psi >= psi_stop:
            return STATUS_STOP, m
        if m >= nmax:
            return STATUS_BUFFER, m

        hmax = h_rho_cap * (1.0 + rho)
        if h_z_cap > 0.0 and psip > 0.0:
            hz = h_z_cap / psip
            if hz < hmax:
                hmax = hz
        if h > hmax:
            h = hmax
        if rho + h > rho_end:
            h = rho_end - rho

        ok1, k1a, k1b = _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2,
                                     rho, psi, psip)
        if not ok1:
            return STATUS_CONE, m

        accepted = False
        while not accepted:
            bad = False
            # Dormand-Prince stages
            r2 = rho + 0.2 * h
            y2 = psi + h * 0.2 * k1a
            p2_ = psip + h * 0.2 * k1b
            ok_, k2a, k2b = _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2, r2, y2, p2_)
            bad = bad or (not ok_)
            if not bad:
                r3 = rho + 0.3 * h
                y3 = psi + h * (3.0 / 40.0 * k1a + 9.0 / 40.0 * k2a)
                p3_ = psip + h * (3.0 / 40.0 * k1b + 9.0 / 40.0 * k2b)
                ok_, k3a, k3b = _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2, r3, y3, p3_)
                bad = bad or (not ok_)
            if not bad:
                r4 = rho + 0.8 * h
                y4 = psi + h * (44.0 / 45.0 * k1a - 56.0 / 15.0 * k2a + 32.0 / 9.0 * k3a)
                p4_ = psip + h * (44.0 / 45.0 * k1b - 56.0 / 15.0 * k2b + 32.0 / 9.0 * k3b)
                ok_, k4a, k4b = _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2, r4, y4, p4_)
                bad = bad or (not ok_)
            if not bad:
                r5 = rho + 8.0 / 9.0 * h
                y5 = psi + h * (19372.0 / 6561.0 * k1a - 25360.0 / 2187.0 * k2a
                                + 64448.0 / 6561.0 * k3a - 212.0 / 729.0 * k4a)
                p5_ = psip + h * (19372.0 / 6561.0 * k1b - 25360.0 / 2187.0 * k2b
                                  + 64448.0 / 6561.0 * k3b - 212.0 / 729.0 * k4b)
                ok_, k5a, k5b = _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2, r5, y5, p5_)
                bad = bad or (not ok_)
            if not bad:
                r6 = rho + h
                y6 = psi + h * (9017.0 / 3168.0 * k1a - 355.0 / 33.0 * k2a
                                + 46732.0 / 5247.0 * k3a + 49.0 / 176.0 * k4a
                                - 5103.0 / 18656.0 * k5a)
                p6_ = psip + h * (9017.0 / 3168.0 * k1b - 355.0 / 33.0 * k2b
                                  + 46732.0 / 5247.0 * k3b + 49.0 / 176.0 * k4b
                                  - 5103.0 / 18656.0 * k5b)
                ok_, k6a, k6b = _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2, r6, y6, p6_)
                bad = bad or (not ok_)
            if not bad:
                # 5th order solution
                y_new = psi + h * (35.0 / 384.0 * k1a + 500.0 / 1113.0 * k3a
                                   + 125.0 / 192.0 * k4a - 2187.0 / 6784.0 * k5a
                                   + 11.0 / 84.0 * k6a)
                p_new = psip + h * (35.0 / 384.0 * k1b + 500.0 / 1113.0 * k3b
                                    + 125.0 / 192.0 * k4b - 2187.0 / 6784.0 * k5b
                                    + 11.0 / 84.0 * k6b)
                ok_, k7a, k7b = _profile_rhs(kind, p0, p1, p2, F01, Q, inv_a2,
                                             rho + h, y_new, p_new)
                bad = bad or (not ok_)
            if not bad:
                # embedded 4th-order error estimate
                ea = h * (71.0 / 57600.0 * k1a - 71.0 / 16695.0 * k3a
                          + 71.0 / 1920.0 * k4a - 17253.0 / 339200.0 * k5a
                          + 22.0 / 525.0 * k6a - 1.0 / 40.0 * k7a)
                eb = h * (71.0 / 57600.0 * k1b - 71.0 / 16695.0 * k3b
                          + 71.0 / 1920.0 * k4b - 17253.0 / 339200.0 * k5b
                          + 22.0 / 525.0 * k6b - 1.0 / 40.0 * k7b)
                sa = atol + rtol * max(abs(psi), abs(y_new))
                sb = atol + rtol * max(abs(psip), abs(p_new))
                err = np.sqrt(0.5 * ((ea / sa) ** 2 + (eb / sb) ** 2))
                if err <= 1.0:
                    rho = rho + h
                    psi = y_new
                    psip = p_new
                    # accepted states must lie strictly inside the cone
                    ratio_acc = ((0.5 + 0.5 * inv_a2 * (rho * psip - psi))
                                 * rho / psip)
                    if ratio_acc <= F01:
                        return STATUS_CONE, m
                    out_rho[m] = rho
                    out_psi[m] = psi
                    out_psip[m] = psip
                    out_psipp[m] = k7b
                    m += 1
                    fac = 5.0
                    if err > 0.0:
                        fac = 0.9 * err ** -0.2
                        if fac > 5.0:
                            fac = 5.0
                        if fac < 0.2:
                            fac = 0.2
                    h = h * fac
                    accepted = True
                else:
                    fac = 0.9 * err ** -0.2
                    if fac < 0.2:
                        fac = 0.2
                    h = h * fac
            else:
                h = 0.5 * h
            if not accepted and h < 1e-14 * (1.0 + rho):
                if bad:
                    return STATUS_CONE, m
                return STATUS_UNDERFLOW, m
    return STATUS_UNDERFLOW, m


@jit
def graph_rhs(kind, p0, p1, p2, cfac, mode, v, z, dz):
    """Interior right-hand side of the radial (mode 0) / rescaled (mode 1) flow.

    Returns (ok, rhs, fx_max); ok is False when the discrete curvature pair
    leaves the admissible cone (x + cfac*y <= 0) at some interior node.
    """
    vz = (v[2:] - v[:-2]) / (2.0 * dz)
    vzz = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dz * dz)
    core = v[1:-1]
    x = -vzz / (1.0 + vz * vz)
    y = 1.0 / core
    guard = np.min(x + cfac * y)
    if guard <= 0.0 or np.min(core) <= 0.0:
        return False, 0.0 * core, 0.0
    g = speed_F(kind, p0, p1, p2, x, y)
    fx = speed_Fx(kind, p0, p1, p2, x, y)
    if mode == 0:
        rhs = -g
    else:
        rhs = -g + 0.5 * (core - z[1:-1] * vz)
    return True, rhs, np.max(fx)


@jit
def _apply_bc(v, bc_mode, bl, br):
    if bc_mode == 0:
        v[0] = bl
        v[-1] = br
    elif bc_mode == 2:
        v[0] = 3.0 * v[1] - 3.0 * v[2] + v[3]
        v[-1] = 3.0 * v[-2] - 3.0 * v[-3] + v[-4]
    # bc_mode 1 (frozen): boundary nodes are never touched


@jit
def flow_run(kind, p0, p1, p2, cfac, mode,
             v0, z, dz, dt, nsteps,
             bc_mode, bcl, bcr,
             r_floor, cfl_limit,
             rec_every, rec, rec_t):
    """Heun (explicit RK2) time stepping of a 1D graph flow.

    cfl_limit = safety * dz^2 / 2; the run aborts with STATUS_CFL when
    dt exceeds cfl_limit / max(dF/dx).  Snapshots land in rec / rec_t
    every rec_every steps (plus the initial state).

    Returns (status, n_recorded, n_steps_done).
    """
    m = v0.shape[0]
    v = v0.copy()
    nrec = 0
    if rec_every > 0:
        for i in range(m):
            rec[0, i] = v[i]
        rec_t[0] = 0.0
        nrec = 1

    t = 0.0
    for s in range(nsteps):
        ok, r1, fx1 = graph_rhs(kind, p0, p1, p2, cfac, mode, v, z, dz)
        if not ok:
            return STATUS_CONE, nrec, s
        if dt * fx1 > cfl_limit:
            return STATUS_CFL, nrec, s
        v1 = v.copy()
        v1[1:-1] = v[1:-1] + dt * r1
        _apply_bc(v1, bc_mode, bcl[s + 1], bcr[s + 1])
        ok, r2, fx2 = graph_rhs(kind, p0, p1, p2, cfac, mode, v1, z, dz)
        if not ok:
            return STATUS_CONE, nrec, s
        if dt * fx2 > cfl_limit:
            return STATUS_CFL, nrec, s
        v[1:-1] = v[1:-1] + 0.5 * dt * (r1 + r2)
        _apply_bc(v, bc_mode, bcl[s + 1], bcr[s + 1])
        t = t + dt
        if np.min(v) <= r_floor:
            return STATUS_PINCH, nrec, s + 1
        if rec_every > 0 and ((s + 1) % rec_every == 0):
            if nrec < rec.shape[0]:
                for i in range(m):
                    rec[nrec, i] = v[i]
                rec_t[nrec] = t
                nrec += 1
    return STATUS_OK, nrec, nsteps


@jit
def radial_semi_implicit_run(kind, p0, p1, p2, cfac,
                             v0, z, dz, dt, nsteps,
                             bc_mode, bcl, bcr,
                             r_floor, rec_every, rec, rec_t):
    """Semi-implicit stepping of the radial flow.

    The second-derivative coefficient is frozen at the current state and the
    diffusive part is taken implicitly (tridiagonal solve), which removes the
    explicit CFL restriction in stiff small-radius regimes.
    """
    m = v0.shape[0]
    v = v0.copy()
    nrec = 0
    if rec_every > 0:
        for i in range(m):
            rec[0, i] = v[i]
        rec_t[0] = 0.0
        nrec = 1

    lo = np.empty(m)
    di = np.empty(m)
    up = np.empty(m)
    rhs = np.empty(m)
    cp = np.empty(m)
    dp = np.empty(m)

    t = 0.0
    for s in range(nsteps):
        ok, r1, _ = graph_rhs(kind, p0, p1, p2, cfac, 0, v, z, dz)
        if not ok:
            return STATUS_CONE, nrec, s
        vz = (v[2:] - v[:-2]) / (2.0 * dz)
        vzz = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dz * dz)
        one_p = 1.0 + vz * vz
        xcur = -vzz / one_p
        fx = speed_Fx(kind, p0, p1, p2, xcur, 1.0 / v[1:-1])
        g = speed_F(kind, p0, p1, p2, xcur, 1.0 / v[1:-1])
        mu = dt * fx / (one_p * dz * dz)

        di[0] = 1.0
        up[0] = 0.0
        lo[0] = 0.0
        di[m - 1] = 1.0
        up[m - 1] = 0.0
        lo[m - 1] = 0.0
        if bc_mode == 0:
            rhs[0] = bcl[s + 1]
            rhs[m - 1] = bcr[s + 1]
        else:
            rhs[0] = v[0]
            rhs[m - 1] = v[m - 1]
        for i in range(1, m - 1):
            lo[i] = -mu[i - 1]
            di[i] = 1.0 + 2.0 * mu[i - 1]
            up[i] = -mu[i - 1]
            rhs[i] = v[i] - dt * (g[i - 1] - fx[i - 1] * xcur[i - 1])

        # Thomas solve
        cp[0] = up[0] / di[0]
        dp[0] = rhs[0] / di[0]
        for i in range(1, m):
            den = di[i] - lo[i] * cp[i - 1]
            cp[i] = up[i] / den
            dp[i] = (rhs[i] - lo[i] * dp[i - 1]) / den
        v[m - 1] = dp[m - 1]
        for i in range(m - 2, -1, -1):
            v[i] = dp[i] - cp[i] * v[i + 1]

        t = t + dt
        if np.min(v) <= r_floor:
            return STATUS_PINCH, nrec, s + 1
        if rec_every > 0 and ((s + 1) % rec_every == 0):
            if nrec < rec.shape[0]:
                for i in range(m):
                    rec[nrec, i] = v[i]
                rec_t[nrec] = t
                nrec += 1
    return STATUS_OK, nrec, nsteps
