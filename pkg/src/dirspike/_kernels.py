"""Numba-compiled fixed-step RK4 loops for the three integrators.

Inputs are sampled once per step and held constant across the four stages
(zero-order hold), so a run is a pure function of the sample arrays.  All
kernels return a blow-up step index (-1 when the guard was never hit) so
the Python wrappers can raise with context.
"""

import numpy as np
from numba import njit

__all__ = ["full_run", "reduced_run", "reduced_run_const", "nav_run"]


@njit(cache=True, nogil=True)
def _full_deriv(y, u, n, tau, tau_s, alpha, b1, b2, b3, out):
    r2 = 0.0
    for i in range(n):
        r2 += y[i] * y[i]
    c = (1.0 + y[n]) - b1 * r2 + b2 * r2 * r2
    for i in range(n):
        out[i] = (-c * y[i] + alpha * u[i]) / tau
    out[n] = (-y[n] + b3 * r2 * r2) / tau_s


@njit(cache=True, nogil=True)
def full_run(x0, xs0, u, tau, tau_s, alpha, b1, b2, b3, dt, guard):
    """Integrate the full system; u has one row per step (ZOH).

    Returns (X, XS, blow) where X is (n_steps+1, n), XS is (n_steps+1,)
    and blow is the index of the first step whose end state exceeded the
    norm guard, or -1.
    """
    n = x0.shape[0]
    n_steps = u.shape[0]
    X = np.empty((n_steps + 1, n))
    XS = np.empty(n_steps + 1)
    y = np.empty(n + 1)
    yt = np.empty(n + 1)
    k1 = np.empty(n + 1)
    k2 = np.empty(n + 1)
    k3 = np.empty(n + 1)
    k4 = np.empty(n + 1)

    for i in range(n):
        y[i] = x0[i]
        X[0, i] = x0[i]
    y[n] = xs0
    XS[0] = xs0
    guard2 = guard * guard

    for k in range(n_steps):
        uk = u[k]
        _full_deriv(y, uk, n, tau, tau_s, alpha, b1, b2, b3, k1)
        for i in range(n + 1):
            yt[i] = y[i] + 0.5 * dt * k1[i]
        _full_deriv(yt, uk, n, tau, tau_s, alpha, b1, b2, b3, k2)
        for i in range(n + 1):
            yt[i] = y[i] + 0.5 * dt * k2[i]
        _full_deriv(yt, uk, n, tau, tau_s, alpha, b1, b2, b3, k3)
        for i in range(n + 1):
            yt[i] = y[i] + dt * k3[i]
        _full_deriv(yt, uk, n, tau, tau_s, alpha, b1, b2, b3, k4)
        for i in range(n + 1):
            y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

        r2 = 0.0
        for i in range(n):
            X[k + 1, i] = y[i]
            r2 += y[i] * y[i]
        XS[k + 1] = y[n]
        if r2 > guard2 or not np.isfinite(r2):
            return X, XS, k + 1
    return X, XS, -1


@njit(cache=True, nogil=True)
def _reduced_deriv(r, xs, ut, tau, tau_s, alpha, b1, b2, b3):
    r2 = r * r
    dr = (-((1.0 + xs) - b1 * r2 + b2 * r2 * r2) * r + alpha * ut) / tau
    dxs = (-xs + b3 * r2 * r2) / tau_s
    return dr, dxs


@njit(cache=True, nogil=True)
def reduced_run(r0, xs0, ut, tau, tau_s, alpha, b1, b2, b3, dt, guard):
    """Integrate the 2-D radial system; ut has one entry per step (ZOH).

    The radius is reflected to |r| after each step: the radial equation is
    equivariant under r -> -r with u -> -u, and reflection keeps the state
    on the physical half-line without changing the dynamics.
    """
    n_steps = ut.shape[0]
    R = np.empty(n_steps + 1)
    XS = np.empty(n_steps + 1)
    r = r0
    xs = xs0
    R[0] = r0
    XS[0] = xs0

    for k in range(n_steps):
        u = ut[k]
        dr1, dxs1 = _reduced_deriv(r, xs, u, tau, tau_s, alpha, b1, b2, b3)
        dr2, dxs2 = _reduced_deriv(r + 0.5 * dt * dr1, xs + 0.5 * dt * dxs1, u, tau, tau_s, alpha, b1, b2, b3)
        dr3, dxs3 = _reduced_deriv(r + 0.5 * dt * dr2, xs + 0.5 * dt * dxs2, u, tau, tau_s, alpha, b1, b2, b3)
        dr4, dxs4 = _reduced_deriv(r + dt * dr3, xs + dt * dxs3, u, tau, tau_s, alpha, b1, b2, b3)
        r += (dt / 6.0) * (dr1 + 2.0 * dr2 + 2.0 * dr3 + dr4)
        xs += (dt / 6.0) * (dxs1 + 2.0 * dxs2 + 2.0 * dxs3 + dxs4)
        if r < 0.0:
            r = -r
        R[k + 1] = r
        XS[k + 1] = xs
        if r > guard or not np.isfinite(r):
            return R, XS, k + 1
    return R, XS, -1


@njit(cache=True, nogil=True)
def reduced_run_const(r0, xs0, ut, n_steps, tau, tau_s, alpha, b1, b2, b3, dt, guard):
    """Constant-input variant of reduced_run, used by sweeps."""
    R = np.empty(n_steps + 1)
    XS = np.empty(n_steps + 1)
    r = r0
    xs = xs0
    R[0] = r0
    XS[0] = xs0
    for k in range(n_steps):
        dr1, dxs1 = _reduced_deriv(r, xs, ut, tau, tau_s, alpha, b1, b2, b3)
        dr2, dxs2 = _reduced_deriv(r + 0.5 * dt * dr1, xs + 0.5 * dt * dxs1, ut, tau, tau_s, alpha, b1, b2, b3)
        dr3, dxs3 = _reduced_deriv(r + 0.5 * dt * dr2, xs + 0.5 * dt * dxs2, ut, tau, tau_s, alpha, b1, b2, b3)
        dr4, dxs4 = _reduced_deriv(r + dt * dr3, xs + dt * dxs3, ut, tau, tau_s, alpha, b1, b2, b3)
        r += (dt / 6.0) * (dr1 + 2.0 * dr2 + 2.0 * dr3 + dr4)
        xs += (dt / 6.0) * (dxs1 + 2.0 * dxs2 + 2.0 * dxs3 + dxs4)
        if r < 0.0:
            r = -r
        R[k + 1] = r
        XS[k + 1] = xs
        if r > guard or not np.isfinite(r):
            return R, XS, k + 1
    return R, XS, -1


@njit(cache=True, nogil=True)
def _nav_deriv(y, zstar, obst, gamma, alpha_act, s_thr, k1c, k2c, eps,
               tau, tau_s, b1, b2, b3, out):
    # y = (z_x, z_y, zdot_x, zdot_y, u_x, u_y, u_s)
    ex = zstar[0] - y[0]
    ey = zstar[1] - y[1]
    en = np.sqrt(ex * ex + ey * ey)
    vx = k1c * ex / (eps + en)
    vy = k1c * ey / (eps + en)
    for j in range(obst.shape[0]):
        dx = y[0] - obst[j, 0]
        dy = y[1] - obst[j, 1]
        d2 = dx * dx + dy * dy
        vx += k2c * dx / d2
        vy += k2c * dy / d2

    un2 = y[4] * y[4] + y[5] * y[5]
    un = np.sqrt(un2)
    ax = 0.0
    ay = 0.0
    if un >= s_thr:
        ax = y[4] / un
        ay = y[5] / un

    c = (1.0 + y[6]) - b1 * un2 + b2 * un2 * un2
    out[0] = y[2]
    out[1] = y[3]
    out[2] = -gamma * y[2] + alpha_act * ax
    out[3] = -gamma * y[3] + alpha_act * ay
    out[4] = (-c * y[4] + vx) / tau
    out[5] = (-c * y[5] + vy) / tau
    out[6] = (-y[6] + b3 * un2 * un2) / tau_s


@njit(cache=True, nogil=True)
def nav_run(y0, obst, gamma, alpha_act, s_thr, k1c, k2c, eps,
            tau, tau_s, b1, b2, b3,
            rad0, rad_rate, ang0, ang_rate,
            t0, dt, n_steps, stride, transient, guard):
    """Integrate the 7-D navigation loop (plant + controller).

    The reference point z*(t) is sampled at the start of each step and held.
    Records every `stride`-th sample (n_steps must be a multiple of stride).
    Also accumulates, per integration step: per-obstacle minimum clearance,
    the active-output duty counts for t >= transient, and the maximum
    tracking error for t >= transient.

    Returns (out, min_clear, active_steps, counted_steps, max_err, status)
    with out rows (t, z, zdot, u, u_s, act, z*) and status -1 on success,
    k >= 0 for a guard trip at step k, or -(10 + j) when the state hit
    obstacle j.
    """
    n_rec = n_steps // stride + 1
    out = np.empty((n_rec, 12))
    n_obs = obst.shape[0]
    min_clear = np.full(n_obs, np.inf)
    y = y0.copy()
    yt = np.empty(7)
    k1 = np.empty(7)
    k2 = np.empty(7)
    k3 = np.empty(7)
    k4 = np.empty(7)
    zstar = np.empty(2)
    active_steps = 0
    counted_steps = 0
    max_err = 0.0

    def_rec = 0
    for k in range(n_steps + 1):
        t = t0 + k * dt
        ang = ang0 + ang_rate * t
        zstar[0] = (rad0 + rad_rate * t) * np.cos(ang)
        zstar[1] = (rad0 + rad_rate * t) * np.sin(ang)

        for j in range(n_obs):
            dx = y[0] - obst[j, 0]
            dy = y[1] - obst[j, 1]
            d = np.sqrt(dx * dx + dy * dy)
            if d < min_clear[j]:
                min_clear[j] = d
            if d < 1e-9:
                return out, min_clear, active_steps, counted_steps, max_err, -(10 + j)

        un = np.sqrt(y[4] * y[4] + y[5] * y[5])
        if t >= transient:
            counted_steps += 1
            if un >= s_thr:
                active_steps += 1
            ex = zstar[0] - y[0]
            ey = zstar[1] - y[1]
            err = np.sqrt(ex * ex + ey * ey)
            if err > max_err:
                max_err = err

        if k % stride == 0:
            out[def_rec, 0] = t
            for i in range(7):
                out[def_rec, 1 + i] = y[i]
            if un >= s_thr:
                out[def_rec, 8] = y[4] / un
                out[def_rec, 9] = y[5] / un
            else:
                out[def_rec, 8] = 0.0
                out[def_rec, 9] = 0.0
            out[def_rec, 10] = zstar[0]
            out[def_rec, 11] = zstar[1]
            def_rec += 1

        if k == n_steps:
            break

        _nav_deriv(y, zstar, obst, gamma, alpha_act, s_thr, k1c, k2c, eps, tau, tau_s, b1, b2, b3, k1)
        for i in range(7):
            yt[i] = y[i] + 0.5 * dt * k1[i]
        _nav_deriv(yt, zstar, obst, gamma, alpha_act, s_thr, k1c, k2c, eps, tau, tau_s, b1, b2, b3, k2)
        for i in range(7):
            yt[i] = y[i] + 0.5 * dt * k2[i]
        _nav_deriv(yt, zstar, obst, gamma, alpha_act, s_thr, k1c, k2c, eps, tau, tau_s, b1, b2, b3, k3)
        for i in range(7):
            yt[i] = y[i] + dt * k3[i]
        _nav_deriv(yt, zstar, obst, gamma, alpha_act, s_thr, k1c, k2c, eps, tau, tau_s, b1, b2, b3, k4)
        for i in range(7):
            y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

        big = 0.0
        for i in range(7):
            a = abs(y[i])
            if a > big:
                big = a
        if big > guard or not np.isfinite(big):
            return out, min_clear, active_steps, counted_steps, max_err, k

    return out, min_clear, active_steps, counted_steps, max_err, -1
