"""Numba-compiled RK4 step for the reduced-order body.

Faithful translation of ``Simulator._deriv``; a parity test keeps the two in
lockstep.  Parameters arrive as flat float64 arrays so the jitted signature
stays stable:

  robot  = [m, g, d_thruster, kappa_yaw]
  ground = [k_gp, k_gd, mu_c, mu_s, mu_v, v_s, v_t]
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f
        return wrap if not (a and callable(a[0])) else a[0]

MIRROR = np.array([1.0, -1.0, 1.0, -1.0])
ROTOR_SIGN = np.array([1.0, -1.0, -1.0, 1.0])


@njit(cache=True)
def _rotmat(theta):
    cr, cp, cy = np.cos(theta[0]), np.cos(theta[1]), np.cos(theta[2])
    sr, sp, sy = np.sin(theta[0]), np.sin(theta[1]), np.sin(theta[2])
    R = np.empty((3, 3))
    R[0, 0] = cy * cp
    R[0, 1] = cy * sp * sr - sy * cr
    R[0, 2] = cy * sp * cr + sy * sr
    R[1, 0] = sy * cp
    R[1, 1] = sy * sp * sr + cy * cr
    R[1, 2] = sy * sp * cr - cy * sr
    R[2, 0] = -sp
    R[2, 1] = cp * sr
    R[2, 2] = cp * cr
    return R


@njit(cache=True)
def _rotmat_derivs(theta):
    cr, cp, cy = np.cos(theta[0]), np.cos(theta[1]), np.cos(theta[2])
    sr, sp, sy = np.sin(theta[0]), np.sin(theta[1]), np.sin(theta[2])
    dR = np.zeros((3, 3, 3))
    dR[0, 0, 1] = cy * sp * cr + sy * sr
    dR[0, 0, 2] = -cy * sp * sr + sy * cr
    dR[0, 1, 1] = sy * sp * cr - cy * sr
    dR[0, 1, 2] = -sy * sp * sr - cy * cr
    dR[0, 2, 1] = cp * cr
    dR[0, 2, 2] = -cp * sr
    dR[1, 0, 0] = -cy * sp
    dR[1, 0, 1] = cy * cp * sr
    dR[1, 0, 2] = cy * cp * cr
    dR[1, 1, 0] = -sy * sp
    dR[1, 1, 1] = sy * cp * sr
    dR[1, 1, 2] = sy * cp * cr
    dR[1, 2, 0] = -cp
    dR[1, 2, 1] = -sp * sr
    dR[1, 2, 2] = -sp * cr
    dR[2, 0, 0] = -sy * cp
    dR[2, 0, 1] = -sy * sp * sr - cy * cr
    dR[2, 0, 2] = -sy * sp * cr + cy * sr
    dR[2, 1, 0] = cy * cp
    dR[2, 1, 1] = cy * sp * sr - sy * cr
    dR[2, 1, 2] = cy * sp * cr + sy * sr
    return dR


@njit(cache=True)
def _euler_rate_matrix(theta):
    cr, cp = np.cos(theta[0]), np.cos(theta[1])
    sr, sp = np.sin(theta[0]), np.sin(theta[1])
    H = np.zeros((3, 3))
    H[0, 0] = 1.0
    H[0, 2] = -sp
    H[1, 1] = cr
    H[1, 2] = sr * cp
    H[2, 1] = -sr
    H[2, 2] = cr * cp
    return H


@njit(cache=True)
def _euler_rate_matrix_derivs(theta):
    cr, cp = np.cos(theta[0]), np.cos(theta[1])
    sr, sp = np.sin(theta[0]), np.sin(theta[1])
    dH = np.zeros((3, 3, 3))
    dH[0, 1, 1] = -sr
    dH[0, 1, 2] = cr * cp
    dH[0, 2, 1] = -cr
    dH[0, 2, 2] = -sr * cp
    dH[1, 0, 2] = -cp
    dH[1, 1, 2] = -sr * sp
    dH[1, 2, 2] = -cr * sp
    return dH


@njit(cache=True)
def _rot_bias(theta, td, inertia):
    H = _euler_rate_matrix(theta)
    dH = _euler_rate_matrix_derivs(theta)
    IH = inertia @ H
    out = np.zeros(3)
    for k in range(2):  # dH[2] = 0
        dM = dH[k].T @ IH + H.T @ (inertia @ dH[k])
        dMtd = dM @ td
        out += td[k] * dMtd
        out[k] -= 0.5 * np.dot(td, dMtd)
    return out


@njit(cache=True)
def _leg_vec(phi, psi, l, mirror):
    sp, cp = np.sin(psi), np.cos(psi)
    sf, cf = np.sin(phi), np.cos(phi)
    v = np.empty(3)
    v[0] = l * sp
    v[1] = mirror * l * sf * cp
    v[2] = -l * cf * cp
    return v


@njit(cache=True)
def _leg_jac(phi, psi, l, mirror):
    sp, cp = np.sin(psi), np.cos(psi)
    sf, cf = np.sin(phi), np.cos(phi)
    J = np.empty((3, 3))
    J[0, 0] = 0.0
    J[0, 1] = l * cp
    J[0, 2] = sp
    J[1, 0] = mirror * l * cf * cp
    J[1, 1] = -mirror * l * sf * sp
    J[1, 2] = mirror * sf * cp
    J[2, 0] = l * sf * cp
    J[2, 1] = l * cf * sp
    J[2, 2] = -cf * cp
    return J


@njit(cache=True)
def _deriv_fast(y, qk, qk_dot, thrusts, surfaces, robot, ground,
                inertia, hips, gear):
    m, g, d_t, kappa = robot[0], robot[1], robot[2], robot[3]
    k_gp, k_gd, mu_c, mu_s, mu_v, v_s, v_t = (
        ground[0], ground[1], ground[2], ground[3], ground[4], ground[5],
        ground[6])
    p = y[0:3]
    theta = y[3:6]
    v = y[6:9]
    td = y[9:12]
    R = _rotmat(theta)
    dR = _rotmat_derivs(theta)
    H = _euler_rate_matrix(theta)
    om = H @ td  # body angular velocity

    F = np.zeros(3)
    tau = np.zeros(3)
    fg_out = np.zeros((8, 3))
    ft_out = np.zeros((4, 3))

    # contact points: 4 feet then 4 gear pads
    for n in range(8):
        if n < 4:
            s = hips[n] + _leg_vec(qk[n, 0], qk[n, 1], qk[n, 2], MIRROR[n])
        else:
            s = gear[n - 4].copy()
        pw = p + R @ s
        dz = pw[2] - surfaces[n]
        if dz >= 0.0:
            continue
        # body-frame point velocity
        vb = np.empty(3)
        vb[0] = om[1] * s[2] - om[2] * s[1]
        vb[1] = om[2] * s[0] - om[0] * s[2]
        vb[2] = om[0] * s[1] - om[1] * s[0]
        if n < 4:
            vb += _leg_jac(qk[n, 0], qk[n, 1], qk[n, 2], MIRROR[n]) @ qk_dot[n]
        vw = v + R @ vb
        fz = -k_gp * dz - k_gd * vw[2]
        if fz <= 0.0:
            continue
        f = np.empty(3)
        f[2] = fz
        for ax in range(2):
            vt = vw[ax]
            strib = mu_c + (mu_s - mu_c) * np.exp(-(vt * vt) / (v_s * v_s))
            f[ax] = -strib * fz * np.tanh(vt / v_t) - mu_v * vt
        fg_out[n] = f
        F += f
        for k in range(3):
            tau[k] += np.dot(f, dR[k] @ s)

    # thrusters
    drag = np.zeros(3)
    for n in range(4):
        T = thrusts[n]
        if T == 0.0:
            continue
        phi = qk[n, 0]
        axis = np.empty(3)
        axis[0] = 0.0
        axis[1] = MIRROR[n] * np.cos(phi)
        axis[2] = np.sin(phi)
        s = hips[n] + _leg_vec(phi, qk[n, 1], d_t, MIRROR[n])
        f = R @ (T * axis)
        ft_out[n] = f
        F += f
        for k in range(3):
            tau[k] += np.dot(f, dR[k] @ s)
        drag += ROTOR_SIGN[n] * kappa * T * axis
    tau += H.T @ drag

    Mrot = H.T @ (inertia @ H)
    rhs = tau - _rot_bias(theta, td, inertia)
    tdd = np.linalg.solve(Mrot, rhs)

    dy = np.empty(12)
    dy[0:3] = v
    dy[3:6] = td
    dy[6:9] = F / m
    dy[8] -= g
    dy[9:12] = tdd
    return dy, fg_out, ft_out


@njit(cache=True)
def joint_power_fast(theta, qk, qk_dot, fg, ft, d_t):
    R = _rotmat(theta)
    total = 0.0
    for i in range(4):
        phi, psi, l = qk[i, 0], qk[i, 1], qk[i, 2]
        tau = -(_leg_jac(phi, psi, l, MIRROR[i]).T @ (R.T @ fg[i]))
        if ft[i, 0] != 0.0 or ft[i, 1] != 0.0 or ft[i, 2] != 0.0:
            Jt = _leg_jac(phi, psi, d_t, MIRROR[i])
            Jt[0, 2] = 0.0
            Jt[1, 2] = 0.0
            Jt[2, 2] = 0.0
            tau -= Jt.T @ (R.T @ ft[i])
        for j in range(3):
            w = tau[j] * qk_dot[i, j]
            if w > 0.0:
                total += w
    return total


@njit(cache=True)
def rk4_step(y0, qk0, qk1, qk_dot, thrusts, surfaces, dt, robot, ground,
             inertia, hips, gear):
    qk_half = 0.5 * (qk0 + qk1)
    k1, fg0, ft0 = _deriv_fast(y0, qk0, qk_dot, thrusts, surfaces,
                               robot, ground, inertia, hips, gear)
    k2, _, _ = _deriv_fast(y0 + 0.5 * dt * k1, qk_half, qk_dot, thrusts,
                           surfaces, robot, ground, inertia, hips, gear)
    k3, _, _ = _deriv_fast(y0 + 0.5 * dt * k2, qk_half, qk_dot, thrusts,
                           surfaces, robot, ground, inertia, hips, gear)
    k4, _, _ = _deriv_fast(y0 + dt * k3, qk1, qk_dot, thrusts, surfaces,
                           robot, ground, inertia, hips, gear)
    y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y1, fg0, ft0
