"""Compiled numeric core: plant model, controller laws, and mission loop.

Everything here is numba-jitted scalar/array code operating on the packed
parameter arrays from :mod:`rpaslab.params`.  The public modules
(:mod:`rpaslab.dynamics`, :mod:`rpaslab.control`, :mod:`rpaslab.mission`)
are thin wrappers over these kernels, so a hand-wired loop built from the
wrappers reproduces the fused mission loop bit for bit.

State vector layout (13 entries):
  0:u 1:v 2:w        body-axis velocities, ft/s
  3:phi 4:theta 5:psi  Euler angles, rad
  6:p 7:q 8:r        body rates, rad/s
  9:x_e 10:y_e 11:z_e  NED position, ft (z down, altitude = -z_e)
  12: pow            engine power state, percent

Command vector layout (4 entries): throttle (0..1), elevator, aileron,
rudder (rad).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .params import (
    L_ALPHA_MAX,
    L_ALPHA_MIN,
    L_BETA_MAX,
    L_DA,
    L_DE,
    L_DR,
    L_THETA_GUARD,
    L_VT_MIN,
    S_AB_POW,
    S_ALT_STEP,
    S_AREA,
    S_CHORD,
    S_G,
    S_GEAR_BREAK,
    S_GEAR_HI,
    S_GEAR_LO,
    S_GEAR_OFF,
    S_KAPPA,
    S_MACH_STEP,
    S_MASS,
    S_SPAN,
    S_XA,
    S_XCG,
    S_XCGR,
)

# aero polynomial block offsets into the packed coefficient array
_A, _B, _C, _D, _E = 0, 7, 12, 15, 19
_F, _G, _H, _I, _J = 23, 29, 34, 42, 46
_K, _L, _M, _N, _O = 51, 58, 65, 73, 79
_P, _Q, _R, _S = 86, 91, 94, 104

# autopilot gain array layout
AP_KPSI_P, AP_KPSI_D, AP_KPHI_P, AP_KPHI_D = 0, 1, 2, 3
AP_KZ_P, AP_KZ_D, AP_KVT = 4, 5, 6
AP_PHI_MAX, AP_NZ_LIMIT = 7, 8
AP_INT_NZ, AP_INT_PS, AP_INT_NYR = 9, 10, 11
N_AP = 12

# mission termination codes
STATUS_SUCCESS = 0
STATUS_TIMEOUT = 1
STATUS_GROUND = 2
STATUS_SINGULARITY = 3
STATUS_ENVELOPE = 4
STATUS_NUMERIC = 5

# loss-policy codes
MODE_FAILSAFE = 0
MODE_ZERO = 1
THR_HOLD_LAST = 0
THR_ZERO = 1

TRAJ_COLS = 23


@njit(cache=True)
def wrap_angle(e):
    """Wrap an angle difference into (-pi, pi]."""
    two_pi = 2.0 * math.pi
    w = e - two_pi * math.floor((e + math.pi) / two_pi)
    if w <= -math.pi:
        w = math.pi
    return w


@njit(cache=True)
def clamp(v, lo, hi):
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


@njit(cache=True)
def air_data(vt, alt, atm):
    """Mach number and dynamic pressure (lbf/ft^2) at speed vt and altitude alt."""
    tfac = 1.0 - atm[2] * alt
    if alt >= atm[3]:
        temp = atm[4]
    else:
        temp = atm[1] * tfac
    rho = atm[0] * tfac ** atm[7]
    mach = vt / math.sqrt(atm[6] * atm[5] * temp)
    qbar = 0.5 * rho * vt * vt
    return mach, qbar


@njit(cache=True)
def throttle_gearing(throttle, scal):
    """Commanded power (percent) for a throttle fraction."""
    if throttle <= scal[S_GEAR_BREAK]:
        return scal[S_GEAR_LO] * throttle
    return scal[S_GEAR_HI] * throttle - scal[S_GEAR_OFF]


@njit(cache=True)
def inverse_gearing(power, scal):
    """Throttle fraction whose geared command equals ``power``."""
    knee = scal[S_GEAR_LO] * scal[S_GEAR_BREAK]
    if power <= knee:
        return power / scal[S_GEAR_LO]
    return (power + scal[S_GEAR_OFF]) / scal[S_GEAR_HI]


@njit(cache=True)
def engine_thrust(power, alt, mach, scal, tidl, tmil, tmax):
    """Thrust (lbf) from the idle/mil/max tables at the given power state."""
    if alt < 0.0:
        alt = 0.0
    n_alt = tidl.shape[0]
    n_mach = tidl.shape[1]

    h = alt / scal[S_ALT_STEP]
    i = int(h)
    if i > n_alt - 2:
        i = n_alt - 2
    dh = h - i

    rm = mach / scal[S_MACH_STEP]
    m = int(rm)
    if m < 0:
        m = 0
    elif m > n_mach - 2:
        m = n_mach - 2
    dm = rm - m

    ab = scal[S_AB_POW]
    s = tmil[i, m] * (1.0 - dh) + tmil[i + 1, m] * dh
    t = tmil[i, m + 1] * (1.0 - dh) + tmil[i + 1, m + 1] * dh
    mil = s + (t - s) * dm
    if power < ab:
        s = tidl[i, m] * (1.0 - dh) + tidl[i + 1, m] * dh
        t = tidl[i, m + 1] * (1.0 - dh) + tidl[i + 1, m + 1] * dh
        idle = s + (t - s) * dm
        return idle + (mil - idle) * power / ab
    s = tmax[i, m] * (1.0 - dh) + tmax[i + 1, m] * dh
    t = tmax[i, m + 1] * (1.0 - dh) + tmax[i + 1, m + 1] * dh
    mx = s + (t - s) * dm
    return mil + (mx - mil) * (power - ab) / (100.0 - ab)


@njit(cache=True)
def aero_coefficients(alpha, beta, de, da, dr, p, q, r, vt, scal, poly):
    """Six total force/moment coefficients of the polynomial model.

    Inputs in rad and rad/s; body rates are normalized internally by
    span/chord over 2*vt.
    """
    a = alpha
    b = beta
    a2 = a * a
    a3 = a2 * a
    a4 = a3 * a
    b2 = b * b

    cx0 = (
        poly[_A] + poly[_A + 1] * a + poly[_A + 2] * de * de + poly[_A + 3] * de
        + poly[_A + 4] * a * de + poly[_A + 5] * a2 + poly[_A + 6] * a3
    )
    cxq = poly[_B] + poly[_B + 1] * a + poly[_B + 2] * a2 + poly[_B + 3] * a3 + poly[_B + 4] * a4
    cy0 = poly[_C] * b + poly[_C + 1] * da + poly[_C + 2] * dr
    cyp = poly[_D] + poly[_D + 1] * a + poly[_D + 2] * a2 + poly[_D + 3] * a3
    cyr = poly[_E] + poly[_E + 1] * a + poly[_E + 2] * a2 + poly[_E + 3] * a3
    cz0 = (
        poly[_F] + poly[_F + 1] * a + poly[_F + 2] * a2 + poly[_F + 3] * a3 + poly[_F + 4] * a4
    ) * (1.0 - b2) + poly[_F + 5] * de
    czq = poly[_G] + poly[_G + 1] * a + poly[_G + 2] * a2 + poly[_G + 3] * a3 + poly[_G + 4] * a4
    cl0 = (
        poly[_H] * b + poly[_H + 1] * a * b + poly[_H + 2] * a2 * b + poly[_H + 3] * b2
        + poly[_H + 4] * a * b2 + poly[_H + 5] * a3 * b + poly[_H + 6] * a4 * b
        + poly[_H + 7] * a2 * b2
    )
    clp = poly[_I] + poly[_I + 1] * a + poly[_I + 2] * a2 + poly[_I + 3] * a3
    clr = poly[_J] + poly[_J + 1] * a + poly[_J + 2] * a2 + poly[_J + 3] * a3 + poly[_J + 4] * a4
    clda = (
        poly[_K] + poly[_K + 1] * a + poly[_K + 2] * b + poly[_K + 3] * a2
        + poly[_K + 4] * a * b + poly[_K + 5] * a2 * b + poly[_K + 6] * a3
    )
    cldr = (
        poly[_L] + poly[_L + 1] * a + poly[_L + 2] * b + poly[_L + 3] * a * b
        + poly[_L + 4] * a2 * b + poly[_L + 5] * a3 * b + poly[_L + 6] * b2
    )
    cm0 = (
        poly[_M] + poly[_M + 1] * a + poly[_M + 2] * de + poly[_M + 3] * a * de
        + poly[_M + 4] * de * de + poly[_M + 5] * a2 * de + poly[_M + 6] * de * de * de
        + poly[_M + 7] * a * de * de
    )
    cmq = (
        poly[_N] + poly[_N + 1] * a + poly[_N + 2] * a2 + poly[_N + 3] * a3
        + poly[_N + 4] * a4 + poly[_N + 5] * a4 * a
    )
    cn0 = (
        poly[_O] * b + poly[_O + 1] * a * b + poly[_O + 2] * b2 + poly[_O + 3] * a * b2
        + poly[_O + 4] * a2 * b + poly[_O + 5] * a2 * b2 + poly[_O + 6] * a3 * b
    )
    cnp = poly[_P] + poly[_P + 1] * a + poly[_P + 2] * a2 + poly[_P + 3] * a3 + poly[_P + 4] * a4
    cnr = poly[_Q] + poly[_Q + 1] * a + poly[_Q + 2] * a2
    cnda = (
        poly[_R] + poly[_R + 1] * a + poly[_R + 2] * b + poly[_R + 3] * a * b
        + poly[_R + 4] * a2 * b + poly[_R + 5] * a3 * b + poly[_R + 6] * a2
        + poly[_R + 7] * a3 + poly[_R + 8] * b2 * b + poly[_R + 9] * a * b2 * b
    )
    cndr = (
        poly[_S] + poly[_S + 1] * a + poly[_S + 2] * b + poly[_S + 3] * a * b
        + poly[_S + 4] * a2 * b + poly[_S + 5] * a2
    )

    span = scal[S_SPAN]
    chord = scal[S_CHORD]
    tv = 0.5 / vt
    phat = p * span * tv
    qhat = q * chord * tv
    rhat = r * span * tv
    dcg = scal[S_XCGR] - scal[S_XCG]

    cxt = cx0 + cxq * qhat
    cyt = cy0 + cyp * phat + cyr * rhat
    czt = cz0 + czq * qhat
    clt = cl0 + clp * phat + clr * rhat + clda * da + cldr * dr
    cmt = cm0 + cmq * qhat + czt * dcg
    cnt = cn0 + cnp * phat + cnr * rhat + cnda * da + cndr * dr - cyt * dcg * chord / span
    return cxt, cyt, czt, clt, cmt, cnt


@njit(cache=True)
def state_derivative(x, uc, scal, cfs, atm, poly, tidl, tmil, tmax, out):
    """Time derivative of the 13-state vector; also returns the normal and
    side load-factor measurements (g) at the accelerometer station."""
    u = x[0]
    v = x[1]
    w = x[2]
    phi = x[3]
    theta = x[4]
    psi = x[5]
    p = x[6]
    q = x[7]
    r = x[8]
    alt = -x[11]
    power = x[12]

    vt = math.sqrt(u * u + v * v + w * w)
    alpha = math.atan2(w, u)
    sb = v / vt
    if sb > 1.0:
        sb = 1.0
    elif sb < -1.0:
        sb = -1.0
    beta = math.asin(sb)

    mach, qbar = air_data(vt, alt, atm)
    thrust = engine_thrust(power, alt, mach, scal, tidl, tmil, tmax)
    out[12] = (throttle_gearing(uc[0], scal) - power) / scal[S_KAPPA]

    cxt, cyt, czt, clt, cmt, cnt = aero_coefficients(
        alpha, beta, uc[1], uc[2], uc[3], p, q, r, vt, scal, poly
    )

    g = scal[S_G]
    rm = 1.0 / scal[S_MASS]
    qs = qbar * scal[S_AREA]
    ax = rm * (qs * cxt + thrust)
    ay = rm * qs * cyt
    az = rm * qs * czt

    sph = math.sin(phi)
    cph = math.cos(phi)
    sth = math.sin(theta)
    cth = math.cos(theta)
    sps = math.sin(psi)
    cps = math.cos(psi)

    out[0] = r * v - q * w - g * sth + ax
    out[1] = p * w - r * u + g * cth * sph + ay
    out[2] = q * u - p * v + g * cth * cph + az

    out[3] = p + (sth / cth) * (q * sph + r * cph)
    out[4] = q * cph - r * sph
    out[5] = (q * sph + r * cph) / cth

    rl = qs * scal[S_SPAN] * clt
    pm = qs * scal[S_CHORD] * cmt
    yn = qs * scal[S_SPAN] * cnt
    pdot = (cfs[0] * r + cfs[1] * p) * q + cfs[2] * rl + cfs[3] * yn
    qdot = cfs[4] * p * r - cfs[5] * (p * p - r * r) + cfs[6] * pm
    rdot = (cfs[7] * p + cfs[1] * r) * q + cfs[3] * rl + cfs[8] * yn
    out[6] = pdot
    out[7] = qdot
    out[8] = rdot

    out[9] = u * cth * cps + v * (sph * sth * cps - cph * sps) + w * (cph * sth * cps + sph * sps)
    out[10] = u * cth * sps + v * (sph * sth * sps + cph * cps) + w * (cph * sth * sps - sph * cps)
    out[11] = -u * sth + v * sph * cth + w * cph * cth

    xa = scal[S_XA]
    nz = -(az - xa * qdot) / g - 1.0
    ny = (ay + xa * rdot) / g
    return nz, ny


@njit(cache=True)
def rk4_step(x, uc, dt, scal, cfs, atm, poly, tidl, tmil, tmax, k1, k2, k3, k4, xt, xout):
    """Classical RK4 update with the command held over the step.

    ``k1..k4`` and ``xt`` are caller-provided (13,) work arrays (kept out
    of the per-step path so the mission loop allocates nothing).  Returns
    the load-factor measurements evaluated at the initial state with the
    applied command (the first stage), which is what the control loop
    integrates.
    """
    nz, ny = state_derivative(x, uc, scal, cfs, atm, poly, tidl, tmil, tmax, k1)
    for i in range(13):
        xt[i] = x[i] + 0.5 * dt * k1[i]
    state_derivative(xt, uc, scal, cfs, atm, poly, tidl, tmil, tmax, k2)
    for i in range(13):
        xt[i] = x[i] + 0.5 * dt * k2[i]
    state_derivative(xt, uc, scal, cfs, atm, poly, tidl, tmil, tmax, k3)
    for i in range(13):
        xt[i] = x[i] + dt * k3[i]
    state_derivative(xt, uc, scal, cfs, atm, poly, tidl, tmil, tmax, k4)
    for i in range(13):
        xout[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return nz, ny


@njit(cache=True)
def guidance(x, wp_n, wp_e, wp_z, psi_cmd_prev):
    """Bearing to the waypoint (heading zero along +north) and slant range.

    A horizontally coincident waypoint holds the previous heading command.
    """
    dx = wp_n - x[9]
    dy = wp_e - x[10]
    dz = wp_z - x[11]
    slant = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dx == 0.0 and dy == 0.0:
        psi_cmd = psi_cmd_prev
    else:
        psi_cmd = math.atan2(dy, dx)
    return psi_cmd, slant


@njit(cache=True)
def _reference_laws_core(x, psi_cmd, h_cmd, vt_cmd, thr_trim, ap, vt):
    e_psi = wrap_angle(psi_cmd - x[5])
    phi_max = ap[AP_PHI_MAX]
    phi_cmd = clamp(ap[AP_KPSI_P] * e_psi - ap[AP_KPSI_D] * x[8], -phi_max, phi_max)
    ps_cmd = ap[AP_KPHI_P] * (phi_cmd - x[3]) - ap[AP_KPHI_D] * x[6]

    h = -x[11]
    sph = math.sin(x[3])
    cph = math.cos(x[3])
    sth = math.sin(x[4])
    cth = math.cos(x[4])
    hdot = x[0] * sth - (x[1] * sph + x[2] * cph) * cth
    nz_lim = ap[AP_NZ_LIMIT]
    nz_cmd = clamp(ap[AP_KZ_P] * (h_cmd - h) - ap[AP_KZ_D] * hdot, -nz_lim, nz_lim)

    thr_cmd = clamp(ap[AP_KVT] * (vt_cmd - vt) + thr_trim, 0.0, 1.0)
    return nz_cmd, ps_cmd, 0.0, thr_cmd


@njit(cache=True)
def reference_laws(x, psi_cmd, h_cmd, vt_cmd, thr_trim, ap):
    """PD autopilot laws producing (nz_cmd, ps_cmd, nyr_cmd, thr_cmd).

    Heading error (wrapped) commands a bank-limited roll angle; its error
    commands a stability-axis roll rate.  Altitude error and climb rate
    command a bounded normal load factor.  Airspeed error commands
    throttle about the trim feedforward.  The side-accel-plus-yaw-rate
    reference is held at zero in standard operation.
    """
    vt = math.sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    return _reference_laws_core(x, psi_cmd, h_cmd, vt_cmd, thr_trim, ap, vt)


@njit(cache=True)
def _surface_commands_core(
    alpha, beta, x, thr_cmd, integ, k_long, k_lat, alpha_trim, u_trim, lims, out_u, out_unsat
):
    de = u_trim[1] - (k_long[0] * (alpha - alpha_trim) + k_long[1] * x[7] + k_long[2] * integ[0])
    da = u_trim[2] - (
        k_lat[0, 0] * beta + k_lat[0, 1] * x[6] + k_lat[0, 2] * x[8]
        + k_lat[0, 3] * integ[1] + k_lat[0, 4] * integ[2]
    )
    dr = u_trim[3] - (
        k_lat[1, 0] * beta + k_lat[1, 1] * x[6] + k_lat[1, 2] * x[8]
        + k_lat[1, 3] * integ[1] + k_lat[1, 4] * integ[2]
    )

    out_unsat[0] = thr_cmd
    out_unsat[1] = de
    out_unsat[2] = da
    out_unsat[3] = dr
    out_u[0] = clamp(thr_cmd, 0.0, 1.0)
    out_u[1] = clamp(de, -lims[L_DE], lims[L_DE])
    out_u[2] = clamp(da, -lims[L_DA], lims[L_DA])
    out_u[3] = clamp(dr, -lims[L_DR], lims[L_DR])


@njit(cache=True)
def surface_commands(x, thr_cmd, integ, k_long, k_lat, alpha_trim, u_trim, lims, out_u, out_unsat):
    """Inner-loop surface commands from state feedback plus error integrals.

    Fills ``out_u`` with the saturated command and ``out_unsat`` with the
    pre-saturation values (used for integrator anti-windup).
    """
    u = x[0]
    v = x[1]
    w = x[2]
    vt = math.sqrt(u * u + v * v + w * w)
    alpha = math.atan2(w, u)
    sb = v / vt
    if sb > 1.0:
        sb = 1.0
    elif sb < -1.0:
        sb = -1.0
    beta = math.asin(sb)
    _surface_commands_core(
        alpha, beta, x, thr_cmd, integ, k_long, k_lat, alpha_trim, u_trim, lims,
        out_u, out_unsat,
    )


@njit(cache=True)
def advance_integrators(integ, e_nz, e_ps, e_nyr, dt, unsat, k_long, k_lat, lims, ap):
    """Advance the three tracking-error integrals with anti-windup.

    Each integral is frozen while its primary actuator is saturated and
    further integration would deepen the saturation, and is clamped to a
    configured magnitude either way.
    """
    # elevator <- integral of nz error
    grow = -k_long[2] * e_nz
    if not (
        (unsat[1] > lims[L_DE] and grow > 0.0) or (unsat[1] < -lims[L_DE] and grow < 0.0)
    ):
        integ[0] += dt * e_nz
    lim = ap[AP_INT_NZ]
    integ[0] = clamp(integ[0], -lim, lim)

    # aileron <- integral of stability-roll-rate error
    grow = -k_lat[0, 3] * e_ps
    if not (
        (unsat[2] > lims[L_DA] and grow > 0.0) or (unsat[2] < -lims[L_DA] and grow < 0.0)
    ):
        integ[1] += dt * e_ps
    lim = ap[AP_INT_PS]
    integ[1] = clamp(integ[1], -lim, lim)

    # rudder <- integral of side-accel-plus-yaw-rate error
    grow = -k_lat[1, 4] * e_nyr
    if not (
        (unsat[3] > lims[L_DR] and grow > 0.0) or (unsat[3] < -lims[L_DR] and grow < 0.0)
    ):
        integ[2] += dt * e_nyr
    lim = ap[AP_INT_NYR]
    integ[2] = clamp(integ[2], -lim, lim)


@njit(cache=True)
def _check_state_core(x, lims, vt, alpha, beta):
    if vt < lims[L_VT_MIN]:
        return STATUS_NUMERIC
    if abs(x[4]) >= lims[L_THETA_GUARD]:
        return STATUS_SINGULARITY
    if -x[11] <= 0.0:
        return STATUS_GROUND
    if alpha < lims[L_ALPHA_MIN] or alpha > lims[L_ALPHA_MAX] or abs(beta) > lims[L_BETA_MAX]:
        return STATUS_ENVELOPE
    return -1


@njit(cache=True)
def _check_state(x, lims):
    """Classify the current state; returns a status code or -1 if flyable."""
    for i in range(13):
        if not math.isfinite(x[i]):
            return STATUS_NUMERIC
    vt = math.sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    if vt < lims[L_VT_MIN]:
        return STATUS_NUMERIC
    alpha = math.atan2(x[2], x[0])
    sb = x[1] / vt
    if sb > 1.0:
        sb = 1.0
    elif sb < -1.0:
        sb = -1.0
    beta = math.asin(sb)
    return _check_state_core(x, lims, vt, alpha, beta)


@njit(cache=True)
def _write_row(traj, row, t, x, uc, nz_ref, ps_ref, nyr_ref, link, wp_idx):
    u = x[0]
    v = x[1]
    w = x[2]
    traj[row, 0] = t
    traj[row, 1] = x[9]
    traj[row, 2] = x[10]
    traj[row, 3] = -x[11]
    traj[row, 4] = math.sqrt(u * u + v * v + w * w)
    traj[row, 5] = math.atan2(w, u)
    sb = v / traj[row, 4]
    if sb > 1.0:
        sb = 1.0
    elif sb < -1.0:
        sb = -1.0
    traj[row, 6] = math.asin(sb)
    traj[row, 7] = x[3]
    traj[row, 8] = x[4]
    traj[row, 9] = x[5]
    traj[row, 10] = x[6]
    traj[row, 11] = x[7]
    traj[row, 12] = x[8]
    traj[row, 13] = x[12]
    traj[row, 14] = uc[1]
    traj[row, 15] = uc[2]
    traj[row, 16] = uc[3]
    traj[row, 17] = uc[0]
    traj[row, 18] = nz_ref
    traj[row, 19] = ps_ref
    traj[row, 20] = nyr_ref
    traj[row, 21] = link
    traj[row, 22] = wp_idx


@njit(cache=True)
def mission_loop(
    x0,
    u_trim,
    alpha_trim,
    scal,
    cfs,
    atm,
    poly,
    tidl,
    tmil,
    tmax,
    lims,
    k_long,
    k_lat,
    ap,
    wps,
    r_threshold,
    vt_cmd,
    dt,
    n_steps,
    mask,
    depth,
    loss_mode,
    thr_on_loss,
    capture,
    traj,
):
    """Run one mission to termination.

    Per step: classify the state, advance the waypoint manager, compute
    the remote cascade command, shift it through the round-trip delay
    line, gate it by the link mask (substituting the loss policy when the
    link is down), measure, advance the tracking integrators, and take
    one RK4 step.  Every abnormal state maps to a status code; the loop
    itself never raises.

    Returns (status, completion_time, waypoints_reached, rows_written).
    """
    n_wp = wps.shape[0]
    x = x0.copy()
    xn = np.empty(13)
    k1 = np.empty(13)
    k2 = np.empty(13)
    k3 = np.empty(13)
    k4 = np.empty(13)
    xt = np.empty(13)
    u_remote = np.empty(4)
    u_remote_unsat = np.empty(4)
    u_fail = np.empty(4)
    u_fail_unsat = np.empty(4)
    u_app = np.empty(4)

    integ_r = np.zeros(3)
    integ_f = np.zeros(3)

    ring = np.empty((max(depth, 1), 4))
    for i in range(max(depth, 1)):
        for j in range(4):
            ring[i, j] = u_trim[j]
    head = 0

    wp_idx = 0
    psi_cmd_prev = x0[5]
    last_link_thr = u_trim[0]
    prev_link = 1

    held_u = u_trim.copy()
    held_nz_ref = 0.0
    held_ps_ref = 0.0
    held_nyr_ref = 0.0
    rows = 0

    status = STATUS_TIMEOUT
    t_end = n_steps * dt
    final_k = n_steps

    for k in range(n_steps + 1):
        t = k * dt
        final_k = k

        finite = True
        for i in range(13):
            if not math.isfinite(x[i]):
                finite = False
        if not finite:
            status = STATUS_NUMERIC
            t_end = t
            break
        vt = math.sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
        if vt < lims[L_VT_MIN]:
            status = STATUS_NUMERIC
            t_end = t
            break
        alpha = math.atan2(x[2], x[0])
        sb = x[1] / vt
        if sb > 1.0:
            sb = 1.0
        elif sb < -1.0:
            sb = -1.0
        beta = math.asin(sb)
        code = _check_state_core(x, lims, vt, alpha, beta)
        if code >= 0:
            status = code
            t_end = t
            break

        # waypoint manager: capture test against the active waypoint
        psi_wp, slant = guidance(
            x, wps[wp_idx, 0], wps[wp_idx, 1], wps[wp_idx, 2], psi_cmd_prev
        )
        if slant < r_threshold:
            wp_idx += 1
            if wp_idx == n_wp:
                status = STATUS_SUCCESS
                t_end = t
                break
            psi_wp, slant = guidance(
                x, wps[wp_idx, 0], wps[wp_idx, 1], wps[wp_idx, 2], psi_cmd_prev
            )

        if k == n_steps:
            status = STATUS_TIMEOUT
            t_end = t
            break

        # remote cascade: references and surface commands from the current state
        psi_cmd_prev = psi_wp
        nz_c, ps_c, nyr_c, thr_c = _reference_laws_core(
            x, psi_cmd_prev, -wps[wp_idx, 2], vt_cmd, u_trim[0], ap, vt
        )
        _surface_commands_core(
            alpha, beta, x, thr_c, integ_r, k_long, k_lat, alpha_trim, u_trim, lims,
            u_remote, u_remote_unsat,
        )

        # round-trip delay line on the remote command stream
        if depth > 0:
            for j in range(4):
                u_app[j] = ring[head, j]
                ring[head, j] = u_remote[j]
            head += 1
            if head == depth:
                head = 0
        else:
            for j in range(4):
                u_app[j] = u_remote[j]

        # link gating
        link = mask[k]
        nz_ref = nz_c
        ps_ref = ps_c
        nyr_ref = nyr_c
        fs_active = False
        if link != 0:
            last_link_thr = u_app[0]
        else:
            if loss_mode == MODE_ZERO:
                for j in range(4):
                    u_app[j] = 0.0
                nz_ref = 0.0
                ps_ref = 0.0
                nyr_ref = 0.0
            else:
                if prev_link != 0:
                    integ_f[0] = 0.0
                    integ_f[1] = 0.0
                    integ_f[2] = 0.0
                thr_fs = 0.0 if thr_on_loss == THR_ZERO else last_link_thr
                _surface_commands_core(
                    alpha, beta, x, thr_fs, integ_f, k_long, k_lat, alpha_trim, u_trim,
                    lims, u_fail, u_fail_unsat,
                )
                for j in range(4):
                    u_app[j] = u_fail[j]
                nz_ref = 0.0
                ps_ref = 0.0
                nyr_ref = 0.0
                fs_active = True
        prev_link = link

        # integrate one step; first-stage evaluation doubles as measurement
        nz, ny = rk4_step(
            x, u_app, dt, scal, cfs, atm, poly, tidl, tmil, tmax, k1, k2, k3, k4, xt, xn
        )

        if capture != 0:
            _write_row(traj, rows, t, x, u_app, nz_ref, ps_ref, nyr_ref, link, wp_idx)
            rows += 1
            held_u[0] = u_app[0]
            held_u[1] = u_app[1]
            held_u[2] = u_app[2]
            held_u[3] = u_app[3]
            held_nz_ref = nz_ref
            held_ps_ref = ps_ref
            held_nyr_ref = nyr_ref

        # advance tracking integrals with the achieved accelerations
        ps = x[6] * math.cos(alpha) + x[8] * math.sin(alpha)
        nyr = ny + x[8]
        advance_integrators(
            integ_r, nz - nz_c, ps - ps_c, nyr - nyr_c, dt,
            u_remote_unsat, k_long, k_lat, lims, ap,
        )
        if fs_active:
            advance_integrators(
                integ_f, nz - 0.0, ps - 0.0, nyr - 0.0, dt,
                u_fail_unsat, k_long, k_lat, lims, ap,
            )

        for i in range(13):
            x[i] = xn[i]

    if capture != 0:
        _write_row(
            traj, rows, t_end, x, held_u, held_nz_ref, held_ps_ref, held_nyr_ref,
            mask[final_k], wp_idx,
        )
        rows += 1

    return status, t_end, wp_idx, rows
