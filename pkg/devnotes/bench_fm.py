# probe: does a fastmath variant of the derivative+rk4 chain pay off enough
import time, math, numpy as np
from numba import njit
from rpaslab.params import AircraftParams
from rpaslab import dynamics
from rpaslab.kernels import (air_data, throttle_gearing, engine_thrust, aero_coefficients,
                             S_KAPPA, S_G, S_MASS, S_AREA, S_SPAN, S_CHORD, S_XA)

FM = {'contract', 'arcp', 'reassoc', 'nsz'}

p = AircraftParams.load()
st, cmd = dynamics.trim(540.0, 4000.0, p)
x = st.to_array(); uc = cmd.to_array()
arrs = p.arrays()

def make(fm):
    deco = njit(fastmath=fm) if fm else njit
    @deco
    def deriv(x, uc, scal, cfs, atm, poly, tidl, tmil, tmax, out):
        u = x[0]; v = x[1]; w = x[2]
        phi = x[3]; theta = x[4]; psi = x[5]
        pp = x[6]; qq = x[7]; rr = x[8]
        alt = -x[11]; power = x[12]
        vt = math.sqrt(u*u+v*v+w*w)
        alpha = math.atan2(w, u)
        sb = v/vt
        if sb > 1.0: sb = 1.0
        elif sb < -1.0: sb = -1.0
        beta = math.asin(sb)
        mach, qbar = air_data(vt, alt, atm)
        thrust = engine_thrust(power, alt, mach, scal, tidl, tmil, tmax)
        out[12] = (throttle_gearing(uc[0], scal) - power)/scal[S_KAPPA]
        cxt, cyt, czt, clt, cmt, cnt = aero_coefficients(alpha, beta, uc[1], uc[2], uc[3], pp, qq, rr, vt, scal, poly)
        g = scal[S_G]; rm = 1.0/scal[S_MASS]; qs = qbar*scal[S_AREA]
        ax = rm*(qs*cxt + thrust); ay = rm*qs*cyt; az = rm*qs*czt
        sph = math.sin(phi); cph = math.cos(phi)
        sth = math.sin(theta); cth = math.cos(theta)
        sps = math.sin(psi); cps = math.cos(psi)
        out[0] = rr*v - qq*w - g*sth + ax
        out[1] = pp*w - rr*u + g*cth*sph + ay
        out[2] = qq*u - pp*v + g*cth*cph + az
        out[3] = pp + (sth/cth)*(qq*sph + rr*cph)
        out[4] = qq*cph - rr*sph
        out[5] = (qq*sph + rr*cph)/cth
        rl = qs*scal[S_SPAN]*clt; pm = qs*scal[S_CHORD]*cmt; yn = qs*scal[S_SPAN]*cnt
        pdot = (cfs[0]*rr + cfs[1]*pp)*qq + cfs[2]*rl + cfs[3]*yn
        qdot = cfs[4]*pp*rr - cfs[5]*(pp*pp - rr*rr) + cfs[6]*pm
        rdot = (cfs[7]*pp + cfs[1]*rr)*qq + cfs[3]*rl + cfs[8]*yn
        out[6] = pdot; out[7] = qdot; out[8] = rdot
        out[9] = u*cth*cps + v*(sph*sth*cps - cph*sps) + w*(cph*sth*cps + sph*sps)
        out[10] = u*cth*sps + v*(sph*sth*sps + cph*cps) + w*(cph*sth*sps - sph*cps)
        out[11] = -u*sth + v*sph*cth + w*cph*cth
        xa = scal[S_XA]
        return -(az - xa*qdot)/g - 1.0, (ay + xa*rdot)/g

    @deco
    def bench(x, uc, dt, n, scal, cfs, atm, poly, tidl, tmil, tmax):
        k1 = np.empty(13); k2 = np.empty(13); k3 = np.empty(13); k4 = np.empty(13)
        xt = np.empty(13); xx = x.copy(); acc = 0.0
        for k in range(n):
            nz, ny = deriv(xx, uc, scal, cfs, atm, poly, tidl, tmil, tmax, k1)
            for i in range(13): xt[i] = xx[i] + 0.5*dt*k1[i]
            deriv(xt, uc, scal, cfs, atm, poly, tidl, tmil, tmax, k2)
            for i in range(13): xt[i] = xx[i] + 0.5*dt*k2[i]
            deriv(xt, uc, scal, cfs, atm, poly, tidl, tmil, tmax, k3)
            for i in range(13): xt[i] = xx[i] + dt*k3[i]
            deriv(xt, uc, scal, cfs, atm, poly, tidl, tmil, tmax, k4)
            for i in range(13): xx[i] = xx[i] + dt/6.0*(k1[i] + 2.0*k2[i] + 2.0*k3[i] + k4[i])
            acc += nz
        return acc

    return bench

for fm, label in ((False, 'plain   '), (FM, 'fastmath')):
    b = make(fm)
    b(x.copy(), uc, 1e-3, 10, *arrs[:7])
    t0 = time.time(); n = 300000
    b(x.copy(), uc, 1e-3, n, *arrs[:7])
    el = time.time()-t0
    print(f'{label}: {el/n*1e6:.3f} us/step')
