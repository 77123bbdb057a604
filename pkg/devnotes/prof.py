import time, numpy as np
from numba import njit
from rpaslab.params import AircraftParams
from rpaslab import dynamics, kernels

p = AircraftParams.load()
st, cmd = dynamics.trim(540.0, 4000.0, p)
x = st.to_array(); uc = cmd.to_array()
scal, cfs, atm, poly, tidl, tmil, tmax, lims = p.arrays()

@njit
def bench_deriv(x, uc, n, scal, cfs, atm, poly, tidl, tmil, tmax):
    out = np.empty(13); acc = 0.0
    for k in range(n):
        nz, ny = kernels.state_derivative(x, uc, scal, cfs, atm, poly, tidl, tmil, tmax, out)
        acc += nz + out[0]
    return acc

@njit
def bench_aero(n, scal, poly):
    acc = 0.0
    for k in range(n):
        c = kernels.aero_coefficients(0.04+k*1e-12, 0.001, -0.03, 0.0, 0.0, 0.01, 0.002, 0.001, 540.0, scal, poly)
        acc += c[0]+c[3]
    return acc

@njit
def bench_trig(n):
    acc = 0.0
    for k in range(n):
        a = 0.04 + k*1e-12
        acc += np.sin(a)+np.cos(a)+np.sin(2*a)+np.cos(2*a)+np.sin(3*a)+np.cos(3*a)
        acc += np.arctan2(a, 1.0) + np.arcsin(a*0.01) + np.sqrt(1.0+a)
    return acc

@njit
def bench_air(n, atm, scal, tidl, tmil, tmax):
    acc = 0.0
    for k in range(n):
        m, q = kernels.air_data(540.0+k*1e-9, 4000.0, atm)
        acc += q + kernels.engine_thrust(10.0, 4000.0, m, scal, tidl, tmil, tmax)
    return acc

n = 2000000
for name, f, args in (("deriv", bench_deriv, (x, uc, n, scal, cfs, atm, poly, tidl, tmil, tmax)),
                      ("aero ", bench_aero, (n, scal, poly)),
                      ("trig9", bench_trig, (n,)),
                      ("air+thrust", bench_air, (n, atm, scal, tidl, tmil, tmax))):
    f(*args[:2]+(10,)+args[3:]) if False else f(*(args[:2] + args[2:]))  # warm
    t0 = time.time(); f(*args); el = time.time()-t0
    print(f"{name}: {el/n*1e9:.1f} ns/call")
