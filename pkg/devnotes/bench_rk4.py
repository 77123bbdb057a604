import time, numpy as np
from numba import njit
from rpaslab.params import AircraftParams
from rpaslab import dynamics, kernels

p = AircraftParams.load()
st, cmd = dynamics.trim(540.0, 4000.0, p)
x = st.to_array(); uc = cmd.to_array()
arrs = p.arrays()

@njit
def bench(x, uc, dt, n, scal, cfs, atm, poly, tidl, tmil, tmax):
    scratch = np.empty((5,13)); xo = np.empty(13); xx = x.copy()
    acc = 0.0
    for k in range(n):
        nz, ny = kernels.rk4_step(xx, uc, dt, scal, cfs, atm, poly, tidl, tmil, tmax, scratch, xo)
        for i in range(13): xx[i] = xo[i]
        acc += nz
    return acc

bench(x, uc, 1e-3, 10, *arrs[:7])
t0 = time.time(); n = 200000
bench(x, uc, 1e-3, n, *arrs[:7])
el = time.time()-t0
print(f'{n} steps in {el:.3f}s -> {el/n*1e6:.3f} us/step')
