import numpy as np, math
from rpaslab.params import AircraftParams
from rpaslab import dynamics, control

np.set_printoptions(precision=4, suppress=True, linewidth=140)
p = AircraftParams.load()
st, cmd = dynamics.trim(540.0, 4000.0, p)
print(f"trim alpha={st.alpha:.5f} rad theta={st.theta:.5f} power={st.power:.3f} thr={cmd.throttle:.4f} de={cmd.elevator:.5f}")
m = control.linearize(st, cmd, p)
print("A_long=\n", m.a_long, "\nB_long=\n", m.b_long)
print("open-loop long eig:", np.linalg.eigvals(m.a_long))
print("nz_x:", m.nz_x, "nz_u:", m.nz_u)
print("A_lat=\n", m.a_lat, "\nB_lat=\n", m.b_lat)
print("open-loop lat eig:", np.linalg.eigvals(m.a_lat))
print("ny_x:", m.ny_x, "ny_u:", m.ny_u)

a3, b3 = m.augmented_longitudinal()
a5, b5 = m.augmented_lateral()

def step_response_long(k, t_end=5.0, dt=1e-3, ref=1.0):
    # closed loop: xdot = a3 x + b3 u with integrator inflow -ref on the error integral row
    x = np.zeros(3); out = []
    for i in range(int(t_end/dt)):
        u = -k @ x
        nz = m.nz_x @ x[:2] + m.nz_u * u[0]
        xd = a3 @ x + b3[:,0]*u[0]
        xd[2] = nz - ref
        x = x + dt*xd
        out.append(nz)
    return np.array(out)

def step_response_lat(k, t_end=5.0, dt=1e-3, ps_ref=0.5):
    x = np.zeros(5); out = []
    ca, sa = math.cos(m.alpha_trim), math.sin(m.alpha_trim)
    for i in range(int(t_end/dt)):
        u = -k @ x
        ps = ca*x[1] + sa*x[2]
        nyr = m.ny_x @ x[:3] + m.ny_u @ u + x[2]
        xd = a5 @ x + b5 @ u
        xd[3] = ps - ps_ref
        xd[4] = nyr - 0.0
        x = x + dt*xd
        out.append(ps)
    return np.array(out)

def report(qd_long, rd_long, qd_lat, rd_lat):
    cfg = control.GainSynthesisConfig(np.diag(qd_long), np.diag(rd_long), np.diag(qd_lat), np.diag(rd_lat))
    gs = control.build_gain_set(m, cfg)
    nz = step_response_long(gs.k_long.reshape(1,3))
    ps = step_response_lat(gs.k_lat)
    def mark(y, ref):
        over = (y.max()-ref)/ref*100
        # settling: first index after which |y-ref|<2%
        idx = np.where(np.abs(y-ref) > 0.02*ref)[0]
        ts = (idx[-1]+1)/1000 if len(idx) else 0.0
        return over, ts
    o1, t1 = mark(nz, 1.0); o2, t2 = mark(ps, 0.5)
    print(f"K_long={gs.k_long}  eig={np.sort(gs.long_eigenvalues.real)}")
    print(f"K_lat=\n{gs.k_lat}\n lat eig real={np.sort(gs.lat_eigenvalues.real)}")
    print(f"Nz step: overshoot={o1:.1f}% settle={t1:.2f}s | ps step: overshoot={o2:.1f}% settle={t2:.2f}s")
    return gs

print("\n=== candidate A ===")
report([50, 1, 100], [50], [100, 10, 100, 200, 100], [20, 20])
print("\n=== candidate B ===")
report([20, 0.5, 40], [20], [50, 5, 50, 80, 80], [10, 10])
print("\n=== candidate C ===")
report([10, 0.2, 30], [8], [30, 2, 30, 60, 60], [5, 8])
