import sys, time, numpy as np
from rpaslab.params import AircraftParams
from rpaslab import mission
from rpaslab.mission import ScenarioConfig, MissionContext, RunConfig, run_mission

p = AircraftParams.load()
for name in ("scenario2", "scenario1"):
    sc = ScenarioConfig.load(f"src/rpaslab/data/{name}.json")
    ctx = MissionContext.prepare(sc, p)
    t0 = time.time()
    res = run_mission(ctx, RunConfig(p_a=1.0, epsilon=0.0, seed=1), capture_trajectory=True)
    el = time.time() - t0
    r = res.record
    tr = res.trajectory
    print(f"{name}: success={r.success} t={r.completion_time} fail={r.failure_mode} wps={r.waypoints_reached} wall={el:.2f}s rows={tr.shape[0]}")
    if tr is not None and tr.shape[0] > 10:
        h = tr[:,3]; vt = tr[:,4]; phi = tr[:,7]
        print(f"   h range [{h.min():.0f},{h.max():.0f}] vt [{vt.min():.1f},{vt.max():.1f}] |phi|max {abs(phi).max()*57.3:.1f} deg")
        # waypoint capture times
        wpidx = tr[:,22]
        for i in range(1, int(wpidx.max())+1):
            k = np.argmax(wpidx >= i)
            print(f"   wp{i} captured t={tr[k,0]:.1f}s pos=({tr[k,1]:.0f},{tr[k,2]:.0f},{h[k]:.0f})")
