import time, numpy as np
from rpaslab.params import AircraftParams
from rpaslab.mission import ScenarioConfig, MissionContext, RunConfig, run_mission

p = AircraftParams.load()
for name in ("scenario1", "scenario2"):
    sc = ScenarioConfig.load(f"src/rpaslab/data/{name}.json")
    ctx = MissionContext.prepare(sc, p)
    print(f"=== {name} ===")
    t0 = time.time(); nsteps = 0
    for pa in (1.0, 0.95, 0.9, 0.8, 0.7, 0.6, 0.5):
        line = f"pa={pa:4.2f}: "
        for eps in (0.0, 0.02, 0.04, 0.06, 0.08, 0.1):
            res = run_mission(ctx, RunConfig(p_a=pa, epsilon=eps, seed=12345), run_id=0)
            r = res.record
            nsteps += int((r.completion_time or sc.time_limit)/sc.dt)
            if r.success:
                line += f" S({r.completion_time:5.1f})"
            else:
                line += f" {r.failure_mode[:4]:>4}(----)" if r.failure_mode!='timeout' else "  T O(----)"
        print(line)
    el = time.time()-t0
    print(f"probe wall {el:.1f}s, {nsteps} steps -> {el/nsteps*1e6:.2f} us/step")
