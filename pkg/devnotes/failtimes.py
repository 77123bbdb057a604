# measure where failing runs actually terminate (cost driver)
import numpy as np, collections, time
from rpaslab.params import AircraftParams
from rpaslab.mission import ScenarioConfig, MissionContext, run_mission
from rpaslab import montecarlo as mc

p = AircraftParams.load()
sc = ScenarioConfig.load("src/rpaslab/data/scenario1.json")
ctx = MissionContext.prepare(sc, p)
sweep = mc.SweepConfig(n_samples=200, base_seed=777, worker_count=1)
t_ends = {m: [] for m in ("success","envelope-exit","timeout","ground-impact","attitude-singularity","numeric-divergence")}
for i in range(200):
    run = sweep.sample(i)
    res = run_mission(ctx, run, run_id=i, capture_trajectory=True)
    r = res.record
    t_end = res.trajectory[-1, 0]
    t_ends[("success" if r.success else r.failure_mode)].append(t_end)
for m, v in t_ends.items():
    if v:
        v = np.array(v)
        print(f"{m:22s} n={len(v):3d} t_end: mean={v.mean():6.1f} p10={np.percentile(v,10):6.1f} p90={np.percentile(v,90):6.1f}")
