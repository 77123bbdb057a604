import numpy as np
from rpaslab.params import AircraftParams
from rpaslab.mission import ScenarioConfig, MissionContext, RunConfig, run_mission
from rpaslab import montecarlo as mc

p = AircraftParams.load()
sc = ScenarioConfig.load("src/rpaslab/data/scenario1.json")
ctx = MissionContext.prepare(sc, p)
rng = np.random.default_rng(7)
bins = {k: [0,0] for k in range(10)}
for i in range(800):
    pa = round(rng.uniform(0.95, 1.0)*1000)/1000
    eps = round(rng.uniform(0.0, 0.1)*1000)/1000
    seed = int(rng.integers(0, 2**63))
    rec = run_mission(ctx, RunConfig(p_a=pa, epsilon=eps, seed=seed), run_id=i).record
    b = min(int(eps*100), 9)
    bins[b][0] += 1; bins[b][1] += int(rec.success)
for k in range(10):
    n, s = bins[k]
    print(f"eps [{k/100:.2f},{(k+1)/100:.2f}): rate={s/max(n,1):.3f} n={n}")
