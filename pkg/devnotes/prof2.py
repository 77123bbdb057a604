import time
from rpaslab.params import AircraftParams
from rpaslab.mission import ScenarioConfig, MissionContext, RunConfig, run_mission

p = AircraftParams.load()
sc = ScenarioConfig.load("src/rpaslab/data/scenario1.json")
ctx = MissionContext.prepare(sc, p)
# warm
run_mission(ctx, RunConfig(p_a=1.0, epsilon=0.0, seed=1))
for label, rc in (("pa=1 eps=0  ", RunConfig(p_a=1.0, epsilon=0.0, seed=1)),
                  ("pa=1 eps=.04", RunConfig(p_a=1.0, epsilon=0.04, seed=1)),
                  ("pa=.7 eps=.02", RunConfig(p_a=0.7, epsilon=0.02, seed=1))):
    t0 = time.time()
    for _ in range(3):
        res = run_mission(ctx, rc)
    el = (time.time()-t0)/3
    steps = int((res.record.completion_time or sc.time_limit)/sc.dt)
    print(f"{label}: wall={el*1000:.0f}ms steps={steps} -> {el/steps*1e6:.2f} us/step")
