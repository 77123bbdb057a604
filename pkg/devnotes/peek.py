import numpy as np
from rpaslab.params import AircraftParams
from rpaslab.mission import ScenarioConfig, MissionContext, RunConfig, run_mission

p = AircraftParams.load()
sc = ScenarioConfig.load("src/rpaslab/data/scenario2.json")
ctx = MissionContext.prepare(sc, p)
res = run_mission(ctx, RunConfig(p_a=1.0, epsilon=0.0, seed=1), capture_trajectory=True)
tr = res.trajectory
print("wp3 target:", sc.waypoints[2])
for t in range(28, 100, 4):
    k = t*1000
    row = tr[k]
    d = np.sqrt((sc.waypoints[2][0]-row[1])**2 + (sc.waypoints[2][1]-row[2])**2 + (sc.waypoints[2][2]+row[3])**2)
    print(f"t={row[0]:5.1f} pos=({row[1]:7.0f},{row[2]:7.0f}) h={row[3]:6.0f} psi={row[9]*57.3:7.1f} phi={row[7]*57.3:6.1f} vt={row[4]:5.1f} range={d:7.0f} nzref={row[18]:5.2f} psref={row[19]:5.2f}")
