import numpy as np, time
from rpaslab.params import AircraftParams
from rpaslab.mission import ScenarioConfig
from rpaslab import montecarlo as mc

p = AircraftParams.load()
sc = ScenarioConfig.load("src/rpaslab/data/scenario1.json")
t0 = time.time()
rep = mc.latency_blockage_sweep(sc, np.round(np.arange(0, 101) * 1e-3, 3), p)
print("pattern:", "".join("S" if s else "F" for s in rep.successes))
print("bands:", rep.bands)
print(f"wall: {time.time()-t0:.1f}s")
