# mini-sweep: trend + cost telemetry for sizing the 20k acceptance sweeps
import time, numpy as np, collections
from rpaslab.params import AircraftParams
from rpaslab.mission import ScenarioConfig, MissionContext
from rpaslab import montecarlo as mc

p = AircraftParams.load()
for name in ("scenario1", "scenario2"):
    sc = ScenarioConfig.load(f"src/rpaslab/data/{name}.json")
    sweep = mc.SweepConfig(n_samples=600, base_seed=2024, worker_count=1)
    t0 = time.time()
    recs = mc.run_sweep(sc, sweep, p)
    el = time.time()-t0
    steps = sum(int((r.completion_time if r.success else sc.time_limit)/sc.dt) for r in recs)
    modes = collections.Counter(r.failure_mode for r in recs if not r.success)
    n_succ = sum(r.success for r in recs)
    print(f"{name}: {n_succ}/600 success, modes={dict(modes)}, wall={el:.1f}s (projected 20k: {el/600*20000/60:.1f} min)")
    # corner stats
    best = [r for r in recs if r.p_a >= 0.95 and r.epsilon <= 0.01]
    worst = [r for r in recs if r.p_a <= 0.55 and r.epsilon >= 0.09]
    br = np.mean([r.success for r in best]) if best else float('nan')
    wr = np.mean([r.success for r in worst]) if worst else float('nan')
    print(f"   best corner {sum(1 for _ in best)} samples rate={br:.2f} | worst corner {sum(1 for _ in worst)} samples rate={wr:.2f}")
    # eps-axis at high pa
    for elo in (0.0, 0.02, 0.04, 0.06, 0.08):
        sel = [r for r in recs if r.p_a >= 0.95 and elo <= r.epsilon < elo+0.02]
        if sel: print(f"   pa>=0.95 eps[{elo:.2f},{elo+0.02:.2f}): {np.mean([r.success for r in sel]):.2f} (n={len(sel)})")
