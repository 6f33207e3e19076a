"""One full probe-and-learn run: five SUs, multilevel feedback, center of
gravity learner. Shows how the estimate error, the interference at the PU,
and the CRN capacity evolve flop by flop."""

import numpy as np

from crnpc import Feedback, Learner, ScenarioConfig, generate_topology, run_static
from crnpc.engine import default_streams
from crnpc.pu_link import dbm_to_mw

cfg = ScenarioConfig(n_su=5, seed=2024)
topo_rng, run_rng = default_streams(cfg)
topo = generate_topology(cfg, topo_rng)

g_norm = topo.g_normalized(cfg.i_th_ref_mw)
print("topology: SU distances to the PU receiver (m):",
      np.round(topo.su_pu_dist_m, 0))
print("normalized gains:", np.array2string(g_norm, precision=5))
print(f"full-power interference margin: {float(g_norm @ cfg.p_max_mw):.2f}x "
      f"the reference threshold")

trace = run_static(cfg, topo, Learner.CGCPM, Feedback.MCC, flops=80, rng=run_rng)

print(f"\n{'flop':>4} {'rel error':>10} {'I_PU dBm':>9} {'capacity':>9} "
      f"{'eps':>5} {'mcs':>4} {'explored':>8}")
for t in (1, 2, 3, 5, 8, 12, 20, 30, 40, 60, 80):
    i = t - 1
    print(f"{t:>4} {trace.rel_error[i]:>10.4f} {trace.i_pu_dbm[i]:>9.2f} "
          f"{trace.capacity[i]:>9.2f} {trace.epsilon[i]:>5.2f} "
          f"{trace.observed_mcs[i]:>4} {str(bool(trace.explored[i])):>8}")

i_th_ref_dbm = 10 * np.log10(cfg.i_th_ref_mw)
print(f"\nreference interference threshold: {i_th_ref_dbm:.2f} dBm")
print(f"flops to reach 1% estimation error: {trace.flops_to_1pct}")
print(f"mean interference at the PU: {trace.mean_i_pu_dbm:.2f} dBm")
print(f"mean CRN capacity: {trace.mean_capacity:.2f} bit/s/Hz")
late = trace.i_pu_dbm[-20:]
print(f"late-run interference rides the threshold: "
      f"{late.min():.2f}..{late.max():.2f} dBm")
