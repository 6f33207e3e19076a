"""Slow-fading channels: the interference gains are redrawn every t_c flops
and the learner only keeps the newest floor(t_c / N) inequality pairs. After
each block change the stale window blinds the learner for a while, then the
error collapses again."""

import numpy as np

from crnpc import FadingConfig, Feedback, Learner, ScenarioConfig, run_fading

cfg = ScenarioConfig(
    n_su=5,
    seed=31,
    fading=FadingConfig(t_c=120, n_blocks=3),   # short blocks for a quick demo
)
print(f"block length t_c = {cfg.fading.t_c} flops, "
      f"window t_w = {cfg.window_length()} pairs, "
      f"{cfg.fading.n_blocks} blocks\n")

trace = run_fading(cfg, Learner.CGCPM, feedback=Feedback.MCC)

t_c = cfg.fading.t_c
for block in range(cfg.fading.n_blocks):
    seg = trace.rel_error[block * t_c:(block + 1) * t_c]
    above_half = int(np.sum(seg > 0.5))
    print(f"block {block + 1}: start error {seg[0]:7.3f}  "
          f"end error {seg[-1]:.4f}  flops above 50%: {above_half}")

print("\nerror right around the block changes:")
for change in (t_c, 2 * t_c):
    window = trace.rel_error[change - 3:change + 4]
    flops = range(change - 2, change + 5)
    print("  " + "  ".join(f"{t}:{e:.3f}" for t, e in zip(flops, window)))

print(f"\nmean interference at the PU over all blocks: {trace.mean_i_pu_dbm:.2f} dBm")
print(f"mean CRN capacity: {trace.mean_capacity:.2f} bit/s/Hz")
