"""Small ensemble comparison of the two learners and the two feedback kinds:
mean estimation error per flop over a handful of random topologies, plus the
flops each combination needs to reach 1% error. Writes one CSV per combo."""

from pathlib import Path

import numpy as np

from crnpc import Feedback, Learner, ScenarioConfig, run_ensemble

N_TOPOLOGIES = 8      # bump toward 100 for smooth paper-style curves
FLOPS = 90

cfg = ScenarioConfig(n_su=5, seed=7)
out_dir = Path("ensemble_curves")
out_dir.mkdir(exist_ok=True)

print(f"{N_TOPOLOGIES} random topologies, {FLOPS} flops each\n")
print(f"{'learner':>7} {'feedback':>8} {'mean flops to 1%':>17}")
for learner in (Learner.CGCPM, Learner.ACCPM):
    for feedback in (Feedback.MCC, Feedback.BINARY):
        result = run_ensemble(cfg, learner, feedback, N_TOPOLOGIES, flops=FLOPS)
        path = out_dir / f"{learner.value}_{feedback.value}.csv"
        rows = ["flop,mean_error"] + [
            f"{t+1},{err:.6g}" for t, err in enumerate(result.mean_error)]
        path.write_text("\n".join(rows) + "\n")
        print(f"{learner.value:>7} {feedback.value:>8} "
              f"{result.mean_flops_to_1pct():>17.1f}   -> {path}")

print("\nmean error snapshots (flop: cgcpm/mcc curve):")
result = run_ensemble(cfg, Learner.CGCPM, Feedback.MCC, N_TOPOLOGIES, flops=FLOPS)
for t in (5, 10, 20, 30, 40, 60, 90):
    print(f"  {t:>3}: {result.mean_error[t-1]:.4f}")
