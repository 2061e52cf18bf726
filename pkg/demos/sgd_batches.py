"""Projected SGD with growing batches on the Foster instance.

Batches grow like t^(2/(2-alpha)), so the iteration count stays small while the
query count explodes. The fitted slopes show both sides.
Run: python3 demos/sgd_batches.py
"""

from pathlib import Path

from pgdom.harness import load_config, run_experiment
from pgdom.optimizers import batch_size

cfg = load_config(Path(__file__).resolve().parents[1] / "configs" / "sgd_foster_alpha1.toml")
print("batch sizes:", [batch_size(4, 1.0, t) for t in range(1, 9)])
rep = run_experiment(cfg)
for T, q, g in zip(rep.T, rep.queries, rep.mean_gap):
    print(f"T={T:3d} queries={q:9.0f} mean gap={g:.3e}")
print(f"slope vs T {rep.slope_T:.3f} (target {rep.target_T:.3f} +- {rep.tol_T})")
print(f"slope vs queries {rep.slope_Q:.3f} (target {rep.target_Q:.3f} +- {rep.tol_Q})")
