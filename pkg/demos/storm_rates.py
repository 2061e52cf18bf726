"""Fit the convergence slope of projected STORM on the alpha=1.5 lower-bound pair.

Uses the shipped config (20 seeds). Fewer seeds make the fit noisy.
Run: python3 demos/storm_rates.py [seeds]
"""

import sys
from dataclasses import replace
from pathlib import Path

from pgdom.harness import load_config, run_experiment

cfg = load_config(Path(__file__).resolve().parents[1] / "configs" / "storm_f1_alpha15.toml")
seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 20
rep = run_experiment(replace(cfg, seeds=list(range(seeds))))

for T, q, g in zip(rep.T, rep.queries, rep.mean_gap):
    print(f"T={T:6d} queries={q:8.0f} mean gap={g:.3e}")
print(f"slope vs T {rep.slope_T:.3f} (target {rep.target_T:.3f} +- {rep.tol_T})")
print(f"slope vs queries {rep.slope_Q:.3f} (target {rep.target_Q:.3f} +- {rep.tol_Q})")
