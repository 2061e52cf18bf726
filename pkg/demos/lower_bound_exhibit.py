"""Count how many noisy queries a plain descent needs on the hidden-interval instance.

This is an empirical exhibit of how query counts scale as epsilon shrinks.
It does not verify any lower bound.
Run: python3 demos/lower_bound_exhibit.py
"""

from pgdom.harness import lowerbound_demo

res = lowerbound_demo([0.04, 0.02, 0.01, 0.005], alpha=2.0, tau=1.0, G=1.0, R=1.0, seed=0, trials=10)
print(res["label"])
for row in res["rows"]:
    if "skipped" in row:
        print(f"eps={row['epsilon']}: skipped ({row['skipped']})")
    else:
        print(f"eps={row['epsilon']}: N={row['N']} p={row['p']:.3f} mean queries {row['queries_mean']:.1f}")
print(f"log-log exponent {res['exponent']:.3f}")
