"""Look at the three noisy oracles: bias, variance and the bounded search coin.

Run: python3 demos/oracle_properties.py
"""

import numpy as np

from pgdom.instances import make_foster_instance, make_lower_bound_pair, make_nbs_instance
from pgdom.oracles import FosterUniform, GaussianAdditive, NbsBernoulli, oracle_statistics

pair = make_lower_bound_pair(1.5, 1.0, 1.0, 0.1)
s = oracle_statistics(GaussianAdditive(pair.f1, 0.5, seed=1), [0.3], 100_000)
print(f"gaussian at 0.3: bias {s['mean_error']:.1e}, variance {s['var_estimate']:.4f} (expected 0.25)")

f = make_foster_instance(sigma=1.0, R=1.0, m=4, d=8)
s = oracle_statistics(FosterUniform(f, seed=2), np.zeros(8), 100_000)
print(f"foster: variance {s['var_estimate']:.4f} (expected {1 - 1 / f.m:.4f}), |x*| = {np.linalg.norm(f.minimizer):.4f}")

nbs = make_nbs_instance(alpha=1.5, p=0.2, G=1.0, R=1.0, N=4, j_star=2)
o = NbsBernoulli(nbs, seed=3)
for x in (0.1, 0.4, 0.6, 0.9):
    g = o.sample([x], 50_000)[:, 0]
    print(f"search coin at {x}: mean {g.mean():+.4f} vs {nbs.df(x):+.4f}, values {sorted(set(np.round(g, 6).tolist()))}")
