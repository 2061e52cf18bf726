"""Certify gradient dominance on the two-point lower-bound pair, then break it.

Run: python3 demos/certify_dominance.py
"""

from pgdom.instances import lower_bound_smoothness, make_lower_bound_pair, theoretical_constants
from pgdom.geometry import Interval
from pgdom.verifiers import GridSpec, verify_grad_dominance, verify_projected_grad_dominance, verify_smoothness

pair = make_lower_bound_pair(alpha=1.5, C=1.0, R=1.0, rho=0.1)
c = theoretical_constants(pair)
print(f"certificate: alpha={c.alpha} tau={c.tau:.5f} L={c.L:.4f} eta0={c.eta0:.5f}")

grid = GridSpec(pair.domain, 10_000)
for name in ("f0", "f1"):
    f = getattr(pair, name)
    plain = verify_grad_dominance(f, grid, c.alpha, c.tau, 1e-6)
    proj = verify_projected_grad_dominance(f, pair.domain, grid, c.alpha, c.tau, [c.eta0 / 4, c.eta0], 1e-6)
    print(f"{name}: plain worst ratio {plain.worst_ratio:.4f}, projected {proj.worst_ratio:.4f}")

# halving tau should make the check fail somewhere near the minimizer
bad = verify_grad_dominance(pair.f1, grid, c.alpha, c.tau / 2, 1e-6)
print(f"tau/2 control: passed={bad.passed}, worst at x={bad.worst_point[0]:.4f}")

# the closed-form smoothness constant is not always enough for f1
for alpha in (1.5, 1.8):
    p = make_lower_bound_pair(alpha, 1.0, 1.0, 0.1)
    L = lower_bound_smoothness(alpha, 1.0, 1.0)
    rep = verify_smoothness(p.f1, GridSpec(Interval(-1.0, 1.0), 10_000), L)
    print(f"alpha={alpha}: closed-form L={L:.4f}, f1 worst ratio {rep.worst_ratio:.4f}, "
          f"certified L={p.f1.constants.L:.4f}")
