"""Grid-based certification of dominance, smoothness and recursion bounds.

Every check returns a :class:`CheckReport` whose ``worst_ratio`` is the
largest observed ratio of the left-hand side of an inequality to its
right-hand side; the check passes when ``worst_ratio <= 1 + tol``.
Ties in the maximum resolve to the lowest grid index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .geometry import AllSpace, Ball, Box, Domain, Interval, gradient_mappings
from .instances import LowerBoundPair, Objective, distance_bound, r0_bound

__all__ = [
    "CheckReport",
    "GridSpec",
    "check_delta_recursion",
    "check_poly_bound",
    "check_variance_bound",
    "check_variance_recursion",
    "delta_recursion",
    "kl_per_step",
    "variance_recursion",
    "verify_distance_bounds",
    "verify_grad_dominance",
    "verify_holder",
    "verify_local_grad_dominance",
    "verify_phi_kl",
    "verify_projected_grad_dominance",
    "verify_smoothness",
]

GAP_ZERO = 1e-14
GRAD_ZERO = 1e-10


@dataclass
class CheckReport:
    passed: bool
    worst_ratio: float
    worst_point: object
    details: str = ""
    name: str = ""
    inconclusive: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        wp = self.worst_point
        if isinstance(wp, np.ndarray):
            wp = wp.tolist()
        elif isinstance(wp, np.generic):
            wp = wp.item()
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "inconclusive": bool(self.inconclusive),
            "worst_ratio": _num(self.worst_ratio),
            "worst_point": wp,
            "details": self.details,
            "extra": {k: _num(v) for k, v in self.extra.items()},
        }


def _num(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over a bounded domain.

    Points within ``exclusion_radius`` of any entry of ``breakpoints`` are
    dropped (1-D domains only).
    """

    domain: Domain
    points_per_axis: int
    exclusion_radius: float = 0.0
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.points_per_axis < 2:
            raise ValueError("points_per_axis must be at least 2")
        if self.exclusion_radius < 0:
            raise ValueError("exclusion_radius must be nonnegative")

    def points(self) -> np.ndarray:
        n, dom = self.points_per_axis, self.domain
        if isinstance(dom, Interval):
            x = np.linspace(dom.lo, dom.hi, n)
            if self.exclusion_radius > 0 and len(self.breakpoints):
                bp = np.asarray(self.breakpoints, dtype=float)
                near = np.min(np.abs(x[:, None] - bp[None, :]), axis=1) < self.exclusion_radius
                x = x[~near]
            return x[:, None]
        if isinstance(dom, (Box, Ball)):
            if isinstance(dom, Box):
                lo, hi = dom.lo, dom.hi
            else:
                lo, hi = dom.center - dom.radius, dom.center + dom.radius
            axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
            X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dom.dim)
            return X[dom.contains(X)]
        if isinstance(dom, AllSpace):
            raise ValueError("cannot grid an unbounded domain")
        raise TypeError(f"unsupported domain {dom!r}")


def _report(name, ratios, X, tol, details="", **extra):
    if ratios.size == 0:
        return CheckReport(False, math.nan, None, details or "no points", name, True, extra)
    i = int(np.argmax(ratios))
    worst = float(ratios[i])
    point = X[i] if X is not None else i
    return CheckReport(bool(worst <= 1.0 + tol), worst, point, details, name, False, extra)


def _pairs(X, n_random, seed):
    n = X.shape[0]
    i = np.arange(n - 1)
    j = i + 1
    if n_random:
        rng = np.random.default_rng(seed)
        ri = rng.integers(0, n, n_random)
        rj = rng.integers(0, n, n_random)
        i, j = np.concatenate([i, ri]), np.concatenate([j, rj])
    keep = i != j
    return i[keep], j[keep]


def _pair_ratios(F, grid, L, exponent, n_random, seed):
    X = grid.points()
    G = F.gradients(X)
    i, j = _pairs(X, n_random, seed)
    dx = np.linalg.norm(X[i] - X[j], axis=1)
    dg = np.linalg.norm(G[i] - G[j], axis=1)
    ok = dx > 0
    ratios = dg[ok] / (L * dx[ok] ** exponent)
    mid = 0.5 * (X[i][ok] + X[j][ok])
    return ratios, mid


def verify_smoothness(F: Objective, grid: GridSpec, L: float, tol=1e-9, n_random=100_000, seed=0):
    """Largest ``|grad F(x) - grad F(y)| / (L |x - y|)`` over adjacent and random pairs."""
    ratios, mid = _pair_ratios(F, grid, L, 1.0, n_random, seed)
    return _report("smoothness", ratios, mid, tol, f"L={L}")


def verify_holder(F: Objective, grid: GridSpec, L: float, beta: float, tol=1e-9, n_random=100_000, seed=0):
    """Hölder continuity of the gradient with exponent ``1/(beta-1)``."""
    if not beta > 1:
        raise ValueError("beta must exceed 1")
    ratios, mid = _pair_ratios(F, grid, L, 1.0 / (beta - 1.0), n_random, seed)
    return _report("holder", ratios, mid, tol, f"L={L}, beta={beta}")


def _dominance_ratios(gaps, norms, alpha, tau):
    zero = (gaps <= GAP_ZERO) & (norms <= GRAD_ZERO)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = gaps / (tau * norms**alpha)
    r = np.where(zero, 0.0, r)
    return np.where(np.isnan(r), np.inf, r)


def _known_min(F):
    if F.min_value is None:
        raise ValueError("objective has no known minimum; dominance check refused")


def verify_grad_dominance(F: Objective, grid: GridSpec, alpha: float, tau: float, tol=1e-9):
    """Largest ``(F(x) - F*) / (tau |grad F(x)|^alpha)`` over the grid."""
    _known_min(F)
    X = grid.points()
    norms = np.linalg.norm(F.gradients(X), axis=1)
    r = _dominance_ratios(F.gaps(X), norms, alpha, tau)
    return _report("grad_dominance", r, X, tol, f"alpha={alpha}, tau={tau}")


def verify_projected_grad_dominance(
    F: Objective, domain: Domain, grid: GridSpec, alpha: float, tau: float, eta_list, tol=1e-9
):
    """As :func:`verify_grad_dominance` with the projected-gradient mapping, maximised over ``eta_list``."""
    _known_min(F)
    eta0 = None if F.constants is None else F.constants.eta0
    etas = [float(e) for e in eta_list]
    if not etas or any(e <= 0 for e in etas):
        raise ValueError("eta_list must hold positive steps")
    if eta0 is not None and any(e > eta0 * (1 + 1e-12) for e in etas):
        raise ValueError(f"every eta must be at most eta0={eta0}")
    X = grid.points()
    gaps = F.gaps(X)
    best = None
    for eta in etas:
        norms = np.linalg.norm(gradient_mappings(F, domain, X, eta), axis=1)
        r = _dominance_ratios(gaps, norms, alpha, tau)
        best = r if best is None else np.maximum(best, r)
    return _report("projected_grad_dominance", best, X, tol, f"alpha={alpha}, tau={tau}, etas={etas}")


def verify_local_grad_dominance(
    F: Objective, domain: Domain, grid: GridSpec, alpha: float, tau: float, epsilon: float, tol=1e-9
):
    """Gradient dominance restricted to grid points with gap at most ``epsilon``."""
    _known_min(F)
    X = grid.points()
    if domain is not None:
        X = X[np.atleast_1d(domain.contains(X))]
    gaps = F.gaps(X)
    keep = gaps <= epsilon
    X, gaps = X[keep], gaps[keep]
    if X.shape[0] == 0:
        return CheckReport(False, math.nan, None, "empty sublevel sample", "local_grad_dominance", True)
    norms = np.linalg.norm(F.gradients(X), axis=1)
    r = _dominance_ratios(gaps, norms, alpha, tau)
    return _report("local_grad_dominance", r, X, tol, f"alpha={alpha}, tau={tau}, eps={epsilon}")


def verify_phi_kl(F: Objective, grid: GridSpec, q: float, tol=1e-9):
    """KL inequality with ``phi(s) = s^(1/q)``: largest ``1 / (phi'(gap) |grad F|)``."""
    _known_min(F)
    X = grid.points()
    gaps = F.gaps(X)
    keep = gaps > 0
    X, gaps = X[keep], gaps[keep]
    norms = np.linalg.norm(F.gradients(X), axis=1)
    dphi = gaps ** (1.0 / q - 1.0) / q
    with np.errstate(divide="ignore"):
        r = 1.0 / (dphi * norms)
    return _report("phi_kl", r, X, tol, f"q={q}")


def kl_per_step(pair: LowerBoundPair, sigma: float, x):
    """Per-query KL divergence between Gaussian oracles on ``f0`` and ``f1`` at ``x``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > pair.R):
        raise ValueError("x must lie in [0, R]")
    d = pair.f0.df(xa) - pair.f1.df(xa)
    out = d * d / (2.0 * sigma**2)
    return float(out) if out.ndim == 0 else out


def variance_recursion(a0, beta0, sigma, L_tilde, R, V0, T):
    """Iterate ``V_{t+1} = (1-a_t)^2 V_t + 2 s^2 a_t^2 + 2 Lt^2 b_t^2 R^2`` with equality.

    Returns ``(V, E)`` with ``V[t]`` for ``t = 0..T``.
    """
    if not 1.0 < a0 < 2.0:
        raise ValueError("a0 must lie in (1, 2)")
    if T < 1:
        raise ValueError("T must be at least 1")
    s = np.arange(1, T + 1, dtype=float)
    a = a0 / s
    b = beta0 / s
    decay = (1.0 - a) ** 2
    forcing = 2.0 * sigma**2 * a**2 + 2.0 * L_tilde**2 * b**2 * R**2
    V = np.empty(T + 1)
    V[0] = V0
    v = float(V0)
    for t in range(T):
        v = decay[t] * v + forcing[t]
        V[t + 1] = v
    E = V0 * (a0 - 1.0) + 2.0 * sigma**2 * a0**3 + 2.0 * L_tilde**2 * a0 * beta0**2 * R**2
    return V, E


def check_variance_bound(V, E, shift=1, tol=0.0):
    """Check ``V[t] <= E / (t + shift)`` for ``t >= 1``."""
    V = np.asarray(V, dtype=float)
    t = np.arange(1, V.shape[0])
    if E <= 0:
        r = np.where(V[1:] > 0, np.inf, 0.0)
    else:
        r = V[1:] * (t + shift) / E
    rep = _report("variance_recursion", r, t, tol, f"E={E}, bound E/(t+{shift})")
    return rep


def check_variance_recursion(a0, beta0, sigma, L_tilde, R, V0, T, shift=1, tol=0.0):
    """Worst case of the momentum-variance recursion against ``E/(t+shift)``."""
    V, E = variance_recursion(a0, beta0, sigma, L_tilde, R, V0, T)
    rep = check_variance_bound(V, E, shift, tol)
    rep.extra["E"] = E
    return rep


def delta_recursion(q0, eta0, beta0, c0, tau, alpha, E, delta0, T):
    """Iterate the gap recursion with equality; negative values are floored at 0.

    Returns ``(delta, clamped)``.
    """
    if not 1.0 <= alpha < 2.0:
        raise ValueError("alpha must lie in [1, 2)")
    s = np.arange(1, T + 1, dtype=float)
    q = q0 * s ** (-2.0 + alpha / 2.0)
    eta = eta0 * s ** (1.0 - alpha / 2.0)
    beta = beta0 / s
    c = c0 * s ** (-1.0 + alpha / 2.0)
    pull = q * eta**2 / (2.0 * tau ** (2.0 / alpha))
    push = 0.5 * (beta / (2.0 * c) + 2.0 * q * eta**2) * E / s
    d = np.empty(T + 1)
    d[0] = delta0
    v = float(delta0)
    clamped = 0
    e = 2.0 / alpha
    for t in range(T):
        v = v - pull[t] * v**e + push[t]
        if v < 0:
            v = 0.0
            clamped += 1
        d[t + 1] = v
    return d, clamped


def _envelope(q0, eta0, beta0, c0, tau, alpha, E, delta0, T):
    # bound on B_T = (T+1)^(alpha/2) delta_T from the bounded-B argument
    c = alpha * 2.0 ** (alpha / 2.0 - 2.0)
    D1 = q0 * eta0**2 / (2.0 * tau ** (2.0 / alpha))
    D2 = E * (beta0 / (4.0 * c0) + q0 * eta0**2)
    top = (alpha / 2.0) ** (alpha / (2.0 - alpha)) * (2.0 - alpha) * c ** (2.0 / (2.0 - alpha))
    N = 2.0 * D2 + top * D1 ** (-alpha / (2.0 - alpha)) / 2.0
    return max(delta0, 2.0 * D2 / c, (2.0 * c / D1) ** (alpha / (2.0 - alpha))) + N / T


def check_delta_recursion(q0, eta0, beta0, c0, tau, alpha, E, delta0, T, slope_tol=0.1):
    """Fit the log-log slope of ``delta_t`` over the last decade of iterations.

    Passes when the slope is at most ``-alpha/2 + slope_tol``. ``worst_ratio``
    is ``1 + slope - (-alpha/2 + slope_tol)``, so it exceeds 1 exactly when
    the slope is too shallow.
    """
    if min(q0, eta0, beta0, c0, tau) <= 0 or E < 0 or delta0 < 0:
        raise ValueError("constants must be positive")
    d, clamped = delta_recursion(q0, eta0, beta0, c0, tau, alpha, E, delta0, T)
    t = np.arange(max(1, T // 10), T + 1)
    target = -alpha / 2.0 + slope_tol
    note = f"clamped {clamped} negative values" if clamped else ""
    B = (t + 1.0) ** (alpha / 2.0) * d[t]
    env = _envelope(q0, eta0, beta0, c0, tau, alpha, E, delta0, T)
    extra = {"envelope": env, "max_scaled_delta": float(B.max())}
    if np.all(d[t] == 0):
        return CheckReport(True, 0.0, None, ("identically zero " + note).strip(), "delta_recursion", False, extra)
    if np.any(d[t] <= 0):
        return CheckReport(True, 0.0, None, ("reached zero " + note).strip(), "delta_recursion", False, extra)
    slope = float(np.polyfit(np.log(t), np.log(d[t]), 1)[0])
    extra["slope"] = slope
    ratio = 1.0 + slope - target
    return CheckReport(ratio <= 1.0, ratio, int(T), f"slope={slope:.4f}, need <= {target:.4f} {note}".strip(),
                       "delta_recursion", False, extra)


def check_poly_bound(A0, A1, A2, alpha, tol=1e-9):
    """Maximum of ``A0 B - A1 B^(2/alpha) + A2`` on ``B >= 0`` against its closed form."""
    if not (A0 > 0 and A1 > 0 and A2 >= 0):
        raise ValueError("need A0, A1 > 0 and A2 >= 0")
    if not 1.0 <= alpha < 2.0:
        raise ValueError("alpha must lie in [1, 2)")
    e = 2.0 / alpha

    def F(B):
        return A0 * B - A1 * np.asarray(B, dtype=float) ** e + A2

    k = alpha / (2.0 - alpha)
    bump = (alpha / 2.0) ** k * (2.0 - alpha) / 2.0 * A0 ** (2.0 / (2.0 - alpha)) * A1 ** (-k)
    bound = A2 + bump
    B_star = (alpha * A0 / (2.0 * A1)) ** k
    zero_from = max(A2 / A0, (2.0 * A0 / A1) ** k)
    B_hi = 2.0 * max(zero_from, B_star)
    grid = np.linspace(0.0, B_hi, 20001)
    with np.errstate(over="ignore", invalid="ignore"):
        res = minimize_scalar(lambda b: -F(b), bounds=(0.0, B_hi), method="bounded",
                              options={"xatol": 1e-12 * max(B_hi, 1.0)})
    found = max(float(F(grid).max()), float(-res.fun))
    # A0 B - A1 B^e factored as A0 B (1 - A1 B^(e-1) / A0) to limit cancellation
    stationary = A0 * B_star * (1.0 - A1 * B_star ** (e - 1.0) / A0)
    ident_err = abs(stationary - bump) / max(abs(bump), 1e-300)
    tail = F(zero_from * np.array([1.0, 1.5, 2.0, 10.0]))
    tail_ok = bool(np.all(tail <= 1e-12 * max(1.0, A2)))
    ratio = found / bound if bound > 0 else (0.0 if found <= 0 else math.inf)
    passed = ratio <= 1.0 + tol and ident_err <= 1e-12 and tail_ok
    return CheckReport(passed, ratio, B_star, f"bound={bound}, grid max={found}", "poly_bound", False,
                       {"identity_error": ident_err, "bound": bound, "max": found, "tail_ok": tail_ok})


def verify_distance_bounds(F: Objective, domain: Domain, grid: GridSpec, alpha, tau, L, tol=1e-9):
    """Distance to the minimizer against the gap-based bound and the global radius bound."""
    if not 1.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (1, 2)")
    if F.minimizer is None:
        raise ValueError("objective has no known minimizer")
    X = grid.points()
    dist = np.linalg.norm(X - F.minimizer, axis=1)
    local = distance_bound(alpha, tau, F.gaps(X))
    radius = r0_bound(alpha, L, tau)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_local = np.where(dist == 0, 0.0, dist / local)
    r_local = np.where(np.isnan(r_local), np.inf, r_local)
    r = np.maximum(r_local, dist / radius)
    return _report("distance_bounds", r, X, tol, f"R0={radius}")
