"""Objective functions with exactly known minima and dominance constants.

Every objective evaluates stacks of points, ``values(X)`` and
``gradients(X)`` with ``X`` of shape ``(n, d)``, and single points through
``value(x)`` / ``gradient(x)``. ``gaps(X)`` returns ``F(x) - F*`` computed
from a closed form wherever subtracting the minimum would cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificateError, InfeasiblePrecisionError
from .geometry import AllSpace, Ball, Box, Domain, Interval, as_vector

__all__ = [
    "DominanceCertificate",
    "FosterInstance",
    "LowerBoundPair",
    "NbsInstance",
    "Objective",
    "PhiKlInstance",
    "PowerObjective",
    "choose_C",
    "distance_bound",
    "holder_gap_bound",
    "lower_bound_smoothness",
    "make_foster_instance",
    "make_lower_bound_pair",
    "make_nbs_instance",
    "make_phi_kl_instance",
    "make_power_instance",
    "nbs_parameters",
    "r0_bound",
    "theoretical_constants",
]


@dataclass(frozen=True)
class DominanceCertificate:
    """Constants an objective is known to satisfy.

    ``None`` marks a constant that is unset or unbounded.
    """

    alpha: float
    tau: float
    L: float | None
    eta0: float | None = None
    L_tilde: float | None = None
    G_bound: float | None = None

    def __post_init__(self):
        if not 1.0 <= self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in [1, 2], got {self.alpha}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.L is not None and not self.L > 0:
            raise ValueError("L must be positive")


class Objective:
    """Base class. Subclasses implement ``values`` and ``gradients``."""

    dim: int = 1
    minimizer: np.ndarray | None = None
    min_value: float | None = None
    constants: DominanceCertificate | None = None
    domain: Domain | None = None

    def _stack(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim < 2:
            X = X.reshape(-1, self.dim)
        if X.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {X.shape[-1]}")
        return X

    def values(self, X) -> np.ndarray:
        raise NotImplementedError

    def gradients(self, X) -> np.ndarray:
        raise NotImplementedError

    def gaps(self, X) -> np.ndarray:
        if self.min_value is None:
            raise ValueError("objective has no known minimum")
        return self.values(X) - self.min_value

    def value(self, x) -> float:
        return float(self.values(as_vector(x, self.dim)[None, :])[0])

    def gradient(self, x) -> np.ndarray:
        return self.gradients(as_vector(x, self.dim)[None, :])[0]

    def gap(self, x) -> float:
        return float(self.gaps(as_vector(x, self.dim)[None, :])[0])


class _ScalarObjective(Objective):
    """One-dimensional objective written in terms of flat arrays."""

    dim = 1

    def _f(self, x):
        raise NotImplementedError

    def _df(self, x):
        raise NotImplementedError

    def _gap(self, x):
        return self._f(x) - self.min_value

    def values(self, X):
        return self._f(self._stack(X)[:, 0])

    def gradients(self, X):
        return self._df(self._stack(X)[:, 0])[:, None]

    def gaps(self, X):
        if self.min_value is None:
            raise ValueError("objective has no known minimum")
        return self._gap(self._stack(X)[:, 0])

    # flat-array access used by the 1-D verifiers
    def f(self, x):
        return self._f(np.asarray(x, dtype=float))

    def df(self, x):
        return self._df(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# lower-bound pair


class _F0(_ScalarObjective):
    def __init__(self, alpha, C, R):
        self.alpha, self.C, self.R = alpha, C, R
        self.p = 1.0 / (alpha - 1.0)
        self.q = alpha / (alpha - 1.0)
        self.D = -C * R ** self.q / (alpha - 1.0)
        self.minimizer = np.zeros(1)
        self.min_value = 0.0

    def _f(self, x):
        C, R, p, q = self.C, self.R, self.p, self.q
        ax = np.abs(x)
        inner = C * np.minimum(ax, R) ** q
        outer = C * q * R**p * ax + self.D
        return np.where(ax <= R, inner, outer)

    def _df(self, x):
        C, R, p, q = self.C, self.R, self.p, self.q
        return C * q * np.minimum(np.abs(x), R) ** p * np.sign(x)

    def _gap(self, x):
        return self._f(x)


class _F1(_ScalarObjective):
    def __init__(self, f0: _F0, rho):
        self.f0, self.rho = f0, rho
        self.alpha, self.C, self.R = f0.alpha, f0.C, f0.R
        p, q, C = f0.p, f0.q, f0.C
        self.scale = 2.0**p * C
        self.minimizer = np.array([rho])
        self.min_value = self.scale * rho**q

    def _f(self, x):
        p, q, rho, C = self.f0.p, self.f0.q, self.rho, self.C
        left = -q * self.scale * rho**p * x + 2.0**q * C * rho**q
        mid = self.scale * (np.abs(x - rho) ** q + rho**q)
        return np.where(x <= 0, left, np.where(x <= 2 * rho, mid, self.f0._f(x)))

    def _df(self, x):
        p, q, rho = self.f0.p, self.f0.q, self.rho
        u = np.clip(x, 0.0, 2 * rho) - rho
        mid = self.scale * q * np.abs(u) ** p * np.sign(u)
        return np.where(x <= 2 * rho, mid, self.f0._df(x))

    def _gap(self, x):
        q, rho = self.f0.q, self.rho
        mid = self.scale * np.abs(np.clip(x, 0.0, 2 * rho) - rho) ** q
        return np.where((x >= 0) & (x <= 2 * rho), mid, self._f(x) - self.min_value)


@dataclass(frozen=True)
class LowerBoundPair:
    f0: Objective
    f1: Objective
    C: float
    rho: float
    R: float
    alpha: float

    @property
    def domain(self) -> Interval:
        return Interval(0.0, self.R)


def lower_bound_smoothness(alpha: float, C: float, R: float) -> float:
    """Closed-form smoothness constant ``C a/(a-1)^2 R^((2-a)/(a-1))`` of the pair."""
    return C * alpha / (alpha - 1.0) ** 2 * R ** ((2.0 - alpha) / (alpha - 1.0))


def _pair_constants(alpha, C, R, rho) -> DominanceCertificate:
    p = 1.0 / (alpha - 1.0)
    q = alpha / (alpha - 1.0)
    L0 = lower_bound_smoothness(alpha, C, R)
    # the shifted bowl of f1 has curvature 2^p C q p rho^(p-1) at its ends,
    # which exceeds L0 when rho is not small compared with R
    L1 = 2.0**p * C * q * p * rho ** (p - 1.0)
    tau = C ** (1.0 - alpha) * ((alpha - 1.0) / alpha) ** alpha
    if R < 1.0:
        tau = max(tau, C)
    eta0 = min(
        2.0**-p / C * ((alpha - 1.0) / alpha) * rho ** (-(2.0 - alpha) / (alpha - 1.0)),
        (alpha - 1.0) * 2.0 * rho / (alpha * C * R**p),
        (alpha - 1.0) / (alpha * C * R**p),
        1.0,
    )
    return DominanceCertificate(alpha=alpha, tau=tau, L=max(L0, L1), eta0=eta0)


def make_lower_bound_pair(alpha: float, C: float, R: float, rho: float) -> LowerBoundPair:
    """Build the pair ``f0`` (minimum at 0) and ``f1`` (minimum at ``rho``).

    Both agree on ``[2 rho, R]``. ``C`` may equal 1.
    """
    if not 1.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (1, 2); use FosterInstance for alpha = 1")
    if not 0.0 < C <= 1.0:
        raise ValueError("C must lie in (0, 1]")
    if not R > 0:
        raise ValueError("R must be positive")
    if not 0.0 < rho <= 0.5 or rho > R / 2:
        raise ValueError("rho must lie in (0, 1/2] and not exceed R/2")
    f0 = _F0(alpha, C, R)
    f1 = _F1(f0, rho)
    cert = _pair_constants(alpha, C, R, rho)
    dom = Interval(0.0, R)
    for f in (f0, f1):
        f.constants = cert
        f.domain = dom
    return LowerBoundPair(f0=f0, f1=f1, C=C, rho=rho, R=R, alpha=alpha)


def theoretical_constants(pair: LowerBoundPair) -> DominanceCertificate:
    """Certificate shared by ``f0`` and ``f1`` on ``[0, R]``."""
    return _pair_constants(pair.alpha, pair.C, pair.R, pair.rho)


def choose_C(alpha: float, tau: float) -> float:
    """Largest ``C`` for which the pair is ``(alpha, tau)``-dominated."""
    return tau ** (-1.0 / (alpha - 1.0)) * ((alpha - 1.0) / alpha) ** (alpha / (alpha - 1.0))


# ---------------------------------------------------------------------------
# noisy-binary-search objectives


class _SearchObjective(_ScalarObjective):
    """Piecewise objective on ``[0, R]`` hiding its minimum in interval ``j_star``.

    The bowl inside the interval is ``|u|^q`` with ``u`` the offset from the
    interval midpoint; outside, the slope is ``-pG`` to the left and ``pG``
    to the right.
    """

    def __init__(self, q, p, G, R, N, j_star):
        if not 0.0 < p < 0.5:
            raise ValueError("p must lie in (0, 1/2)")
        if not G > 0 or not R > 0:
            raise ValueError("G and R must be positive")
        N = int(N)
        if N < 2:
            raise ValueError("N must be at least 2")
        j_star = int(j_star)
        if not 1 <= j_star <= N - 1:
            raise ValueError(f"j_star must lie in [1, N-1], got {j_star}")
        self.q, self.s = float(q), float(q) - 1.0
        self.p, self.G, self.R, self.N, self.j_star = float(p), float(G), float(R), N, j_star
        self.h = R / (2.0 * N)
        self.domain = Interval(0.0, R)
        self.minimizer = np.array([self.breakpoint(j_star) + self.h])
        self.min_value = -self.p * self.G * self.h / self.q

    def breakpoint(self, j):
        return (np.asarray(j) - 1) * self.R / self.N

    def interval_index(self, x):
        """1-based index j with ``x`` in ``[a_j, a_{j+1})``; ``x = R`` maps to N."""
        j = np.floor(np.asarray(x, dtype=float) * self.N / self.R).astype(np.int64) + 1
        return np.clip(j, 1, self.N)

    def g(self, j, x):
        u = np.asarray(x, dtype=float) - self.h - self.breakpoint(j)
        return np.abs(u) ** self.s * np.sign(u) / self.h**self.s

    def coin_mean(self, k):
        """``E[Z_k]`` for the coin at breakpoint ``k``."""
        return np.where(np.asarray(k) > self.j_star, self.p, -self.p)

    def _u(self, x):
        return x - self.minimizer[0]

    def _df(self, x):
        pG = self.p * self.G
        lo, hi = self.breakpoint(self.j_star), self.breakpoint(self.j_star + 1)
        mid = pG * self.g(self.j_star, np.clip(x, lo, hi))
        return np.where(x < lo, -pG, np.where(x >= hi, pG, mid))

    def _gap(self, x):
        pG = self.p * self.G
        u = self._u(x)
        inside = np.abs(u) < self.h
        bowl = pG * np.abs(np.clip(u, -self.h, self.h)) ** self.q / (self.q * self.h**self.s)
        edge = pG * (np.abs(u) - self.h) + pG * self.h / self.q
        return np.where(inside, bowl, edge)

    def _f(self, x):
        return self._gap(x) + self.min_value


class NbsInstance(_SearchObjective):
    """Hard instance of the noisy-binary-search reduction at exponent ``alpha``."""

    def __init__(self, alpha, p, G, R, N, j_star):
        if not 1.0 < alpha <= 2.0:
            raise ValueError("alpha must lie in (1, 2]")
        self.alpha = float(alpha)
        super().__init__(alpha / (alpha - 1.0), p, G, R, N, j_star)
        pG = self.p * self.G
        self.constants = DominanceCertificate(
            alpha=self.alpha,
            tau=self.local_tau(),
            L=pG * self.s / self.h,
            G_bound=self.G,
        )

    def local_tau(self) -> float:
        a = self.alpha
        return (a - 1.0) / a * self.h * (self.p * self.G) ** (1.0 - a)


def make_nbs_instance(alpha, p, G, R, N, j_star) -> NbsInstance:
    return NbsInstance(alpha, p, G, R, N, j_star)


def nbs_parameters(epsilon: float, alpha: float, tau: float, G: float, R: float) -> tuple[float, int]:
    """Bias ``p`` and interval count ``N`` for target accuracy ``epsilon``.

    ``N`` is rounded up (floor 2). After rounding the local dominance
    condition is rechecked, and so is the separation ``pG(a-1)R/(2aN) > eps``
    that keeps every point outside the hidden interval worse than ``eps``.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (1, 2]")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    limit = min(((alpha - 1.0) / alpha) ** alpha * tau, 1.0)
    if epsilon > limit * (1.0 + 1e-12):
        raise InfeasiblePrecisionError(f"epsilon={epsilon} exceeds the admissible {limit}")
    p = 2.0 * epsilon ** (1.0 / alpha) / (G * tau ** (1.0 / alpha))
    if p >= 0.5:
        raise InfeasiblePrecisionError(f"p={p} is not below 1/2; epsilon too large for G, tau")
    n_real = (alpha - 1.0) * R / (2.0 * alpha * epsilon ** ((alpha - 1.0) / alpha) * tau ** (1.0 / alpha))
    N = max(2, math.ceil(n_real - 1e-9))
    pG = p * G
    if tau < (alpha - 1.0) / alpha * R / (2.0 * N) * pG ** (1.0 - alpha) * (1.0 - 1e-12):
        raise InfeasiblePrecisionError("local dominance fails after rounding N")
    if not pG * (alpha - 1.0) * R / (2.0 * alpha * N) > epsilon:
        raise InfeasiblePrecisionError("separation fails after rounding N")
    return p, N


class PhiKlInstance(_SearchObjective):
    """Search objective with bowl ``psi(s) = s^q`` normalised by ``psi'(R/2N)``."""

    def __init__(self, q, p, G, R, N, j_star, check=True):
        if not q > 1:
            raise ValueError("q must exceed 1")
        super().__init__(q, p, G, R, N, j_star)
        if check and self.p * self.G < self.psi_prime(self.h):
            raise CertificateError("pG must be at least psi'(R/2N)")
        self.alpha = q / (q - 1.0) if q >= 2 else None
        self.constants = None

    def psi(self, s):
        return np.asarray(s, dtype=float) ** self.q

    def psi_prime(self, s):
        return self.q * np.asarray(s, dtype=float) ** (self.q - 1.0)


def make_phi_kl_instance(q, p, G, R, N, j_star, check=True) -> PhiKlInstance:
    return PhiKlInstance(q, p, G, R, N, j_star, check=check)


# ---------------------------------------------------------------------------
# Foster quadratic


class FosterInstance(Objective):
    """``(sigma/m) sum_i <x, z_i> + (b/2)||x||^2`` with orthonormal ``z_i``."""

    def __init__(self, sigma, R, m, d, basis_seed=0):
        if d < m or m < 1:
            raise ValueError("need d >= m >= 1")
        if not sigma > 0 or not R > 0:
            raise ValueError("sigma and R must be positive")
        self.sigma, self.R, self.m, self.dim = float(sigma), float(R), int(m), int(d)
        self.b = 2.0 * sigma / (R * math.sqrt(m))
        rng = np.random.Generator(np.random.Philox(basis_seed))
        Q, _ = np.linalg.qr(rng.standard_normal((d, m)))
        self.z_basis = np.ascontiguousarray(Q.T)
        gram = self.z_basis @ self.z_basis.T
        if not np.allclose(gram, np.eye(m), atol=1e-12, rtol=0):
            raise ArithmeticError("basis is not orthonormal")
        self.z_sum = self.z_basis.sum(axis=0)
        self.minimizer = -self.sigma / (self.b * self.m) * self.z_sum
        self.min_value = -self.sigma**2 / (2.0 * self.b * self.m)
        self.domain = Ball(np.zeros(d), R)
        self.constants = DominanceCertificate(
            alpha=2.0, tau=1.0 / (2.0 * self.b), L=self.b, eta0=1.0 / self.b, L_tilde=self.b
        )

    def values(self, X):
        X = self._stack(X)
        return self.sigma / self.m * (X @ self.z_sum) + 0.5 * self.b * np.sum(X * X, axis=-1)

    def gradients(self, X):
        X = self._stack(X)
        return self.sigma / self.m * self.z_sum + self.b * X

    def gaps(self, X):
        D = self._stack(X) - self.minimizer
        return 0.5 * self.b * np.sum(D * D, axis=-1)


def make_foster_instance(sigma, R, m, d, basis_seed=0) -> FosterInstance:
    return FosterInstance(sigma, R, m, d, basis_seed)


# ---------------------------------------------------------------------------
# power objective


def _farthest(domain: Domain, x):
    if isinstance(domain, Interval):
        return max(abs(domain.hi - x[0]), abs(x[0] - domain.lo))
    if isinstance(domain, Box):
        return float(np.linalg.norm(np.maximum(np.abs(domain.hi - x), np.abs(x - domain.lo))))
    if isinstance(domain, Ball):
        return float(np.linalg.norm(domain.center - x)) + domain.radius
    return math.inf


class PowerObjective(Objective):
    """``lam * ||x - x_star||^k``. A certificate is attached when ``k >= 2``."""

    def __init__(self, exponent, lam, x_star, domain: Domain | None = None):
        if not exponent > 1:
            raise ValueError("exponent must exceed 1")
        if not lam > 0:
            raise ValueError("lam must be positive")
        self.k, self.lam = float(exponent), float(lam)
        self.minimizer = as_vector(x_star)
        self.dim = self.minimizer.shape[0]
        self.domain = domain if domain is not None else AllSpace(self.dim)
        if self.domain.dim != self.dim:
            raise ValueError("x_star and domain differ in dimension")
        self.min_value = 0.0
        if self.k >= 2.0:
            a = self.k / (self.k - 1.0)
            reach = _farthest(self.domain, self.minimizer)
            if self.k == 2.0:
                L = 2.0 * self.lam
            elif math.isfinite(reach):
                L = self.lam * self.k * (self.k - 1.0) * reach ** (self.k - 2.0)
            else:
                L = None
            tau = self.lam ** (1.0 - a) * self.k ** (-a)
            self.constants = DominanceCertificate(alpha=a, tau=tau, L=L)

    def _r(self, X):
        D = self._stack(X) - self.minimizer
        return D, np.linalg.norm(D, axis=-1)

    def values(self, X):
        _, r = self._r(X)
        return self.lam * r**self.k

    def gaps(self, X):
        return self.values(X)

    def gradients(self, X):
        D, r = self._r(X)
        safe = np.where(r > 0, r, 1.0)
        coef = np.where(r > 0, self.lam * self.k * safe ** (self.k - 2.0), 0.0)
        return coef[:, None] * D


def make_power_instance(alpha, lam, x_star, domain: Domain | None = None) -> PowerObjective:
    """``lam * ||x - x_star||^(alpha/(alpha-1))`` for ``alpha`` in (1, 2]."""
    if not 1.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (1, 2]")
    x_star = as_vector(x_star)
    if domain is not None and not domain.contains(x_star, 0.0):
        raise ValueError("x_star must lie in the domain")
    return PowerObjective(alpha / (alpha - 1.0), lam, x_star, domain)


# ---------------------------------------------------------------------------
# closed-form bounds


def r0_bound(alpha: float, L: float, tau: float) -> float:
    """Radius containing every point of a smooth dominated objective's domain."""
    if not 1.0 < alpha < 2.0:
        raise ValueError("alpha must lie in (1, 2)")
    return alpha / (alpha - 1.0) * (2.0 * L) ** ((alpha - 1.0) / (2.0 - alpha)) * tau ** (1.0 / (2.0 - alpha))


def holder_gap_bound(alpha: float, beta: float, L: float, tau: float) -> float:
    """Largest possible gap under ``(alpha, tau)`` dominance and ``(L, beta)`` Hölder continuity."""
    if not 1.0 <= alpha < beta:
        raise ValueError("need 1 <= alpha < beta")
    if tau == 0:
        return 0.0
    e = beta - alpha
    return beta ** (alpha / e) * L ** (alpha * (beta - 1.0) / e) * tau ** (beta / e)


def distance_bound(alpha: float, tau: float, gap: float) -> float:
    """Upper bound on the distance to the minimizer set given the gap."""
    if not 1.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (1, 2]")
    gap = np.asarray(gap, dtype=float)
    if np.any(gap < 0):
        raise ValueError("gap must be nonnegative")
    out = alpha / (alpha - 1.0) * tau ** (1.0 / alpha) * gap ** ((alpha - 1.0) / alpha)
    return float(out) if out.ndim == 0 else out
