"""Proj-SGD, Prox-SGD and Proj-STORM with their step and batch schedules.

Each optimizer returns a :class:`Trajectory` holding every iterate, the
exact optimality gap when the objective's minimum is known, the cumulative
number of oracle queries and the squared error of the gradient estimate.
Schedules depend only on the iteration counter, never on the horizon ``T``,
so a trajectory of length ``T`` is a prefix of any longer run with the same
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericFailure, PreconditionError
from .geometry import Domain, as_vector, estimated_gradient_mapping
from .oracles import Oracle, minibatch_mean

__all__ = [
    "Schedule",
    "StormState",
    "Trajectory",
    "batch_size",
    "merged_storm_step",
    "prox_sgd",
    "proj_sgd",
    "proj_storm",
    "schedule_eval",
    "storm_step",
]


def schedule_eval(kind: str, base: float, exponent: float, t: int) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if kind == "constant":
        return float(base)
    if kind == "power":
        return float(base * (t + 1.0) ** exponent)
    raise ValueError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class Schedule:
    kind: str
    base: float
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "power"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.base > 0:
            raise ValueError("schedule base must be positive")

    def __call__(self, t: int) -> float:
        return schedule_eval(self.kind, self.base, self.exponent, t)


def batch_size(b0: float, alpha: float, t: int) -> int:
    """Proj-SGD batch ``ceil(b0 * t^(2/(2-alpha)))`` for step ``t >= 1``."""
    return math.ceil(b0 * max(t, 1) ** (2.0 / (2.0 - alpha)))


@dataclass
class Trajectory:
    """Per-iteration record; row ``i`` is iteration ``t[i]``."""

    t: np.ndarray
    x: np.ndarray
    gap: np.ndarray | None
    queries: np.ndarray
    grad_error_sq: np.ndarray | None
    notes: list = field(default_factory=list)

    def __len__(self):
        return self.t.shape[0]

    def record(self, i: int) -> dict:
        return {
            "t": int(self.t[i]),
            "x": self.x[i],
            "gap": None if self.gap is None else float(self.gap[i]),
            "queries_cumulative": int(self.queries[i]),
            "grad_error_sq": None if self.grad_error_sq is None else float(self.grad_error_sq[i]),
        }

    def at(self, T: int) -> "Trajectory":
        """The prefix ending at iteration ``T``."""
        n = int(T) + 1
        return Trajectory(
            self.t[:n],
            self.x[:n],
            None if self.gap is None else self.gap[:n],
            self.queries[:n],
            None if self.grad_error_sq is None else self.grad_error_sq[:n],
            list(self.notes),
        )


class _Recorder:
    def __init__(self, objective, T, dim):
        self.objective = objective
        self.known_min = objective.min_value is not None
        self.x = np.empty((T + 1, dim))
        self.queries = np.zeros(T + 1, dtype=np.int64)
        # gradient estimate of each row and the point it estimates
        self.g = np.full((T + 1, dim), np.nan)
        self.at_x = np.zeros((T + 1, dim))
        self.n = 0
        self.notes = []

    def add(self, x, queries, g=None, at=None):
        self.x[self.n] = x
        self.queries[self.n] = queries
        if g is not None:
            self.g[self.n] = g
            self.at_x[self.n] = at
        self.n += 1

    def build(self) -> Trajectory:
        n = self.n
        x = self.x[:n]
        gap = self.objective.gaps(x) if self.known_min else None
        d = self.g[:n] - self.objective.gradients(self.at_x[:n])
        err = np.sum(d * d, axis=1)
        return Trajectory(np.arange(n), x, gap, self.queries[:n], err, self.notes)


def _check_start(domain, x0):
    x0 = as_vector(x0, domain.dim)
    if not domain.contains(x0):
        raise PreconditionError("x0 must lie in the domain")
    return x0


def _check_sgd_step(oracle, eta0, enforce, rec):
    cert = oracle.objective.constants
    L = None if cert is None else cert.L
    if L is None:
        rec.notes.append("smoothness constant unknown; step size unchecked")
    elif enforce and eta0 > 1.0 / (2.0 * L) * (1 + 1e-12):
        raise PreconditionError(f"eta0={eta0} exceeds 1/(2L)={1.0 / (2.0 * L)}")


def _sgd(oracle, step, x0, T, eta0, b0, alpha, enforce):
    if T < 0:
        raise ValueError("T must be nonnegative")
    if not eta0 > 0 or not b0 > 0:
        raise ValueError("eta0 and b0 must be positive")
    if not 1.0 <= alpha < 2.0:
        raise ValueError("alpha must lie in [1, 2)")
    F = oracle.objective
    rec = _Recorder(F, T, oracle.dim)
    _check_sgd_step(oracle, eta0, enforce, rec)
    x = x0
    queries = 0
    rec.add(x, queries)
    for t in range(1, T + 1):
        b = batch_size(b0, alpha, t)
        g = minibatch_mean(oracle, x, b)
        x_prev = x
        x = step(eta0, x - eta0 * g)
        queries += b
        if not np.all(np.isfinite(x)):
            raise NumericFailure(f"non-finite iterate at t={t}", rec.build())
        rec.add(x, queries, g, x_prev)
    return rec.build()


def proj_sgd(
    oracle: Oracle,
    domain: Domain,
    x0,
    T: int,
    eta0: float,
    b0: float,
    alpha: float,
    enforce: bool = True,
) -> Trajectory:
    """Projected SGD with constant step and batch ``ceil(b0 t^(2/(2-alpha)))``.

    ``grad_error_sq[t]`` is the error of the minibatch that produced ``x_t``.
    """
    x0 = _check_start(domain, x0)
    return _sgd(oracle, lambda eta, v: domain.project(v), x0, T, eta0, b0, alpha, enforce)


def prox_sgd(
    oracle: Oracle,
    prox_h: Callable[[float, np.ndarray], np.ndarray],
    x0,
    T: int,
    eta0: float,
    b0: float,
    alpha: float,
    enforce: bool = True,
) -> Trajectory:
    """Proximal SGD, ``x <- prox_h(eta0, x - eta0 g)``."""
    domain = getattr(prox_h, "domain", None)
    x0 = _check_start(domain, x0) if domain is not None else as_vector(x0, oracle.dim)
    return _sgd(oracle, prox_h, x0, T, eta0, b0, alpha, enforce)


@dataclass
class StormState:
    x: np.ndarray
    g: np.ndarray
    t: int = 0


def storm_step(domain: Domain, x, g, eta, beta):
    """Project a gradient step, then move a fraction ``beta`` towards it."""
    x_hat = domain.project(x - eta * g)
    return (1.0 - beta) * x + beta * x_hat


def merged_storm_step(domain: Domain, x, g, eta, beta):
    """The same step written with the estimated gradient mapping."""
    return x - eta * beta * estimated_gradient_mapping(g, domain, x, eta)


def proj_storm(
    oracle: Oracle,
    domain: Domain,
    x0,
    T: int,
    eta0: float,
    a0: float,
    beta0: float,
    alpha: float,
    g0_batch: int = 1,
    enforce: bool = True,
    on_step: Callable[[StormState, np.ndarray, float, float], None] | None = None,
) -> Trajectory:
    """Projected stochastic recursive momentum.

    Schedules: ``eta_t = eta0 (t+1)^(1-alpha/2)``, ``a_t = min(1, a0/(t+1))``
    and ``beta_t = min(1, beta0/(t+1))``. The two samples in the momentum
    correction come from one shared-noise batch at ``{x_t, x_{t+1}}``.
    ``on_step(state, x_next, eta_t, beta_t)`` is called before each update.
    """
    if not 1.0 < a0 < 2.0:
        raise ValueError("a0 must lie in (1, 2)")
    if not eta0 > 0 or not beta0 > 0:
        raise ValueError("eta0 and beta0 must be positive")
    if not 1.0 <= alpha <= 2.0:
        raise ValueError("alpha must lie in [1, 2]")
    if T < 0 or g0_batch < 1:
        raise ValueError("T must be nonnegative and g0_batch positive")
    x = _check_start(domain, x0)
    F = oracle.objective
    rec = _Recorder(F, T, oracle.dim)
    L = None if F.constants is None else F.constants.L
    if L is None:
        rec.notes.append("smoothness constant unknown; beta0*eta0 unchecked")
    elif enforce and beta0 * eta0 > 1.0 / L * (1 + 1e-12):
        raise PreconditionError(f"beta0*eta0={beta0 * eta0} exceeds 1/L={1.0 / L}")

    g = minibatch_mean(oracle, x, g0_batch)
    queries = g0_batch
    rec.add(x, queries, g, x)
    state = StormState(x, g, 0)
    for t in range(T):
        eta = eta0 * (t + 1.0) ** (1.0 - alpha / 2.0)
        a = min(1.0, a0 / (t + 1.0))
        beta = min(1.0, beta0 / (t + 1.0))
        x_next = storm_step(domain, x, g, eta, beta)
        if on_step is not None:
            on_step(state, x_next, eta, beta)
        pair = oracle.query_batch(np.stack([x, x_next])).gradients
        g = (1.0 - a) * (g - pair[0]) + pair[1]
        x = x_next
        queries += 2
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(g))):
            raise NumericFailure(f"non-finite iterate at t={t + 1}", rec.build())
        rec.add(x, queries, g, x)
        state = StormState(x, g, t + 1)
    return rec.build()

