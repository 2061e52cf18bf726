"""Seeded stochastic first-order oracles.

A batch query evaluates the stochastic gradient at several points under one
shared realisation of the noise. ``sample(x, n)`` instead draws ``n``
independent realisations at a single point. Both advance ``query_count`` by
the number of gradients returned.

Randomness comes from numpy's counter-based Philox generator, so seeds can
be split into independent streams with ``SeedSequence.spawn``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import as_vector
from .instances import FosterInstance, Objective, _SearchObjective

__all__ = [
    "PRNG_ALGORITHM",
    "BatchResponse",
    "ExactGradient",
    "FosterUniform",
    "GaussianAdditive",
    "NbsBernoulli",
    "Oracle",
    "make_rng",
    "minibatch_mean",
    "oracle_statistics",
    "query_batch",
]

PRNG_ALGORITHM = "numpy.random.Philox (Philox4x64-10, SeedSequence seeding)"


def make_rng(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class BatchResponse:
    gradients: np.ndarray
    shared_seed_tag: int


class Oracle:
    """Base oracle. Subclasses draw noise with ``_draw(n)`` and apply it with ``_apply``."""

    def __init__(self, objective: Objective, seed=0):
        self.objective = objective
        self.dim = objective.dim
        self.seed = seed
        self.rng = make_rng(seed)
        self.query_count = 0
        self._tags = itertools.count()

    @property
    def sigma(self) -> float:
        return 0.0

    def _draw(self, n: int):
        return None

    def _apply(self, noise, X) -> np.ndarray:
        """Stochastic gradients at rows of ``X`` for noise realisations ``noise``.

        ``noise`` holds either one realisation shared by all rows or one per row.
        """
        raise NotImplementedError

    def _points(self, points):
        X = np.asarray(points, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.dim) if self.dim == 1 else X[None, :]
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: expected points of size {self.dim}")
        if not np.all(np.isfinite(X)):
            raise ValueError("query points must be finite")
        return X

    def query_batch(self, points) -> BatchResponse:
        X = self._points(points)
        grads = self._apply(self._draw(1), X)
        self.query_count += X.shape[0]
        return BatchResponse(grads, next(self._tags))

    def query(self, x) -> np.ndarray:
        return self.query_batch(as_vector(x, self.dim)[None, :]).gradients[0]

    def sample(self, x, n: int) -> np.ndarray:
        """``n`` independent stochastic gradients at ``x``, shape ``(n, d)``."""
        if n < 1:
            raise ValueError("n must be at least 1")
        x = as_vector(x, self.dim)
        grads = self._apply(self._draw(n), np.broadcast_to(x, (n, self.dim)))
        self.query_count += n
        return grads


class ExactGradient(Oracle):
    def _apply(self, noise, X):
        return self.objective.gradients(X)


class GaussianAdditive(Oracle):
    """Exact gradient plus ``sigma/sqrt(d)`` times a standard normal vector."""

    def __init__(self, objective, sigma, seed=0):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        super().__init__(objective, seed)
        self._sigma = float(sigma)

    @property
    def sigma(self):
        return self._sigma

    def _draw(self, n):
        return self.rng.standard_normal((n, self.dim)) * (self._sigma / math.sqrt(self.dim))

    def _apply(self, noise, X):
        return self.objective.gradients(X) + noise


class FosterUniform(Oracle):
    """``sigma z_i + b x`` with ``i`` uniform over the basis."""

    def __init__(self, instance: FosterInstance, seed=0):
        super().__init__(instance, seed)

    @property
    def sigma(self):
        inst = self.objective
        return inst.sigma * math.sqrt(1.0 - 1.0 / inst.m)

    def _draw(self, n):
        return self.rng.integers(0, self.objective.m, size=n)

    def _apply(self, noise, X):
        inst = self.objective
        return inst.sigma * inst.z_basis[noise] + inst.b * X


class NbsBernoulli(Oracle):
    """Stochastic derivative built from the two coins flanking the query point.

    Coin ``k`` is ``+1`` with probability ``(1 + E[Z_k]) / 2`` where
    ``E[Z_k] = p`` right of the hidden interval and ``-p`` otherwise. The
    response at ``x`` in interval ``j`` is
    ``G/2 (1 - g_j(x)) Z_j + G/2 (1 + g_j(x)) Z_{j+1}``, whose mean is the
    exact derivative and whose magnitude never exceeds ``G``.
    """

    def __init__(self, instance: _SearchObjective, seed=0):
        super().__init__(instance, seed)

    @property
    def sigma(self):
        return self.objective.G

    def _draw(self, n):
        return n

    def _apply(self, n, X):
        inst = self.objective
        x = X[:, 0]
        j = inst.interval_index(x)
        if n == 1 and x.size > 1:
            # one realisation for the whole batch: each needed coin once
            needed = np.unique(np.concatenate([j, j + 1]))
            flips = self.rng.random(needed.size) < 0.5 * (1.0 + inst.coin_mean(needed))
            coin = dict(zip(needed.tolist(), np.where(flips, 1.0, -1.0)))
            zj = np.array([coin[k] for k in j.tolist()])
            zk = np.array([coin[k] for k in (j + 1).tolist()])
        else:
            u = self.rng.random((x.size, 2))
            zj = np.where(u[:, 0] < 0.5 * (1.0 + inst.coin_mean(j)), 1.0, -1.0)
            zk = np.where(u[:, 1] < 0.5 * (1.0 + inst.coin_mean(j + 1)), 1.0, -1.0)
        g = inst.g(j, x)
        half = 0.5 * inst.G
        return (half * (1.0 - g) * zj + half * (1.0 + g) * zk)[:, None]


def query_batch(oracle: Oracle, points) -> BatchResponse:
    return oracle.query_batch(points)


def minibatch_mean(oracle: Oracle, x, b: int) -> np.ndarray:
    """Mean of ``b`` independent single-point queries at ``x``."""
    if b < 1:
        raise ValueError("batch size must be at least 1")
    return oracle.sample(x, int(b)).mean(axis=0)


def oracle_statistics(oracle: Oracle, x, n: int) -> dict:
    """Empirical bias, variance and largest norm over ``n`` fresh queries."""
    if n < 2:
        raise ValueError("n must be at least 2")
    G = oracle.sample(x, n)
    true = oracle.objective.gradient(x)
    err = G - true
    return {
        "mean_error": float(np.linalg.norm(err.mean(axis=0))),
        "var_estimate": float(np.mean(np.sum(err * err, axis=1))),
        "max_norm": float(np.max(np.linalg.norm(G, axis=1))),
    }
