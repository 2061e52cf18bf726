"""Feasible sets, projections, proximal maps and gradient mappings.

Points are plain float64 numpy arrays of shape ``(d,)``. Most routines also
accept a stack of points of shape ``(n, d)`` so that verifiers can sweep
whole grids in one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PreconditionError

__all__ = [
    "AllSpace",
    "Ball",
    "Box",
    "Domain",
    "Interval",
    "as_vector",
    "estimated_gradient_mapping",
    "gradient_mappings",
    "indicator_prox",
    "l1_prox",
    "project",
    "projected_gradient_mapping",
    "prox_indicator",
]

MEMBERSHIP_TOL = 1e-12


def as_vector(v, dim: int | None = None) -> np.ndarray:
    """Return ``v`` as a finite float64 vector, checking its dimension."""
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"expected a vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def _points(v, dim: int) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] != dim or arr.ndim > 2:
        raise ValueError(f"dimension mismatch: expected trailing size {dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


class Domain:
    """Closed convex feasible set."""

    dim: int

    def project(self, v) -> np.ndarray:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def contains(self, v, tol: float = MEMBERSHIP_TOL):
        raise NotImplementedError


@dataclass(frozen=True)
class Interval(Domain):
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def dim(self) -> int:
        return 1

    def project(self, v):
        return np.clip(_points(v, 1), self.lo, self.hi)

    def diameter(self):
        return float(self.hi - self.lo)

    def contains(self, v, tol=MEMBERSHIP_TOL):
        p = _points(v, 1)
        return np.all((p >= self.lo - tol) & (p <= self.hi + tol), axis=-1)


@dataclass(frozen=True)
class Box(Domain):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lo)
        hi = as_vector(self.hi, lo.shape[0])
        if np.any(lo > hi):
            raise ValueError("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    def project(self, v):
        return np.clip(_points(v, self.dim), self.lo, self.hi)

    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, v, tol=MEMBERSHIP_TOL):
        p = _points(v, self.dim)
        return np.all((p >= self.lo - tol) & (p <= self.hi + tol), axis=-1)


@dataclass(frozen=True)
class Ball(Domain):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self):
        return self.center.shape[0]

    def project(self, v):
        p = _points(v, self.dim)
        offset = p - self.center
        norm = np.linalg.norm(offset, axis=-1, keepdims=True)
        # points inside (including the center itself) are left untouched
        scale = np.where(norm > self.radius, self.radius / np.where(norm > 0, norm, 1.0), 1.0)
        out = self.center + offset * scale
        return np.where(norm > self.radius, out, p)

    def diameter(self):
        return 2.0 * self.radius

    def contains(self, v, tol=MEMBERSHIP_TOL):
        p = _points(v, self.dim)
        return np.linalg.norm(p - self.center, axis=-1) <= self.radius + tol


@dataclass(frozen=True)
class AllSpace(Domain):
    n: int = field(default=1)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")

    @property
    def dim(self):
        return self.n

    def project(self, v):
        return _points(v, self.dim).copy()

    def diameter(self):
        return math.inf

    def contains(self, v, tol=MEMBERSHIP_TOL):
        p = _points(v, self.dim)
        return np.ones(p.shape[:-1], dtype=bool) if p.ndim > 1 else True


def project(domain: Domain, v) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``domain``."""
    return domain.project(v)


def prox_indicator(domain: Domain, eta: float, v) -> np.ndarray:
    """Proximal map of the indicator of ``domain``. The step ``eta`` is irrelevant."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    return domain.project(v)


def indicator_prox(domain: Domain) -> Callable[[float, np.ndarray], np.ndarray]:
    """Return ``prox(eta, v)`` for the indicator of ``domain``."""

    def prox(eta, v):
        return prox_indicator(domain, eta, v)

    prox.domain = domain
    return prox


def l1_prox(lam: float) -> Callable[[float, np.ndarray], np.ndarray]:
    """Return ``prox(eta, v)`` for ``lam * ||.||_1`` (soft thresholding)."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")

    def prox(eta, v):
        v = np.asarray(v, dtype=float)
        return np.sign(v) * np.maximum(np.abs(v) - lam * eta, 0.0)

    prox.domain = None
    return prox


def _mapping(g, domain: Domain, x, eta):
    if not eta > 0:
        raise ValueError("eta must be positive")
    y = x - eta * g
    p = domain.project(y)
    # where the projection is inactive the mapping is g itself; reading it
    # off directly avoids the cancellation in (x - y) / eta
    return np.where(p == y, g, (x - p) / eta)


def estimated_gradient_mapping(g, domain: Domain, x, eta: float) -> np.ndarray:
    """``(x - proj(x - eta * g)) / eta`` for a supplied gradient estimate ``g``."""
    x = _points(x, domain.dim)
    if not np.all(domain.contains(x)):
        raise PreconditionError("x must lie in the domain")
    g = _points(g, domain.dim)
    return _mapping(g, domain, x, eta)


def projected_gradient_mapping(F, domain: Domain, x, eta: float) -> np.ndarray:
    """Projected-gradient mapping of objective ``F`` at ``x``."""
    x = as_vector(x, domain.dim)
    if not domain.contains(x):
        raise PreconditionError("x must lie in the domain")
    return _mapping(F.gradient(x), domain, x, eta)


def gradient_mappings(F, domain: Domain, X, eta: float) -> np.ndarray:
    """Row-wise projected-gradient mapping for a stack of points ``X``."""
    X = _points(X, domain.dim).reshape(-1, domain.dim)
    if not np.all(domain.contains(X)):
        raise PreconditionError("all points must lie in the domain")
    return _mapping(F.gradients(X), domain, X, eta)
