"""
Discrete Lamperti transform and the Langevin-type representation of a
stationary sequence.

For H > 0 the transform (L_H X)_{e^t} = e^{tH} X_t maps a stationary X to an
H-self-similar Y.  The increments

    G_t = sum_{k=1}^{t} e^{-kH} (Y_{e^k} - Y_{e^{k-1}})        t >= 1
    G_0 = 0
    G_t = -sum_{k=t+1}^{0} e^{-kH} (Y_{e^k} - Y_{e^{k-1}})     t <= -1

satisfy Delta_t X = (e^{-H} - 1) X_{t-1} + Delta_t G.  Paths here are finite
arrays carrying the integer index of their first element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TimeSeries
from .errors import DomainError

__all__ = [
    "SelfSimilarPath",
    "IncrementPath",
    "lamperti_forward",
    "lamperti_inverse",
    "construct_G",
    "verify_langevin",
    "reconstruct_from_increments",
    "truncated_limit_sums",
]


@dataclass(frozen=True)
class SelfSimilarPath:
    """Y_{e^t} for t = t0, ..., t0 + len(values) - 1."""

    values: np.ndarray
    H: float
    t0: int = 0

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.t0, self.t0 + len(self.values))


@dataclass(frozen=True)
class IncrementPath:
    """G_t on a contiguous index range containing 0, with G_0 = 0."""

    values: np.ndarray
    t0: int

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.t0, self.t0 + len(self.values))

    def at(self, t: int) -> float:
        return float(self.values[t - self.t0])

    def increments(self) -> np.ndarray:
        """Delta_t G for t = t0+1, ..., t1."""
        return np.diff(self.values)


def _check_H(H):
    if not H > 0:
        raise DomainError(f"H must be positive, got {H}")


def _path(x, t0):
    if isinstance(x, TimeSeries):
        return x.values, x.t0
    v = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise DomainError("path contains non-finite values")
    return v, int(t0)


def lamperti_forward(X, H: float, t0: int = 0) -> SelfSimilarPath:
    """Y_{e^t} = e^{tH} X_t.  ``t0`` is ignored when X is a TimeSeries."""
    _check_H(H)
    x, t0 = _path(X, t0)
    t = np.arange(t0, t0 + x.size)
    return SelfSimilarPath(np.exp(t * H) * x, float(H), t0)


def lamperti_inverse(Y: SelfSimilarPath) -> np.ndarray:
    """X_t = e^{-tH} Y_{e^t}, indexed like Y."""
    _check_H(Y.H)
    return np.exp(-Y.index * Y.H) * np.asarray(Y.values, dtype=float)


def construct_G(Y: SelfSimilarPath) -> IncrementPath:
    y = np.asarray(Y.values, dtype=float)
    if y.size < 2:
        raise DomainError("need at least two points to form increments")
    _check_H(Y.H)
    t0, t1 = Y.t0, Y.t0 + y.size - 1
    if not t0 <= 0 <= t1:
        raise DomainError(f"index range [{t0}, {t1}] must contain 0, where G is anchored")
    k = np.arange(t0 + 1, t1 + 1)
    dG = np.exp(-k * Y.H) * np.diff(y)   # Delta_k G, k = t0+1..t1
    G = np.empty(y.size)
    i0 = -t0
    G[i0] = 0.0
    # t >= 1: forward partial sums over k = 1..t
    G[i0 + 1:] = np.cumsum(dG[i0:])
    # t <= -1: G_t = -sum_{k=t+1}^{0} Delta_k G
    if i0 > 0:
        back = dG[:i0][::-1]          # k = 0, -1, ..., t0+1
        G[:i0] = -np.cumsum(back)[::-1]
    return IncrementPath(G, t0)


def verify_langevin(X, H: float, G: IncrementPath, t0: int = 0) -> float:
    """max_t |Delta_t X - (e^{-H} - 1) X_{t-1} - Delta_t G| over the common range."""
    _check_H(H)
    x, t0 = _path(X, t0)
    g = np.asarray(G.values, dtype=float)
    if G.t0 != t0 or g.size != x.size:
        raise DomainError(
            f"index mismatch: X on [{t0}, {t0 + x.size - 1}], G on [{G.t0}, {G.t0 + g.size - 1}]")
    res = np.diff(x) - (math.exp(-H) - 1.0) * x[:-1] - np.diff(g)
    return float(np.max(np.abs(res))) if res.size else 0.0


def reconstruct_from_increments(G: IncrementPath, H: float, X, t: int, M: int, t0: int = 0) -> float:
    """e^{-tH} (sum_{k=t-M}^{t} e^{kH} Delta_k G + e^{(t-M-1)H} X_{t-M-1})."""
    _check_H(H)
    x, t0 = _path(X, t0)
    if t - M - 1 < max(t0, G.t0) or t > G.t0 + len(G.values) - 1:
        raise DomainError(f"need X and G from index {t - M - 1} to {t}")
    k = np.arange(t - M, t + 1)
    g = np.asarray(G.values)
    dG = g[k - G.t0] - g[k - 1 - G.t0]
    acc = np.sum(np.exp((k - t) * H) * dG)
    return float(acc + math.exp(-(M + 1) * H) * x[t - M - 1 - t0])


def truncated_limit_sums(G: IncrementPath, H: float) -> np.ndarray:
    """S_k = sum_{t=k}^{0} e^{tH} Delta_t G for k = 0, -1, ..., t0+1.

    A finite-history proxy for the limit k -> -infinity that defines the class
    of admissible G.
    """
    _check_H(H)
    if G.t0 >= 0:
        raise DomainError("no history before index 0")
    g = np.asarray(G.values)
    i0 = -G.t0
    t = np.arange(0, G.t0, -1)           # 0, -1, ..., t0+1
    dG = g[i0 + t] - g[i0 + t - 1]
    return np.cumsum(np.exp(t * H) * dG)
