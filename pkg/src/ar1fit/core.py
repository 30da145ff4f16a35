"""
Sample autocovariances and plug-in covariance of autocovariance estimators.

The sample autocovariance at lag n is

    gamma_hat(n) = 1/D * sum_{t=1}^{T-n} (X_t - m)(X_{t+n} - m)

where m is the sample mean (or 0 without centering) and D is either T or
T - n - 1.  The T denominator keeps the Toeplitz matrix of gamma_hat positive
semidefinite and is the default.

The large-sample covariance of sqrt(T)*gamma_hat is estimated with the
Gaussian Bartlett-type sum

    sigma(p, q) = sum_{k=-M}^{M} gamma(k) gamma(k+q-p) + gamma(k+q) gamma(k-p)

truncated at M = floor(10 log10 T) lags unless told otherwise.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Literal, Union

import numpy as np

from .errors import DomainError

__all__ = [
    "TimeSeries",
    "AcvfConfig",
    "AcvfEstimate",
    "as_values",
    "sample_autocovariance",
    "acvf_vector",
    "estimate_acvf",
    "default_truncation",
    "bartlett_sigma",
    "bartlett_matrix",
    "ar1_true_acvf",
    "arma_true_acvf",
    "arma_acvf_sequence",
    "lag_function",
]

Centering = Literal["sample-mean", "none"]
Denominator = Literal["T", "T-n-1"]

# Accepted wherever an autocovariance "map lag -> value" is expected.
AcvfLike = Union[Sequence[float], np.ndarray, Mapping[int, float], Callable[[int], float]]


@dataclass(frozen=True)
class TimeSeries:
    """Observed values X_{t0}, ..., X_{t0+T-1}.

    ``t0`` only matters for index-aware operations such as the Lamperti
    transform; estimation ignores it.
    """

    values: np.ndarray
    t0: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size < 3:
            raise DomainError(f"a time series needs at least 3 observations, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DomainError("time series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "t0", int(self.t0))

    def __len__(self):
        return self.values.size

    @property
    def T(self) -> int:
        return self.values.size

    @property
    def index(self) -> np.ndarray:
        return np.arange(self.t0, self.t0 + self.T)


def as_values(series) -> np.ndarray:
    """Return the observations of ``series`` as a validated float array."""
    if isinstance(series, TimeSeries):
        return series.values
    return TimeSeries(series).values


@dataclass(frozen=True)
class AcvfConfig:
    centering: Centering = "sample-mean"
    denominator: Denominator = "T"
    max_lag: int = 10

    def __post_init__(self):
        if self.centering not in ("sample-mean", "none"):
            raise DomainError(f"unknown centering {self.centering!r}")
        if self.denominator not in ("T", "T-n-1"):
            raise DomainError(f"unknown denominator {self.denominator!r}")
        if int(self.max_lag) != self.max_lag or self.max_lag < 0:
            raise DomainError(f"max_lag must be a non-negative integer, got {self.max_lag!r}")

    def check_length(self, T: int) -> None:
        if self.max_lag >= T - 1:
            raise DomainError(f"max_lag={self.max_lag} requires T > {self.max_lag + 1}, got T={T}")


@dataclass(frozen=True)
class AcvfEstimate:
    """Estimated autocovariances gamma_hat(0..K) and optional plug-in covariances.

    ``sigma_hat`` maps (p, q) to the estimated asymptotic covariance of
    l(T)*gamma_hat(p) and l(T)*gamma_hat(q), where l(T) = T**rate_exponent.
    """

    gamma_hat: np.ndarray
    config: AcvfConfig
    T: int
    rate_exponent: float = 0.5
    sigma_hat: dict = field(default_factory=dict)

    @property
    def max_lag(self) -> int:
        return self.gamma_hat.size - 1

    @property
    def rate(self) -> float:
        return float(self.T) ** self.rate_exponent

    def gamma(self, n: int) -> float:
        n = abs(int(n))
        if n > self.max_lag:
            raise DomainError(f"lag {n} not estimated (max lag {self.max_lag})")
        return float(self.gamma_hat[n])

    def with_sigma(self, lags: Sequence[int], truncation: int | None = None) -> "AcvfEstimate":
        """Return a copy with sigma_hat filled for every pair drawn from ``lags``."""
        sig = dict(self.sigma_hat)
        for p in lags:
            for q in lags:
                M = self._truncation(p, q, truncation)
                sig[(p, q)] = bartlett_sigma(self.gamma_hat, p, q, M)
        return replace(self, sigma_hat=sig)

    def sigma_matrix(self, lags: Sequence[int], truncation: int | None = None) -> np.ndarray:
        """Plug-in covariance matrix for ``lags`` (computed on demand)."""
        k = len(lags)
        out = np.empty((k, k))
        for i, p in enumerate(lags):
            for j, q in enumerate(lags):
                key = (p, q)
                if truncation is None and key in self.sigma_hat:
                    out[i, j] = self.sigma_hat[key]
                else:
                    out[i, j] = bartlett_sigma(self.gamma_hat, p, q, self._truncation(p, q, truncation))
        return out

    def _truncation(self, p, q, truncation):
        avail = self.max_lag - max(abs(p), abs(q))
        if avail < 0:
            raise DomainError(f"lags ({p}, {q}) exceed the estimated range 0..{self.max_lag}")
        if truncation is None:
            return min(default_truncation(self.T), avail)
        return truncation


def _centered(x: np.ndarray, centering: str) -> np.ndarray:
    return x - x.mean() if centering == "sample-mean" else x


def sample_autocovariance(series, lag: int, config: AcvfConfig | None = None) -> float:
    """gamma_hat(lag) under the configured centering and denominator."""
    config = config or AcvfConfig(max_lag=lag)
    x = as_values(series)
    T = x.size
    if int(lag) != lag or lag < 0 or lag > config.max_lag or lag >= T - 1:
        raise DomainError(f"lag {lag} out of range (max_lag={config.max_lag}, T={T})")
    lag = int(lag)
    y = _centered(x, config.centering)
    denom = T if config.denominator == "T" else T - lag - 1
    return float(np.dot(y[: T - lag], y[lag:]) / denom)


def acvf_vector(series, config: AcvfConfig) -> AcvfEstimate:
    """gamma_hat(0..K) for K = config.max_lag; sigma_hat is left empty."""
    x = as_values(series)
    T = x.size
    config.check_length(T)
    y = _centered(x, config.centering)
    K = config.max_lag
    g = np.array([np.dot(y[: T - n], y[n:]) for n in range(K + 1)])
    if config.denominator == "T":
        g /= T
    else:
        g /= T - np.arange(K + 1) - 1
    return AcvfEstimate(gamma_hat=g, config=config, T=T)


def estimate_acvf(series, lags: Sequence[int], config: AcvfConfig | None = None,
                  rate_exponent: float = 0.5, truncation: int | None = None) -> AcvfEstimate:
    """Estimate gamma_hat far enough past ``lags`` to plug in sigma for them.

    The maximum lag is chosen as max(lags) + M (M the truncation), capped by
    T - 2; sigma_hat is filled for all pairs in ``lags``.
    """
    x = as_values(series)
    T = x.size
    top = max(lags)
    M = default_truncation(T) if truncation is None else truncation
    base = config or AcvfConfig()
    K = min(T - 2, top + M)
    if K < top:
        raise DomainError(f"series of length {T} too short for lag {top}")
    est = acvf_vector(x, replace(base, max_lag=K))
    est = replace(est, rate_exponent=rate_exponent)
    return est.with_sigma(sorted(set(lags)), truncation)


def default_truncation(T: int) -> int:
    return int(math.floor(10 * math.log10(T)))


def lag_function(gamma: AcvfLike) -> Callable[[int], float]:
    """Wrap an autocovariance container as ``f(n)`` with f(-n) = f(n).

    Sequences and arrays return 0 past their end; mappings raise KeyError on a
    missing lag so callers can detect gaps.
    """
    if callable(gamma) and not isinstance(gamma, (Mapping, np.ndarray)):
        return lambda n: float(gamma(abs(int(n))))
    if isinstance(gamma, Mapping):
        return lambda n: float(gamma[abs(int(n))])
    arr = np.asarray(gamma, dtype=float)

    def f(n):
        n = abs(int(n))
        return float(arr[n]) if n < arr.size else 0.0

    return f


def bartlett_sigma(gamma_hat: AcvfLike, p: int, q: int, M: int) -> float:
    """Truncated Bartlett sum for the covariance of sqrt(T)*gamma_hat at lags p, q.

    Out-of-range lags count as zero; negative lags use gamma(-n) = gamma(n).
    """
    if M < 0:
        raise DomainError(f"truncation must be non-negative, got {M}")
    if isinstance(gamma_hat, Mapping):
        K = max(gamma_hat) if gamma_hat else 0
        g = np.zeros(K + 1)
        for n, v in gamma_hat.items():
            g[abs(int(n))] = v
    else:
        g = np.asarray(gamma_hat, dtype=float)
        K = g.size - 1
    p, q = abs(int(p)), abs(int(q))
    if max(p, q) > K or M > K - max(p, q):
        raise DomainError(
            f"truncation M={M} at lags ({p}, {q}) needs gamma up to lag {M + max(p, q)}, have {K}")
    # symmetric extension gamma(-K..K), zero padded by M+p+q on both sides
    pad = M + p + q + 1
    ext = np.concatenate([np.zeros(pad), g[:0:-1], g, np.zeros(pad)])
    c = pad + K  # position of lag 0
    k = np.arange(-M, M + 1)
    s = ext[c + k] * ext[c + k + q - p] + ext[c + k + q] * ext[c + k - p]
    return float(np.sum(s))


def bartlett_matrix(gamma_hat: AcvfLike, lags: Sequence[int], M: int) -> np.ndarray:
    lags = list(lags)
    out = np.empty((len(lags), len(lags)))
    for i, p in enumerate(lags):
        for j, q in enumerate(lags[i:], start=i):
            out[i, j] = out[j, i] = bartlett_sigma(gamma_hat, p, q, M)
    return out


def ar1_true_acvf(phi: float, sigma2: float, n: int) -> float:
    """Exact gamma(n) = sigma2 * phi**|n| / (1 - phi**2) of an AR(1) with phi in (0, 1)."""
    if not 0.0 < phi < 1.0:
        raise DomainError(f"phi must lie in (0, 1), got {phi}")
    if sigma2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    return sigma2 * phi ** abs(n) / (1.0 - phi * phi)


def _psi_weights(phi: float, thetas: Sequence[float], tol: float = 1e-15) -> np.ndarray:
    """MA(infinity) weights of (1 - phi B) X = (1 + theta_1 B + ...) e, truncated."""
    q = len(thetas)
    th = np.r_[1.0, np.asarray(thetas, dtype=float)]
    psi = np.empty(q + 1)
    psi[0] = 1.0
    for j in range(1, q + 1):
        psi[j] = th[j] + phi * psi[j - 1]
    a = abs(phi)
    if a == 0.0:
        return psi
    # tail psi_{q+j} = phi^j psi_q; stop once sum of remaining squares < tol
    lead = max(abs(psi[q]), 1.0)
    J = 1
    while (lead * a ** J) ** 2 / (1.0 - a * a) >= tol:
        J += 1
    tail = psi[q] * phi ** np.arange(1, J + 1)
    return np.concatenate([psi, tail])


def arma_true_acvf(phi: float, thetas: Sequence[float], sigma2: float, n: int) -> float:
    """Exact gamma(n) of the causal ARMA(1, q) X_t - phi X_{t-1} = e_t + sum theta_j e_{t-j}."""
    if not abs(phi) < 1.0:
        raise DomainError(f"ARMA(1,q) requires |phi| < 1, got {phi}")
    psi = _psi_weights(phi, thetas)
    n = abs(int(n))
    q = len(thetas)
    if n > q:
        # gamma(n) = phi * gamma(n-1) past the MA order
        return sigma2 * phi ** (n - q) * _gamma_from_psi(psi, q)
    return sigma2 * _gamma_from_psi(psi, n)


def _gamma_from_psi(psi: np.ndarray, n: int) -> float:
    return float(np.dot(psi[: psi.size - n], psi[n:]))


def arma_acvf_sequence(phi: float, thetas: Sequence[float], sigma2: float, K: int) -> np.ndarray:
    """gamma(0..K) of a causal ARMA(1, q)."""
    return np.array([arma_true_acvf(phi, thetas, sigma2, n) for n in range(K + 1)])
