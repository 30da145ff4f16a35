"""Noise autocovariance r(.) implied by phi and the autocovariance of X."""

from __future__ import annotations

import math
from collections.abc import Mapping

from .core import lag_function
from .errors import DomainError

__all__ = ["recover_noise_acvf", "recover_noise_sequence", "negative_ar1_noise_acvf",
           "series_identity_residual"]


def recover_noise_acvf(phi: float, gamma, n: int) -> float:
    """r(n) = phi^2 gamma(n) - phi (gamma(n+1) + gamma(n-1)) + gamma(n).

    ``gamma`` may be a sequence, array, mapping or callable; gamma(-1) is read
    as gamma(1).
    """
    if not isinstance(gamma, Mapping) and not callable(gamma) and abs(n) + 1 >= len(gamma):
        raise DomainError(f"gamma has lags 0..{len(gamma) - 1}; r({n}) needs lag {abs(n) + 1}")
    f = lag_function(gamma)
    try:
        gm, g0, gp = f(n - 1), f(n), f(n + 1)
    except KeyError as exc:
        raise DomainError(f"gamma missing lag {exc.args[0]} needed for r({n})") from None
    return phi * phi * g0 - phi * (gp + gm) + g0


def recover_noise_sequence(phi: float, gamma, max_lag: int) -> list[float]:
    return [recover_noise_acvf(phi, gamma, n) for n in range(max_lag + 1)]


def negative_ar1_noise_acvf(varphi: float, H: float, sigma2: float, t: int) -> float:
    """cov(Z_t, Z_0) when an AR(1) with negative parameter is written with phi = e^{-H}.

    Uses sum_{n>=1} varphi^{2n} = varphi^2 / (1 - varphi^2).
    """
    if not abs(varphi) < 1.0:
        raise DomainError(f"|varphi| must be < 1, got {varphi}")
    if H <= 0:
        raise DomainError(f"H must be positive, got {H}")
    if t < 1:
        raise DomainError(f"lag t must be >= 1, got {t}")
    phi_h = math.exp(-H)
    d = varphi - phi_h
    geo = varphi * varphi / (1.0 - varphi * varphi)
    return varphi ** (t - 2) * d * sigma2 * (varphi + d * geo)


def series_identity_residual(phi: float, gamma, r, k: int, L: int) -> float:
    """|gamma(k) - phi gamma(k-1) - sum_{i=0}^{L} phi^i r(k+i)|.

    Zero for the true (phi, r) pair once L covers the support of r.
    """
    g = lag_function(gamma)
    rf = lag_function(r)
    total = sum(phi ** i * rf(k + i) for i in range(L + 1))
    return abs(g(k) - phi * g(k - 1) - total)
