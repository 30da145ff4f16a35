"""
Normal-approximation tests of the assumptions behind the phi estimators.

Every statistic is a smooth function of a few sample autocovariances, so its
standard error comes from the delta method applied to the Bartlett plug-in
covariance (see :mod:`ar1fit.core`), divided by the rate l(T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.stats import norm

from .core import AcvfConfig, AcvfEstimate, estimate_acvf
from .errors import TestUnavailableError

__all__ = [
    "TestResult",
    "test_gamma_zero",
    "test_g_zero",
    "test_gamma_equals_r",
    "test_a_equal",
]

Null = Literal["gamma-zero", "g-zero", "gamma-equals-r", "a-equal"]
Alternative = Literal["two-sided", "one-sided-greater", "one-sided-less"]


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    statistic: float
    std_error: float
    p_value: float
    null: Null
    alternative: Alternative
    alpha: float
    reject: bool

    @property
    def z(self) -> float:
        return self.statistic / self.std_error

    def to_dict(self) -> dict:
        return {
            "null": self.null,
            "alternative": self.alternative,
            "statistic": self.statistic,
            "std_error": self.std_error,
            "z": self.z,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
        }


def _acvf(data, lags, config, rate_exponent, truncation) -> AcvfEstimate:
    if isinstance(data, AcvfEstimate):
        return data
    return estimate_acvf(data, lags, config, rate_exponent, truncation)


def _result(stat, var, rate, null, alternative, alpha) -> TestResult:
    if not (var > 0 and math.isfinite(var)):
        raise TestUnavailableError(f"plug-in variance {var!r} is not positive; {null} test unavailable")
    se = math.sqrt(var) / rate
    z = stat / se
    if alternative == "two-sided":
        p = 2.0 * norm.sf(abs(z))
    elif alternative == "one-sided-greater":
        p = norm.sf(z)
    else:
        p = norm.cdf(z)
    p = min(1.0, max(0.0, float(p)))
    return TestResult(float(stat), se, p, null, alternative, alpha, p < alpha)


def test_gamma_zero(data, N: int, alpha: float = 0.05, *, config: AcvfConfig | None = None,
                    rate_exponent: float = 0.5, truncation: int | None = None) -> TestResult:
    """H0: gamma(N) = 0 against gamma(N) != 0."""
    est = _acvf(data, [N], config, rate_exponent, truncation)
    var = est.sigma_matrix([N], truncation)[0, 0]
    return _result(est.gamma(N), var, est.rate, "gamma-zero", "two-sided", alpha)


def test_g_zero(data, N: int, r_N: float, alpha: float = 0.05, *, config: AcvfConfig | None = None,
                rate_exponent: float = 0.5, truncation: int | None = None) -> TestResult:
    """H0: g(gamma) = 0 against g(gamma) > 0, g the discriminant at lag N."""
    lags = [N + 1, N, N - 1]
    est = _acvf(data, lags, config, rate_exponent, truncation)
    x1, x2, x3 = (est.gamma(n) for n in lags)
    g = (x1 + x3) ** 2 - 4.0 * x2 * (x2 - r_N)
    grad = np.array([2.0 * (x1 + x3), 4.0 * r_N - 8.0 * x2, 2.0 * (x1 + x3)])
    S = est.sigma_matrix(lags, truncation)
    return _result(g, float(grad @ S @ grad), est.rate, "g-zero", "one-sided-greater", alpha)


def test_gamma_equals_r(data, N: int, r_N: float, alpha: float = 0.05, *,
                        config: AcvfConfig | None = None, rate_exponent: float = 0.5,
                        truncation: int | None = None) -> TestResult:
    """H0: gamma(N) = r(N) against r(N)/gamma(N) < 1.

    The alternative points away from r(N): gamma(N) > r(N) when r(N) > 0 and
    gamma(N) < r(N) when r(N) < 0 (the sign of gamma_hat(N) decides when r(N) = 0).
    """
    est = _acvf(data, [N], config, rate_exponent, truncation)
    var = est.sigma_matrix([N], truncation)[0, 0]
    sign = r_N if r_N != 0 else est.gamma(N)
    alt = "one-sided-greater" if sign >= 0 else "one-sided-less"
    return _result(est.gamma(N) - r_N, var, est.rate, "gamma-equals-r", alt, alpha)


def test_a_equal(data, N: int, k: int, r_N: float, r_Nk: float, alpha: float = 0.05, *,
                 config: AcvfConfig | None = None, rate_exponent: float = 0.5,
                 truncation: int | None = None) -> TestResult:
    """H0: a_N = a_{N+k} (two-sided), with a_j = r(j)/gamma(j)."""
    lags = [N, N + k]
    est = _acvf(data, lags, config, rate_exponent, truncation)
    gN, gK = est.gamma(N), est.gamma(N + k)
    scale = max(abs(est.gamma(0)), 1e-300)
    if abs(gN) <= 1e-12 * scale or abs(gK) <= 1e-12 * scale:
        raise TestUnavailableError("gamma_hat vanishes at one of the lags; a-equal test unavailable")
    stat = r_N / gN - r_Nk / gK
    grad = np.array([-r_N / gN ** 2, r_Nk / gK ** 2])
    S = est.sigma_matrix(lags, truncation)
    return _result(stat, float(grad @ S @ grad), est.rate, "a-equal", "two-sided", alpha)


# keep pytest from collecting these when imported into a test module
for _f in (test_gamma_zero, test_g_zero, test_gamma_equals_r, test_a_equal):
    _f.__test__ = False
del _f
