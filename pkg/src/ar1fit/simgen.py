"""
Seeded generators for the processes used in the experiments.

Seeds: a 64-bit base seed is mixed with integer coordinates (cell, replicate,
...) through splitmix64, and the result seeds a PCG64 bit generator.  A
replicate's path therefore depends only on its coordinates, not on execution
order or worker count.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import mpmath
import numpy as np
from scipy.signal import lfilter

from .core import TimeSeries, lag_function
from .errors import DomainError

__all__ = [
    "splitmix64",
    "derive_seed",
    "make_rng",
    "ProcessSpec",
    "simulate",
    "gen_ar1",
    "gen_arma",
    "gen_gaussian_from_acvf",
    "gen_worstcase",
    "worstcase_acvf",
    "coeff_extract",
    "arma_burn_in",
]

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *coords: int) -> int:
    """Fold integer coordinates into ``seed``; distinct coordinates give unrelated streams."""
    h = splitmix64(int(seed) & _MASK)
    for c in coords:
        h = splitmix64(h ^ (int(c) & _MASK))
    return h


def make_rng(seed: int, *coords: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *coords)))


def _innovations(rng, n, innovations):
    if innovations == "gaussian":
        return rng.standard_normal(n)
    if innovations == "uniform":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), n)
    raise DomainError(f"unknown innovation family {innovations!r}")


def arma_burn_in(phi: float) -> int:
    return 200 + int(math.ceil(10.0 / (1.0 - abs(phi))))


def _check_T(T):
    if int(T) != T or T < 3:
        raise DomainError(f"T must be an integer >= 3, got {T}")
    return int(T)


def gen_ar1(phi: float, sigma2: float, T: int, seed: int | np.random.Generator,
            innovations: str = "gaussian") -> np.ndarray:
    """Stationary AR(1) path; X_1 is drawn from N(0, sigma2 / (1 - phi^2)).

    ``seed`` may be an integer or an existing Generator.  Uniform innovations
    get a burn-in instead of the exact start.
    """
    if not abs(phi) < 1.0:
        raise DomainError(f"AR(1) requires |phi| < 1, got {phi}")
    if sigma2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    T = _check_T(T)
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    sd = math.sqrt(sigma2)
    if innovations == "gaussian":
        e = rng.standard_normal(T) * sd
        e[0] *= 1.0 / math.sqrt(1.0 - phi * phi)
        return lfilter([1.0], [1.0, -phi], e)
    burn = arma_burn_in(phi)
    e = _innovations(rng, T + burn, innovations) * sd
    return lfilter([1.0], [1.0, -phi], e)[burn:]


def gen_arma(phi: float, thetas: Sequence[float], sigma2: float, T: int,
             seed: int | np.random.Generator, innovations: str = "gaussian") -> np.ndarray:
    """ARMA(1, q) path after a burn-in of 200 + 10/(1-|phi|) steps.

    With no MA terms this is exactly :func:`gen_ar1` for the same seed.
    """
    thetas = [float(t) for t in thetas]
    if not thetas:
        return gen_ar1(phi, sigma2, T, seed, innovations)
    if not abs(phi) < 1.0:
        raise DomainError(f"ARMA(1,q) requires |phi| < 1, got {phi}")
    if sigma2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    T = _check_T(T)
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    q = len(thetas)
    burn = arma_burn_in(phi)
    e = _innovations(rng, T + burn + q, innovations) * math.sqrt(sigma2)
    x = lfilter(np.r_[1.0, thetas], [1.0, -phi], e)
    return x[burn + q:]


def gen_gaussian_from_acvf(acvf, T: int, seed: int | np.random.Generator,
                           tol: float = 1e-10) -> np.ndarray:
    """Exact zero-mean Gaussian sample with autocovariance ``acvf``.

    Runs the Levinson-Durbin recursion on the Toeplitz covariance and draws
    X_n = sum_j a_{n,j} X_{n-j} + sqrt(v_n) e_n.  Raises DomainError naming the
    order at which the innovation variance stops being positive (relative to
    gamma(0) by ``tol``).
    """
    T = _check_T(T)
    f = lag_function(acvf)
    g = np.array([f(n) for n in range(T)])
    if not g[0] > 0:
        raise DomainError("acvf is not positive definite: gamma(0) <= 0 (order 0)")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    z = rng.standard_normal(T)
    x = np.empty(T)
    a = np.zeros(0)
    v = g[0]
    x[0] = math.sqrt(v) * z[0]
    for n in range(1, T):
        kappa = (g[n] - np.dot(a, g[n - 1:0:-1])) / v
        a = np.r_[a - kappa * a[::-1], kappa]
        v = v * (1.0 - kappa * kappa)
        if not v > tol * g[0]:
            raise DomainError(f"acvf is not positive definite to tolerance at order {n}")
        x[n] = np.dot(a, x[n - 1::-1]) + math.sqrt(v) * z[n]
    return x


def _check_b(b):
    if not 0.0 < b <= 2.0:
        raise DomainError(f"b must lie in (0, 2]; b > 2 does not define an autocovariance (got {b})")


def worstcase_acvf(b: float, gamma0: float, n: int) -> float:
    """gamma(n) = b gamma(n-1) - gamma(n-2), gamma(1) = (b/2) gamma(0)."""
    _check_b(b)
    if gamma0 <= 0:
        raise DomainError(f"gamma0 must be positive, got {gamma0}")
    n = abs(int(n))
    prev, cur = gamma0, 0.5 * b * gamma0
    if n == 0:
        return float(gamma0)
    for _ in range(n - 1):
        prev, cur = cur, b * cur - prev
    return float(cur)


def coeff_extract(b: float, n: int, dps: int = 60) -> float:
    """[x^n] of (1 - (b/2) x) / (x^2 - b x + 1), with gamma(0) = 1.

    Expands (1 - (b/2) x) * sum_k (b x - x^2)^k as truncated polynomials in
    high precision arithmetic; this shares no code with the recursion.
    """
    n = int(n)
    if n < 0:
        raise DomainError(f"coefficient index must be >= 0, got {n}")
    with mpmath.workdps(dps):
        bb = mpmath.mpf(b)
        total = [mpmath.mpf(0)] * (n + 1)
        power = [mpmath.mpf(0)] * (n + 1)
        power[0] = mpmath.mpf(1)             # (bx - x^2)^0
        for k in range(n + 1):
            for i in range(n + 1):
                total[i] += power[i]
            # multiply by (b x - x^2), dropping degrees above n
            nxt = [mpmath.mpf(0)] * (n + 1)
            for i in range(n):
                if power[i]:
                    nxt[i + 1] += bb * power[i]
                    if i + 2 <= n:
                        nxt[i + 2] -= power[i]
            power = nxt
        c = total[n] - (bb / 2 * total[n - 1] if n >= 1 else 0)
        return float(c)


def gen_worstcase(b: float, gamma0: float, T: int, seed: int | np.random.Generator) -> np.ndarray:
    """Gaussian process with the worst-case autocovariance gamma0 * cos(n theta), b = 2 cos theta.

    The Toeplitz covariance has rank <= 2, so the path is the harmonic
    A cos(theta t) + B sin(theta t) with A, B ~ N(0, gamma0); b = 2 gives the
    constant path X_t = X_0.
    """
    _check_b(b)
    if gamma0 <= 0:
        raise DomainError(f"gamma0 must be positive, got {gamma0}")
    T = _check_T(T)
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    A, B = rng.standard_normal(2) * math.sqrt(gamma0)
    theta = math.acos(min(1.0, b / 2.0))
    t = np.arange(T)
    return A * np.cos(theta * t) + B * np.sin(theta * t)


@dataclass(frozen=True)
class ProcessSpec:
    kind: Literal["ar1", "arma1q", "gaussian-acvf", "worst-case"]
    T: int
    seed: int
    phi: float = 0.5
    thetas: tuple[float, ...] = ()
    sigma2: float = 1.0
    b: float = 2.0
    gamma0: float = 1.0
    acvf: tuple[float, ...] = field(default=(), repr=False)
    innovations: str = "gaussian"

    def __post_init__(self):
        if self.kind in ("ar1", "arma1q") and not abs(self.phi) < 1.0:
            raise DomainError(f"|phi| must be < 1 for {self.kind}, got {self.phi}")
        if self.kind == "worst-case":
            _check_b(self.b)
        if self.kind not in ("ar1", "arma1q", "gaussian-acvf", "worst-case"):
            raise DomainError(f"unknown process kind {self.kind!r}")


def simulate(spec: ProcessSpec, *coords: int) -> TimeSeries:
    """Draw one path for ``spec``; extra ``coords`` select an independent replicate."""
    rng = make_rng(spec.seed, *coords)
    if spec.kind == "ar1":
        x = gen_ar1(spec.phi, spec.sigma2, spec.T, rng, spec.innovations)
    elif spec.kind == "arma1q":
        x = gen_arma(spec.phi, spec.thetas, spec.sigma2, spec.T, rng, spec.innovations)
    elif spec.kind == "gaussian-acvf":
        x = gen_gaussian_from_acvf(spec.acvf, spec.T, rng)
    else:
        x = gen_worstcase(spec.b, spec.gamma0, spec.T, rng)
    return TimeSeries(x)
