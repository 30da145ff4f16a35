"""
Closed-form estimators of the AR(1) parameter phi in X_t - phi X_{t-1} = Z_t.

At any lag N the autocovariances of X and Z satisfy the quadratic

    phi^2 gamma(N) - phi (gamma(N+1) + gamma(N-1)) + gamma(N) - r(N) = 0,

so a single assumed noise value r(N) pins phi down up to the choice of root.
The functions here cover the branches of that equation:

* zero-gamma:  gamma(N) = 0, phi = -r(N) / (gamma(N+1) + gamma(N-1))
* quadratic:   gamma(N) != 0, the two roots (plus/minus) of the quadratic
* degenerate:  discriminant g = 0, phi = (gamma(N+1) + gamma(N-1)) / (2 gamma(N))
* ratio:       r(m) = 0 for m >= N, phi = gamma(n) / gamma(n-1)

Each comes with the delta-method variance of l(T)(phi_hat - phi). Triples are
always ordered (gamma(N+1), gamma(N), gamma(N-1)) and covariance matrices
follow the same order.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from scipy.stats import norm

from . import hypothesis
from .core import AcvfConfig, estimate_acvf
from .errors import DomainError, InconsistencyError, TestUnavailableError, UninformativeLagError

__all__ = [
    "NoiseSpec",
    "PhiEstimate",
    "GFunction",
    "EstimatorConfig",
    "g_function",
    "quadratic_roots",
    "quadratic_root_values",
    "choose_root",
    "phi_zero_gamma",
    "phi_degenerate",
    "phi_ratio",
    "phi_quadratic",
    "var_zero_gamma",
    "var_quadratic",
    "var_degenerate",
    "var_ratio",
    "estimate",
]

Formula = Literal["zero-gamma", "quadratic-plus", "quadratic-minus", "degenerate", "ratio"]


@dataclass(frozen=True)
class NoiseSpec:
    """Assumed noise autocovariances r(n), keyed by lag."""

    entries: Mapping[int, float]

    def __post_init__(self):
        ent = {int(k): float(v) for k, v in dict(self.entries).items()}
        if not ent:
            raise DomainError("NoiseSpec needs at least one (lag, r) entry")
        for k, v in ent.items():
            if k < 0:
                raise DomainError(f"noise lag must be non-negative, got {k}")
            if not math.isfinite(v):
                raise DomainError(f"r({k}) is not finite")
        object.__setattr__(self, "entries", ent)

    def __getitem__(self, lag):
        return self.entries[lag]

    def __contains__(self, lag):
        return lag in self.entries

    def other_lags(self, N: int) -> list[int]:
        return sorted(k for k in self.entries if k != N and k >= 1)


@dataclass(frozen=True)
class PhiEstimate:
    phi: float
    formula: Formula
    clamped: bool = False
    raw: float = float("nan")
    variance: float = float("nan")
    ci: tuple[float, float] = (float("nan"), float("nan"))
    ci_raw: tuple[float, float] = (float("nan"), float("nan"))
    level: float = 0.95
    ambiguous: bool = False
    lag_used: int | None = None
    candidates: tuple[float, ...] = ()
    tests: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "formula": self.formula,
            "clamped": self.clamped,
            "raw": self.raw,
            "variance": self.variance,
            "ci": list(self.ci),
            "ci_raw": list(self.ci_raw),
            "level": self.level,
            "ambiguous": self.ambiguous,
            "lag_used": self.lag_used,
            "candidates": list(self.candidates),
            "tests": [t.to_dict() for t in self.tests],
        }


@dataclass(frozen=True)
class GFunction:
    """Discriminant g(gamma) and, where g > 0, the gradient of sqrt(g)."""

    value: float
    sqrt_gradient: np.ndarray | None


def _clamp(raw: float) -> tuple[float, bool]:
    if raw < 0.0:
        return 0.0, True
    if raw > 1.0:
        return 1.0, True
    return float(raw), False


def g_function(gamma_triple, r_N: float) -> GFunction:
    x1, x2, x3 = (float(v) for v in gamma_triple)
    s = x1 + x3
    g = s * s - 4.0 * x2 * (x2 - r_N)
    if g > 0:
        rg = math.sqrt(g)
        grad = np.array([s, 2.0 * (r_N - 2.0 * x2), s]) / rg
    else:
        grad = None
    return GFunction(g, grad)


def _discriminant(a, b, c, r_N):
    """g = (a + c)^2 - 4 b (b - r), set to exactly zero inside its rounding-error bound.

    The bound is taken from the input magnitudes, so cancellation in a + c or
    b - r is covered.
    """
    s = a + c
    g = s * s - 4.0 * b * (b - r_N)
    scale = np.abs(s) * (np.abs(a) + np.abs(c)) + 4.0 * np.abs(b) * (np.abs(b) + np.abs(r_N))
    return np.where(np.abs(g) <= 8.0 * np.finfo(float).eps * scale, 0.0, g)


def _stable_roots(s, b, r_N, sq):
    """(plus, minus) roots of b x^2 - s x + (b - r) = 0 without cancellation.

    With q = (s + sign(s) sqrt(g)) / 2 the roots are q / b and (b - r) / q.
    Without a square-root term both roots are s / (2b).
    """
    sign = np.where(s >= 0, 1.0, -1.0)
    q = 0.5 * (s + sign * sq)
    use = (sq > 0) & (q != 0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        big = q / b
        small = np.where(use, (b - r_N) / np.where(use, q, 1.0), s / (2.0 * b))
    plus = np.where(s >= 0, big, small)
    minus = np.where(s >= 0, small, big)
    # for b < 0 the labels follow the +/- sign in front of sqrt(g), not the ordering
    return plus, minus


def quadratic_root_values(gamma_Np1, gamma_N, gamma_Nm1, r_N, root: str = "minus"):
    """Vectorised root of the quadratic with the indicator conventions of the estimator.

    The square-root term is dropped when g <= 0 and the result is 0 where
    gamma_N == 0.  No clamping is applied.
    """
    a = np.asarray(gamma_Np1, dtype=float)
    b = np.asarray(gamma_N, dtype=float)
    c = np.asarray(gamma_Nm1, dtype=float)
    s = a + c
    g = _discriminant(a, b, c, r_N)
    sq = np.sqrt(np.where(g > 0, g, 0.0))
    nz = b != 0
    bb = np.where(nz, b, 1.0)
    plus, minus = _stable_roots(s, bb, r_N, sq)
    out = np.where(nz, minus if root == "minus" else plus, 0.0)
    return out if out.ndim else float(out)


def phi_quadratic(gamma_Np1, gamma_N, gamma_Nm1, r_N, root: str = "minus"):
    """Clamped quadratic-branch estimate, vectorised over arrays of autocovariances."""
    return np.clip(quadratic_root_values(gamma_Np1, gamma_N, gamma_Nm1, r_N, root), 0.0, 1.0)


def quadratic_roots(gamma_Np1: float, gamma_N: float, gamma_Nm1: float, r_N: float):
    """Both roots of the quadratic and the discriminant g.

    Returns ``(root_plus, root_minus, g_value)``.  A negative g (sampling noise)
    has its square-root term taken as zero, so both roots then coincide; a g
    within rounding error of zero is reported as exactly zero.
    """
    if gamma_N == 0:
        raise DomainError("gamma(N) = 0: the quadratic degenerates, use phi_zero_gamma")
    s = gamma_Np1 + gamma_Nm1
    g = float(_discriminant(gamma_Np1, float(gamma_N), gamma_Nm1, r_N))
    sq = math.sqrt(g) if g > 0 else 0.0
    plus, minus = _stable_roots(s, float(gamma_N), r_N, sq)
    return float(plus), float(minus), g


def _single_lag_choice(gamma_N: float, a_N: float) -> str | None:
    if a_N <= 0:
        return "minus" if gamma_N > 0 else "plus"
    if a_N >= 1:
        return "plus" if gamma_N > 0 else "minus"
    return None


def choose_root(roots, gamma_N: float, a_N: float, second=None, tol: float | None = None,
                se=(0.0, 0.0)):
    """Pick the root of the quadratic that equals phi.

    ``roots`` is ``(root_plus, root_minus)`` at lag N.  ``second`` optionally
    gives ``(root_plus, root_minus, a_other)`` at another lag; it is only
    consulted when 0 < a_N < 1.  ``se`` holds standard errors of the lag-N and
    other-lag roots and widens the agreement tolerance
    max(0.02, 3 * (se_a + se_b)).

    Returns ``(phi, formula, ambiguous)``; an ambiguous result carries the
    minus root.
    """
    plus, minus = float(roots[0]), float(roots[1])
    if not math.isfinite(a_N):
        raise DomainError("a_N = r(N)/gamma(N) is not finite")
    side = _single_lag_choice(gamma_N, a_N)
    if side is not None:
        return (plus, "quadratic-plus", False) if side == "plus" else (minus, "quadratic-minus", False)
    if second is not None:
        p2, m2, a2 = (float(v) for v in second)
        # equal ratios (up to rounding) carry no extra information
        if not math.isclose(a2, a_N, rel_tol=1e-9, abs_tol=1e-12):
            if tol is None:
                tol = max(0.02, 3.0 * (se[0] + se[1]))
            pairs = [
                (abs(plus - p2), "plus"), (abs(plus - m2), "plus"),
                (abs(minus - p2), "minus"), (abs(minus - m2), "minus"),
            ]
            matched = {side for d, side in pairs if d <= tol}
            if not matched:
                raise InconsistencyError(
                    f"no common root within {tol:.3g}: lag-N roots ({plus:.6g}, {minus:.6g}), "
                    f"other lag ({p2:.6g}, {m2:.6g})")
            if len(matched) == 1:
                side = matched.pop()
                return (plus, "quadratic-plus", False) if side == "plus" else (minus, "quadratic-minus", False)
    return minus, "quadratic-minus", True


def phi_zero_gamma(gamma_Np1: float, gamma_Nm1: float, r_N: float) -> PhiEstimate:
    s = gamma_Np1 + gamma_Nm1
    raw = -r_N / s if s != 0 else 0.0
    phi, clamped = _clamp(raw)
    return PhiEstimate(phi=phi, formula="zero-gamma", clamped=clamped, raw=raw)


def phi_degenerate(gamma_Np1: float, gamma_N: float, gamma_Nm1: float) -> PhiEstimate:
    raw = (gamma_Np1 + gamma_Nm1) / (2.0 * gamma_N) if gamma_N != 0 else 0.0
    phi, clamped = _clamp(raw)
    return PhiEstimate(phi=phi, formula="degenerate", clamped=clamped, raw=raw)


def phi_ratio(gamma_n: float, gamma_nm1: float) -> PhiEstimate:
    """gamma(n)/gamma(n-1); valid once the noise autocovariance has cut off."""
    raw = gamma_n / gamma_nm1 if gamma_nm1 != 0 else 0.0
    phi, clamped = _clamp(raw)
    return PhiEstimate(phi=phi, formula="ratio", clamped=clamped, raw=raw)


def _quad_form(v, Sigma) -> float:
    v = np.asarray(v, dtype=float)
    return float(v @ np.asarray(Sigma, dtype=float) @ v)


def var_zero_gamma(gamma_Np1: float, gamma_Nm1: float, r_N: float, Sigma) -> float:
    """Delta-method variance of the zero-gamma estimator; Sigma over (gamma(N+1), gamma(N-1))."""
    s = gamma_Np1 + gamma_Nm1
    if s == 0:
        raise DomainError("gamma(N+1) + gamma(N-1) = 0")
    S = np.asarray(Sigma, dtype=float)
    return r_N * r_N * (S[0, 0] + 2.0 * S[0, 1] + S[1, 1]) / s ** 4


def var_quadratic(gamma_triple, r_N: float, Sigma, root: str = "plus") -> float:
    """Delta-method variance of the quadratic-branch estimator.

    With C = (gamma(N+1) + gamma(N-1) +/- sqrt(g)) / gamma(N) and v = (1, -C, 1),
    the variance is (d'Sd +/- 2 v'Sd + v'Sv) / (4 gamma(N)^2), d = grad sqrt(g).
    """
    x1, x2, x3 = (float(v) for v in gamma_triple)
    if x2 == 0:
        raise DomainError("gamma(N) = 0")
    gf = g_function(gamma_triple, r_N)
    if gf.sqrt_gradient is None:
        raise DomainError(f"g(gamma) = {gf.value:.3g} <= 0; use var_degenerate")
    sign = 1.0 if root == "plus" else -1.0
    d = gf.sqrt_gradient
    C = (x1 + x3 + sign * math.sqrt(gf.value)) / x2
    v = np.array([1.0, -C, 1.0])
    S = np.asarray(Sigma, dtype=float)
    return float((d @ S @ d + sign * 2.0 * (v @ S @ d) + v @ S @ v) / (4.0 * x2 * x2))


def var_degenerate(gamma_triple, Sigma) -> float:
    x1, x2, x3 = (float(v) for v in gamma_triple)
    if x2 == 0:
        raise DomainError("gamma(N) = 0")
    v = np.array([1.0, -(x1 + x3) / x2, 1.0])
    return _quad_form(v, Sigma) / (4.0 * x2 * x2)


def var_ratio(gamma_pair, Sigma) -> float:
    """Variance of gamma_hat(n+1)/gamma_hat(n); pair and Sigma ordered (gamma(n+1), gamma(n))."""
    num, den = (float(v) for v in gamma_pair)
    if den == 0:
        raise DomainError("gamma(n) = 0")
    S = np.asarray(Sigma, dtype=float)
    return float(S[0, 0] / den ** 2 + num ** 2 * S[1, 1] / den ** 4 - 2.0 * num * S[0, 1] / den ** 3)


@dataclass(frozen=True)
class EstimatorConfig:
    acvf: AcvfConfig = AcvfConfig()
    level: float = 0.95
    alpha: float = 0.05
    rate_exponent: float = 0.5
    truncation: int | None = None


def _ci(phi: float, variance: float, rate: float, level: float):
    if not math.isfinite(variance):
        nan = float("nan")
        return (nan, nan), (nan, nan)
    half = norm.ppf(0.5 + level / 2.0) * math.sqrt(max(variance, 0.0)) / rate
    raw = (phi - half, phi + half)
    return (max(0.0, raw[0]), min(1.0, raw[1])), raw


def _root_and_variance(est, N, r_N, Sigma):
    triple = (est.gamma(N + 1), est.gamma(N), est.gamma(N - 1))
    plus, minus, g = quadratic_roots(*triple, r_N)
    if g > 0:
        vp = var_quadratic(triple, r_N, Sigma, "plus")
        vm = var_quadratic(triple, r_N, Sigma, "minus")
    else:
        vp = vm = var_degenerate(triple, Sigma)
    return triple, (plus, minus), (vp, vm)


def estimate(series, N: int, noise: NoiseSpec | Mapping[int, float] | float,
             config: EstimatorConfig | None = None) -> PhiEstimate:
    """Estimate phi at lag N, selecting the branch through the assumption tests.

    Steps: test gamma(N) = 0 (two-sided).  If not rejected, use the zero-gamma
    estimator, which needs r(N) != 0.  Otherwise test g = 0 against g > 0; if
    not rejected use the degenerate estimator, else the quadratic with the root
    picked by :func:`choose_root` (using a second noise lag when supplied).
    """
    config = config or EstimatorConfig()
    if not isinstance(noise, NoiseSpec):
        noise = NoiseSpec(noise if isinstance(noise, Mapping) else {N: float(noise)})
    if N < 1:
        raise DomainError(f"lag N must be >= 1, got {N}")
    if N not in noise:
        raise DomainError(f"noise spec has no entry for lag {N}")
    r_N = noise[N]
    others = noise.other_lags(N)
    top = max([N + 1] + [k + 1 for k in others[:1]])
    est = estimate_acvf(series, list(range(max(0, N - 1), top + 1)), config.acvf,
                        config.rate_exponent, config.truncation)
    tests = []
    try:
        t0 = hypothesis.test_gamma_zero(est, N, config.alpha, truncation=config.truncation)
    except TestUnavailableError:
        if est.gamma(N) == 0 and r_N == 0:
            raise UninformativeLagError(
                f"gamma_hat({N}) = 0 and r({N}) = 0: the lag provides no information about phi")
        raise UninformativeLagError("the series has no estimable second-order structure at this lag")
    tests.append(t0)
    rate = est.rate
    lagsN = [N + 1, N, N - 1]

    if not t0.reject:
        if r_N == 0:
            raise UninformativeLagError(
                f"gamma({N}) = 0 is not rejected and r({N}) = 0: the lag provides no information about phi")
        res = phi_zero_gamma(est.gamma(N + 1), est.gamma(N - 1), r_N)
        try:
            var = var_zero_gamma(est.gamma(N + 1), est.gamma(N - 1), r_N,
                                 est.sigma_matrix([N + 1, N - 1], config.truncation))
        except DomainError:
            var = float("nan")
        ci, ci_raw = _ci(res.phi, var, rate, config.level)
        return replace(res, variance=var, ci=ci, ci_raw=ci_raw, level=config.level,
                       lag_used=N, tests=tuple(tests))

    t1 = hypothesis.test_g_zero(est, N, r_N, config.alpha, truncation=config.truncation)
    tests.append(t1)
    Sigma = est.sigma_matrix(lagsN, config.truncation)
    triple = (est.gamma(N + 1), est.gamma(N), est.gamma(N - 1))
    if not t1.reject:
        res = phi_degenerate(*triple)
        var = var_degenerate(triple, Sigma)
        ci, ci_raw = _ci(res.phi, var, rate, config.level)
        return replace(res, variance=var, ci=ci, ci_raw=ci_raw, level=config.level,
                       lag_used=N, tests=tuple(tests))

    triple, (plus, minus), (vp, vm) = _root_and_variance(est, N, r_N, Sigma)
    a_N = r_N / triple[1]
    second = None
    se = (0.0, 0.0)
    if others and 0 < a_N < 1:
        M2 = others[0]
        r2 = noise[M2]
        S2 = est.sigma_matrix([M2 + 1, M2, M2 - 1], config.truncation)
        triple2, (p2, m2), (vp2, vm2) = _root_and_variance(est, M2, r2, S2)
        if triple2[1] != 0:
            second = (p2, m2, r2 / triple2[1])
            se = (math.sqrt(max(vp, vm)) / rate, math.sqrt(max(vp2, vm2)) / rate)
    raw, formula, ambiguous = choose_root((plus, minus), triple[1], a_N, second, se=se)
    var = vp if formula == "quadratic-plus" else vm
    phi, clamped = _clamp(raw)
    ci, ci_raw = _ci(phi, var, rate, config.level)
    return PhiEstimate(phi=phi, formula=formula, clamped=clamped, raw=raw, variance=var,
                       ci=ci, ci_raw=ci_raw, level=config.level, ambiguous=ambiguous,
                       lag_used=N, candidates=(plus, minus), tests=tuple(tests))
