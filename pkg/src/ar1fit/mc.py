"""
Monte Carlo harness for the phi estimator over (phi, N, T) grids.

Each replicate series is generated from a seed derived from
(base seed, process tag, T, phi, replicate), estimated at every
lag in the grid with the quadratic minus-root estimator under the process's
own noise autocovariance, and aggregated per cell.  Work is split into
(phi, T, replicate-block) units; results are reassembled by replicate index,
so any worker count gives bit-identical tables.
"""

from __future__ import annotations

import csv
import io
import os
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import AcvfConfig, acvf_vector
from .errors import DomainError
from .formats import fmt_num
from .estimator import phi_quadratic
from .simgen import gen_ar1, gen_arma, make_rng

__all__ = [
    "GridSpec",
    "McSummary",
    "CellResult",
    "GridResult",
    "summary_stats",
    "histogram",
    "run_grid",
    "noise_acvf",
    "DEFAULT_PHIS",
    "DEFAULT_LAGS",
    "DEFAULT_TS",
    "DEFAULT_THETAS",
]

DEFAULT_PHIS = tuple(round(0.1 * i, 1) for i in range(1, 10))
DEFAULT_LAGS = tuple(range(1, 11))
DEFAULT_TS = (50, 500, 5000, 50000)
DEFAULT_THETAS = (0.8, 0.3)

_BLOCK = 100
_PROCESS_TAG = {"ar1": 1, "arma": 2}


@dataclass(frozen=True)
class GridSpec:
    process: str = "ar1"
    phis: tuple[float, ...] = DEFAULT_PHIS
    lags: tuple[int, ...] = DEFAULT_LAGS
    T_values: tuple[int, ...] = DEFAULT_TS
    replicates: int = 1000
    seed: int = 0
    thetas: tuple[float, ...] = ()
    sigma2: float = 1.0
    bins: int = 30

    def __post_init__(self):
        if self.process not in _PROCESS_TAG:
            raise DomainError(f"process must be 'ar1' or 'arma', got {self.process!r}")
        if self.replicates < 1:
            raise DomainError("replicates must be >= 1")
        if not (self.phis and self.lags and self.T_values):
            raise DomainError("grids must be non-empty")
        if min(self.lags) < 1:
            raise DomainError("lags must be >= 1")
        for T in self.T_values:
            if T < max(self.lags) + 3:
                raise DomainError(f"T={T} too short for lag {max(self.lags)}")
        if self.process == "arma" and not self.thetas:
            object.__setattr__(self, "thetas", DEFAULT_THETAS)
        if self.process == "ar1":
            object.__setattr__(self, "thetas", ())
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))
        object.__setattr__(self, "lags", tuple(int(n) for n in self.lags))
        object.__setattr__(self, "T_values", tuple(int(t) for t in self.T_values))
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))


@dataclass(frozen=True)
class McSummary:
    max: float
    min: float
    mean: float
    median: float
    sd: float
    mad: float
    skewness: float
    bin_edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in ("max", "min", "mean", "median", "sd", "mad", "skewness")}


@dataclass(frozen=True)
class CellResult:
    T: int
    N: int
    phi: float
    estimates: np.ndarray = field(repr=False)
    failures: int
    summary: McSummary | None

    @property
    def mean(self) -> float:
        ok = self.estimates[np.isfinite(self.estimates)]
        return float(ok.mean()) if ok.size else float("nan")


@dataclass
class GridResult:
    spec: GridSpec
    cells: dict = field(default_factory=dict)  # (T, N, phi) -> CellResult

    def cell(self, T, N, phi) -> CellResult:
        return self.cells[(int(T), int(N), float(phi))]

    def mean_table(self, T) -> np.ndarray:
        """Rows = lags, columns = phis."""
        return np.array([[self.cell(T, N, p).mean for p in self.spec.phis] for N in self.spec.lags])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "N"] + [f"phi={repr(p)}" for p in self.spec.phis])
        for T in self.spec.T_values:
            for N in self.spec.lags:
                w.writerow([T, N] + [fmt_num(self.cell(T, N, p).mean) for p in self.spec.phis])
        return buf.getvalue()

    def to_text(self) -> str:
        out = []
        for T in self.spec.T_values:
            out.append(f"T = {T}, replicates = {self.spec.replicates}, process = {self.spec.process}")
            head = "N/phi " + "".join(f"{p:>7.1f}" for p in self.spec.phis)
            out.append(head)
            for N in self.spec.lags:
                out.append(f"{N:<6}" + "".join(f"{self.cell(T, N, p).mean:>7.2f}" for p in self.spec.phis))
            out.append("")
        return "\n".join(out)

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["max", "min", "mean", "median", "sd", "mad", "skewness"]
        w.writerow(["T", "N", "phi", "replicates", "failures"] + cols)
        for (T, N, p), c in sorted(self.cells.items()):
            row = c.summary.as_row() if c.summary else {k: float("nan") for k in cols}
            w.writerow([T, N, repr(p), c.estimates.size, c.failures] + [fmt_num(row[k]) for k in cols])
        return buf.getvalue()

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "N", "phi", "bin_left", "bin_right", "count"])
        for (T, N, p), c in sorted(self.cells.items()):
            if c.summary is None:
                continue
            e, n = c.summary.bin_edges, c.summary.counts
            for i in range(n.size):
                w.writerow([T, N, repr(p), fmt_num(e[i]), fmt_num(e[i + 1]), int(n[i])])
        return buf.getvalue()


def summary_stats(estimates: Sequence[float], bins: int = 30) -> McSummary:
    """max, min, mean, median, sd (R-1), scaled mad, moment skewness, histogram."""
    x = np.asarray(estimates, dtype=float)
    if x.size < 2:
        raise DomainError(f"need at least 2 estimates, got {x.size}")
    med = float(np.median(x))
    mean = float(np.mean(x))
    d = x - mean
    m2 = float(np.mean(d * d))
    m3 = float(np.mean(d * d * d))
    skew = m3 / m2 ** 1.5 if m2 > 0 else 0.0
    edges, counts = histogram(x, bins)
    return McSummary(
        max=float(x.max()),
        min=float(x.min()),
        mean=mean,
        median=med,
        sd=float(np.std(x, ddof=1)),
        mad=1.4826 * float(np.median(np.abs(x - med))),
        skewness=float(skew),
        bin_edges=edges,
        counts=counts,
    )


def histogram(estimates: Sequence[float], bins: int = 30):
    """Equal-width bins over [0, 1]; returns (edges, counts)."""
    if int(bins) != bins or bins < 1:
        raise DomainError(f"bins must be a positive integer, got {bins}")
    counts, edges = np.histogram(np.asarray(estimates, dtype=float), bins=int(bins), range=(0.0, 1.0))
    return edges, counts


def noise_acvf(spec: GridSpec, max_lag: int) -> np.ndarray:
    """r(0..max_lag) of the MA part (zero beyond its order; r = 0 off lag 0 for AR(1))."""
    th = np.r_[1.0, spec.thetas]
    r = np.zeros(max_lag + 1)
    for n in range(min(max_lag, th.size - 1) + 1):
        r[n] = spec.sigma2 * float(np.dot(th[: th.size - n], th[n:]))
    return r


def _phi_key(phi: float) -> int:
    return int(round(phi * 1_000_000))


def _work_unit(args):
    spec, phi_idx, T, start, stop = args
    phi = spec.phis[phi_idx]
    lags = np.asarray(spec.lags)
    cfg = AcvfConfig(max_lag=int(lags.max()) + 1)
    r = noise_acvf(spec, cfg.max_lag)[lags]
    tag = _PROCESS_TAG[spec.process]
    out = np.empty((stop - start, lags.size))
    for row, rep in enumerate(range(start, stop)):
        rng = make_rng(spec.seed, tag, T, _phi_key(phi), rep)
        if spec.process == "ar1":
            x = gen_ar1(phi, spec.sigma2, T, rng)
        else:
            x = gen_arma(phi, spec.thetas, spec.sigma2, T, rng)
        g = acvf_vector(x, cfg).gamma_hat
        out[row] = phi_quadratic(g[lags + 1], g[lags], g[lags - 1], r, "minus")
    return phi_idx, T, start, out


def default_workers() -> int:
    env = os.environ.get("AR1FIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_grid(spec: GridSpec, workers: int | None = None, progress=None) -> GridResult:
    """Simulate and estimate every (phi, N, T) cell of ``spec``.

    Non-finite estimates count as failures for their cell and are excluded
    from the summary statistics.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    R = spec.replicates
    units = [(spec, i, T, s, min(s + _BLOCK, R))
             for T in spec.T_values for i in range(len(spec.phis)) for s in range(0, R, _BLOCK)]
    store = {(i, T): np.empty((R, len(spec.lags))) for T in spec.T_values for i in range(len(spec.phis))}
    if workers == 1:
        results = map(_work_unit, units)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_work_unit, units, chunksize=1)
    try:
        for done, (i, T, s, block) in enumerate(results, 1):
            store[(i, T)][s:s + block.shape[0]] = block
            if progress:
                progress(done, len(units))
    finally:
        if workers != 1:
            pool.shutdown()
    res = GridResult(spec)
    for (i, T), arr in store.items():
        for j, N in enumerate(spec.lags):
            est = arr[:, j].copy()
            ok = np.isfinite(est)
            summ = summary_stats(est[ok], spec.bins) if ok.sum() >= 2 else None
            res.cells[(T, N, spec.phis[i])] = CellResult(T, N, spec.phis[i], est, int((~ok).sum()), summ)
    return res
