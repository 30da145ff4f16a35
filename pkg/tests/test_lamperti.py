import math

import numpy as np
import pytest

from ar1fit.core import TimeSeries
from ar1fit.errors import DomainError
from ar1fit.lamperti import (
    IncrementPath,
    SelfSimilarPath,
    construct_G,
    lamperti_forward,
    lamperti_inverse,
    reconstruct_from_increments,
    truncated_limit_sums,
    verify_langevin,
)
from ar1fit.simgen import gen_ar1, make_rng


def brute_G(y, H, t0):
    """G_t from the defining sums, one index at a time."""
    idx = range(t0, t0 + len(y))
    Y = dict(zip(idx, y))
    out = []
    for t in idx:
        if t >= 1:
            out.append(sum(math.exp(-k * H) * (Y[k] - Y[k - 1]) for k in range(1, t + 1)))
        elif t == 0:
            out.append(0.0)
        else:
            out.append(-sum(math.exp(-k * H) * (Y[k] - Y[k - 1]) for k in range(t + 1, 1)))
    return np.array(out)


class TestTransform:
    def test_forward_values(self):
        Y = lamperti_forward([1.0, 2.0, 3.0], 0.5, t0=-1)
        assert np.allclose(Y.values, [math.exp(-0.5), 2.0, 3.0 * math.exp(0.5)])

    def test_round_trip(self):
        x = make_rng(41).normal(size=30)
        Y = lamperti_forward(x, 0.3, t0=-10)
        assert np.max(np.abs(lamperti_inverse(Y) - x)) <= 1e-12

    def test_time_series_index_used(self):
        Y = lamperti_forward(TimeSeries([1.0, 1.0, 1.0], t0=2), 1.0, t0=99)
        assert Y.t0 == 2

    def test_rejects_nonpositive_H(self):
        with pytest.raises(DomainError):
            lamperti_forward([1.0, 2.0, 3.0], 0.0)


class TestIncrements:
    @pytest.mark.parametrize("t0", [-6, 0, -1])
    def test_construct_matches_definition(self, t0):
        x = make_rng(42).normal(size=12)
        Y = lamperti_forward(x, 0.7, t0=t0)
        G = construct_G(Y)
        assert G.at(0) == 0.0
        assert np.allclose(G.values, brute_G(Y.values, 0.7, t0), atol=1e-12)

    def test_range_must_contain_zero(self):
        with pytest.raises(DomainError):
            construct_G(SelfSimilarPath(np.ones(5), 0.5, t0=1))
        with pytest.raises(DomainError):
            construct_G(SelfSimilarPath(np.ones(1), 0.5, t0=0))

    def test_langevin_residual(self):
        x = gen_ar1(0.6, 1.0, 40, make_rng(43))
        Y = lamperti_forward(x, 0.9, t0=-20)
        G = construct_G(Y)
        assert verify_langevin(x, 0.9, G, t0=-20) <= 1e-10

    def test_langevin_index_mismatch(self):
        x = np.ones(5)
        G = construct_G(lamperti_forward(x, 0.5, t0=-2))
        with pytest.raises(DomainError):
            verify_langevin(x, 0.5, G, t0=-1)


class TestReconstruction:
    def test_pointwise(self):
        x = make_rng(44).normal(size=25)
        H = 0.4
        G = construct_G(lamperti_forward(x, H, t0=-12))
        for t, M in [(5, 3), (12, 20), (0, 0), (-3, 4)]:
            assert reconstruct_from_increments(G, H, x, t, M, t0=-12) == pytest.approx(x[t + 12], abs=1e-10)

    def test_needs_history(self):
        x = np.ones(6)
        G = construct_G(lamperti_forward(x, 0.4, t0=-2))
        with pytest.raises(DomainError):
            reconstruct_from_increments(G, 0.4, x, 1, 3, t0=-2)

    def test_limit_sums_converge_for_stationary_input(self):
        x = gen_ar1(0.5, 1.0, 200, make_rng(45))
        H = 0.5
        G = construct_G(lamperti_forward(x, H, t0=-199))
        S = truncated_limit_sums(G, H)
        # S_k telescopes to X_0 - e^{(k-1)H} X_{k-1}; the tail term dies out
        assert abs(S[-1] - x[199]) < 1e-10 + math.exp(-198 * H) * 10
        with pytest.raises(DomainError):
            truncated_limit_sums(construct_G(lamperti_forward(x, H, t0=0)), H)


class TestWorkedValues:
    def test_constant_input_doubles(self):
        Y = lamperti_forward(np.ones(6), math.log(2.0), t0=-2)
        assert np.allclose(Y.values, 2.0 ** np.arange(-2, 4), rtol=1e-15)

    def test_zero_path_gives_zero_G(self):
        G = construct_G(SelfSimilarPath(np.zeros(8), 0.5, t0=-4))
        assert np.all(np.asarray(G.values) == 0.0)

    def test_perturbed_G_residual(self):
        x = gen_ar1(0.6, 1.0, 20, make_rng(44))
        G = construct_G(lamperti_forward(x, 0.5, t0=-10))
        vals = np.array(G.values, dtype=float)
        vals[12] += 0.25
        bad = IncrementPath(vals, G.t0)
        assert verify_langevin(x, 0.5, bad, t0=-10) == pytest.approx(0.25, rel=1e-9)

    @pytest.mark.parametrize("H", [0.1, 0.5, 2.0])
    def test_limit_sums_stabilise(self, H):
        # history long enough for e^{tH} to decay, short enough to stay finite
        n = int(300 / H)
        x = gen_ar1(0.5, 1.0, n, make_rng(45))
        S = truncated_limit_sums(construct_G(lamperti_forward(x, H, t0=1 - n)), H)
        assert abs(S[-1] - S[-n // 4]) < 1e-8
