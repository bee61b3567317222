"""Shared fixtures and small synthetic games used across the suite."""

from __future__ import annotations

import numpy as np
import pytest

from hiergames import FeasibleSet, GameOracle, PlayerLayout, RandomStream
from hiergames.games.bilevel import BilevelParams
from hiergames.games.cournot import MlmfParams


class LinearToy(GameOracle):
    """Noise-free single player with operator slope * x + offset.

    slope = 0 gives the zero operator; the objective is the matching
    quadratic slope * v^2 / 2 + offset * v.
    """

    def __init__(self, slope: float = 1.0, offset: float = 0.0, nonneg: bool = False):
        self.slope = float(slope)
        self.offset = float(offset)
        self.layout = PlayerLayout.scalar_players(1)
        self.feasible = FeasibleSet.nonneg(1) if nonneg else FeasibleSet.free(1)

    def operator_sample(self, x, stream):
        return self.slope * np.asarray(x, float) + self.offset

    def objective_sample(self, i, x, stream):
        v = float(np.asarray(x, float)[0])
        return 0.5 * self.slope * v * v + self.offset * v

    def objective_sample_batch(self, i, own, x, stream):
        own = np.asarray(own, float).reshape(-1)
        return 0.5 * self.slope * own * own + self.offset * own


class QuadraticToy(GameOracle):
    """One player, objective kappa (v - m)^2 / 2 (+ a |v| + linear noise).

    ``noise`` adds sigma * w * v with w ~ U(-1, 1), keeping the minimizer in
    place while making the value oracle genuinely stochastic.
    """

    def __init__(self, kappa: float, m: float = 0.0, abs_weight: float = 0.0, noise: float = 0.0):
        self.kappa = float(kappa)
        self.m = float(m)
        self.abs_weight = float(abs_weight)
        self.noise = float(noise)
        self.layout = PlayerLayout.scalar_players(1)
        self.feasible = FeasibleSet.free(1)

    def _value(self, v, w):
        base = 0.5 * self.kappa * (v - self.m) ** 2 + self.abs_weight * np.abs(v)
        return base + self.noise * w * v

    def operator_sample(self, x, stream):
        v = np.asarray(x, float)
        w = stream.uniform(-1.0, 1.0) if self.noise else 0.0
        return self.kappa * (v - self.m) + self.abs_weight * np.sign(v) + self.noise * w

    def objective_sample(self, i, x, stream):
        w = stream.uniform(-1.0, 1.0) if self.noise else 0.0
        return float(self._value(float(np.asarray(x, float)[0]), w))

    def objective_sample_batch(self, i, own, x, stream):
        own = np.asarray(own, float).reshape(-1)
        w = stream.uniform(-1.0, 1.0, own.size) if self.noise else np.zeros(own.size)
        return self._value(own, w)

    def prox_best_response(self, c: float, center: float) -> float:
        """Exact minimizer of value + c (v - center)^2 / 2."""
        if self.abs_weight == 0.0:
            return (self.kappa * self.m + c * center) / (self.kappa + c)
        w = self.kappa * self.m + c * center
        mag = max(abs(w) - self.abs_weight, 0.0)
        return float(np.sign(w) * mag / (self.kappa + c))


def make_mlmf_params(stream=None, n_leaders=13, n_followers=10, caps=None) -> MlmfParams:
    stream = stream or RandomStream(7).derive("params")
    return MlmfParams.sample(
        n_leaders=n_leaders,
        n_followers=n_followers,
        demand_slope=7.0,
        a_range=(33.0, 37.0),
        leader_cost_range=(0.0, 100.0),
        follower_cost=50.0,
        stream=stream,
        caps=caps,
    )


def make_bilevel_params(stream=None, n_players=13, coincident=False) -> BilevelParams:
    stream = stream or RandomStream(11).derive("params")
    return BilevelParams.sample(n_players, stream, coincident=coincident)


@pytest.fixture
def stream() -> RandomStream:
    return RandomStream(12345)
