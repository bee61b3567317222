"""Variance-reduced stochastic proximal-point solver.

The outer loop applies an inexact resolvent of the expectation-valued
operator: at step k it runs a projected stochastic-approximation loop on the
strongly monotone proximal subproblem

    0 in T(z) + (z - x_k) / lam

using fresh operator samples and steplengths theta / j, for a number of
steps given by a growing sample-size schedule.  Growing the inner budget is
what restores a deterministic outer rate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..games.base import GameOracle, NumericError
from ..report import RunReport
from ..rng import RandomStream

SCHEDULE_KINDS = ("polynomial", "geometric", "geometric-base")


@dataclass(frozen=True)
class SampleSchedule:
    """Inner sample-size rule N_k.

    polynomial(a):      N_k = ceil((k+1)^(2a)),  a > 1
    geometric(rho):     N_k = floor(rho^-(k+1)), 0 < rho < 1
    geometric-base(r):  N_k = floor(r^(k+1)),    r > 1

    Sizes are floored at 1 and capped at ``cap`` to keep geometric rules
    bounded on long runs.
    """

    kind: str
    param: float
    cap: int = 1_000_000

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "polynomial" and not self.param > 1:
            raise ValueError("polynomial schedule needs exponent a > 1")
        if self.kind == "geometric" and not 0 < self.param < 1:
            raise ValueError("geometric schedule needs 0 < rho < 1")
        if self.kind == "geometric-base" and not self.param > 1:
            raise ValueError("geometric-base schedule needs base > 1")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")

    def size(self, k: int) -> int:
        if k < 0:
            raise ValueError("k must be >= 0")
        if self.kind == "polynomial":
            n = math.ceil((k + 1) ** (2.0 * self.param))
        elif self.kind == "geometric":
            n = math.floor(self.param ** -(k + 1))
        else:
            n = math.floor(self.param ** (k + 1))
        return max(1, min(int(n), self.cap))


@dataclass(frozen=True)
class VrSppConfig:
    lam: float
    theta: float
    schedule: SampleSchedule
    outer_iters: int
    min_inner_steps: int = 10
    growing_min_steps: bool = False  # floor of min_inner_steps * sqrt(k+1)
    max_samples: int | None = None

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("prox parameter lam must be positive")
        if self.theta <= 0:
            raise ValueError("inner steplength scale theta must be positive")
        if self.outer_iters < 0:
            raise ValueError("outer_iters must be >= 0")
        if self.min_inner_steps < 1:
            raise ValueError("min_inner_steps must be >= 1")

    def inner_steps(self, k: int) -> int:
        floor = self.min_inner_steps
        if self.growing_min_steps:
            floor = int(math.ceil(self.min_inner_steps * math.sqrt(k + 1)))
        return max(floor, self.schedule.size(k))


def sample_schedule(config: VrSppConfig, k: int) -> int:
    """Scheduled inner sample count N_k (before the minimum-steps floor)."""
    return config.schedule.size(k)


def inner_resolvent(
    game: GameOracle,
    x_k: np.ndarray,
    lam: float,
    theta: float,
    n_steps: int,
    stream: RandomStream,
    samples_per_step: int = 1,
) -> np.ndarray:
    """Inexact evaluation of the resolvent (I + lam T)^{-1} at ``x_k``.

    Runs ``n_steps`` projected SA updates z <- proj(z - (theta/j) u) with
    u = v + (z - x_k)/lam and v a fresh operator sample at z.  A
    ``samples_per_step`` mini-batch is supported for measurement use; the
    solver itself always passes 1.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    x_k = np.asarray(x_k, dtype=float)
    z = x_k.copy()
    project = game.feasible.project
    for j in range(1, n_steps + 1):
        if samples_per_step == 1:
            v = game.operator_sample(z, stream)
        else:
            v = game.operator_sample_batch(z, samples_per_step, stream).mean(axis=0)
        u = v + (z - x_k) / lam
        z = project(z - (theta / j) * u)
        # A non-finite entry makes the sum non-finite (inf +/- inf is nan).
        if not math.isfinite(z.sum()):
            raise NumericError(f"inner SA produced a non-finite iterate at step {j}")
    return z


def run(
    game: GameOracle,
    config: VrSppConfig,
    x0: np.ndarray,
    stream: RandomStream,
    residual_hook=None,
) -> RunReport:
    """Outer proximal-point loop; deterministic given (config, stream).

    ``residual_hook(k, x)`` is called on every recorded iterate and may
    return ``(estimate, stderr)`` or None; hook cadence and sampling budget
    are the caller's business and are excluded from ``samples_used``.
    """
    x = np.asarray(x0, dtype=float).copy()
    if not game.feasible.contains(x):
        raise ValueError("x0 must lie in the feasible set")
    report = RunReport()
    samples = 0
    t0 = time.perf_counter()

    def note(k: int) -> None:
        report.record(k, x, samples, (time.perf_counter() - t0) * 1e3)
        if residual_hook is not None:
            res = residual_hook(k, x)
            if res is not None:
                report.residuals.append((k, float(res[0]), float(res[1])))

    note(0)
    for k in range(config.outer_iters):
        n_steps = config.inner_steps(k)
        try:
            x = inner_resolvent(game, x, config.lam, config.theta, n_steps, stream.derive(k))
        except NumericError as err:
            raise NumericError(f"outer iteration {k}: {err}") from err
        samples += n_steps
        note(k + 1)
        if config.max_samples is not None and samples >= config.max_samples:
            break
    report.validate()
    return report
