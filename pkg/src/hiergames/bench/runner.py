"""Experiment executor: sweep x seeds -> trajectory rows and aggregates.

Each run derives its randomness as (root seed, sweep index, seed value), so
a whole experiment is reproducible from the CLI seed alone and independent
runs can execute on a worker pool; results are keyed and sorted so the
output never depends on scheduling order.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ..games.base import GameOracle, NumericError
from ..games.bilevel import BilevelGame, BilevelParams, direct_equilibrium
from ..games.cournot import ConstrainedMlmfCournotGame, MlmfCournotGame, MlmfParams
from ..report import RunReport
from ..residuals import ResidualConfig, br_residual, yosida_residual
from ..rng import RandomStream
from ..solvers import sg, vr_spp
from ..solvers.smoothing import ArspbrConfig, SmoothingParams, arspbr_run
from ..solvers.vr_spp import SampleSchedule, VrSppConfig
from .spec import ExperimentSpec, SpecValidationError

CSV_COLUMNS = ("sweep_key", "seed", "iter", "residual", "residual_stderr", "samples_cum", "wall_ms")

# Stream derivation labels within one run.
_L_PARAMS, _L_X0, _L_SOLVE, _L_EVAL = "params", "x0", "solve", "eval"


@dataclass(frozen=True)
class RunRow:
    sweep_key: str
    seed: int
    iter: int
    residual: float
    residual_stderr: float
    samples_cum: int
    wall_ms: float


@dataclass(frozen=True)
class AggregateRow:
    sweep_key: str
    n_seeds: int
    mean_final_residual: float
    residual_std: float
    mean_wall_ms: float
    mean_samples: float
    mean_equilibrium_distance: float  # NaN unless an exact equilibrium exists


def build_game(game_cfg: dict[str, Any], stream: RandomStream) -> GameOracle:
    family = game_cfg["family"]
    if family in ("mlmf", "mlmf-constrained"):
        params = MlmfParams.sample(
            n_leaders=game_cfg["n_leaders"],
            n_followers=game_cfg["n_followers"],
            demand_slope=game_cfg["demand_slope"],
            a_range=tuple(game_cfg["a_range"]),
            leader_cost_range=tuple(game_cfg["leader_cost_range"]),
            follower_cost=game_cfg["follower_cost"],
            stream=stream,
            caps=game_cfg.get("cap"),
            constraint_noise_halfwidth=game_cfg.get("constraint_noise_halfwidth", 1.0),
        )
        if family == "mlmf-constrained":
            return ConstrainedMlmfCournotGame(params)
        return MlmfCournotGame(params)
    params = BilevelParams.sample(
        n_players=game_cfg["n_players"],
        stream=stream,
        curvature_range=tuple(game_cfg.get("curvature_range", (0.0, 100.0))),
        lower_quad=game_cfg.get("lower_quad", 3.0),
        lower_slope_range=tuple(game_cfg.get("lower_slope_range", (0.0, 3.0))),
        bound_slope_range=tuple(game_cfg.get("bound_slope_range", (0.0, 1.0))),
        a_range=tuple(game_cfg["a_range"]),
        coincident=game_cfg.get("coincident", False),
    )
    return BilevelGame(params)


def _draw_x0(game: GameOracle, spec: ExperimentSpec, stream: RandomStream) -> np.ndarray:
    family = spec.game["family"]
    if family == "mlmf-constrained":
        n = spec.game["n_leaders"]
        # Leaders start in [0, 1]; multipliers start at zero.
        return np.concatenate([stream.uniform(0.0, 1.0, n), np.zeros(n)])
    return stream.uniform(0.0, 1.0, game.layout.total_dim)


def _build_smoothing(cfg: dict[str, Any]) -> SmoothingParams:
    rule = cfg.get("steps_rule", "log-growth")
    return SmoothingParams(
        eta=cfg.get("eta", 0.1),
        prox_weight=cfg.get("prox_weight", 1.0),
        zeta=cfg.get("zeta", 0.01),
        batch_base=cfg.get("batch_base", 1.5),
        steps_rule=rule if rule == "log-growth" else int(rule),
    )


def _residual_hook(spec: ExperimentSpec, game, smoothing, eval_root: RandomStream, total_iters: int):
    cfg = spec.residual
    cadence = cfg.get("cadence", "final")

    def due(k: int) -> bool:
        if cadence == "final":
            return k == total_iters
        return k % int(cadence) == 0 or k == total_iters

    if cfg.get("kind", "yosida") == "br":
        extra = int(cfg.get("extra_steps", 8))
        zeta_scale = float(cfg.get("eval_zeta_scale", 0.2))

        def hook_br(k: int, x: np.ndarray):
            if not due(k):
                return None
            steps = smoothing.inner_steps(max(total_iters, 1)) + extra
            value = br_residual(
                game, smoothing, x, steps, eval_root.derive(k),
                eval_zeta=zeta_scale * smoothing.zeta,
            )
            return value, 0.0

        return hook_br

    rc = ResidualConfig(
        lam=cfg.get("lam", 0.1),
        theta=cfg.get("theta", 0.1),
        inner_steps=cfg.get("inner_steps", 10_000),
        samples_per_step=cfg.get("samples_per_step", 1),
        repeats=cfg.get("repeats", 5),
    )

    def hook_yosida(k: int, x: np.ndarray):
        if not due(k):
            return None
        return yosida_residual(game, x, rc, eval_root.derive(k))

    return hook_yosida


def run_single(spec: ExperimentSpec, sweep_key: str, seed: int, root_seed: int) -> tuple[list[RunRow], RunReport, float]:
    """One (sweep point, seed) run; returns rows, the report, and the
    distance to the exact equilibrium when one is available (else NaN).

    Instance parameters derive from the sweep point alone, so the seed list
    averages algorithmic randomness over one fixed game per sweep point.
    """
    sweep_stream = RandomStream(root_seed).derive(sweep_key)
    game = build_game(spec.game, sweep_stream.derive(_L_PARAMS))
    run_stream = sweep_stream.derive(seed)
    x0 = _draw_x0(game, spec, run_stream.derive(_L_X0))

    solver_cfg = spec.solver
    kind = solver_cfg["kind"]
    budget = spec.budget
    smoothing = _build_smoothing(solver_cfg.get("smoothing", {})) if kind == "arspbr" else None

    if kind == "vr-spp":
        outer = budget.get("outer_iters")
        if outer is None:
            outer = _vrspp_iters_for_samples(solver_cfg, budget["max_samples"])
        config = VrSppConfig(
            lam=solver_cfg["lam"],
            theta=solver_cfg["theta"],
            schedule=SampleSchedule(
                kind=solver_cfg["schedule"]["kind"],
                param=solver_cfg["schedule"]["param"],
                cap=solver_cfg["schedule"].get("cap", 1_000_000),
            ),
            outer_iters=outer,
            min_inner_steps=solver_cfg.get("min_inner_steps", 10),
            growing_min_steps=solver_cfg.get("growing_min_steps", False),
            max_samples=budget.get("max_samples"),
        )
        hook = _residual_hook(spec, game, smoothing, run_stream.derive(_L_EVAL), config.outer_iters)
        report = vr_spp.run(game, config, x0, run_stream.derive(_L_SOLVE), hook)
    elif kind == "sg":
        iters = budget.get("total_iters", budget.get("max_samples", budget.get("outer_iters")))
        config = sg.SgConfig(
            alpha0=solver_cfg["alpha0"],
            total_iters=iters,
            record_every=solver_cfg.get("record_every", max(1, iters // 100 or 1)),
        )
        hook = _residual_hook(spec, game, smoothing, run_stream.derive(_L_EVAL), iters)
        report = sg.run(game, config, x0, run_stream.derive(_L_SOLVE), hook)
    else:
        outer = budget.get("outer_iters", budget.get("total_iters"))
        if outer is None:
            # Sample-budget-only runs: iterate until the cutoff trips.
            outer = 10**9
        gammas = solver_cfg.get("gammas")
        config = ArspbrConfig(
            outer_iters=outer,
            relaxation=solver_cfg.get("relaxation", "constant"),
            gamma=solver_cfg.get("gamma", 1.0),
            exponent=solver_cfg.get("exponent", 0.51),
            gammas=tuple(gammas) if gammas else None,
            record_every=solver_cfg.get("record_every", max(1, outer // 50 or 1)),
            max_samples=budget.get("max_samples"),
        )
        hook = _residual_hook(spec, game, smoothing, run_stream.derive(_L_EVAL), outer)
        report = arspbr_run(game, smoothing, config, x0, run_stream.derive(_L_SOLVE), hook)

    eq_dist = float("nan")
    if spec.game["family"] == "bilevel" and spec.game.get("coincident", False):
        star = direct_equilibrium(game.params)
        eq_dist = float(np.linalg.norm(report.final_iterate - star))

    lookup = dict(zip(report.recorded_iters, zip(report.samples_used, report.wall_ms)))
    rows = [
        RunRow(
            sweep_key=sweep_key,
            seed=seed,
            iter=k,
            residual=val,
            residual_stderr=err,
            samples_cum=lookup[k][0],
            wall_ms=lookup[k][1],
        )
        for (k, val, err) in report.residuals
    ]
    return rows, report, eq_dist


def _vrspp_iters_for_samples(solver_cfg: dict[str, Any], max_samples: int) -> int:
    sched = SampleSchedule(
        kind=solver_cfg["schedule"]["kind"],
        param=solver_cfg["schedule"]["param"],
        cap=solver_cfg["schedule"].get("cap", 1_000_000),
    )
    floor = solver_cfg.get("min_inner_steps", 10)
    total, k = 0, 0
    while total < max_samples:
        total += max(floor, sched.size(k))
        k += 1
    return k


def _run_job(args) -> tuple[int, int, list[RunRow], float, RunReport | None]:
    spec_idx_resolved, sweep_idx, seed_idx, seed, sweep_key, root_seed = args
    try:
        rows, report, eq = run_single(spec_idx_resolved, sweep_key, seed, root_seed)
    except NumericError:
        # Mark the run failed (NaN residual at iteration -1) instead of
        # aborting the sweep; the CLI turns any failed row into exit code 2.
        failed = RunRow(sweep_key, seed, -1, float("nan"), float("nan"), 0, 0.0)
        return sweep_idx, seed_idx, [failed], float("nan"), None
    return sweep_idx, seed_idx, rows, eq, report


def run_experiment(
    spec: ExperimentSpec, root_seed: int, jobs: int = 1
) -> tuple[list[AggregateRow], list[RunRow], dict[tuple[str, int], RunReport]]:
    """Execute every (sweep point x seed) run; deterministic in root_seed.

    Returns aggregates, trajectory rows, and the per-run reports keyed by
    (sweep key, seed).
    """
    tasks = []
    for sweep_idx in range(len(spec.sweep_values)):
        resolved = spec.resolved(sweep_idx)
        key = spec.sweep_key(sweep_idx)
        for seed_idx, seed in enumerate(spec.seeds):
            tasks.append((resolved, sweep_idx, seed_idx, seed, key, root_seed))

    results: dict[tuple[int, int], tuple[list[RunRow], float, RunReport]] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for sweep_idx, seed_idx, rows, eq, report in pool.map(_run_job, tasks):
                results[(sweep_idx, seed_idx)] = (rows, eq, report)
    else:
        for task in tasks:
            sweep_idx, seed_idx, rows, eq, report = _run_job(task)
            results[(sweep_idx, seed_idx)] = (rows, eq, report)

    all_rows: list[RunRow] = []
    aggregates: list[AggregateRow] = []
    reports: dict[tuple[str, int], RunReport] = {}
    for sweep_idx in range(len(spec.sweep_values)):
        key = spec.sweep_key(sweep_idx)
        finals, eqs, walls, totals = [], [], [], []
        for seed_idx, seed in enumerate(spec.seeds):
            rows, eq, report = results[(sweep_idx, seed_idx)]
            all_rows.extend(rows)
            if not rows:
                raise SpecValidationError([f"run {key}/seed={seed} recorded no residuals"])
            if report is not None:
                reports[(key, seed)] = report
            finals.append(rows[-1].residual)
            walls.append(rows[-1].wall_ms)
            totals.append(report.total_samples if report is not None else 0)
            eqs.append(eq)
        finals_arr = np.asarray(finals)
        aggregates.append(
            AggregateRow(
                sweep_key=key,
                n_seeds=len(spec.seeds),
                mean_final_residual=float(finals_arr.mean()),
                residual_std=float(finals_arr.std(ddof=1)) if len(finals) > 1 else 0.0,
                mean_wall_ms=float(np.mean(walls)),
                mean_samples=float(np.mean(totals)),
                mean_equilibrium_distance=float(np.mean(eqs)),
            )
        )
    return aggregates, all_rows, reports


def emit_csv(rows: list[RunRow], path: str | Path) -> None:
    """Write trajectory rows (UTF-8, '.' decimal, exact column set)."""
    if not rows:
        raise SpecValidationError(["rows: nothing to emit (no residual points recorded)"])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.sweep_key,
                    r.seed,
                    r.iter,
                    _fmt(r.residual),
                    _fmt(r.residual_stderr),
                    r.samples_cum,
                    _fmt(r.wall_ms),
                ]
            )


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def read_csv_rows(path: str | Path) -> list[RunRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise SpecValidationError([f"{path}: unexpected columns {reader.fieldnames}"])
        return [
            RunRow(
                sweep_key=row["sweep_key"],
                seed=int(row["seed"]),
                iter=int(row["iter"]),
                residual=float(row["residual"]),
                residual_stderr=float(row["residual_stderr"]),
                samples_cum=int(row["samples_cum"]),
                wall_ms=float(row["wall_ms"]),
            )
            for row in reader
        ]


def aggregate_rows(rows: list[RunRow]) -> list[AggregateRow]:
    """Recompute per-sweep aggregates from trajectory rows (final iter per
    (sweep_key, seed))."""
    finals: dict[str, dict[int, RunRow]] = {}
    order: list[str] = []
    for row in rows:
        if row.sweep_key not in finals:
            finals[row.sweep_key] = {}
            order.append(row.sweep_key)
        per_seed = finals[row.sweep_key]
        if row.seed not in per_seed or row.iter > per_seed[row.seed].iter:
            per_seed[row.seed] = row
    out = []
    for key in order:
        rows_k = list(finals[key].values())
        res = np.asarray([r.residual for r in rows_k])
        out.append(
            AggregateRow(
                sweep_key=key,
                n_seeds=len(rows_k),
                mean_final_residual=float(res.mean()),
                residual_std=float(res.std(ddof=1)) if len(rows_k) > 1 else 0.0,
                mean_wall_ms=float(np.mean([r.wall_ms for r in rows_k])),
                mean_samples=float(np.mean([r.samples_cum for r in rows_k])),
                mean_equilibrium_distance=float("nan"),
            )
        )
    return out


def markdown_table(aggregates: list[AggregateRow]) -> str:
    lines = [
        "| sweep | seeds | mean final residual | residual std | mean wall ms | mean samples | mean dist. to exact eq. |",
        "| --- | --- | --- | --- | --- | --- | --- |",
    ]
    for a in aggregates:
        eq = "-" if math.isnan(a.mean_equilibrium_distance) else f"{a.mean_equilibrium_distance:.3e}"
        lines.append(
            f"| {a.sweep_key} | {a.n_seeds} | {a.mean_final_residual:.3e} | "
            f"{a.residual_std:.3e} | {a.mean_wall_ms:.1f} | {a.mean_samples:.0f} | {eq} |"
        )
    return "\n".join(lines) + "\n"


def write_summary(aggregates: list[AggregateRow], out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["sweep_key", "n_seeds", "mean_final_residual", "residual_std",
             "mean_wall_ms", "mean_samples", "mean_equilibrium_distance"]
        )
        for a in aggregates:
            writer.writerow(
                [a.sweep_key, a.n_seeds, _fmt(a.mean_final_residual), _fmt(a.residual_std),
                 _fmt(a.mean_wall_ms), _fmt(a.mean_samples), _fmt(a.mean_equilibrium_distance)]
            )
    (out / "summary.md").write_text(markdown_table(aggregates), encoding="utf-8")
