"""Declarative experiment descriptions.

An experiment is a single JSON document: a game family with parameters, one
solver with its configuration, an optional one-dimensional sweep, a seed
list, a budget, and a residual-evaluation policy.  ``validate_spec`` returns
every offending field at once so a bad file fails with one actionable error.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

GAME_FAMILIES = ("mlmf", "mlmf-constrained", "bilevel")
SOLVER_KINDS = ("vr-spp", "sg", "arspbr")
RESIDUAL_KINDS = ("yosida", "br")

DEFAULT_SEEDS = tuple(range(20))


class SpecValidationError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid experiment spec:\n  " + "\n  ".join(self.problems))


@dataclass
class ExperimentSpec:
    name: str
    game: dict[str, Any]
    solver: dict[str, Any]
    residual: dict[str, Any]
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    budget: dict[str, Any] = field(default_factory=dict)
    sweep: dict[str, Any] | None = None

    @property
    def sweep_values(self) -> list[Any]:
        if self.sweep is None:
            return [None]
        return list(self.sweep["values"])

    def sweep_key(self, idx: int) -> str:
        if self.sweep is None:
            return self.name
        return f"{self.sweep['path']}={self.sweep['values'][idx]}"

    def resolved(self, idx: int) -> "ExperimentSpec":
        """Copy with the idx-th sweep value applied to its target path."""
        out = ExperimentSpec(
            name=self.name,
            game=copy.deepcopy(self.game),
            solver=copy.deepcopy(self.solver),
            residual=copy.deepcopy(self.residual),
            seeds=self.seeds,
            budget=dict(self.budget),
            sweep=None,
        )
        if self.sweep is not None:
            _set_path(out, self.sweep["path"], self.sweep["values"][idx])
            # Optional parallel per-point budgets (smoothing sweeps need a
            # budget that grows as the radius shrinks).
            if "budgets" in self.sweep:
                out.budget = dict(self.sweep["budgets"][idx])
        return out


def _set_path(spec: ExperimentSpec, path: str, value: Any) -> None:
    head, *rest = path.split(".")
    if head not in ("game", "solver", "residual", "budget"):
        raise SpecValidationError([f"sweep.path must start with game/solver/residual/budget: {path}"])
    node: Any = getattr(spec, head)
    for part in rest[:-1]:
        node = node.setdefault(part, {})
    node[rest[-1]] = value


def load_spec(path: str | Path) -> ExperimentSpec:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return spec_from_dict(raw)


def spec_from_dict(raw: dict[str, Any]) -> ExperimentSpec:
    problems = validate_spec(raw)
    if problems:
        raise SpecValidationError(problems)
    return ExperimentSpec(
        name=raw["name"],
        game=dict(raw["game"]),
        solver=dict(raw["solver"]),
        residual=dict(raw["residual"]),
        seeds=tuple(int(s) for s in raw.get("seeds", DEFAULT_SEEDS)),
        budget=dict(raw.get("budget", {})),
        sweep=dict(raw["sweep"]) if raw.get("sweep") else None,
    )


def validate_spec(raw: dict[str, Any]) -> list[str]:
    """All problems with the document, as 'field: message' strings."""
    problems: list[str] = []
    if not isinstance(raw, dict):
        return ["spec: must be a JSON object"]
    if not isinstance(raw.get("name"), str) or not raw.get("name"):
        problems.append("name: required non-empty string")

    game = raw.get("game")
    if not isinstance(game, dict):
        problems.append("game: required object")
    else:
        family = game.get("family")
        if family not in GAME_FAMILIES:
            problems.append(f"game.family: must be one of {GAME_FAMILIES}")
        elif family in ("mlmf", "mlmf-constrained"):
            _check_positive_int(problems, game, "game", "n_leaders")
            _check_positive_int(problems, game, "game", "n_followers")
            _check_positive(problems, game, "game", "demand_slope")
            _check_range(problems, game, "game", "a_range")
            _check_range(problems, game, "game", "leader_cost_range", allow_equal=True)
            if not _is_number(game.get("follower_cost")) or game.get("follower_cost", -1) < 0:
                problems.append("game.follower_cost: must be a nonnegative number")
            if family == "mlmf-constrained":
                _check_positive(problems, game, "game", "cap")
                _check_positive(problems, game, "game", "constraint_noise_halfwidth")
        elif family == "bilevel":
            _check_positive_int(problems, game, "game", "n_players")
            _check_range(problems, game, "game", "a_range")

    solver = raw.get("solver")
    if not isinstance(solver, dict):
        problems.append("solver: required object")
    else:
        kind = solver.get("kind")
        if kind not in SOLVER_KINDS:
            problems.append(f"solver.kind: must be one of {SOLVER_KINDS}")
        elif kind == "vr-spp":
            _check_positive(problems, solver, "solver", "lam")
            _check_positive(problems, solver, "solver", "theta")
            sched = solver.get("schedule")
            if not isinstance(sched, dict) or "kind" not in sched or "param" not in sched:
                problems.append("solver.schedule: required object with kind and param")
        elif kind == "sg":
            _check_positive(problems, solver, "solver", "alpha0")
        elif kind == "arspbr":
            if not isinstance(solver.get("smoothing"), dict):
                problems.append("solver.smoothing: required object")
            if solver.get("relaxation", "constant") not in ("constant", "power"):
                problems.append("solver.relaxation: must be 'constant' or 'power'")

    sweep_budgets = isinstance(raw.get("sweep"), dict) and "budgets" in raw["sweep"]
    budget = raw.get("budget", {})
    if not isinstance(budget, dict):
        problems.append("budget: must be an object")
    else:
        has_iters = "outer_iters" in budget or "total_iters" in budget
        has_samples = "max_samples" in budget
        if not (has_iters or has_samples or sweep_budgets):
            problems.append("budget: needs outer_iters/total_iters or max_samples")
        for key in ("outer_iters", "total_iters"):
            # zero iterations is allowed: it reports the initial residual
            if key in budget and (not isinstance(budget[key], int) or budget[key] < 0):
                problems.append(f"budget.{key}: must be a nonnegative integer")
        if "max_samples" in budget and (
            not isinstance(budget["max_samples"], int) or budget["max_samples"] <= 0
        ):
            problems.append("budget.max_samples: must be a positive integer")

    seeds = raw.get("seeds", list(DEFAULT_SEEDS))
    if (
        not isinstance(seeds, list)
        or len(seeds) < 1
        or not all(isinstance(s, int) and s >= 0 for s in seeds)
    ):
        problems.append("seeds: must be a nonempty list of nonnegative integers")

    residual = raw.get("residual")
    if not isinstance(residual, dict):
        problems.append("residual: required object")
    else:
        if residual.get("kind", "yosida") not in RESIDUAL_KINDS:
            problems.append(f"residual.kind: must be one of {RESIDUAL_KINDS}")
        cadence = residual.get("cadence", "final")
        if cadence != "final" and (not isinstance(cadence, int) or cadence < 1):
            problems.append("residual.cadence: must be 'final' or a positive integer")

    sweep = raw.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or "path" not in sweep or "values" not in sweep:
            problems.append("sweep: must be an object with path and values")
        elif not isinstance(sweep["path"], str) or sweep["path"].split(".")[0] not in (
            "game", "solver", "residual", "budget"
        ):
            problems.append("sweep.path: must start with game/solver/residual/budget")
        elif not isinstance(sweep["values"], list) or not sweep["values"]:
            problems.append("sweep.values: must be a nonempty list")
        elif "budgets" in sweep and (
            not isinstance(sweep["budgets"], list) or len(sweep["budgets"]) != len(sweep["values"])
        ):
            problems.append("sweep.budgets: must parallel sweep.values")

    return problems


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_positive(problems: list[str], node: dict, prefix: str, key: str) -> None:
    if not _is_number(node.get(key)) or node[key] <= 0:
        problems.append(f"{prefix}.{key}: must be a positive number")


def _check_positive_int(problems: list[str], node: dict, prefix: str, key: str) -> None:
    if not isinstance(node.get(key), int) or node[key] < 1:
        problems.append(f"{prefix}.{key}: must be a positive integer")


def _check_range(problems: list[str], node: dict, prefix: str, key: str, allow_equal=False) -> None:
    val = node.get(key)
    ok = (
        isinstance(val, list)
        and len(val) == 2
        and all(_is_number(v) for v in val)
        and (val[0] <= val[1] if allow_equal else val[0] < val[1])
    )
    if not ok:
        problems.append(f"{prefix}.{key}: must be [lo, hi] with lo < hi")
