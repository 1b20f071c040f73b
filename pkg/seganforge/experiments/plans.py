"""Experiment plan presets, run enumeration and seed derivation

Seeds follow a counter-based scheme on ``numpy.random.SeedSequence``: the cell
(experiment, axis index, repeat) keys the data seed shared by every init mode, and the run seed
appends the init-mode index, so paired preeng/scratch runs see the same training data while
never sharing a training seed.
"""

import csv
from pathlib import Path

import numpy as np

from seganforge.exceptions import PlanError
from seganforge.models.schemas import Exp1Plan, Exp2Plan, InitMode, PlannedRun

EXPERIMENT_KEYS = {"exp1": 1, "exp2": 2}
# Stable per mode; independent of the order of plan.init_modes
MODE_KEYS: dict[str, int] = {"preeng": 1, "scratch": 2}

FULL_EXP1_DURATIONS_S = [24.0, 60.0, 120.0, 240.0, 600.0, 1200.0, 3000.0, 6000.0, 12000.0]
FULL_EXP1_REPEATS = [10, 10, 10, 5, 5, 5, 5, 5, 5]
DESK_EXP1_DURATIONS_S = [24.0, 60.0, 120.0, 600.0]
DESK_EXP1_REPEATS = [3, 3, 3, 2]

PLANNED_RUN_COLUMNS = ("run_id", "experiment", "axis", "repeat", "mode", "seed", "data_seed")


def exp1_preset(name: str) -> Exp1Plan:
    """``full``: full duration sweep on the canonical model; ``desk``: laptop-sized sweep."""
    if name == "full":
        return Exp1Plan(
            name="exp1-full",
            durations_s=FULL_EXP1_DURATIONS_S,
            repeats=FULL_EXP1_REPEATS,
            profile="canonical",
        )
    if name == "desk":
        return Exp1Plan(
            name="exp1-desk", durations_s=DESK_EXP1_DURATIONS_S, repeats=DESK_EXP1_REPEATS, profile="desk"
        )
    raise PlanError(f"Unknown Exp1 preset {name!r}; expected 'full' or 'desk'")


def exp2_preset(name: str) -> Exp2Plan:
    if name == "full":
        return Exp2Plan(name="exp2-full", profile="canonical")
    if name == "desk":
        return Exp2Plan(
            name="exp2-desk",
            noise_counts=[1, 3, 5],
            runs_per_count=3,
            fixed_duration_s=120.0,
            profile="desk",
        )
    raise PlanError(f"Unknown Exp2 preset {name!r}; expected 'full' or 'desk'")


def _derive_seed(master_seed: int, spawn_key: tuple[int, ...]) -> int:
    state = np.random.SeedSequence(master_seed, spawn_key=spawn_key).generate_state(1, dtype=np.uint64)
    return int(state[0] & np.uint64(2**63 - 1))


def cell_seeds(
    experiment: str, master_seed: int, axis_index: int, repeat: int, init_mode: InitMode
) -> tuple[int, int]:
    """(run seed, data seed) for one planned run"""
    cell = (EXPERIMENT_KEYS[experiment], axis_index, repeat)
    data_seed = _derive_seed(master_seed, cell)
    run_seed = _derive_seed(master_seed, (*cell, MODE_KEYS[init_mode]))
    return run_seed, data_seed


def _format_axis(value: float) -> str:
    return f"{value:g}"


def enumerate_runs(plan: Exp1Plan | Exp2Plan) -> list[PlannedRun]:
    """
    Every (axis, repeat, init_mode) triple of ``plan`` in execution order.

    Raises:
        PlanError: Duplicate axis values or a run-seed collision
    """
    if isinstance(plan, Exp1Plan):
        experiment, prefix = "exp1", "d"
        axes = [(float(d), r) for d, r in zip(plan.durations_s, plan.repeats, strict=True)]
    else:
        experiment, prefix = "exp2", "n"
        axes = [(float(count), plan.runs_per_count) for count in plan.noise_counts]
    if len({axis for axis, _ in axes}) != len(axes):
        raise PlanError(f"Duplicate axis values in plan {plan.name!r}")
    if len(set(plan.init_modes)) != len(plan.init_modes):
        raise PlanError(f"Duplicate init modes in plan {plan.name!r}")

    runs: list[PlannedRun] = []
    for axis_index, (axis, repeats) in enumerate(axes):
        for repeat in range(repeats):
            for mode in plan.init_modes:
                seed, data_seed = cell_seeds(experiment, plan.master_seed, axis_index, repeat, mode)
                runs.append(
                    PlannedRun(
                        run_id=f"{experiment}-{prefix}{_format_axis(axis)}-r{repeat:02d}-{mode}",
                        experiment=experiment,
                        axis=axis,
                        repeat=repeat,
                        init_mode=mode,
                        seed=seed,
                        data_seed=data_seed,
                    )
                )
    if len({run.seed for run in runs}) != len(runs):
        raise PlanError(f"Run seed collision in plan {plan.name!r}; choose another master_seed")
    return runs


def runs_per_mode(runs: list[PlannedRun]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for run in runs:
        counts[run.init_mode] = counts.get(run.init_mode, 0) + 1
    return counts


def write_planned_runs(runs: list[PlannedRun], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PLANNED_RUN_COLUMNS)
        for run in runs:
            writer.writerow(
                [run.run_id, run.experiment, _format_axis(run.axis), run.repeat, run.init_mode, run.seed, run.data_seed]
            )
