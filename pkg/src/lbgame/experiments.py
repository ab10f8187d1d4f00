"""Benchmark settings catalog, seeded instance generation, experiment
harness, and machine-readable trace export.

Traces are written as CSV or JSON-lines with full double precision so that
repeated seeded runs produce byte-identical files. A JSON manifest with the
setting parameters, seed, and code version is written alongside each trace.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamic import (
    MODE_SEQUENTIAL,
    MODE_SIMULTANEOUS,
    DynamicRun,
    StepRecord,
    run_sequential,
    run_simultaneous,
)
from .model import Action, ActionProfile, Instance, ServerLoads
from .static import is_nash, run_sequential_pass

MODE_STATIC = "static"


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for sampling an instance: sizes, uniform ranges, and a seed."""

    num_players: int
    num_servers: int
    service_rate_range: tuple[float, float]
    job_length_range: tuple[float, float]
    initial_load_range: tuple[float, float]
    seed: int | None = None

    def __post_init__(self):
        if self.num_players < 1 or self.num_servers < 1:
            raise ValueError("generator sizes must be positive")
        for name in ("service_rate_range", "job_length_range", "initial_load_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} must satisfy lo <= hi, got ({lo}, {hi})")


@dataclass(frozen=True, eq=False)
class SettingSpec:
    """One catalog entry: either a fixed instance or a generator recipe,
    plus which run modes it supports."""

    id: int | str
    modes: tuple[str, ...]
    instance: Instance | None = None
    generator: GeneratorSpec | None = None
    description: str = ""

    def __post_init__(self):
        if (self.instance is None) == (self.generator is None):
            raise ValueError("a setting needs exactly one of instance or generator")
        for mode in self.modes:
            if mode not in (MODE_STATIC, MODE_SEQUENTIAL, MODE_SIMULTANEOUS):
                raise ValueError(f"unknown mode: {mode!r}")


_ALL_MODES = (MODE_STATIC, MODE_SEQUENTIAL, MODE_SIMULTANEOUS)
# Settings whose sampled total job mass exceeds the total service rate run
# without the simultaneous mode: that mode's stability condition cannot hold.
_NO_SIMULTANEOUS = (MODE_STATIC, MODE_SEQUENTIAL)


def _fixed(setting_id, rates, lengths, loads, description):
    return SettingSpec(
        id=setting_id,
        modes=_ALL_MODES,
        instance=Instance(lengths, rates, loads),
        description=description,
    )


def _generated(setting_id, n, m, rate_range, length_range, load_range, modes, description):
    return SettingSpec(
        id=setting_id,
        modes=modes,
        generator=GeneratorSpec(n, m, rate_range, length_range, load_range),
        description=description,
    )


def _catalog() -> dict[int, SettingSpec]:
    return {
        1: _fixed(
            1,
            [1.4, 1.4, 1.2, 0.5, 0.4, 0.3, 0.2, 0.1],
            [1.5, 0.5, 0.3, 0.7, 0.9, 0.1, 0.6, 0.2],
            [10, 10, 1, 10, 20, 20, 10, 1],
            "8 players, 8 heterogeneous servers, mixed backlogs",
        ),
        2: _generated(
            2, 500, 200, (3, 4), (2, 3), (10, 20), _NO_SIMULTANEOUS,
            "500 players, 200 servers, rates U[3,4], jobs U[2,3], backlogs U[10,20]",
        ),
        3: _generated(
            3, 100, 50, (1, 2), (0, 1), (10, 20), _ALL_MODES,
            "100 players, 50 servers, rates U[1,2], jobs U[0,1], backlogs U[10,20]",
        ),
        4: _generated(
            4, 200, 100, (2, 3), (1, 2), (10, 20), _NO_SIMULTANEOUS,
            "200 players, 100 servers, rates U[2,3], jobs U[1,2], backlogs U[10,20]",
        ),
        5: _fixed(
            5,
            [0.9, 0.8, 0.4, 0.01],
            [0.5, 0.5, 0.3, 0.7],
            [10, 10, 1, 0.5],
            "4 players, 4 servers, one near-stalled server",
        ),
        6: _fixed(
            6,
            [1.4, 1.2, 1, 0.5],
            [0.5, 0.5, 0.3, 0.7, 0.9, 0.1, 0.6, 0.2],
            [10, 10, 1, 10],
            "8 players sharing 4 servers",
        ),
        7: _fixed(
            7,
            [2, 2],
            [0.5, 0.5, 0.3, 0.7, 0.9, 0.1, 0.6, 0.2],
            [10, 50],
            "8 players, 2 equal servers, one heavy backlog",
        ),
    }


def builtin_setting(setting_id: int) -> SettingSpec:
    """The benchmark setting with the given id (1 through 7)."""
    catalog = _catalog()
    try:
        return catalog[int(setting_id)]
    except (KeyError, TypeError, ValueError):
        raise ValueError(f"unknown setting: {setting_id!r}") from None


def builtin_settings() -> tuple[SettingSpec, ...]:
    return tuple(_catalog()[k] for k in sorted(_catalog()))


def generate_instance(
    spec: GeneratorSpec,
    seed: int | None = None,
    *,
    require_simultaneous: bool = False,
    attempts: int = 100,
) -> Instance:
    """Sample an instance from the recipe, deterministically for a seed.

    Re-draws until the instance passes validation and the sequential
    stability condition (plus the simultaneous one when requested), and
    fails after ``attempts`` tries.
    """
    if seed is None:
        seed = spec.seed
    if seed is None:
        raise ValueError("a seed is required to generate an instance")
    rng = np.random.default_rng(int(seed))
    for _ in range(attempts):
        rates = rng.uniform(*spec.service_rate_range, spec.num_servers)
        lengths = rng.uniform(*spec.job_length_range, spec.num_players)
        loads = rng.uniform(*spec.initial_load_range, spec.num_servers)
        if np.any(rates <= 0) or np.any(lengths <= 0) or np.any(loads < 0):
            continue
        inst = Instance(lengths, rates, loads)
        if not inst.feasible_sequential:
            continue
        if require_simultaneous and not inst.feasible_simultaneous:
            continue
        return inst
    raise ValueError(f"could not generate a feasible instance in {attempts} attempts")


def setting_instance(setting: SettingSpec, seed: int | None = None) -> Instance:
    """The setting's fixed instance, or one generated from its recipe."""
    if setting.instance is not None:
        return setting.instance
    return generate_instance(
        setting.generator,
        seed,
        require_simultaneous=MODE_SIMULTANEOUS in setting.modes,
    )


@dataclass(frozen=True, eq=False)
class StaticPassResult:
    """Outcome of one in-turn update pass on the one-shot game."""

    profile: ActionProfile
    potentials: tuple[float, ...]
    is_equilibrium: bool
    max_improvement: float


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Everything one experiment produced, keyed by mode."""

    setting_id: int | str
    seed: int
    instance: Instance
    static: StaticPassResult | None = None
    sequential: DynamicRun | None = None
    simultaneous: DynamicRun | None = None

    @property
    def runs(self) -> dict[str, DynamicRun]:
        out = {}
        if self.sequential is not None:
            out[MODE_SEQUENTIAL] = self.sequential
        if self.simultaneous is not None:
            out[MODE_SIMULTANEOUS] = self.simultaneous
        return out


def _run_static(inst: Instance) -> StaticPassResult:
    profile, potentials = run_sequential_pass(inst)
    check = is_nash(inst, profile)
    return StaticPassResult(profile, tuple(potentials), check.is_equilibrium, check.max_improvement)


def run_experiment(
    setting: SettingSpec,
    seed: int = 0,
    max_steps: int | None = None,
    modes: tuple[str, ...] | None = None,
    jobs: int = 1,
) -> ExperimentReport:
    """Run the setting's modes and collect the results.

    The sequential run draws its arrival order from ``seed``; everything
    else is deterministic given the instance. ``jobs`` > 1 runs the modes
    concurrently (they are independent).
    """
    if modes is None:
        modes = setting.modes
    for mode in modes:
        if mode not in setting.modes:
            raise ValueError(f"setting {setting.id} does not support mode {mode!r}")
    inst = setting_instance(setting, seed)

    def run_mode(mode: str):
        if mode == MODE_STATIC:
            return _run_static(inst)
        if mode == MODE_SEQUENTIAL:
            cfg = DynamicRun(
                inst, MODE_SEQUENTIAL, order="random", seed=seed, max_steps=max_steps
            )
            return run_sequential(cfg)
        cfg = DynamicRun(inst, MODE_SIMULTANEOUS, max_steps=max_steps)
        return run_simultaneous(cfg)

    if jobs > 1 and len(modes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = dict(zip(modes, pool.map(run_mode, modes)))
    else:
        results = {mode: run_mode(mode) for mode in modes}
    return ExperimentReport(
        setting_id=setting.id,
        seed=seed,
        instance=inst,
        static=results.get(MODE_STATIC),
        sequential=results.get(MODE_SEQUENTIAL),
        simultaneous=results.get(MODE_SIMULTANEOUS),
    )


def average_load_series(run: DynamicRun) -> np.ndarray:
    """Mean queue load per step, after each step's drain."""
    return np.array([record.loads_after.loads.mean() for record in run.trace])


def support_sizes(run: DynamicRun) -> list[tuple[int, ...]]:
    """Per step, how many servers each arriving player actually used."""
    return [
        tuple(int(np.count_nonzero(action.fractions > 0)) for action in record.actions)
        for record in run.trace
    ]


def convergence_grid(
    player_counts,
    server_counts,
    *,
    service_rate_range: tuple[float, float],
    job_length_range: tuple[float, float],
    initial_load_range: tuple[float, float],
    seed: int = 0,
    max_steps: int | None = None,
) -> np.ndarray:
    """Sequential drain times over a grid of player and server counts.

    Each cell gets its own child seed split off the root seed, so the grid
    is reproducible as a whole and cell by cell. Cells that did not converge
    within the horizon report -1.
    """
    player_counts = list(player_counts)
    server_counts = list(server_counts)
    children = np.random.SeedSequence(seed).spawn(len(player_counts) * len(server_counts))
    grid = np.empty((len(player_counts), len(server_counts)), dtype=int)
    k = 0
    for a, n in enumerate(player_counts):
        for b, m in enumerate(server_counts):
            cell_seed = int(children[k].generate_state(1, np.uint64)[0])
            k += 1
            spec = GeneratorSpec(
                n, m, service_rate_range, job_length_range, initial_load_range
            )
            inst = generate_instance(spec, cell_seed)
            cfg = DynamicRun(
                inst, MODE_SEQUENTIAL, order="random", seed=cell_seed, max_steps=max_steps
            )
            done = run_sequential(cfg)
            grid[a, b] = -1 if done.converged_at is None else done.converged_at
    return grid


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest string that parses back exactly.
    return repr(float(x))


def write_trace_csv(runs: dict[str, DynamicRun], path) -> Path:
    """One CSV row per step: loads after the drain, the step's cost, and a
    converged flag. The arriving player is -1 for simultaneous steps."""
    path = Path(path)
    num_servers = next(iter(runs.values())).inst.num_servers
    header = (
        ["step", "mode", "arriving_player"]
        + [f"s_{j + 1}" for j in range(num_servers)]
        + ["total_load", "cost", "converged_flag"]
    )
    lines = [",".join(header)]
    for mode, run in runs.items():
        for record in run.trace:
            arriving = record.arrivals[0] if mode == MODE_SEQUENTIAL else -1
            converged = int(
                run.converged_at is not None and record.t >= run.converged_at
            )
            row = (
                [str(record.t), mode, str(arriving)]
                + [_fmt(s) for s in record.loads_after.loads]
                + [
                    _fmt(record.total_load),
                    _fmt(sum(record.instantaneous_costs)),
                    str(converged),
                ]
            )
            lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_trace_jsonl(runs: dict[str, DynamicRun], path) -> Path:
    """One JSON object per step, mirroring the step records losslessly."""
    path = Path(path)
    lines = []
    for mode, run in runs.items():
        for record in run.trace:
            lines.append(
                json.dumps(
                    {
                        "mode": mode,
                        "t": record.t,
                        "arrivals": list(record.arrivals),
                        "actions": [a.fractions.tolist() for a in record.actions],
                        "loads_before": record.loads_before.loads.tolist(),
                        "loads_after": record.loads_after.loads.tolist(),
                        "instantaneous_costs": list(record.instantaneous_costs),
                        "total_load": record.total_load,
                    }
                )
            )
    path.write_text("\n".join(lines) + "\n")
    return path


def load_trace_jsonl(path) -> dict[str, tuple[StepRecord, ...]]:
    """Read back a JSON-lines trace into step records, grouped by mode."""
    grouped: dict[str, list[StepRecord]] = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        record = StepRecord(
            t=obj["t"],
            arrivals=tuple(obj["arrivals"]),
            actions=tuple(Action(np.array(a)) for a in obj["actions"]),
            loads_before=ServerLoads(np.array(obj["loads_before"])),
            loads_after=ServerLoads(np.array(obj["loads_after"])),
            instantaneous_costs=tuple(obj["instantaneous_costs"]),
            total_load=obj["total_load"],
        )
        grouped.setdefault(obj["mode"], []).append(record)
    return {mode: tuple(records) for mode, records in grouped.items()}


def _manifest_payload(report: ExperimentReport) -> dict:
    inst = report.instance
    payload = {
        "setting": report.setting_id,
        "seed": report.seed,
        "code_version": __version__,
        "instance": {
            "mu": inst.service_rates.tolist(),
            "lambda": inst.job_lengths.tolist(),
            "s0": inst.initial_loads.tolist(),
        },
        "converged_at": {
            mode: run.converged_at for mode, run in report.runs.items()
        },
    }
    if report.static is not None:
        payload["static"] = {
            "updates": len(report.static.potentials),
            "is_equilibrium": report.static.is_equilibrium,
        }
    return payload


def export_trace(report: ExperimentReport, path, fmt: str = "csv") -> Path:
    """Write the report's dynamic traces plus a manifest next to them."""
    if not report.runs:
        raise ValueError("report holds no dynamic runs to export")
    if fmt == "csv":
        out = write_trace_csv(report.runs, path)
    elif fmt in ("jsonl", "json-lines"):
        out = write_trace_jsonl(report.runs, path)
    else:
        raise ValueError(f"unknown trace format: {fmt!r}")
    manifest = Path(str(out) + ".manifest.json")
    manifest.write_text(json.dumps(_manifest_payload(report), sort_keys=True, indent=2) + "\n")
    return out
