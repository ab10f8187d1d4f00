"""Stepped game engine with queue carryover.

Jobs arrive over discrete steps, either one player at a time or all players
at once. The arriving player observes the server queues, plays the
closed-form best response to them, and the queues then drain one step.
Under the stability condition, every queue reaches exactly zero in a
bounded number of steps and stays there; from then on each job is split in
proportion to the service rates.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    Action,
    InfeasibleError,
    Instance,
    ServerLoads,
    _check_player,
    instantaneous_cost,
    state_transition,
)
from .static import best_response, run_sequential_pass

ORDER_ROUND_ROBIN = "round-robin"
ORDER_RANDOM = "random"

MODE_SEQUENTIAL = "sequential"
MODE_SIMULTANEOUS = "simultaneous"


@dataclass(frozen=True)
class StepRecord:
    """What happened in one step: who arrived, what they played, and the
    queue loads on both sides of the drain."""

    t: int
    arrivals: tuple[int, ...]
    actions: tuple[Action, ...]
    loads_before: ServerLoads
    loads_after: ServerLoads
    instantaneous_costs: tuple[float, ...]
    total_load: float


@dataclass(frozen=True, eq=False)
class DynamicRun:
    """Configuration plus (once run) the trace of a stepped game.

    mode            "sequential" (one arrival per step) or "simultaneous"
    order           "round-robin", "random" (driven by ``seed``), or an
                    explicit sequence of player indices, cycled if shorter
                    than the horizon
    max_steps       horizon cap; defaults to 10x the analytic zero-load
                    bound so a run always terminates
    zero_tolerance  total load at or below this counts as drained; the
                    drain clamp produces exact zeros, so 0.0 is the default
    converged_at    first recorded step after which the total load stayed
                    at or below ``zero_tolerance``
    """

    inst: Instance
    mode: str = MODE_SEQUENTIAL
    order: str | tuple[int, ...] = ORDER_RANDOM
    max_steps: int | None = None
    seed: int = 0
    zero_tolerance: float = 0.0
    trace: tuple[StepRecord, ...] = ()
    converged_at: int | None = None

    def __post_init__(self):
        inst = self.inst
        if inst.num_players < 1:
            raise ValueError("a run needs at least one player")
        if self.mode not in (MODE_SEQUENTIAL, MODE_SIMULTANEOUS):
            raise ValueError(f"unknown mode: {self.mode!r}")
        if self.mode == MODE_SEQUENTIAL and not inst.feasible_sequential:
            raise InfeasibleError(
                "infeasible under sequential updates: the largest job length "
                "must stay below the total service rate "
                f"({inst.max_job_length!r} >= {inst.total_service_rate!r})"
            )
        if self.mode == MODE_SIMULTANEOUS and not inst.feasible_simultaneous:
            raise InfeasibleError(
                "infeasible under simultaneous updates: the total arrival rate "
                "exceeds the total service rate "
                f"({inst.total_job_length!r} >= {inst.total_service_rate!r})"
            )
        if isinstance(self.order, str):
            if self.order not in (ORDER_ROUND_ROBIN, ORDER_RANDOM):
                raise ValueError(f"unknown order policy: {self.order!r}")
        else:
            seq = tuple(int(i) for i in self.order)
            if not seq:
                raise ValueError("explicit order sequence must not be empty")
            for i in seq:
                _check_player(inst, i)
            object.__setattr__(self, "order", seq)
        if self.zero_tolerance < 0:
            raise ValueError("zero_tolerance must be nonnegative")
        if self.max_steps is None:
            object.__setattr__(self, "max_steps", max(2, 10 * zero_load_time(inst)))
        else:
            try:
                object.__setattr__(self, "max_steps", operator.index(self.max_steps))
            except TypeError:
                raise ValueError("max_steps must be a positive integer") from None
        if self.max_steps < 1:
            raise ValueError("max_steps must be a positive integer")


def dynamic_step(inst: Instance, loads: ServerLoads, i: int):
    """Player ``i`` arrives, best-responds to the observed queues, and the
    queues drain one step. Returns ``(action, new_loads, cost)``."""
    result = best_response(inst, i, loads)
    cost = instantaneous_cost(inst, result.action, loads, i)
    contributions = inst.job_lengths[i] * result.action.fractions
    return result.action, state_transition(inst, loads, contributions), cost


def _arrival_at(run: DynamicRun, rng, t: int) -> int:
    if run.order == ORDER_ROUND_ROBIN:
        return t % run.inst.num_players
    if run.order == ORDER_RANDOM:
        return int(rng.integers(run.inst.num_players))
    return run.order[t % len(run.order)]


def run_sequential(run: DynamicRun) -> DynamicRun:
    """Play the one-arrival-per-step dynamics until the queues drain.

    Halts at ``max_steps``, or one confirming step after the total load
    first reaches ``zero_tolerance``. Returns a copy of ``run`` with the
    trace and ``converged_at`` filled in.
    """
    if run.mode != MODE_SEQUENTIAL:
        raise ValueError("run config mode must be 'sequential'")
    inst = run.inst
    rng = np.random.default_rng(run.seed)
    loads = ServerLoads(inst.initial_loads)
    records: list[StepRecord] = []
    candidate: int | None = None
    for t in range(run.max_steps):
        i = _arrival_at(run, rng, t)
        action, new_loads, cost = dynamic_step(inst, loads, i)
        total = new_loads.total
        records.append(
            StepRecord(t, (i,), (action,), loads, new_loads, (cost,), total)
        )
        loads = new_loads
        if total <= run.zero_tolerance:
            if candidate is None:
                candidate = t
            else:
                break
        else:
            candidate = None
    return replace(run, trace=tuple(records), converged_at=candidate)


def run_simultaneous(run: DynamicRun) -> DynamicRun:
    """Play the everyone-arrives-each-step dynamics until the queues drain.

    Each round, the players settle on mutually consistent splits for the
    queues they observe: the pure equilibrium of the one-shot game whose
    starting loads are the current state, reached by one in-turn update
    pass. All the equilibrium allocations then hit the queues in a single
    drain step.

    Naive alternatives that react only to the previous round's co-player
    allocations herd onto the same servers and limit-cycle without ever
    draining; the equilibrium round keeps the total backlog shrinking by at
    least the capacity surplus every step.
    """
    if run.mode != MODE_SIMULTANEOUS:
        raise ValueError("run config mode must be 'simultaneous'")
    inst = run.inst
    n = inst.num_players
    lengths = inst.job_lengths
    loads = ServerLoads(inst.initial_loads)
    records: list[StepRecord] = []
    candidate: int | None = None
    everyone = tuple(range(n))
    for t in range(run.max_steps):
        round_game = Instance(lengths, inst.service_rates, loads.loads)
        profile, _ = run_sequential_pass(round_game)
        actions = tuple(profile.row(i) for i in range(n))
        costs = tuple(
            instantaneous_cost(inst, actions[i], loads, i) for i in range(n)
        )
        new_loads = state_transition(inst, loads, lengths @ profile.matrix)
        total = new_loads.total
        records.append(
            StepRecord(t, everyone, actions, loads, new_loads, costs, total)
        )
        loads = new_loads
        if total <= run.zero_tolerance:
            if candidate is None:
                candidate = t
            else:
                break
        else:
            candidate = None
    return replace(run, trace=tuple(records), converged_at=candidate)


def full_support_time(inst: Instance) -> int:
    """Steps after which every best response must spread over all servers.

    A server that never receives work drains its backlog at full rate, so by
    this step every queue has either emptied (and an empty server always
    gets a share) or already joined the receiving set, which only grows.
    """
    return int(np.max(np.ceil(inst.initial_loads / inst.service_rates), initial=0.0))


def zero_load_time(inst: Instance) -> int:
    """Analytic step bound by which every queue is exactly empty.

    After :func:`full_support_time`, each step removes at least the total
    service rate minus the largest job length from the total backlog.
    """
    if not inst.feasible_sequential:
        raise InfeasibleError(
            "zero-load bound requires the largest job length to stay below "
            f"the total service rate ({inst.max_job_length!r} >= "
            f"{inst.total_service_rate!r})"
        )
    lead = full_support_time(inst)
    backlog = float(inst.initial_loads.sum()) + lead * inst.max_job_length
    drain = inst.total_service_rate - inst.max_job_length
    return math.ceil(lead + backlog / drain)


def zero_load_time_alt(inst: Instance) -> int:
    """Alternative drain-time bound; tighter for some parameter ranges.

    Uses the smallest per-step decrease of the total backlog across the
    possible cases: all servers receiving, only loaded servers receiving, or
    the slowest server emptying what little it still holds.
    """
    if inst.num_players < 1:
        raise ValueError("needs at least one player")
    if not inst.feasible_sequential:
        raise InfeasibleError(
            "alternative bound requires the largest job length to stay below "
            f"the total service rate ({inst.max_job_length!r} >= "
            f"{inst.total_service_rate!r})"
        )
    slowest = inst.min_service_rate
    decreases = [inst.total_service_rate - inst.max_job_length, slowest]
    if inst.num_servers > 1:
        decreases.append(
            slowest * inst.min_job_length / (inst.total_service_rate - slowest)
        )
    backlog = float(inst.initial_loads.sum())
    return math.ceil(backlog / min(decreases))


def running_average_cost(run: DynamicRun, i: int) -> np.ndarray:
    """Running mean of player ``i``'s per-step cost over the trace.

    Steps where the player did not schedule contribute zero. Over a long
    horizon the mean settles at the zero-queue arrival cost scaled by how
    often the player arrives.
    """
    _check_player(run.inst, i)
    if not run.trace:
        return np.array([])
    costs = np.zeros(len(run.trace))
    for idx, record in enumerate(run.trace):
        if i in record.arrivals:
            costs[idx] = record.instantaneous_costs[record.arrivals.index(i)]
    return np.cumsum(costs) / np.arange(1, costs.size + 1)


def per_arrival_costs(run: DynamicRun, i: int) -> np.ndarray:
    """The costs player ``i`` actually paid, one entry per arrival."""
    _check_player(run.inst, i)
    return np.array(
        [
            record.instantaneous_costs[record.arrivals.index(i)]
            for record in run.trace
            if i in record.arrivals
        ]
    )
