"""Seeded event-driven simulation of strategy profiles.

A game is lowered once into flat arrays, then replications run in one of
two interchangeable kernels: the compiled extension (built from
``_engine.pyx``) or its pure-Python twin.  The compiled kernel is selected
at import when present; set ``PPSGAME_PURE_PYTHON=1`` to force the
fallback.  Both kernels produce bit-identical results for the same seed.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..errors import ValidationError
from ..model import GameSpec
from . import _engine_py
from .rng import MASK64
from .strategies import (
    KIND_DELAY,
    KIND_SPLIT,
    PPSHerding,
    PPSSplit,
    Strategy,
    strategy_kind,
)

_FORCE_PURE = os.environ.get("PPSGAME_PURE_PYTHON", "").strip() not in ("", "0")

_compiled = None
if not _FORCE_PURE:
    try:
        from . import _engine as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

#: Name of the kernel used by default in this process.
ACTIVE_ENGINE = "compiled" if _compiled is not None else "python"

#: Normal 97.5% quantile for two-sided 95% confidence half-widths.
_Z95 = 1.959963984540054

EVENT_KINDS = ("solve", "share", "claim")

MAX_TASKS = 64


def available_engines() -> tuple[str, ...]:
    return ("python", "compiled") if _compiled is not None else ("python",)


@dataclass(frozen=True)
class SimEvent:
    time: float
    agent: str
    kind: str
    task: str


@dataclass(frozen=True)
class SimResult:
    makespan: float
    rewards: dict[str, float]
    events: tuple[SimEvent, ...] | None
    seed: int


@dataclass(frozen=True)
class BatchResult:
    reps: int
    master_seed: int
    engine: str
    makespan_mean: float
    makespan_std: float
    makespan_ci95: float
    reward_mean: dict[str, float]
    reward_std: dict[str, float]
    reward_ci95: dict[str, float]


@dataclass(frozen=True)
class DeviationEstimate:
    agent: str
    reps: int
    master_seed: int
    pps_mean: float
    pps_ci95: float
    deviation_mean: float
    deviation_ci95: float
    gain_mean: float
    gain_ci95: float


@dataclass(frozen=True)
class _Lowered:
    m: int
    n: int
    tasks: tuple[str, ...]
    agents: tuple[str, ...]
    pred_mask: list[int]
    rates: list[float]
    rewards: list[float]
    herd_key: list[float]
    split_key: list[float]
    strat_kind: list[int]
    strat_param: list[float]
    has_weights: list[int]
    split_w: list[float]
    arrays: dict = field(default_factory=dict, repr=False)

    def kernel_args(self, compiled: bool):
        if not compiled:
            return (
                self.m,
                self.n,
                self.pred_mask,
                self.rates,
                self.rewards,
                self.herd_key,
                self.split_key,
                self.strat_kind,
                self.strat_param,
                self.has_weights,
                self.split_w,
            )
        if not self.arrays:
            self.arrays.update(
                pred_mask=np.array(self.pred_mask, dtype=np.uint64),
                rates=np.array(self.rates, dtype=np.float64),
                rewards=np.array(self.rewards, dtype=np.float64),
                herd_key=np.array(self.herd_key, dtype=np.float64),
                split_key=np.array(self.split_key, dtype=np.float64),
                strat_kind=np.array(self.strat_kind, dtype=np.int32),
                strat_param=np.array(self.strat_param, dtype=np.float64),
                has_weights=np.array(self.has_weights, dtype=np.int32),
                split_w=np.array(self.split_w, dtype=np.float64),
            )
        a = self.arrays
        return (
            self.m,
            self.n,
            a["pred_mask"],
            a["rates"],
            a["rewards"],
            a["herd_key"],
            a["split_key"],
            a["strat_kind"],
            a["strat_param"],
            a["has_weights"],
            a["split_w"],
        )


def _resolve_profile(
    g: GameSpec, profile: Mapping[str, Strategy] | Strategy | None
) -> dict[str, Strategy]:
    if profile is None:
        profile = {}
    if not isinstance(profile, Mapping):
        return {a: profile for a in g.agents}
    unknown = set(profile) - set(g.agents)
    if unknown:
        raise ValidationError(f"strategies given for unknown agents: {sorted(unknown)}")
    return {a: profile.get(a, PPSHerding()) for a in g.agents}


def lower_game(
    g: GameSpec, profile: Mapping[str, Strategy] | Strategy | None = None
) -> _Lowered:
    """Flatten a game and per-agent strategies into kernel arrays."""
    net = g.network
    if net.m > MAX_TASKS:
        raise ValidationError(
            f"the simulator handles at most {MAX_TASKS} tasks, got {net.m}"
        )
    tasks = net.tasks
    agents = g.agents
    resolved = _resolve_profile(g, profile)

    index = net.task_index
    pred_mask = [0] * net.m
    for u in tasks:
        mask = 0
        for p in net.predecessors[u]:
            mask |= 1 << index[p]
        pred_mask[index[u]] = mask

    rates = [0.0] * (len(agents) * net.m)
    herd_key = [0.0] * (len(agents) * net.m)
    totals = {u: g.total_rate(u) for u in tasks}
    for i, agent in enumerate(agents):
        for u in tasks:
            own = g.rate(agent, u)
            others = totals[u] - own
            rates[i * net.m + index[u]] = own
            # virtual reward; 0 with a single agent, making the task choice
            # fall back to the lexicographically first available task
            herd_key[i * net.m + index[u]] = (
                g.rewards[u] * own * others / (own + others)
            )

    split_key = [0.0] * net.m
    uses_split = any(isinstance(s, PPSSplit) for s in resolved.values())
    if uses_split:
        if not g.is_sa:
            raise ValidationError(
                "effort-splitting strategies need separable aptitudes"
            )
        for u in tasks:
            split_key[index[u]] = g.rewards[u] * g.aptitudes.simplicities[u]

    strat_kind = [0] * len(agents)
    strat_param = [0.0] * len(agents)
    has_weights = [0] * len(agents)
    split_w = [0.0] * (len(agents) * net.m)
    for i, agent in enumerate(agents):
        strategy = resolved[agent]
        kind = strategy_kind(strategy)
        strat_kind[i] = kind
        if kind == KIND_DELAY:
            strat_param[i] = strategy.delay
        if kind == KIND_SPLIT and strategy.weights is not None:
            unknown = set(strategy.weights) - set(tasks)
            if unknown:
                raise ValidationError(
                    f"split weights name unknown tasks: {sorted(unknown)}"
                )
            has_weights[i] = 1
            for u, w in strategy.weights.items():
                split_w[i * net.m + index[u]] = w

    return _Lowered(
        m=net.m,
        n=len(agents),
        tasks=tasks,
        agents=agents,
        pred_mask=pred_mask,
        rates=rates,
        rewards=[g.rewards[u] for u in tasks],
        herd_key=herd_key,
        split_key=split_key,
        strat_kind=strat_kind,
        strat_param=strat_param,
        has_weights=has_weights,
        split_w=split_w,
    )


def _pick_kernel(engine: str | None):
    if engine is None:
        engine = ACTIVE_ENGINE
    if engine == "python":
        return _engine_py, False
    if engine == "compiled":
        if _compiled is None:
            raise ValidationError("the compiled kernel is not available")
        return _compiled, True
    raise ValidationError(f"unknown engine {engine!r}")


def simulate_once(
    g: GameSpec,
    profile: Mapping[str, Strategy] | Strategy | None,
    seed: int,
    *,
    record_events: bool = True,
    engine: str | None = None,
) -> SimResult:
    """One seeded replication with a full event log."""
    lowered = lower_game(g, profile)
    kernel, compiled = _pick_kernel(engine)
    makespan, claims, raw_events = kernel.simulate(
        *lowered.kernel_args(compiled), seed & MASK64, record_events
    )
    events = None
    if record_events:
        events = tuple(
            SimEvent(
                time=t,
                agent=lowered.agents[i],
                kind=EVENT_KINDS[k],
                task=lowered.tasks[u],
            )
            for t, i, k, u in raw_events
        )
    rewards = {a: claims[i] for i, a in enumerate(lowered.agents)}
    return SimResult(makespan=makespan, rewards=rewards, events=events, seed=seed)


def _batch_arrays(
    g: GameSpec,
    profile,
    reps: int,
    master_seed: int,
    engine: str | None,
) -> tuple[_Lowered, np.ndarray, np.ndarray]:
    if reps < 1:
        raise ValidationError("reps must be at least 1")
    lowered = lower_game(g, profile)
    kernel, compiled = _pick_kernel(engine)
    if compiled:
        makespans = np.empty(reps, dtype=np.float64)
        claims = np.empty((reps, lowered.n), dtype=np.float64)
        kernel.simulate_batch(
            *lowered.kernel_args(True), master_seed & MASK64, reps, makespans, claims
        )
    else:
        mk, cl = kernel.simulate_batch(
            *lowered.kernel_args(False), master_seed & MASK64, reps
        )
        makespans = np.array(mk, dtype=np.float64)
        claims = np.array(cl, dtype=np.float64).reshape(reps, lowered.n)
    return lowered, makespans, claims


def mean_std_ci(values: np.ndarray) -> tuple[float, float, float]:
    """Sample mean, sample stdev, and a 95% normal CI half-width."""
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0, 0.0
    std = float(values.std(ddof=1))
    return mean, std, _Z95 * std / math.sqrt(values.size)


def run_batch(
    g: GameSpec,
    profile: Mapping[str, Strategy] | Strategy | None,
    reps: int,
    master_seed: int,
    *,
    engine: str | None = None,
) -> BatchResult:
    """Replicated simulation with counter-derived per-replication seeds."""
    lowered, makespans, claims = _batch_arrays(g, profile, reps, master_seed, engine)
    mk_mean, mk_std, mk_ci = mean_std_ci(makespans)
    reward_mean = {}
    reward_std = {}
    reward_ci = {}
    for i, agent in enumerate(lowered.agents):
        mean, std, ci = mean_std_ci(claims[:, i])
        reward_mean[agent] = mean
        reward_std[agent] = std
        reward_ci[agent] = ci
    kernel_used = engine or ACTIVE_ENGINE
    return BatchResult(
        reps=reps,
        master_seed=master_seed,
        engine=kernel_used,
        makespan_mean=mk_mean,
        makespan_std=mk_std,
        makespan_ci95=mk_ci,
        reward_mean=reward_mean,
        reward_std=reward_std,
        reward_ci95=reward_ci,
    )


def batch_samples(
    g: GameSpec,
    profile: Mapping[str, Strategy] | Strategy | None,
    reps: int,
    master_seed: int,
    *,
    engine: str | None = None,
) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    """Raw per-replication makespans and claims (agents, makespans, claims)."""
    lowered, makespans, claims = _batch_arrays(g, profile, reps, master_seed, engine)
    return lowered.agents, makespans, claims


def estimate_deviation_gain(
    g: GameSpec,
    agent: str,
    deviation: Strategy,
    reps: int,
    master_seed: int,
    *,
    engine: str | None = None,
) -> DeviationEstimate:
    """Paired comparison of one agent's payoff: everyone sharing versus the
    agent playing ``deviation``.  Both arms reuse the same per-replication
    seeds (common random numbers)."""
    if len(g.agents) < 2:
        raise ValidationError("deviation estimates need at least two agents")
    if agent not in g.agents:
        raise ValidationError(f"unknown agent {agent!r}")
    base = {a: PPSHerding() for a in g.agents}
    twisted = dict(base)
    twisted[agent] = deviation
    agents, _, base_claims = batch_samples(g, base, reps, master_seed, engine=engine)
    _, _, dev_claims = batch_samples(g, twisted, reps, master_seed, engine=engine)
    col = agents.index(agent)
    pps = base_claims[:, col]
    dev = dev_claims[:, col]
    pps_mean, _, pps_ci = mean_std_ci(pps)
    dev_mean, _, dev_ci = mean_std_ci(dev)
    gain_mean, _, gain_ci = mean_std_ci(dev - pps)
    return DeviationEstimate(
        agent=agent,
        reps=reps,
        master_seed=master_seed,
        pps_mean=pps_mean,
        pps_ci95=pps_ci,
        deviation_mean=dev_mean,
        deviation_ci95=dev_ci,
        gain_mean=gain_mean,
        gain_ci95=gain_ci,
    )
