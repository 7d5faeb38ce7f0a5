"""Exact quantities: closed-form sharing utilities, makespans, and
best-response dynamic programs.

The dynamic programs run over the nested open-set pairs of the network, so
their size is bounded by the closed-set family rather than by anything
continuous: each race epoch is an exponential race, so a state's value only
depends on immediately reachable smaller states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    AssignmentSpaceExceeded,
    CoalitionSpaceExceeded,
    InvalidKnowledgeState,
    InvalidPair,
    SingleAgent,
    ValidationError,
)
from .model import EPS, AptitudeMatrix, GameSpec
from .network import (
    DEFAULT_STATE_CAP,
    SubgamePair,
    available_tasks,
    enumerate_knowledge_states,
    subgame_pairs,
)

DEFAULT_ASSIGNMENT_CAP = 1_000_000
DEFAULT_COALITION_LIMIT = 16


@dataclass(frozen=True)
class UtilityProfile:
    """Per-agent expected reward when everyone shares immediately."""

    utilities: dict[str, float]
    total: float


@dataclass(frozen=True)
class MakespanResult:
    herding_time: float
    opt_time: float
    ratio: float
    state_values: dict[frozenset[str], float] = field(repr=False)
    state_assignments: dict[frozenset[str], dict[str, str]] = field(repr=False)


@dataclass(frozen=True)
class BestResponseResult:
    """Root values of the deviation dynamic program for one agent.

    ``best_deviation_value`` maximizes over share-now / withhold-one-epoch
    actions in every state.  ``pps_value`` values the committed strategy
    that always shares instantly (task choice still optimized), which is a
    member of the deviation set, so the best deviation always weakly
    dominates it.  ``withhold_value`` is the committed strategy that never
    shares until it holds every remaining solution.
    """

    agent: str
    pps_value: float
    best_deviation_value: float
    withhold_value: float
    is_best_response: bool
    state_values: dict[SubgamePair, float] = field(repr=False)
    state_actions: dict[SubgamePair, tuple] = field(repr=False)


@dataclass(frozen=True)
class NashReport:
    verified: bool
    results: dict[str, BestResponseResult]
    violators: tuple[str, ...]


@dataclass(frozen=True)
class CoalitionRecord:
    members: tuple[str, ...]
    value: float
    share_sum: float
    gain: float


@dataclass(frozen=True)
class CoalitionReport:
    in_core: bool
    records: tuple[CoalitionRecord, ...]
    grand_value: float
    utilities: dict[str, float]
    first_violation: CoalitionRecord | None


def root_pair(g: GameSpec) -> SubgamePair:
    every = g.network.all_tasks
    return SubgamePair(open_all=every, open_own=every)


def _validate_pair(g: GameSpec, pair: SubgamePair) -> SubgamePair:
    if not pair.open_own <= pair.open_all:
        raise InvalidPair("own open set must be contained in the public one")
    every = g.network.all_tasks
    try:
        g.network.validate_knowledge(every - pair.open_all)
        g.network.validate_knowledge(every - pair.open_own)
    except InvalidKnowledgeState as exc:
        raise InvalidPair(str(exc)) from exc
    return pair


def pps_utility(g: GameSpec, agent: str, pair: SubgamePair | None = None) -> float:
    """Expected reward for ``agent`` under all-round immediate sharing.

    Captive tasks are banked in full; every still-open task is won with
    probability own-rate over total-rate.
    """
    if pair is None:
        pair = root_pair(g)
    _validate_pair(g, pair)
    banked = sum(g.rewards[u] for u in sorted(pair.captive))
    contested = sum(
        g.rewards[u] * g.rate(agent, u) / g.total_rate(u)
        for u in sorted(pair.open_own)
    )
    return banked + contested


def utility_profile(g: GameSpec) -> UtilityProfile:
    utilities = {a: pps_utility(g, a) for a in g.agents}
    return UtilityProfile(utilities=utilities, total=g.rewards.total)


def herding_makespan(g: GameSpec, open_tasks: Iterable[str] | None = None) -> float:
    """Expected completion time when everyone always works the same task:
    one exponential clock at the pooled rate per open task."""
    if open_tasks is None:
        open_set = g.network.all_tasks
    else:
        open_set = frozenset(open_tasks)
        g.network.validate_knowledge(g.network.all_tasks - open_set)
    return sum(1.0 / g.total_rate(u) for u in sorted(open_set))


def opt_makespan(
    g: GameSpec,
    *,
    state_cap: int = DEFAULT_STATE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> MakespanResult:
    """Exact minimum expected makespan over centrally scheduled agents.

    Bellman recursion over closed solved-sets; in each state every agent is
    deterministically assigned one available task (a minimizer always exists
    at such a vertex because the one-epoch objective is linear-fractional in
    the assignment distribution).
    """
    net = g.network
    agents = g.agents
    states = enumerate_knowledge_states(net, cap=state_cap)
    every = net.all_tasks

    values: dict[frozenset[str], float] = {}
    assignments: dict[frozenset[str], dict[str, str]] = {}
    # iterate solved sets from largest to smallest => open sets grow
    for state in sorted(states, key=lambda s: -len(s.solved)):
        open_set = every - state.solved
        if not open_set:
            values[open_set] = 0.0
            assignments[open_set] = {}
            continue
        frontier = sorted(available_tasks(net, state.solved))
        if len(frontier) ** len(agents) > assignment_cap:
            raise AssignmentSpaceExceeded(
                f"{len(frontier)}^{len(agents)} assignments in one state "
                f"exceed the cap of {assignment_cap}"
            )
        best = None
        best_assign = None
        for assign in itertools.product(frontier, repeat=len(agents)):
            pooled: dict[str, float] = {}
            for agent, task in zip(agents, assign):
                pooled[task] = pooled.get(task, 0.0) + g.rate(agent, task)
            total = sum(pooled[u] for u in sorted(pooled))
            value = 1.0
            for task in sorted(pooled):
                value += pooled[task] * values[open_set - {task}]
            value /= total
            if best is None or value < best:
                best = value
                best_assign = dict(zip(agents, assign))
        values[open_set] = best
        assignments[open_set] = best_assign

    opt_time = values[every]
    herd_time = herding_makespan(g)
    assert opt_time <= herd_time + EPS
    ratio = herd_time / opt_time
    assert ratio <= net.m + EPS
    return MakespanResult(
        herding_time=herd_time,
        opt_time=opt_time,
        ratio=ratio,
        state_values=values,
        state_assignments=assignments,
    )


def _herding_rates(
    g: GameSpec, public_open: frozenset[str], exclude: str
) -> list[tuple[str, float]]:
    """Pooled work rates of the non-deviators.

    Each other agent works her own highest-virtual-reward task among the
    publicly available ones (ties to the lexicographically smallest task),
    sharing immediately on a solve; rates pool per chosen task.
    """
    net = g.network
    public_solved = net.all_tasks - public_open
    frontier = sorted(available_tasks(net, public_solved))
    pooled: dict[str, float] = {}
    for agent in g.agents:
        if agent == exclude:
            continue
        best_task = None
        best_key = -1.0
        for task in frontier:
            own = g.rate(agent, task)
            others = g.total_rate(task) - own
            key = g.rewards[task] * own * others / (own + others)
            if key > best_key:
                best_key = key
                best_task = task
        pooled[best_task] = pooled.get(best_task, 0.0) + g.rate(agent, best_task)
    return [(task, pooled[task]) for task in sorted(pooled)]


def best_response_value(
    g: GameSpec, agent: str, *, state_cap: int = DEFAULT_STATE_CAP
) -> BestResponseResult:
    """Value of deviating from immediate sharing for one agent.

    State (public open M, own open T): the deviator may publicly release
    all captive solutions (banking their rewards, moving to (T, T)), or
    withhold through the next exponential race while working one of her own
    available tasks.  A captive task solved by someone else is forfeited.
    The unrestricted action maximum backs ``is_best_response``.  The same
    sweep also values two committed strategies: always share instantly
    (the sharing value being compared against) and never share until the
    deviator holds every remaining solution.
    """
    if g.n < 2:
        raise SingleAgent("deviation analysis needs at least two agents")
    if agent not in g.agents:
        raise ValidationError(f"unknown agent {agent!r}")
    net = g.network
    pairs = subgame_pairs(net, cap=state_cap)
    pairs.sort(key=lambda p: (len(p.open_all), len(p.open_own),
                              tuple(sorted(p.open_all)), tuple(sorted(p.open_own))))

    values: dict[SubgamePair, float] = {}
    sharer: dict[SubgamePair, float] = {}
    withhold: dict[SubgamePair, float] = {}
    actions: dict[SubgamePair, tuple] = {}

    for pair in pairs:
        open_all, open_own = pair.open_all, pair.open_own
        if not open_all:
            values[pair] = 0.0
            sharer[pair] = 0.0
            withhold[pair] = 0.0
            actions[pair] = ("done",)
            continue
        captive = pair.captive
        banked = sum(g.rewards[u] for u in sorted(captive))

        options: list[tuple[float, tuple]] = []
        if captive:
            share_to = SubgamePair(open_all=open_own, open_own=open_own)
            options.append((banked + values[share_to], ("share",)))
            sharer[pair] = banked + sharer[share_to]

        rivals = _herding_rates(g, open_all, exclude=agent)
        rival_total = sum(rate for _, rate in rivals)

        own_solved = net.all_tasks - open_own
        own_frontier = sorted(available_tasks(net, own_solved)) if open_own else []
        withhold_best = None
        sharer_best = None
        for task in own_frontier:
            own_rate = g.rate(agent, task)
            denom = own_rate + rival_total
            after_solve = SubgamePair(open_all=open_all, open_own=open_own - {task})
            acc = own_rate * values[after_solve]
            acc_wh = own_rate * withhold[after_solve]
            acc_sh = own_rate * sharer[after_solve]
            for rival_task, pooled in rivals:
                if rival_task in captive:
                    nxt = SubgamePair(
                        open_all=open_all - {rival_task}, open_own=open_own
                    )
                else:
                    nxt = SubgamePair(
                        open_all=open_all - {rival_task},
                        open_own=open_own - {rival_task},
                    )
                acc += pooled * values[nxt]
                acc_wh += pooled * withhold[nxt]
                acc_sh += pooled * sharer[nxt]
            options.append((acc / denom, ("work", task)))
            if withhold_best is None or acc_wh / denom > withhold_best:
                withhold_best = acc_wh / denom
            if sharer_best is None or acc_sh / denom > sharer_best:
                sharer_best = acc_sh / denom

        best_value, best_action = options[0]
        for value, action in options[1:]:
            if value > best_value:
                best_value, best_action = value, action
        values[pair] = best_value
        actions[pair] = best_action
        # never-share: flush only once nothing of its own remains open
        withhold[pair] = banked if withhold_best is None else withhold_best
        # always-share: captive states flush instantly, so the work values
        # only matter where there is nothing captive to release
        if not captive:
            sharer[pair] = banked if sharer_best is None else sharer_best

    root = root_pair(g)
    pps_value = sharer[root]
    best_dev = values[root]
    return BestResponseResult(
        agent=agent,
        pps_value=pps_value,
        best_deviation_value=best_dev,
        withhold_value=withhold[root],
        is_best_response=best_dev <= pps_value + EPS,
        state_values=values,
        state_actions=actions,
    )


def verify_nash_pps(g: GameSpec, *, state_cap: int = DEFAULT_STATE_CAP) -> NashReport:
    """Immediate sharing is an equilibrium iff no agent's deviation value
    beats her sharing value.  Trivially verified with a single agent."""
    if g.n < 2:
        return NashReport(verified=True, results={}, violators=())
    results = {a: best_response_value(g, a, state_cap=state_cap) for a in g.agents}
    violators = tuple(a for a in g.agents if not results[a].is_best_response)
    return NashReport(verified=not violators, results=results, violators=violators)


def _merged_game(g: GameSpec, coalition: tuple[str, ...]) -> tuple[GameSpec, str]:
    merged_id = "coalition:" + "+".join(coalition)
    while merged_id in g.agents:
        merged_id += "#"
    rates = {
        merged_id: {
            u: g.coalition_rate(coalition, u) for u in g.network.tasks
        }
    }
    for other in g.agents:
        if other not in coalition:
            rates[other] = {u: g.rate(other, u) for u in g.network.tasks}
    merged = GameSpec(
        network=g.network,
        aptitudes=AptitudeMatrix(rates=rates),
        rewards=g.rewards,
    )
    return merged, merged_id


def coalition_analysis(
    g: GameSpec,
    *,
    coalition_limit: int = DEFAULT_COALITION_LIMIT,
    state_cap: int = DEFAULT_STATE_CAP,
) -> CoalitionReport:
    """Core membership of the immediate-sharing payoff vector.

    Every proper coalition is merged into one agent (rates pool per task)
    whose deviation DP value is compared against the members' combined
    sharing payoff.  The grand coalition's value is the full reward pot.
    """
    if g.n > coalition_limit:
        raise CoalitionSpaceExceeded(
            f"{g.n} agents exceed the coalition limit of {coalition_limit}"
        )
    profile = utility_profile(g)
    assert abs(sum(profile.utilities.values()) - profile.total) <= 1e-6 * max(
        1.0, profile.total
    )
    records = []
    first_violation = None
    for size in range(1, g.n):
        for coalition in itertools.combinations(g.agents, size):
            merged, merged_id = _merged_game(g, coalition)
            value = best_response_value(
                merged, merged_id, state_cap=state_cap
            ).best_deviation_value
            share_sum = sum(profile.utilities[a] for a in coalition)
            record = CoalitionRecord(
                members=coalition,
                value=value,
                share_sum=share_sum,
                gain=value - share_sum,
            )
            records.append(record)
            if record.gain > EPS and first_violation is None:
                first_violation = record
    return CoalitionReport(
        in_core=first_violation is None,
        records=tuple(records),
        grand_value=profile.total,
        utilities=profile.utilities,
        first_violation=first_violation,
    )


def poa_ratio(
    g: GameSpec,
    *,
    state_cap: int = DEFAULT_STATE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> float:
    """Herding-to-optimal expected makespan ratio; always within [1, m]."""
    result = opt_makespan(g, state_cap=state_cap, assignment_cap=assignment_cap)
    assert 1.0 - EPS <= result.ratio <= g.network.m + EPS
    return result.ratio
