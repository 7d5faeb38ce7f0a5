"""Aptitudes, rewards, and sufficient-condition checkers.

Each ``check_*`` function evaluates a sufficient condition for immediate
progress sharing to be stable (a best response, coalition-proof, or the
unique equilibrium) and returns a :class:`ConditionReport` that either
passes or carries concrete numeric witnesses of the first violations.

Numeric policy: every inequality is evaluated after clearing denominators,
with absolute tolerance ``EPS`` on the difference.  Boundary equality
passes weak inequalities and fails strict ones, so verdicts near a
threshold are deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    CoalitionSpaceExceeded,
    EmptyStackelbergSet,
    InapplicableChecker,
    NonPositiveParameter,
    NotALine,
    SingleAgent,
    ValidationError,
)
from .network import SubtaskNetwork, is_linear, line_order

EPS = 1e-9

#: Coalition enumeration is 2**n - 2; refuse beyond this many agents.
DEFAULT_COALITION_LIMIT = 16


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise NonPositiveParameter(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class SAProfile:
    """Separable aptitudes: rate(agent, task) = ability * simplicity."""

    abilities: Mapping[str, float]
    simplicities: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(
            self,
            "abilities",
            {a: _check_positive(f"ability of {a!r}", x) for a, x in self.abilities.items()},
        )
        object.__setattr__(
            self,
            "simplicities",
            {u: _check_positive(f"simplicity of {u!r}", x) for u, x in self.simplicities.items()},
        )
        if not self.abilities:
            raise ValidationError("at least one agent is required")
        if not self.simplicities:
            raise ValidationError("at least one task is required")

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(sorted(self.abilities))

    @property
    def total_ability(self) -> float:
        return sum(self.abilities[a] for a in self.agents)

    def rate(self, agent: str, task: str) -> float:
        return self.abilities[agent] * self.simplicities[task]


@dataclass(frozen=True)
class AptitudeMatrix:
    """General positive rate per (agent, task)."""

    rates: Mapping[str, Mapping[str, float]]

    def __post_init__(self):
        if not self.rates:
            raise ValidationError("at least one agent is required")
        tasks = None
        cleaned: dict[str, dict[str, float]] = {}
        for agent, row in self.rates.items():
            row = {
                u: _check_positive(f"aptitude of {agent!r} for {u!r}", x)
                for u, x in row.items()
            }
            if tasks is None:
                tasks = set(row)
            elif set(row) != tasks:
                raise ValidationError(
                    f"agent {agent!r} has aptitudes for a different task set"
                )
            cleaned[agent] = row
        if not tasks:
            raise ValidationError("at least one task is required")
        object.__setattr__(self, "rates", cleaned)

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(sorted(self.rates))

    def rate(self, agent: str, task: str) -> float:
        return self.rates[agent][task]


def expand_sa(profile: SAProfile) -> AptitudeMatrix:
    """Materialize the rank-one rate matrix of a separable profile."""
    return AptitudeMatrix(
        rates={
            a: {u: profile.rate(a, u) for u in profile.simplicities}
            for a in profile.abilities
        }
    )


@dataclass(frozen=True)
class RewardVector:
    """Non-negative finite reward per task."""

    rewards: Mapping[str, float]

    def __post_init__(self):
        cleaned = {}
        for task, value in self.rewards.items():
            value = float(value)
            if not math.isfinite(value) or value < 0.0:
                raise ValidationError(
                    f"reward of {task!r} must be finite and non-negative, got {value!r}"
                )
            cleaned[task] = value
        object.__setattr__(self, "rewards", cleaned)

    def __getitem__(self, task: str) -> float:
        return self.rewards[task]

    @property
    def total(self) -> float:
        return sum(self.rewards[u] for u in sorted(self.rewards))


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A complete game: network, aptitudes, rewards, optional committed set.

    ``stackelberg`` names agents who commit to immediate sharing up front;
    it is only consulted by the committed-set checkers.
    """

    network: SubtaskNetwork
    aptitudes: SAProfile | AptitudeMatrix
    rewards: RewardVector
    stackelberg: frozenset[str] | None = None

    def __post_init__(self):
        tasks = set(self.network.tasks)
        if isinstance(self.aptitudes, SAProfile):
            apt_tasks = set(self.aptitudes.simplicities)
        else:
            apt_tasks = set(next(iter(self.aptitudes.rates.values())))
        if apt_tasks != tasks:
            raise ValidationError("aptitude task ids do not match the network")
        if set(self.rewards.rewards) != tasks:
            raise ValidationError("reward task ids do not match the network")
        if self.stackelberg is not None:
            stack = frozenset(self.stackelberg)
            if not stack:
                raise EmptyStackelbergSet("committed agent set is empty")
            unknown = stack - set(self.agents)
            if unknown:
                raise ValidationError(f"unknown committed agents: {sorted(unknown)}")
            object.__setattr__(self, "stackelberg", stack)

    @property
    def agents(self) -> tuple[str, ...]:
        return self.aptitudes.agents

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def is_sa(self) -> bool:
        return isinstance(self.aptitudes, SAProfile)

    @cached_property
    def matrix(self) -> AptitudeMatrix:
        if isinstance(self.aptitudes, AptitudeMatrix):
            return self.aptitudes
        return expand_sa(self.aptitudes)

    def rate(self, agent: str, task: str) -> float:
        return self.aptitudes.rate(agent, task)

    def total_rate(self, task: str) -> float:
        return sum(self.rate(a, task) for a in self.agents)

    def others_rate(self, agent: str, task: str) -> float:
        return self.total_rate(task) - self.rate(agent, task)

    def coalition_rate(self, coalition: Iterable[str], task: str) -> float:
        return sum(self.rate(a, task) for a in coalition)


@dataclass(frozen=True)
class Witness:
    """One concrete violation of a checked condition."""

    kind: str
    tasks: tuple[str, ...]
    agent: str | None = None
    coalition: tuple[str, ...] | None = None
    lhs: float | None = None
    rhs: float | None = None
    note: str = ""


@dataclass(frozen=True)
class ConditionReport:
    check: str
    passed: bool
    witnesses: tuple[Witness, ...] = ()
    thresholds: dict[str, float] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def first_witness(self) -> Witness | None:
        return self.witnesses[0] if self.witnesses else None


@dataclass(frozen=True)
class Thresholds:
    """Scalar reward-ratio thresholds of a separable profile."""

    alpha_ne: float
    alpha_c: float
    alpha_s: float | None = None


def virtual_reward(g: GameSpec, agent: str, task: str) -> float:
    """Contested value R * a_i * a_{-i} / (a_i + a_{-i}) of a task.

    The common descending order of these values across agents is what makes
    everyone pile onto the same task.
    """
    if g.n < 2:
        raise SingleAgent("virtual rewards need at least two agents")
    own = g.rate(agent, task)
    others = g.others_rate(agent, task)
    return g.rewards[task] * own * others / (own + others)


def sa_thresholds(
    profile: SAProfile, stackelberg: Iterable[str] | None = None
) -> Thresholds:
    """Reward-ratio thresholds for equilibrium, core, and committed-set
    uniqueness under separable aptitudes."""
    agents = profile.agents
    if len(agents) < 2:
        raise SingleAgent("thresholds need at least two agents")
    total = profile.total_ability
    shares = [profile.abilities[a] / total for a in agents]
    alpha_ne = max(shares)
    alpha_c = 1.0 - min(shares)
    alpha_s = None
    if stackelberg is not None:
        stack = frozenset(stackelberg)
        if not stack:
            raise EmptyStackelbergSet("committed agent set is empty")
        unknown = stack - set(agents)
        if unknown:
            raise ValidationError(f"unknown committed agents: {sorted(unknown)}")
        committed = sum(profile.abilities[a] for a in stack)
        alpha_s = max(
            (profile.abilities[a] / committed)
            * ((total - profile.abilities[a]) / total)
            for a in agents
        )
    assert alpha_ne <= alpha_c + EPS and alpha_c < 1.0
    return Thresholds(alpha_ne=alpha_ne, alpha_c=alpha_c, alpha_s=alpha_s)


def _weak_fails(lhs: float, rhs: float) -> bool:
    return lhs - rhs < -EPS


def _sa_threshold_note(g: GameSpec, with_stackelberg: bool = False) -> dict[str, float]:
    if not g.is_sa or g.n < 2:
        return {}
    th = sa_thresholds(
        g.aptitudes, g.stackelberg if with_stackelberg and g.stackelberg else None
    )
    out = {"alpha_ne": th.alpha_ne, "alpha_c": th.alpha_c}
    if th.alpha_s is not None:
        out["alpha_s"] = th.alpha_s
    return out


def check_line_ne(g: GameSpec) -> ConditionReport:
    """Line sufficient condition for immediate sharing to be an equilibrium.

    For every agent i and tasks u before v:
    R_u * a_{-i}(u) * (a_i(v) + a_{-i}(v)) >= R_v * a_{-i}(v) * a_i(v).
    With one agent the condition is vacuous.
    """
    if not is_linear(g.network):
        raise NotALine("line equilibrium check needs a linear network")
    witnesses = []
    for agent in g.agents:
        for u, v in g.network.precedence_pairs():
            lhs = g.rewards[u] * g.others_rate(agent, u) * g.total_rate(v)
            rhs = g.rewards[v] * g.others_rate(agent, v) * g.rate(agent, v)
            if _weak_fails(lhs, rhs):
                witnesses.append(
                    Witness(kind="pair", tasks=(u, v), agent=agent, lhs=lhs, rhs=rhs)
                )
    return ConditionReport(
        check="line-ne",
        passed=not witnesses,
        witnesses=tuple(witnesses),
        thresholds=_sa_threshold_note(g),
    )


def _proper_coalitions(agents: tuple[str, ...], limit: int):
    if len(agents) > limit:
        raise CoalitionSpaceExceeded(
            f"{len(agents)} agents exceed the coalition limit of {limit}"
        )
    for size in range(1, len(agents)):
        yield from itertools.combinations(agents, size)


def check_line_core(
    g: GameSpec, coalition_limit: int = DEFAULT_COALITION_LIMIT
) -> ConditionReport:
    """Line condition under which no coalition gains by withholding.

    Runs the pairwise reward inequality with every proper coalition treated
    as one merged agent; singleton coalitions reproduce the equilibrium
    check, so a core pass implies an equilibrium pass.
    """
    if not is_linear(g.network):
        raise NotALine("line core check needs a linear network")
    pairs = g.network.precedence_pairs()
    totals = {u: g.total_rate(u) for u in g.network.tasks}
    witnesses = []
    for coalition in _proper_coalitions(g.agents, coalition_limit):
        rate_c = {u: g.coalition_rate(coalition, u) for u in g.network.tasks}
        for u, v in pairs:
            lhs = g.rewards[u] * (totals[u] - rate_c[u]) * totals[v]
            rhs = g.rewards[v] * (totals[v] - rate_c[v]) * rate_c[v]
            if _weak_fails(lhs, rhs):
                witnesses.append(
                    Witness(
                        kind="coalition-pair",
                        tasks=(u, v),
                        coalition=coalition,
                        lhs=lhs,
                        rhs=rhs,
                    )
                )
    return ConditionReport(
        check="line-core",
        passed=not witnesses,
        witnesses=tuple(witnesses),
        thresholds=_sa_threshold_note(g),
    )


def check_line_stackelberg(g: GameSpec) -> ConditionReport:
    """Line condition for sharing to be the unique equilibrium when the
    committed agents' combined rate backs every early task.

    For every non-committed agent i and tasks u before v:
    R_u * b(u) * (a_i(v) + a_{-i}(v)) >= R_v * a_{-i}(v) * a_i(v),
    where b(u) is the committed agents' total rate on u.
    """
    if not is_linear(g.network):
        raise NotALine("line uniqueness check needs a linear network")
    if not g.stackelberg:
        raise EmptyStackelbergSet("no committed agents configured")
    committed = g.stackelberg
    followers = [a for a in g.agents if a not in committed]
    notes = ()
    if not followers:
        notes = ("all agents are committed; nothing to check",)
    witnesses = []
    for agent in followers:
        for u, v in g.network.precedence_pairs():
            backed = g.coalition_rate(committed, u)
            lhs = g.rewards[u] * backed * g.total_rate(v)
            rhs = g.rewards[v] * g.others_rate(agent, v) * g.rate(agent, v)
            if _weak_fails(lhs, rhs):
                witnesses.append(
                    Witness(kind="pair", tasks=(u, v), agent=agent, lhs=lhs, rhs=rhs)
                )
    return ConditionReport(
        check="line-stackelberg",
        passed=not witnesses,
        witnesses=tuple(witnesses),
        thresholds=_sa_threshold_note(g, with_stackelberg=True),
        notes=notes,
    )


def _pair_sign(lhs: float, rhs: float) -> int:
    """1 if lhs wins strictly, -1 if rhs wins strictly, 0 on a tie at EPS."""
    diff = lhs - rhs
    if diff > EPS:
        return 1
    if diff < -EPS:
        return -1
    return 0


def _ordering_report(
    g: GameSpec,
    check_name: str,
    compare,
    thresholds: dict[str, float] | None = None,
) -> ConditionReport:
    """Verify all agents share one strict task order and that it respects
    reachability.

    ``compare(agent, u, v)`` returns the sign of key(u) - key(v) for that
    agent (1, -1, or 0 on a tie).
    """
    agents = g.agents
    tasks = g.network.tasks
    witnesses = []
    reference = agents[0]
    for u, v in itertools.combinations(tasks, 2):
        ref_sign = compare(reference, u, v)
        if ref_sign == 0:
            witnesses.append(
                Witness(
                    kind="tie",
                    tasks=(u, v),
                    agent=reference,
                    note="strict order needs distinct keys",
                )
            )
        for agent in agents[1:]:
            sign = compare(agent, u, v)
            if sign == 0:
                witnesses.append(
                    Witness(
                        kind="tie",
                        tasks=(u, v),
                        agent=agent,
                        note="strict order needs distinct keys",
                    )
                )
            elif ref_sign != 0 and sign != ref_sign:
                witnesses.append(
                    Witness(
                        kind="order-disagreement",
                        tasks=(u, v),
                        agent=agent,
                        note=f"orders ({u}, {v}) opposite to agent {reference!r}",
                    )
                )
    for u, v in g.network.precedence_pairs():
        # downstream tasks must rank strictly below their ancestors
        bad = [a for a in agents if compare(a, u, v) != 1]
        if bad:
            witnesses.append(
                Witness(
                    kind="reachability",
                    tasks=(u, v),
                    agent=bad[0],
                    note=f"{v!r} is reachable from {u!r} but does not rank below it",
                )
            )
    return ConditionReport(
        check=check_name,
        passed=not witnesses,
        witnesses=tuple(witnesses),
        thresholds=thresholds or {},
    )


def check_dag_ne(g: GameSpec) -> ConditionReport:
    """General-network condition: all agents must order tasks identically by
    strictly descending virtual reward, and that order must place every task
    below everything it depends on."""
    if g.n < 2:
        raise SingleAgent("the herding-order check needs at least two agents")

    totals = {u: g.total_rate(u) for u in g.network.tasks}

    def compare(agent: str, u: str, v: str) -> int:
        own_u, own_v = g.rate(agent, u), g.rate(agent, v)
        lhs = g.rewards[u] * own_u * (totals[u] - own_u) * totals[v]
        rhs = g.rewards[v] * own_v * (totals[v] - own_v) * totals[u]
        return _pair_sign(lhs, rhs)

    return _ordering_report(g, "dag-ne", compare, _sa_threshold_note(g))


def check_dag_sa(
    profile: SAProfile, net: SubtaskNetwork, rewards: RewardVector
) -> ConditionReport:
    """Separable-network condition: reward * simplicity may never increase
    along a dependency path (weak inequality, so exact proportional rewards
    pass on every network)."""
    if set(profile.simplicities) != set(net.tasks):
        raise ValidationError("profile task ids do not match the network")
    witnesses = []
    for u, v in net.precedence_pairs():
        lhs = rewards[u] * profile.simplicities[u]
        rhs = rewards[v] * profile.simplicities[v]
        if _weak_fails(lhs, rhs):
            witnesses.append(Witness(kind="pair", tasks=(u, v), lhs=lhs, rhs=rhs))
    return ConditionReport(
        check="dag-sa", passed=not witnesses, witnesses=tuple(witnesses)
    )


def check_dag_stackelberg(
    profile: SAProfile,
    net: SubtaskNetwork,
    rewards: RewardVector,
    stackelberg: Iterable[str],
) -> ConditionReport:
    """Separable-network uniqueness condition with committed agents.

    Requires a strict total order where task u beats task v exactly when
    R_u s_u * b > R_v s_v * max_i a_{-i} (b = committed total ability), and
    that order must respect reachability.
    """
    stack = frozenset(stackelberg)
    if not stack:
        raise EmptyStackelbergSet("committed agent set is empty")
    unknown = stack - set(profile.abilities)
    if unknown:
        raise ValidationError(f"unknown committed agents: {sorted(unknown)}")
    if set(profile.simplicities) != set(net.tasks):
        raise ValidationError("profile task ids do not match the network")

    committed = sum(profile.abilities[a] for a in stack)
    total = profile.total_ability
    max_others = max(total - profile.abilities[a] for a in profile.agents)
    key = {u: rewards[u] * profile.simplicities[u] for u in net.tasks}

    def beats(u: str, v: str) -> bool:
        return key[u] * committed - key[v] * max_others > EPS

    witnesses = []
    for u, v in itertools.combinations(sorted(net.tasks), 2):
        forward, backward = beats(u, v), beats(v, u)
        if forward and backward:
            witnesses.append(
                Witness(
                    kind="tie",
                    tasks=(u, v),
                    note="both directions satisfy the strict ratio condition",
                )
            )
        elif not forward and not backward:
            witnesses.append(
                Witness(
                    kind="incomparable",
                    tasks=(u, v),
                    note="neither direction satisfies the strict ratio condition",
                )
            )
    for u, v in net.precedence_pairs():
        if not beats(u, v):
            witnesses.append(
                Witness(
                    kind="reachability",
                    tasks=(u, v),
                    lhs=key[u] * committed,
                    rhs=key[v] * max_others,
                    note=f"{v!r} is reachable from {u!r} but does not rank below it",
                )
            )
    thresholds = {"beta": committed, "max_others": max_others}
    return ConditionReport(
        check="dag-stackelberg",
        passed=not witnesses,
        witnesses=tuple(witnesses),
        thresholds=thresholds,
    )


def check_dag_core(g: GameSpec) -> ConditionReport:
    """General-network coalition-proofness condition: all agents must order
    tasks identically by strictly descending reward * own rate, consistent
    with reachability."""
    if g.n < 2:
        raise SingleAgent("the coalition-order check needs at least two agents")

    def compare(agent: str, u: str, v: str) -> int:
        return _pair_sign(
            g.rewards[u] * g.rate(agent, u), g.rewards[v] * g.rate(agent, v)
        )

    return _ordering_report(g, "dag-core", compare, _sa_threshold_note(g))


def design_rewards(
    profile: SAProfile,
    net: SubtaskNetwork,
    mode: str,
    *,
    scale: float = 1.0,
    alpha: float | None = None,
) -> RewardVector:
    """Construct a reward vector that satisfies a sharing condition.

    ``proportional``: R_u = scale / s_u, making reward * simplicity constant
    (passes the separable network check on any graph).

    ``line_approx``: on a line, give every non-final task
    R_u = alpha * scale / s_u and the final task R = scale / s_u, the vector
    that maximizes the final task's share subject to every precedence ratio
    staying >= alpha.
    """
    _check_positive("scale", scale)
    if set(profile.simplicities) != set(net.tasks):
        raise ValidationError("profile task ids do not match the network")
    if mode == "proportional":
        return RewardVector(
            {u: scale / profile.simplicities[u] for u in net.tasks}
        )
    if mode == "line_approx":
        if alpha is None:
            raise ValidationError("line_approx needs an alpha in (0, 1]")
        _check_positive("alpha", alpha)
        if alpha > 1.0:
            raise ValidationError("alpha must be at most 1")
        ordered = line_order_or_raise(net)
        final = ordered[-1]
        rewards = {
            u: (scale if u == final else alpha * scale) / profile.simplicities[u]
            for u in net.tasks
        }
        return RewardVector(rewards)
    raise ValidationError(f"unknown reward design mode {mode!r}")


def line_order_or_raise(net: SubtaskNetwork) -> list[str]:
    if not is_linear(net):
        raise NotALine("this operation needs a linear network")
    return line_order(net)


def require_sa(g: GameSpec) -> SAProfile:
    """The separable profile of a game, or an applicability error."""
    if not g.is_sa:
        raise InapplicableChecker("this check needs separable aptitudes")
    return g.aptitudes
