"""Built-in demo instances shared by the CLI, docs, and tests."""

from __future__ import annotations

import math

from .model import AptitudeMatrix, GameSpec, RewardVector, SAProfile
from .network import build_network


def two_task_line(
    reward_first: float = 1.0,
    reward_last: float = 5.0,
    *,
    simplicity_first: float = 2.0,
    simplicity_last: float = 1.0,
    abilities: tuple[float, ...] = (1.0, 1.0),
) -> GameSpec:
    """Two tasks in a row, the first twice as easy, identical agents.

    The default rewards make withholding profitable; lowering the final
    reward below four times the first flips that.
    """
    net = build_network(
        ["n1", "n2", "n3"], [("p", "n1", "n2"), ("q", "n2", "n3")]
    )
    profile = SAProfile(
        abilities={f"a{i + 1}": ab for i, ab in enumerate(abilities)},
        simplicities={"p": simplicity_first, "q": simplicity_last},
    )
    rewards = RewardVector({"p": reward_first, "q": reward_last})
    return GameSpec(network=net, aptitudes=profile, rewards=rewards)


def uniform_line(m: int = 6, n: int = 3, reward: float = 1.0) -> GameSpec:
    """A line of ``m`` unit-simplicity tasks and ``n`` unit-ability agents."""
    width = len(str(m))
    tasks = [f"t{k + 1:0{width}d}" for k in range(m)]
    nodes = [f"v{k:0{width}d}" for k in range(m + 1)]
    net = build_network(
        nodes, [(tasks[k], nodes[k], nodes[k + 1]) for k in range(m)]
    )
    profile = SAProfile(
        abilities={f"a{i + 1}": 1.0 for i in range(n)},
        simplicities={u: 1.0 for u in tasks},
    )
    rewards = RewardVector({u: reward for u in tasks})
    return GameSpec(network=net, aptitudes=profile, rewards=rewards)


def own_task_parallel(m: int = 4) -> GameSpec:
    """``m`` parallel tasks and ``m`` agents, each fast on her own task
    (rate 1) and slow elsewhere (rate 1/(m-1)).

    Rewards decay geometrically steeply enough that every agent ranks the
    tasks identically by virtual reward, so sharing strategies herd; the
    pooled rate is 2 on every task.
    """
    if m < 2:
        raise ValueError("this family needs at least two tasks")
    tasks = [f"t{k + 1}" for k in range(m)]
    net = build_network(["s", "e"], [(u, "s", "e") for u in tasks])
    off = 1.0 / (m - 1)
    rates = {
        f"a{i + 1}": {u: (1.0 if i == k else off) for k, u in enumerate(tasks)}
        for i in range(m)
    }
    # reward ratio must beat the own-task virtual-reward advantage
    boost = (m - 1) ** 2 / (2 * m - 3)
    base = max(2, math.ceil(boost) + 1)
    rewards = RewardVector(
        {u: float(base ** (m - 1 - k)) for k, u in enumerate(tasks)}
    )
    return GameSpec(network=net, aptitudes=AptitudeMatrix(rates=rates), rewards=rewards)
