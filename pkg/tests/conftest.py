"""Shared instance generators for the test suite.

All generators take a ``random.Random`` so each test controls its seed;
edges always point from a lower-indexed node to a higher-indexed one, which
makes every generated network acyclic by construction.
"""

from __future__ import annotations

import random

from ppsgame.model import AptitudeMatrix, GameSpec, RewardVector, SAProfile
from ppsgame.network import SubtaskNetwork, build_network


def random_network(rng: random.Random, max_m: int = 6) -> SubtaskNetwork:
    n_nodes = rng.randint(2, 5)
    nodes = [f"v{i}" for i in range(n_nodes)]
    m = rng.randint(1, max_m)
    edges = []
    for k in range(m):
        i = rng.randrange(0, n_nodes - 1)
        j = rng.randrange(i + 1, n_nodes)
        edges.append((f"e{k:02d}", nodes[i], nodes[j]))
    return build_network(nodes, edges)


def topological_tasks(net: SubtaskNetwork) -> list[str]:
    # predecessor-set size strictly increases along reachability
    return sorted(net.tasks, key=lambda u: (len(net.predecessors[u]), u))


def random_sa_game(
    rng: random.Random,
    max_m: int = 6,
    max_n: int = 4,
    decreasing_products: bool = False,
) -> GameSpec:
    net = random_network(rng, max_m)
    n = rng.randint(2, max_n)
    profile = SAProfile(
        abilities={f"a{i}": rng.uniform(0.5, 2.0) for i in range(1, n + 1)},
        simplicities={u: rng.uniform(0.5, 2.0) for u in net.tasks},
    )
    if decreasing_products:
        value = rng.uniform(1.0, 2.0)
        products = {}
        for u in topological_tasks(net):
            products[u] = value
            value *= rng.uniform(0.5, 0.9)
        rewards = RewardVector(
            {u: products[u] / profile.simplicities[u] for u in net.tasks}
        )
    else:
        rewards = RewardVector({u: rng.uniform(0.1, 3.0) for u in net.tasks})
    return GameSpec(network=net, aptitudes=profile, rewards=rewards)


def random_general_game(
    rng: random.Random, max_m: int = 5, max_n: int = 3
) -> GameSpec:
    net = random_network(rng, max_m)
    n = rng.randint(2, max_n)
    rates = {
        f"a{i}": {u: rng.uniform(0.5, 2.0) for u in net.tasks}
        for i in range(1, n + 1)
    }
    rewards = RewardVector({u: rng.uniform(0.1, 3.0) for u in net.tasks})
    return GameSpec(
        network=net, aptitudes=AptitudeMatrix(rates=rates), rewards=rewards
    )
