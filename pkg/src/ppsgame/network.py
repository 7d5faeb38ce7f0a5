"""Acyclic subtask networks and their combinatorial state space.

Tasks are the *edges* of a directed acyclic graph over milestone nodes.
A task can be attempted only once every task it transitively depends on is
solved, so any reachable game state is a predecessor-closed set of solved
tasks.  This module builds networks, validates knowledge states, and
enumerates the state space (closed sets and nested open-set pairs).

All operations are pure functions of immutable values and use lexicographic
identifier order for every deterministic ordering and tie-break.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import AbstractSet, Iterable

from .errors import (
    CycleDetected,
    DanglingNode,
    DuplicateId,
    InvalidKnowledgeState,
    InvalidPair,
    NotALine,
    StateSpaceExceeded,
    ValidationError,
)

#: Default bound on enumerated states; the closed-set family is exponential
#: in the task count for wide networks.
DEFAULT_STATE_CAP = 1_000_000


@dataclass(frozen=True, eq=False)
class SubtaskNetwork:
    """Immutable acyclic network whose edges are the subtasks.

    ``tasks`` is the canonical (lexicographically sorted) task order used
    everywhere for determinism.  ``predecessors[u]`` holds every task that
    must be solved before ``u`` can be attempted; ``descendants[u]`` holds
    every task reachable from ``u`` (``u`` excluded from both).
    """

    nodes: tuple[str, ...]
    tasks: tuple[str, ...]
    endpoints: dict[str, tuple[str, str]]
    predecessors: dict[str, frozenset[str]]
    descendants: dict[str, frozenset[str]]
    task_index: dict[str, int] = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.tasks)

    @property
    def all_tasks(self) -> frozenset[str]:
        return frozenset(self.tasks)

    def source(self, task: str) -> str:
        return self.endpoints[task][0]

    def target(self, task: str) -> str:
        return self.endpoints[task][1]

    def reaches(self, u: str, v: str) -> bool:
        """True iff ``v`` is reachable from ``u`` (and ``u != v``)."""
        return v in self.descendants[u]

    def precedence_pairs(self) -> list[tuple[str, str]]:
        """All ordered pairs ``(u, v)`` with ``v`` reachable from ``u``.

        Sorted by dependency depth so that on a line the pairs appear in
        path order.
        """
        rank = {u: (len(self.predecessors[u]), u) for u in self.tasks}
        pairs = [
            (u, v) for u in self.tasks for v in sorted(self.descendants[u])
        ]
        pairs.sort(key=lambda p: (rank[p[0]], rank[p[1]]))
        return pairs

    def validate_knowledge(self, solved: AbstractSet[str]) -> frozenset[str]:
        """Check predecessor closure; returns the set as a frozenset."""
        solved = frozenset(solved)
        unknown = solved - self.all_tasks
        if unknown:
            raise InvalidKnowledgeState(
                f"unknown task ids in solved set: {sorted(unknown)}"
            )
        for u in solved:
            missing = self.predecessors[u] - solved
            if missing:
                raise InvalidKnowledgeState(
                    f"task {u!r} is solved but its predecessors "
                    f"{sorted(missing)} are not"
                )
        return solved


@dataclass(frozen=True)
class KnowledgeState:
    """A predecessor-closed set of solved tasks."""

    solved: frozenset[str]

    def __contains__(self, task: str) -> bool:
        return task in self.solved

    def __len__(self) -> int:
        return len(self.solved)


@dataclass(frozen=True)
class SubgamePair:
    """Nested open-task sets: ``open_own`` for a distinguished agent who may
    hold unshared solutions, ``open_all`` for everyone else.

    Both complements are valid knowledge states and
    ``open_own <= open_all``; the captive set is what the distinguished
    agent has solved but not shared.
    """

    open_all: frozenset[str]
    open_own: frozenset[str]

    @property
    def captive(self) -> frozenset[str]:
        return self.open_all - self.open_own

    def __iter__(self):
        return iter((self.open_all, self.open_own))


def _as_solved(state: KnowledgeState | AbstractSet[str]) -> AbstractSet[str]:
    if isinstance(state, KnowledgeState):
        return state.solved
    return state


def build_network(
    nodes: Iterable[str],
    subtasks: Iterable[tuple[str, str, str]],
) -> SubtaskNetwork:
    """Build a validated network from ``(task id, from node, to node)`` rows.

    Node ids may include isolated nodes; every edge endpoint must be
    declared.  Parallel edges between the same node pair are allowed.
    """
    node_list = list(nodes)
    node_set = set()
    for node in node_list:
        if node in node_set:
            raise DuplicateId(f"duplicate node id {node!r}")
        node_set.add(node)

    rows = list(subtasks)
    if not rows:
        raise ValidationError("a network needs at least one subtask")

    endpoints: dict[str, tuple[str, str]] = {}
    for task, src, dst in rows:
        if task in endpoints:
            raise DuplicateId(f"duplicate task id {task!r}")
        for endpoint in (src, dst):
            if endpoint not in node_set:
                raise DanglingNode(
                    f"task {task!r} references undeclared node {endpoint!r}"
                )
        endpoints[task] = (src, dst)

    out_edges: dict[str, list[str]] = {node: [] for node in node_list}
    for task in sorted(endpoints):
        out_edges[endpoints[task][0]].append(task)

    _reject_cycles(node_list, endpoints, out_edges)

    # reach[x] = nodes reachable from x, including x itself
    reach: dict[str, frozenset[str]] = {
        node: _reachable_nodes(node, endpoints, out_edges) for node in node_list
    }

    tasks = tuple(sorted(endpoints))
    predecessors = {
        v: frozenset(
            u for u in tasks if u != v and endpoints[v][0] in reach[endpoints[u][1]]
        )
        for v in tasks
    }
    descendants = {
        u: frozenset(
            v for v in tasks if u != v and endpoints[v][0] in reach[endpoints[u][1]]
        )
        for u in tasks
    }
    return SubtaskNetwork(
        nodes=tuple(node_list),
        tasks=tasks,
        endpoints=endpoints,
        predecessors=predecessors,
        descendants=descendants,
        task_index={task: i for i, task in enumerate(tasks)},
    )


def _reject_cycles(node_list, endpoints, out_edges) -> None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node: WHITE for node in node_list}
    parent: dict[str, str] = {}
    for start in node_list:
        if color[start] != WHITE:
            continue
        stack = [(start, iter(out_edges[start]))]
        color[start] = GREY
        while stack:
            node, edge_iter = stack[-1]
            advanced = False
            for task in edge_iter:
                nxt = endpoints[task][1]
                if color[nxt] == GREY:
                    cycle = [nxt, node]
                    walk = node
                    while walk != nxt:
                        walk = parent[walk]
                        cycle.append(walk)
                    raise CycleDetected(reversed(cycle))
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    parent[nxt] = node
                    stack.append((nxt, iter(out_edges[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()


def _reachable_nodes(start, endpoints, out_edges) -> frozenset[str]:
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for task in out_edges[node]:
            nxt = endpoints[task][1]
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


def available_tasks(
    net: SubtaskNetwork, solved: KnowledgeState | AbstractSet[str]
) -> frozenset[str]:
    """Open tasks whose predecessors are all solved."""
    solved = net.validate_knowledge(_as_solved(solved))
    return frozenset(
        u for u in net.tasks if u not in solved and net.predecessors[u] <= solved
    )


def enumerate_knowledge_states(
    net: SubtaskNetwork, cap: int = DEFAULT_STATE_CAP
) -> list[KnowledgeState]:
    """All predecessor-closed solved sets, smallest first then lexicographic."""
    if cap <= 0:
        raise ValidationError("cap must be positive")
    seen: set[frozenset[str]] = {frozenset()}
    queue: list[frozenset[str]] = [frozenset()]
    while queue:
        state = queue.pop()
        frontier = (
            u
            for u in net.tasks
            if u not in state and net.predecessors[u] <= state
        )
        for u in frontier:
            nxt = state | {u}
            if nxt not in seen:
                if len(seen) >= cap:
                    raise StateSpaceExceeded(
                        f"more than {cap} knowledge states"
                    )
                seen.add(nxt)
                queue.append(nxt)
    ordered = sorted(seen, key=lambda s: (len(s), tuple(sorted(s))))
    return [KnowledgeState(s) for s in ordered]


def is_linear(net: SubtaskNetwork) -> bool:
    """True iff the tasks form a single directed path."""
    used_nodes: set[str] = set()
    indeg: dict[str, int] = {}
    outdeg: dict[str, int] = {}
    for task in net.tasks:
        src, dst = net.endpoints[task]
        used_nodes.update((src, dst))
        outdeg[src] = outdeg.get(src, 0) + 1
        indeg[dst] = indeg.get(dst, 0) + 1
    if any(d > 1 for d in indeg.values()) or any(d > 1 for d in outdeg.values()):
        return False
    # in/out degree <= 1 and acyclic => disjoint paths; one path iff
    # the edge count is one less than the touched node count.
    return len(used_nodes) == net.m + 1


def line_order(net: SubtaskNetwork) -> list[str]:
    """Tasks of a linear network in path order."""
    if not is_linear(net):
        raise NotALine("network is not a line")
    return sorted(net.tasks, key=lambda u: len(net.predecessors[u]))


def subgame_pair(
    net: SubtaskNetwork,
    open_all: AbstractSet[str],
    open_own: AbstractSet[str],
) -> SubgamePair:
    """Validated nested pair; complements must both be closed."""
    open_all = frozenset(open_all)
    open_own = frozenset(open_own)
    if not open_own <= open_all:
        raise InvalidPair("own open set must be contained in the public one")
    try:
        net.validate_knowledge(net.all_tasks - open_all)
        net.validate_knowledge(net.all_tasks - open_own)
    except InvalidKnowledgeState as exc:
        raise InvalidPair(str(exc)) from exc
    return SubgamePair(open_all=open_all, open_own=open_own)


def subgame_pairs(
    net: SubtaskNetwork, cap: int = DEFAULT_STATE_CAP
) -> list[SubgamePair]:
    """All valid nested open-set pairs, in deterministic order.

    Ordered by (public open size, public open ids, own open size, own open
    ids); the cap bounds the returned pair count.
    """
    if cap <= 0:
        raise ValidationError("cap must be positive")
    states = [ks.solved for ks in enumerate_knowledge_states(net, cap=cap)]
    every = net.all_tasks
    pairs: list[SubgamePair] = []
    for pub_solved in states:
        for own_solved in states:
            if pub_solved <= own_solved:
                if len(pairs) >= cap:
                    raise StateSpaceExceeded(f"more than {cap} subgame pairs")
                pairs.append(
                    SubgamePair(
                        open_all=every - pub_solved, open_own=every - own_solved
                    )
                )
    pairs.sort(
        key=lambda p: (
            len(p.open_all),
            tuple(sorted(p.open_all)),
            len(p.open_own),
            tuple(sorted(p.open_own)),
        )
    )
    return pairs
