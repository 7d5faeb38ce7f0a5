import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_network
from ppsgame.errors import (
    CycleDetected,
    DanglingNode,
    DuplicateId,
    InvalidKnowledgeState,
    StateSpaceExceeded,
    ValidationError,
)
from ppsgame.network import (
    available_tasks,
    build_network,
    enumerate_knowledge_states,
    is_linear,
    line_order,
    subgame_pair,
    subgame_pairs,
)


def line(m):
    nodes = [f"v{i}" for i in range(m + 1)]
    return build_network(
        nodes, [(f"t{k + 1:02d}", nodes[k], nodes[k + 1]) for k in range(m)]
    )


def parallel(m):
    return build_network(["s", "e"], [(f"t{k + 1}", "s", "e") for k in range(m)])


def diamond():
    # a, then b and c in parallel, then d
    return build_network(
        ["v0", "v1", "v2", "v3"],
        [("a", "v0", "v1"), ("b", "v1", "v2"), ("c", "v1", "v2"), ("d", "v2", "v3")],
    )


class TestBuild:
    def test_two_task_line(self):
        net = build_network(["n1", "n2", "n3"], [("p", "n1", "n2"), ("q", "n2", "n3")])
        assert net.tasks == ("p", "q")
        assert net.predecessors["q"] == frozenset({"p"})
        assert net.predecessors["p"] == frozenset()
        assert net.descendants["p"] == frozenset({"q"})

    def test_parallel_edges(self):
        net = build_network(["n1", "n2"], [("a", "n1", "n2"), ("b", "n1", "n2")])
        assert net.predecessors["a"] == frozenset()
        assert net.predecessors["b"] == frozenset()

    def test_cycle(self):
        with pytest.raises(CycleDetected) as exc:
            build_network(["n1", "n2"], [("x", "n1", "n2"), ("y", "n2", "n1")])
        assert len(exc.value.cycle) >= 2

    def test_duplicate_task(self):
        with pytest.raises(DuplicateId):
            build_network(["n1", "n2"], [("x", "n1", "n2"), ("x", "n1", "n2")])

    def test_duplicate_node(self):
        with pytest.raises(DuplicateId):
            build_network(["n1", "n1"], [("x", "n1", "n1")])

    def test_dangling(self):
        with pytest.raises(DanglingNode):
            build_network(["n1"], [("x", "n1", "n9")])

    def test_empty(self):
        with pytest.raises(ValidationError):
            build_network(["n1"], [])


class TestAvailable:
    def test_line_progression(self):
        net = build_network(["n1", "n2", "n3"], [("p", "n1", "n2"), ("q", "n2", "n3")])
        assert available_tasks(net, set()) == {"p"}
        assert available_tasks(net, {"p"}) == {"q"}
        assert available_tasks(net, {"p", "q"}) == frozenset()

    def test_parallel_all_open(self):
        net = parallel(2)
        assert available_tasks(net, set()) == {"t1", "t2"}

    def test_closure_violation(self):
        net = line(2)
        with pytest.raises(InvalidKnowledgeState):
            available_tasks(net, {"t02"})

    def test_unknown_task(self):
        net = line(2)
        with pytest.raises(InvalidKnowledgeState):
            available_tasks(net, {"zz"})


class TestEnumerate:
    def test_line_counts(self):
        assert len(enumerate_knowledge_states(line(10))) == 11

    def test_parallel_counts(self):
        assert len(enumerate_knowledge_states(parallel(3))) == 8

    def test_diamond_against_subset_filter(self):
        net = diamond()
        got = {ks.solved for ks in enumerate_knowledge_states(net)}
        expected = set()
        for r in range(5):
            for combo in itertools.combinations(net.tasks, r):
                s = frozenset(combo)
                if all(net.predecessors[u] <= s for u in s):
                    expected.add(s)
        assert got == expected
        assert len(got) == 6

    def test_cap(self):
        with pytest.raises(StateSpaceExceeded):
            enumerate_knowledge_states(parallel(4), cap=10)


class TestLinear:
    def test_shapes(self):
        assert is_linear(line(1))
        assert is_linear(line(5))
        assert not is_linear(parallel(2))
        assert not is_linear(diamond())

    def test_line_order(self):
        assert line_order(line(3)) == ["t01", "t02", "t03"]


class TestSubgamePairs:
    def test_line_m2(self):
        pairs = subgame_pairs(line(2))
        assert len(pairs) == 6
        for p in pairs:
            assert p.open_own <= p.open_all

    def test_single_task(self):
        pairs = subgame_pairs(line(1))
        got = {(tuple(sorted(p.open_all)), tuple(sorted(p.open_own))) for p in pairs}
        assert got == {(("t01",), ("t01",)), (("t01",), ()), ((), ())}

    def test_line_m10_cap(self):
        assert len(subgame_pairs(line(10))) == 66
        with pytest.raises(StateSpaceExceeded):
            subgame_pairs(line(10), cap=50)

    def test_pair_filter_oracle(self):
        # exhaustive (M, T) filter over all subset pairs
        net = diamond()
        every = net.all_tasks
        closed = {ks.solved for ks in enumerate_knowledge_states(net)}
        expected = set()
        for pub in closed:
            for own in closed:
                if pub <= own:
                    expected.add((every - pub, every - own))
        got = {(p.open_all, p.open_own) for p in subgame_pairs(net)}
        assert got == expected

    def test_validated_constructor(self):
        net = line(2)
        pair = subgame_pair(net, {"t01", "t02"}, {"t02"})
        assert pair.captive == {"t01"}


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_states_closed_and_available_monotone(self, seed):
        rng = random.Random(seed)
        net = random_network(rng, max_m=5)
        states = enumerate_knowledge_states(net)
        for ks in states:
            solved = ks.solved
            # closure: re-validation is a no-op
            assert net.validate_knowledge(solved) == solved
            frontier = available_tasks(net, solved)
            if solved != net.all_tasks:
                assert frontier
            for u in frontier:
                # solving one task never closes another open one
                after = available_tasks(net, solved | {u})
                assert frontier - {u} <= after

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=2, max_value=7))
    def test_line_pair_formula(self, m):
        assert len(subgame_pairs(line(m))) == (m + 1) * (m + 2) // 2
        assert len(enumerate_knowledge_states(line(m))) == m + 1
