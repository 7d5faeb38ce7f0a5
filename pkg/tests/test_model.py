import random

import pytest

from conftest import random_sa_game
from ppsgame.errors import (
    CoalitionSpaceExceeded,
    EmptyStackelbergSet,
    NonPositiveParameter,
    NotALine,
    SingleAgent,
    ValidationError,
)
from ppsgame.model import (
    AptitudeMatrix,
    GameSpec,
    RewardVector,
    SAProfile,
    check_dag_core,
    check_dag_ne,
    check_dag_sa,
    check_dag_stackelberg,
    check_line_core,
    check_line_ne,
    check_line_stackelberg,
    design_rewards,
    expand_sa,
    sa_thresholds,
    virtual_reward,
)
from ppsgame.network import build_network
from ppsgame.presets import two_task_line


def line_net(ids=("p", "q")):
    nodes = [f"n{i}" for i in range(len(ids) + 1)]
    return build_network(
        nodes, [(u, nodes[k], nodes[k + 1]) for k, u in enumerate(ids)]
    )


def identical_line_game(r_p, r_q, n=3):
    net = line_net()
    profile = SAProfile(
        abilities={f"a{i}": 1.0 for i in range(1, n + 1)},
        simplicities={"p": 1.0, "q": 1.0},
    )
    return GameSpec(
        network=net, aptitudes=profile, rewards=RewardVector({"p": r_p, "q": r_q})
    )


class TestSAProfile:
    def test_expand(self):
        profile = SAProfile(abilities={"a1": 2.0}, simplicities={"u": 3.0})
        assert expand_sa(profile).rate("a1", "u") == 6.0

    def test_expand_example_setup(self):
        profile = SAProfile(
            abilities={"a1": 1.0, "a2": 1.0}, simplicities={"p": 2.0, "q": 1.0}
        )
        matrix = expand_sa(profile)
        assert matrix.rate("a1", "p") == 2.0
        assert matrix.rate("a2", "p") == 2.0
        assert matrix.rate("a1", "q") == 1.0

    def test_zero_ability_rejected(self):
        with pytest.raises(NonPositiveParameter):
            SAProfile(abilities={"a1": 0.0}, simplicities={"u": 1.0})

    def test_negative_simplicity_rejected(self):
        with pytest.raises(NonPositiveParameter):
            SAProfile(abilities={"a1": 1.0}, simplicities={"u": -2.0})


class TestVirtualReward:
    def test_symmetric(self):
        net = line_net(("u",))
        g = GameSpec(
            network=net,
            aptitudes=AptitudeMatrix(rates={"a1": {"u": 1.0}, "a2": {"u": 1.0}}),
            rewards=RewardVector({"u": 1.0}),
        )
        assert virtual_reward(g, "a1", "u") == pytest.approx(0.5, abs=1e-12)

    def test_zero_reward(self):
        net = line_net(("u",))
        g = GameSpec(
            network=net,
            aptitudes=AptitudeMatrix(rates={"a1": {"u": 1.0}, "a2": {"u": 1.0}}),
            rewards=RewardVector({"u": 0.0}),
        )
        assert virtual_reward(g, "a1", "u") == 0.0

    def test_asymmetric(self):
        net = line_net(("u",))
        g = GameSpec(
            network=net,
            aptitudes=AptitudeMatrix(rates={"a1": {"u": 4.0}, "a2": {"u": 2.0}}),
            rewards=RewardVector({"u": 1.0}),
        )
        assert virtual_reward(g, "a1", "u") == pytest.approx(4 * 2 / 6, abs=1e-12)

    def test_single_agent(self):
        net = line_net(("u",))
        g = GameSpec(
            network=net,
            aptitudes=AptitudeMatrix(rates={"a1": {"u": 1.0}}),
            rewards=RewardVector({"u": 1.0}),
        )
        with pytest.raises(SingleAgent):
            virtual_reward(g, "a1", "u")


class TestThresholds:
    def test_two_identical(self):
        profile = SAProfile(
            abilities={"a1": 1.0, "a2": 1.0}, simplicities={"u": 1.0}
        )
        th = sa_thresholds(profile)
        assert th.alpha_ne == pytest.approx(0.5)
        assert th.alpha_c == pytest.approx(0.5)

    def test_three_identical(self):
        profile = SAProfile(
            abilities={"a1": 1.0, "a2": 1.0, "a3": 1.0}, simplicities={"u": 1.0}
        )
        th = sa_thresholds(profile, stackelberg={"a1", "a2"})
        assert th.alpha_ne == pytest.approx(1 / 3)
        assert th.alpha_c == pytest.approx(2 / 3)
        assert th.alpha_s == pytest.approx(1 / 3)

    def test_empty_stackelberg(self):
        profile = SAProfile(
            abilities={"a1": 1.0, "a2": 1.0}, simplicities={"u": 1.0}
        )
        with pytest.raises(EmptyStackelbergSet):
            sa_thresholds(profile, stackelberg=set())

    def test_ordering_invariant(self):
        rng = random.Random(5)
        for _ in range(50):
            g = random_sa_game(rng)
            th = sa_thresholds(g.aptitudes)
            assert th.alpha_ne <= th.alpha_c + 1e-12
            assert th.alpha_c < 1.0


class TestLineNE:
    def test_passes_below_threshold(self):
        report = check_line_ne(two_task_line(1.0, 3.9))
        assert report.passed and not report.witnesses

    def test_fails_above_threshold(self):
        report = check_line_ne(two_task_line(1.0, 5.0))
        assert not report.passed
        first = report.first_witness()
        assert first.agent == "a1" and first.tasks == ("p", "q")

    def test_single_agent_vacuous(self):
        net = line_net()
        g = GameSpec(
            network=net,
            aptitudes=SAProfile(abilities={"a1": 1.0}, simplicities={"p": 2.0, "q": 1.0}),
            rewards=RewardVector({"p": 1.0, "q": 100.0}),
        )
        assert check_line_ne(g).passed

    def test_zero_upstream_reward_fails(self):
        report = check_line_ne(two_task_line(0.0, 1.0))
        assert not report.passed

    def test_not_a_line(self):
        net = build_network(["s", "e"], [("a", "s", "e"), ("b", "s", "e")])
        g = GameSpec(
            network=net,
            aptitudes=SAProfile(
                abilities={"a1": 1.0, "a2": 1.0}, simplicities={"a": 1.0, "b": 1.0}
            ),
            rewards=RewardVector({"a": 1.0, "b": 1.0}),
        )
        with pytest.raises(NotALine):
            check_line_ne(g)


class TestLineCore:
    def test_fails_with_two_agent_coalition(self):
        report = check_line_core(identical_line_game(1.0, 2.0))
        assert not report.passed
        assert any(len(w.coalition) == 2 for w in report.witnesses)

    def test_passes(self):
        report = check_line_core(identical_line_game(2.0, 1.0))
        assert report.passed
        # all 6 proper coalitions were without witnesses
        assert report.thresholds["alpha_c"] == pytest.approx(2 / 3)

    def test_two_agents_matches_ne(self):
        g = two_task_line(1.0, 3.9)
        assert check_line_core(g).passed == check_line_ne(g).passed

    def test_core_pass_implies_ne_pass(self):
        rng = random.Random(11)
        lines = 0
        while lines < 20:
            g = random_sa_game(rng, max_m=4, max_n=3)
            from ppsgame.network import is_linear

            if not is_linear(g.network):
                continue
            lines += 1
            if check_line_core(g).passed:
                assert check_line_ne(g).passed

    def test_coalition_cap(self):
        g = identical_line_game(1.0, 1.0)
        with pytest.raises(CoalitionSpaceExceeded):
            check_line_core(g, coalition_limit=2)


class TestLineStackelberg:
    def test_boundary_pass(self):
        g = identical_line_game(1.0, 3.0)
        g = GameSpec(
            network=g.network,
            aptitudes=g.aptitudes,
            rewards=g.rewards,
            stackelberg=frozenset({"a1", "a2"}),
        )
        assert check_line_stackelberg(g).passed

    def test_fail(self):
        g = identical_line_game(1.0, 3.3)
        g = GameSpec(
            network=g.network,
            aptitudes=g.aptitudes,
            rewards=g.rewards,
            stackelberg=frozenset({"a1", "a2"}),
        )
        report = check_line_stackelberg(g)
        assert not report.passed
        assert report.first_witness().agent == "a3"

    def test_all_committed_vacuous(self):
        g = identical_line_game(1.0, 100.0)
        g = GameSpec(
            network=g.network,
            aptitudes=g.aptitudes,
            rewards=g.rewards,
            stackelberg=frozenset({"a1", "a2", "a3"}),
        )
        report = check_line_stackelberg(g)
        assert report.passed and report.notes

    def test_missing_set(self):
        g = identical_line_game(1.0, 1.0)
        with pytest.raises(EmptyStackelbergSet):
            check_line_stackelberg(g)


def disagreement_game():
    net = build_network(["s", "e"], [("u", "s", "e"), ("v", "s", "e")])
    rates = {
        "a1": {"u": 4.0, "v": 1.0},
        "a2": {"u": 1.0, "v": 4.0},
        "a3": {"u": 1.0, "v": 4.0},
    }
    return GameSpec(
        network=net,
        aptitudes=AptitudeMatrix(rates=rates),
        rewards=RewardVector({"u": 1.0, "v": 1.0}),
    )


class TestDagNE:
    def test_sa_decreasing_products_pass(self):
        rng = random.Random(21)
        for _ in range(20):
            g = random_sa_game(rng, decreasing_products=True)
            assert check_dag_ne(g).passed

    def test_disagreeing_orders_fail(self):
        report = check_dag_ne(disagreement_game())
        assert not report.passed
        assert any(w.kind == "order-disagreement" for w in report.witnesses)

    def test_reachability_fail(self):
        report = check_dag_ne(two_task_line(1.0, 5.0))
        assert not report.passed
        assert report.first_witness().kind == "reachability"

    def test_tie_fails(self):
        # equal products on a parallel pair: strictness is violated
        net = build_network(["s", "e"], [("a", "s", "e"), ("b", "s", "e")])
        g = GameSpec(
            network=net,
            aptitudes=SAProfile(
                abilities={"a1": 1.0, "a2": 2.0}, simplicities={"a": 1.0, "b": 1.0}
            ),
            rewards=RewardVector({"a": 1.0, "b": 1.0}),
        )
        report = check_dag_ne(g)
        assert not report.passed
        assert all(w.kind == "tie" for w in report.witnesses)

    def test_single_agent_raises(self):
        net = line_net(("u",))
        g = GameSpec(
            network=net,
            aptitudes=AptitudeMatrix(rates={"a1": {"u": 1.0}}),
            rewards=RewardVector({"u": 1.0}),
        )
        with pytest.raises(SingleAgent):
            check_dag_ne(g)


class TestDagSA:
    def test_proportional_passes_everywhere(self):
        rng = random.Random(31)
        for _ in range(20):
            g = random_sa_game(rng)
            rewards = design_rewards(g.aptitudes, g.network, "proportional", scale=2.5)
            assert check_dag_sa(g.aptitudes, g.network, rewards).passed

    def test_parallel_any_rewards(self):
        net = build_network(["s", "e"], [("a", "s", "e"), ("b", "s", "e")])
        profile = SAProfile(
            abilities={"a1": 1.0}, simplicities={"a": 0.5, "b": 2.0}
        )
        rewards = RewardVector({"a": 9.0, "b": 0.1})
        assert check_dag_sa(profile, net, rewards).passed

    def test_increasing_product_fails(self):
        g = identical_line_game(1.0, 2.0)
        report = check_dag_sa(g.aptitudes, g.network, g.rewards)
        assert not report.passed
        assert report.first_witness().tasks == ("p", "q")


class TestDagStackelberg:
    def setup_method(self):
        self.net = line_net()
        self.profile = SAProfile(
            abilities={"a1": 1.0, "a2": 1.0, "a3": 1.0},
            simplicities={"p": 1.0, "q": 1.0},
        )
        self.everyone = {"a1", "a2", "a3"}

    def test_pass(self):
        report = check_dag_stackelberg(
            self.profile, self.net, RewardVector({"p": 1.5, "q": 1.0}), self.everyone
        )
        assert report.passed

    def test_reachability_fail(self):
        report = check_dag_stackelberg(
            self.profile, self.net, RewardVector({"p": 1.2, "q": 2.0}), self.everyone
        )
        assert not report.passed
        assert any(w.kind == "reachability" for w in report.witnesses)

    def test_equal_products_fail(self):
        report = check_dag_stackelberg(
            self.profile, self.net, RewardVector({"p": 1.0, "q": 1.0}), self.everyone
        )
        assert not report.passed

    def test_empty_set(self):
        with pytest.raises(EmptyStackelbergSet):
            check_dag_stackelberg(
                self.profile, self.net, RewardVector({"p": 1.0, "q": 1.0}), set()
            )


class TestDagCore:
    def test_sa_pass(self):
        rng = random.Random(41)
        for _ in range(10):
            g = random_sa_game(rng, decreasing_products=True)
            assert check_dag_core(g).passed

    def test_key_disagreement(self):
        report = check_dag_core(disagreement_game())
        assert not report.passed

    def test_single_task(self):
        net = line_net(("u",))
        g = GameSpec(
            network=net,
            aptitudes=AptitudeMatrix(rates={"a1": {"u": 1.0}, "a2": {"u": 3.0}}),
            rewards=RewardVector({"u": 1.0}),
        )
        assert check_dag_core(g).passed


class TestDesignRewards:
    def test_proportional(self):
        net = line_net()
        profile = SAProfile(
            abilities={"a1": 1.0}, simplicities={"p": 2.0, "q": 1.0}
        )
        rewards = design_rewards(profile, net, "proportional", scale=1.0)
        assert rewards["p"] == pytest.approx(0.5)
        assert rewards["q"] == pytest.approx(1.0)

    def test_line_approx_two_tasks(self):
        net = line_net()
        profile = SAProfile(
            abilities={"a1": 1.0, "a2": 1.0}, simplicities={"p": 1.0, "q": 1.0}
        )
        rewards = design_rewards(profile, net, "line_approx", alpha=0.5, scale=1.0)
        assert rewards["p"] == pytest.approx(0.5)
        assert rewards["q"] == pytest.approx(1.0)

    def test_line_approx_three_tasks(self):
        net = line_net(("p1", "p2", "p3"))
        profile = SAProfile(
            abilities={"a1": 1.0, "a2": 1.0, "a3": 1.0},
            simplicities={"p1": 1.0, "p2": 1.0, "p3": 1.0},
        )
        rewards = design_rewards(profile, net, "line_approx", alpha=1 / 3, scale=3.0)
        assert rewards["p1"] == pytest.approx(1.0)
        assert rewards["p2"] == pytest.approx(1.0)
        assert rewards["p3"] == pytest.approx(3.0)

    def test_line_approx_meets_ne_condition_at_alpha_ne(self):
        rng = random.Random(51)
        built = 0
        while built < 15:
            g = random_sa_game(rng, max_m=5, max_n=4)
            from ppsgame.network import is_linear

            if not is_linear(g.network):
                continue
            built += 1
            alpha = sa_thresholds(g.aptitudes).alpha_ne
            rewards = design_rewards(
                g.aptitudes, g.network, "line_approx", alpha=alpha, scale=1.0
            )
            g2 = GameSpec(network=g.network, aptitudes=g.aptitudes, rewards=rewards)
            assert check_line_ne(g2).passed

    def test_line_approx_needs_line(self):
        net = build_network(["s", "e"], [("a", "s", "e"), ("b", "s", "e")])
        profile = SAProfile(abilities={"a1": 1.0}, simplicities={"a": 1.0, "b": 1.0})
        with pytest.raises(NotALine):
            design_rewards(profile, net, "line_approx", alpha=0.5)

    def test_bad_alpha(self):
        net = line_net()
        profile = SAProfile(
            abilities={"a1": 1.0}, simplicities={"p": 1.0, "q": 1.0}
        )
        with pytest.raises(NonPositiveParameter):
            design_rewards(profile, net, "line_approx", alpha=0.0)
        with pytest.raises(ValidationError):
            design_rewards(profile, net, "line_approx", alpha=1.5)


class TestHomogeneity:
    def test_reward_scaling_preserves_verdicts(self):
        rng = random.Random(61)
        from ppsgame.network import is_linear

        for _ in range(25):
            g = random_sa_game(rng, max_m=4, max_n=3)
            for scale in (0.25, 4.0):
                scaled = GameSpec(
                    network=g.network,
                    aptitudes=g.aptitudes,
                    rewards=RewardVector(
                        {u: scale * g.rewards[u] for u in g.network.tasks}
                    ),
                )
                assert (
                    check_dag_sa(g.aptitudes, g.network, g.rewards).passed
                    == check_dag_sa(scaled.aptitudes, scaled.network, scaled.rewards).passed
                )
                assert check_dag_ne(g).passed == check_dag_ne(scaled).passed
                if is_linear(g.network):
                    assert check_line_ne(g).passed == check_line_ne(scaled).passed
