"""Incentive analysis and simulation for progress-sharing games.

A project is an acyclic network of subtasks raced by agents with
exponential completion times; each task's reward goes to the first agent to
publicly share its solution.  This package checks reward conditions under
which immediate sharing is stable, verifies them independently with
best-response dynamic programs, compares herding against optimal
scheduling, and simulates arbitrary strategy profiles with seeded,
reproducible Monte Carlo.
"""

from . import errors
from .analysis import (
    BestResponseResult,
    CoalitionReport,
    MakespanResult,
    NashReport,
    UtilityProfile,
    best_response_value,
    coalition_analysis,
    herding_makespan,
    opt_makespan,
    poa_ratio,
    pps_utility,
    utility_profile,
    verify_nash_pps,
)
from .model import (
    AptitudeMatrix,
    ConditionReport,
    GameSpec,
    RewardVector,
    SAProfile,
    Thresholds,
    Witness,
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
from .network import (
    KnowledgeState,
    SubgamePair,
    SubtaskNetwork,
    available_tasks,
    build_network,
    enumerate_knowledge_states,
    is_linear,
    subgame_pairs,
)
from .sim import (
    DelayDeviation,
    PPSHerding,
    PPSSplit,
    WithholdAll,
    estimate_deviation_gain,
    run_batch,
    simulate_once,
)

__version__ = "0.1.0"

__all__ = [
    "AptitudeMatrix",
    "BestResponseResult",
    "CoalitionReport",
    "ConditionReport",
    "DelayDeviation",
    "GameSpec",
    "KnowledgeState",
    "MakespanResult",
    "NashReport",
    "PPSHerding",
    "PPSSplit",
    "RewardVector",
    "SAProfile",
    "SubgamePair",
    "SubtaskNetwork",
    "Thresholds",
    "UtilityProfile",
    "Witness",
    "WithholdAll",
    "available_tasks",
    "best_response_value",
    "build_network",
    "check_dag_core",
    "check_dag_ne",
    "check_dag_sa",
    "check_dag_stackelberg",
    "check_line_core",
    "check_line_ne",
    "check_line_stackelberg",
    "coalition_analysis",
    "design_rewards",
    "enumerate_knowledge_states",
    "errors",
    "estimate_deviation_gain",
    "expand_sa",
    "herding_makespan",
    "is_linear",
    "opt_makespan",
    "poa_ratio",
    "pps_utility",
    "run_batch",
    "sa_thresholds",
    "simulate_once",
    "subgame_pairs",
    "utility_profile",
    "verify_nash_pps",
    "virtual_reward",
]
