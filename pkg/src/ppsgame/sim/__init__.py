"""Seeded Monte-Carlo simulation of strategy profiles."""

from .engine import (
    ACTIVE_ENGINE,
    BatchResult,
    DeviationEstimate,
    SimEvent,
    SimResult,
    available_engines,
    batch_samples,
    estimate_deviation_gain,
    run_batch,
    simulate_once,
)
from .rng import CounterStream, stream_key
from .strategies import DelayDeviation, PPSHerding, PPSSplit, Strategy, WithholdAll

__all__ = [
    "ACTIVE_ENGINE",
    "BatchResult",
    "CounterStream",
    "DelayDeviation",
    "DeviationEstimate",
    "PPSHerding",
    "PPSSplit",
    "SimEvent",
    "SimResult",
    "Strategy",
    "WithholdAll",
    "available_engines",
    "batch_samples",
    "estimate_deviation_gain",
    "run_batch",
    "simulate_once",
    "stream_key",
]
