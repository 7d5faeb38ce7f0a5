"""Strategy descriptions accepted by the simulator.

All strategies work their owner's best available task unless noted; they
differ in *when* solved tasks are publicly shared:

* :class:`PPSHerding` shares the instant a task is solved and always works
  the available task with the highest virtual reward.
* :class:`PPSSplit` also shares instantly but spreads effort over the
  available tasks maximizing reward * simplicity (separable games only).
* :class:`DelayDeviation` holds solutions for a fixed delay, re-armed at
  each new solve, and releases early the moment anyone else shares.
* :class:`WithholdAll` releases only once it holds every remaining
  solution (or at project completion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

from ..errors import ValidationError


@dataclass(frozen=True)
class PPSHerding:
    pass


@dataclass(frozen=True)
class PPSSplit:
    """Optional fixed weights per task; weights restrict and renormalize to
    the current argmax set, defaulting to a uniform split."""

    weights: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.weights is not None:
            cleaned = {}
            for task, w in self.weights.items():
                w = float(w)
                if not math.isfinite(w) or w < 0.0:
                    raise ValidationError(
                        f"split weight for {task!r} must be finite and >= 0"
                    )
                cleaned[task] = w
            if not any(w > 0.0 for w in cleaned.values()):
                raise ValidationError("split weights must not all be zero")
            object.__setattr__(self, "weights", cleaned)


@dataclass(frozen=True)
class DelayDeviation:
    delay: float

    def __post_init__(self):
        if not math.isfinite(self.delay) or self.delay < 0.0:
            raise ValidationError("delay must be finite and >= 0")


@dataclass(frozen=True)
class WithholdAll:
    pass


Strategy = Union[PPSHerding, PPSSplit, DelayDeviation, WithholdAll]

KIND_HERDING = 0
KIND_SPLIT = 1
KIND_DELAY = 2
KIND_WITHHOLD = 3


def strategy_kind(strategy: Strategy) -> int:
    if isinstance(strategy, PPSHerding):
        return KIND_HERDING
    if isinstance(strategy, PPSSplit):
        return KIND_SPLIT
    if isinstance(strategy, DelayDeviation):
        return KIND_DELAY
    if isinstance(strategy, WithholdAll):
        return KIND_WITHHOLD
    raise ValidationError(f"unknown strategy {strategy!r}")
