"""Transmission policies the simulator can replay.

Each policy maps the current age to a transmit probability, applied only when
the channel is sensed idle; busy-sensed slots never transmit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ThresholdPolicy:
    """Transmit iff sensed idle and age >= gamma."""

    gamma: int

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")

    def transmit_probability(self, delta: int) -> float:
        return 1.0 if delta >= self.gamma else 0.0


@dataclass(frozen=True)
class RandomizedThresholdPolicy:
    """Transmit with probability mu at age gamma1, always at larger ages."""

    gamma1: int
    mu: float

    def __post_init__(self):
        if self.gamma1 < 1:
            raise ValueError(f"gamma1 must be >= 1, got {self.gamma1}")
        if not (0.0 <= self.mu <= 1.0):
            raise ValueError(f"mu must be in [0, 1], got {self.mu}")

    def transmit_probability(self, delta: int) -> float:
        if delta > self.gamma1:
            return 1.0
        return self.mu if delta == self.gamma1 else 0.0


@dataclass(frozen=True)
class BernoulliAccessPolicy:
    """Transmit with fixed probability p0 at every idle-sensed slot."""

    p0: float

    def __post_init__(self):
        if not (0.0 < self.p0 <= 1.0):
            raise ValueError(f"p0 must be in (0, 1], got {self.p0}")

    def transmit_probability(self, delta: int) -> float:
        return self.p0


@dataclass(frozen=True)
class TabularPolicy:
    """Transmit probabilities per age; ages past the table reuse the last entry."""

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) == 0:
            raise ValueError("probs must be non-empty")
        if any(not (0.0 <= p <= 1.0) for p in self.probs):
            raise ValueError("transmit probabilities must be in [0, 1]")

    @classmethod
    def from_array(cls, probs: np.ndarray) -> "TabularPolicy":
        return cls(probs=tuple(float(p) for p in probs))

    def transmit_probability(self, delta: int) -> float:
        return self.probs[min(delta, len(self.probs)) - 1]
