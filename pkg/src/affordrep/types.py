"""Shared value types: actions, affordances, observations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COMMANDS = ("continue", "left", "right", "straight")
COMMAND_INDEX = {name: i for i, name in enumerate(COMMANDS)}


def clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class Action:
    """Steer/throttle/brake triple; components clamped at construction."""

    steer: float
    throttle: float
    brake: float

    def __post_init__(self):
        object.__setattr__(self, "steer", clamp(float(self.steer), -1.0, 1.0))
        object.__setattr__(self, "throttle", clamp(float(self.throttle), 0.0, 1.0))
        object.__setattr__(self, "brake", clamp(float(self.brake), 0.0, 1.0))

    def as_array(self) -> np.ndarray:
        return np.array([self.steer, self.throttle, self.brake], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Action":
        return Action(float(a[0]), float(a[1]), float(a[2]))


ZERO_ACTION = Action(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Affordances:
    """Hazard bits and relative heading angle.

    Ground truth carries hp/hv/hr in {0, 1}; predictors reuse the same
    container with probabilities in [0, 1]. psi is wrapped to [-pi, pi].
    """

    hp: float
    hv: float
    hr: float
    psi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.hp, self.hv, self.hr, self.psi], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Affordances":
        return Affordances(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


@dataclass
class Observation:
    """Ego-centric raster plus speed and one-hot navigation command."""

    image: np.ndarray  # float32 [3, 64, 64] in [0, 1]
    speed: float
    command: np.ndarray = field(
        default_factory=lambda: one_hot_command("continue")
    )

    def validate(self):
        if self.image.shape[0] != 3 or self.image.ndim != 3:
            raise ValueError(f"bad image shape {self.image.shape}")
        if self.image.min() < 0.0 or self.image.max() > 1.0:
            raise ValueError("image values outside [0, 1]")
        if self.command.shape != (len(COMMANDS),) or int(self.command.sum()) != 1 \
                or not np.all((self.command == 0) | (self.command == 1)):
            raise ValueError("command is not one-hot")
        return self


def one_hot_command(name_or_index) -> np.ndarray:
    idx = COMMAND_INDEX[name_or_index] if isinstance(name_or_index, str) else int(name_or_index)
    v = np.zeros(len(COMMANDS), dtype=np.float32)
    v[idx] = 1.0
    return v
