"""Target acceleration profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError

KINDS = ("stationary", "constant_velocity", "sine_acceleration",
         "uniform_random_accel", "waypoint_teleport")


@dataclass(frozen=True)
class TargetMotion:
    """Declarative description of how the target moves.

    ``sine_acceleration`` uses ``amplitude * (sin(frequency t), cos(frequency t))``.
    ``uniform_random_accel`` draws each component from U[-bound, bound],
    holding a draw for ``period`` seconds. ``waypoint_teleport`` relocates the
    target at the times in ``schedule``, rows ``(t, x, y, vx, vy)``; the
    target then drifts at ``(vx, vy)`` until the next entry.
    """

    kind: str = "stationary"
    amplitude: float = 0.0
    frequency: float = 0.0
    bound: float = 0.0
    seed: int = 0
    period: float = 1.0
    schedule: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfigError(f"unknown target motion kind {self.kind!r}; expected one of {KINDS}")
        rows = tuple(tuple(float(x) for x in row) for row in self.schedule)
        for row in rows:
            if len(row) not in (3, 5):
                raise InvalidConfigError(f"schedule rows are (t, x, y[, vx, vy]), got {row}")
        object.__setattr__(self, "schedule", tuple(sorted(rows)))
        if self.kind == "uniform_random_accel" and not self.period > 0:
            raise InvalidConfigError("random acceleration period must be positive")

    @property
    def moves(self) -> bool:
        return self.kind != "stationary"

    def accel_source(self, duration: float):
        """Return ``(accel(t) -> (ax, ay), piecewise)``.

        ``piecewise`` means the profile is held constant over an integration
        step and should be sampled at the step start.
        """
        if self.kind == "sine_acceleration":
            a, w = self.amplitude, self.frequency

            def accel(t):
                return a * math.sin(w * t), a * math.cos(w * t)
            return accel, False
        if self.kind == "uniform_random_accel":
            n = int(math.ceil(duration / self.period)) + 2
            rng = np.random.Generator(np.random.Philox(self.seed))
            table = rng.uniform(-self.bound, self.bound, size=(n, 2)).tolist()
            period = self.period

            def accel(t):
                k = min(int(t / period), n - 1)
                return table[k][0], table[k][1]
            return accel, True
        return None, False
