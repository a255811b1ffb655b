"""Target, vehicle and relative (polar) kinematics.

The target is a planar double integrator, the vehicle a constant-speed
unicycle. The polar frame is centred on the target: ``d`` is the range,
``psi`` the direction from target to vehicle, and ``phi = theta - psi`` the
bearing of the vehicle heading relative to that direction (counter-clockwise
positive). Target velocity is split into ``v1`` along the target-to-vehicle
line (positive when it closes the range) and ``v2`` along the
counter-clockwise tangent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AtTargetError, InvalidConfigError, InvalidInputError

TWO_PI = 2.0 * math.pi

#: Range below which polar angles are treated as undefined (metres).
AT_TARGET_GUARD = 1e-9


def wrap_angle(x: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    y = math.remainder(x, TWO_PI)
    if y <= -math.pi:
        y += TWO_PI
    return y


def _finite(*values) -> bool:
    return all(math.isfinite(v) for v in values)


def _pair(v) -> tuple[float, float]:
    x, y = v
    return float(x), float(y)


@dataclass(frozen=True)
class TargetState:
    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "position", _pair(self.position))
        object.__setattr__(self, "velocity", _pair(self.velocity))
        if not _finite(*self.position, *self.velocity):
            raise InvalidInputError(f"non-finite target state {self}")


@dataclass(frozen=True)
class VehicleState:
    position: tuple[float, float]
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", _pair(self.position))
        if not _finite(*self.position, self.heading):
            raise InvalidInputError(f"non-finite vehicle state {self}")
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))


@dataclass(frozen=True)
class RelativeState:
    d: float
    phi: float
    psi: float
    v1: float = 0.0
    v2: float = 0.0

    @property
    def at_target(self) -> bool:
        return self.d <= AT_TARGET_GUARD


@dataclass(frozen=True)
class EnvelopeParams:
    """Declared ceilings on target speed (m/s) and acceleration (m/s^2)."""

    max_target_speed: float = 0.0
    max_target_accel: float = 0.0

    def __post_init__(self):
        if not _finite(self.max_target_speed, self.max_target_accel):
            raise InvalidInputError("non-finite envelope")
        if self.max_target_speed < 0 or self.max_target_accel < 0:
            raise InvalidInputError("envelope bounds must be non-negative")

    @property
    def stationary(self) -> bool:
        return self.max_target_speed == 0.0 and self.max_target_accel == 0.0

    def omega_o(self, r_d: float) -> float:
        return self.max_target_speed / r_d


def target_derivative(s: TargetState, a) -> TargetState:
    """Time derivative of the target state under acceleration ``a``.

    Returned as a ``TargetState`` whose ``position`` slot holds the velocity
    and whose ``velocity`` slot holds the acceleration.
    """
    ax, ay = _pair(a)
    if not _finite(ax, ay):
        raise InvalidInputError(f"non-finite target acceleration {a!r}")
    return TargetState(s.velocity, (ax, ay))


def vehicle_derivative(s: VehicleState, v: float, omega: float):
    """Unicycle derivative ``((v cos theta, v sin theta), omega)``."""
    if not v > 0:
        raise InvalidConfigError(f"vehicle speed must be positive, got {v}")
    return (v * math.cos(s.heading), v * math.sin(s.heading)), omega


def relative_state(vehicle: VehicleState, target: TargetState,
                   allow_at_target: bool = False) -> RelativeState:
    """Polar description of the vehicle as seen from the target.

    Raises ``AtTargetError`` when the range is inside the guard band unless
    ``allow_at_target`` is set, in which case the target-to-vehicle direction
    is taken to be the vehicle heading (the vehicle is leaving the target).
    """
    rx = vehicle.position[0] - target.position[0]
    ry = vehicle.position[1] - target.position[1]
    d = math.hypot(rx, ry)
    theta = vehicle.heading
    if d <= AT_TARGET_GUARD:
        if not allow_at_target:
            raise AtTargetError(f"range {d:.3g} m inside guard band")
        psi = theta
    else:
        psi = math.atan2(ry, rx)
    ux, uy = math.cos(psi), math.sin(psi)
    vox, voy = target.velocity
    v1 = ux * vox + uy * voy
    v2 = ux * voy - uy * vox
    return RelativeState(d, wrap_angle(theta - psi), psi, v1, v2)


def polar_derivative(rel: RelativeState, v: float, omega: float):
    """``(d_dot, phi_dot)`` for the target-centred polar kinematics."""
    if rel.at_target:
        raise AtTargetError(f"range {rel.d:.3g} m inside guard band")
    d_dot = v * math.cos(rel.phi) - rel.v1
    phi_dot = omega - v / rel.d * math.sin(rel.phi) + rel.v2 / rel.d
    return d_dot, phi_dot


def handle_pass_through(rel: RelativeState) -> RelativeState:
    # A vehicle arriving at the target leaves it heading straight out.
    if not rel.at_target:
        return rel
    return RelativeState(AT_TARGET_GUARD, 0.0, rel.psi, rel.v1, rel.v2)
