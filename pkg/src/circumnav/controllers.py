"""PD-like range feedback laws for the circumnavigation task."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidConfigError, InvalidInputError


@dataclass(frozen=True)
class ControllerParams:
    """Gains and geometry of the range feedback law.

    ``c1`` weights the normalised range rate, ``c2`` the saturated
    normalised range error. ``omega_limit`` is the turn-rate ceiling used by
    the saturated law; ``None`` means the vehicle is unconstrained.
    """

    c1: float
    c2: float
    r_d: float
    v: float
    omega_limit: Optional[float] = None

    def __post_init__(self):
        for name in ("c1", "c2", "r_d", "v"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidConfigError(f"{name} must be finite and > 0, got {value}")
        if self.omega_limit is not None and not (
                math.isfinite(self.omega_limit) and self.omega_limit > 0):
            raise InvalidConfigError(f"omega_limit must be > 0, got {self.omega_limit}")

    @property
    def omega_c(self) -> float:
        """Bias turn rate of the desired orbit, v / r_d."""
        return self.v / self.r_d


@dataclass(frozen=True)
class ControlInput:
    omega: float
    saturated: bool = False


def sat(z: float) -> float:
    if abs(z) < 1.0:
        return z
    return math.copysign(1.0, z)


def tracking_error(d: float, r_d: float) -> float:
    """Relative range error (d - r_d) / r_d."""
    if not r_d > 0:
        raise InvalidConfigError(f"r_d must be positive, got {r_d}")
    return (d - r_d) / r_d


def _raw_law(e, e_dot, p):
    if not (math.isfinite(e) and math.isfinite(e_dot)):
        raise InvalidInputError(f"non-finite controller input e={e}, e_dot={e_dot}")
    return p.omega_c + p.c1 * e_dot + p.c2 * sat(e)


def range_based_control(e: float, e_dot: float, p: ControllerParams) -> ControlInput:
    return ControlInput(_raw_law(e, e_dot, p), False)


def saturated_control(e: float, e_dot: float, p: ControllerParams) -> ControlInput:
    """Range-based law clipped to the turn-rate ceiling ``p.omega_limit``."""
    if p.omega_limit is None:
        raise InvalidConfigError("saturated control needs omega_limit")
    raw = _raw_law(e, e_dot, p)
    limit = p.omega_limit
    if abs(raw) <= limit:
        return ControlInput(raw, False)
    return ControlInput(math.copysign(limit, raw), True)


def range_only_control(e: float, alpha2: float, p: ControllerParams) -> ControlInput:
    """Range-based law with the range rate replaced by a filter estimate."""
    if not math.isfinite(alpha2):
        raise InvalidInputError(f"non-finite range-rate estimate {alpha2}")
    return range_based_control(e, alpha2 / p.r_d, p)
