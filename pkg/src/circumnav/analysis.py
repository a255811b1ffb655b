"""Closed-form guarantees and gain-feasibility checks.

Every check returns a :class:`GainReport`, a list of named inequalities with
their two sides and margin. Inequalities are strict unless flagged
otherwise; the actuation check is the only non-strict one.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .controllers import ControllerParams
from .errors import InfeasibleError, InvalidConfigError, InvalidInputError
from .kinematics import EnvelopeParams

STATIONARY_GAIN = "stationary-gain"
MOVING_GAIN_1 = "moving-gain-1"
MOVING_GAIN_2 = "moving-gain-2"
SPEED_ENVELOPE = "speed-envelope"
ACTUATION = "actuation-limit"
NO_SATURATION = "no-saturation"


@dataclass(frozen=True)
class Condition:
    name: str
    lhs: float
    rhs: float
    strict: bool = True
    description: str = ""

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        return self.lhs > self.rhs if self.strict else self.lhs >= self.rhs

    def describe(self) -> str:
        op = ">" if self.strict else ">="
        status = "ok" if self.holds else f"violated by {-self.margin:.6g}"
        text = f"{self.name}: {self.lhs:.6g} {op} {self.rhs:.6g} ({status})"
        return f"{text} -- {self.description}" if self.description else text


@dataclass
class GainReport:
    conditions: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.conditions)

    def __bool__(self):
        return self.ok

    @property
    def violated(self) -> list:
        return [c for c in self.conditions if not c.holds]

    def extend(self, other: "GainReport") -> "GainReport":
        self.conditions.extend(other.conditions)
        return self

    def lines(self) -> list:
        return [c.describe() for c in self.conditions]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "conditions": [
                {**asdict(c), "margin": c.margin, "holds": c.holds} for c in self.conditions
            ],
        }


def check_stationary_gains(p: ControllerParams) -> GainReport:
    """(c1 - 1) wc > c2."""
    return GainReport([Condition(
        STATIONARY_GAIN, (p.c1 - 1.0) * p.omega_c, p.c2,
        description="(c1-1)*wc > c2")])


def check_moving_gains(p: ControllerParams, env: EnvelopeParams) -> GainReport:
    wc = p.omega_c
    wo = env.omega_o(p.r_d)
    return GainReport([
        Condition(SPEED_ENVELOPE, p.v, env.max_target_speed,
                  description="vehicle speed exceeds target speed ceiling"),
        Condition(MOVING_GAIN_1, (p.c1 - 1.0) * wc, p.c2 + (p.c1 + 1.0) * wo,
                  description="(c1-1)*wc > c2 + (c1+1)*wo"),
        Condition(MOVING_GAIN_2, p.c2, max((p.c1 + 1.0) * wo, 2.0 * wc + 4.0 * wo),
                  description="c2 > max((c1+1)*wo, 2*wc + 4*wo)"),
    ])


def q1(p: ControllerParams) -> float:
    """Range-rate offset c2 r_d / c1 at which the proportional term saturates."""
    return p.c2 * p.r_d / p.c1


def v_star_range(p: ControllerParams, env: EnvelopeParams) -> float:
    """Upper end of the admissible open interval (0, v - vo - q1) for v*."""
    return p.v - env.max_target_speed - q1(p)


def default_v_star(p: ControllerParams, env: EnvelopeParams) -> float:
    return 0.5 * v_star_range(p, env)


def _check_v_star(p, env, v_star):
    upper = v_star_range(p, env)
    if not (math.isfinite(v_star) and 0.0 < v_star < upper):
        raise InvalidInputError(f"v_star={v_star} outside (0, {upper:.6g})")


def sin_phi_star(p: ControllerParams, env: EnvelopeParams, v_star: float) -> float:
    ratio = (v_star + env.max_target_speed + q1(p)) / p.v
    return math.sqrt(1.0 - ratio * ratio)


def _epsilon_at(p, env, s):
    v, vo, ao = p.v, env.max_target_speed, env.max_target_accel
    wc = p.omega_c
    return ((v + 2.0 * vo) / (p.c2 * s)
            + ao / (p.c2 * wc * s)
            + p.r_d * (v + vo) / (p.c1 * wc * s))


def epsilon_bound(p: ControllerParams, env: EnvelopeParams,
                  v_star: Optional[float] = None) -> float:
    """Asymptotic ceiling on |d - r_d| for a target inside ``env``.

    Only a guarantee when :func:`check_moving_gains` holds; the value is
    returned regardless so that marginal gain sets can still be reported.
    """
    if v_star is None:
        v_star = default_v_star(p, env)
    _check_v_star(p, env, v_star)
    return _epsilon_at(p, env, sin_phi_star(p, env, v_star))


def epsilon_limit(p: ControllerParams, env: EnvelopeParams) -> float:
    """Infimum of :func:`epsilon_bound` over v*, reached as v* -> 0+."""
    ratio = (env.max_target_speed + q1(p)) / p.v
    if not ratio < 1.0:
        raise InvalidInputError("no admissible v_star for this gain set")
    return _epsilon_at(p, env, math.sqrt(1.0 - ratio * ratio))


def dwell_times(p: ControllerParams, env: EnvelopeParams,
                v_star: Optional[float] = None) -> tuple[float, float, float]:
    """Worst-case times (T3, T4, T1) for the bearing to reach the favourable sector."""
    if v_star is None:
        v_star = default_v_star(p, env)
    _check_v_star(p, env, v_star)
    wc, wo = p.omega_c, env.omega_o(p.r_d)
    turn = p.c1 / p.r_d * v_star - wc - wo
    spin = p.c2 - p.c1 * wo
    if not turn > 0:
        raise InfeasibleError(f"c1/r_d*v_star - wc - wo = {turn:.6g} is not positive",
                              ["dwell-turn-rate"])
    if not spin > 0:
        raise InfeasibleError(f"c2 - c1*wo = {spin:.6g} is not positive", ["dwell-spin-rate"])
    vo = env.max_target_speed
    t3 = 2.0 * math.acos((-v_star - vo - q1(p)) / p.v) / turn
    t4 = max(math.pi / turn, math.pi / spin)
    return t3, t4, t3 + t4


def linearization(p: ControllerParams) -> np.ndarray:
    """Jacobian of the stationary closed loop in (d, phi) at (r_d, pi/2)."""
    wc = p.omega_c
    return np.array([[0.0, -p.v],
                     [(p.c2 + wc) / p.r_d, -p.c1 * wc]])


def exponential_rate(p: ControllerParams) -> tuple[float, float]:
    """Local exponential convergence rate ``rho`` and discriminant ``Delta``."""
    wc = p.omega_c
    a = p.c1 * wc
    delta = a * a - 4.0 * (p.c2 * wc + wc * wc)
    if delta > 0:
        rho = (a - math.sqrt(delta)) / 2.0
    else:
        rho = a / 2.0
    return rho, delta


def eigenvector_condition(p: ControllerParams) -> float:
    """Condition number of the unit-column eigenvector matrix of the linearization."""
    _, vecs = np.linalg.eig(linearization(p))
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    return float(np.linalg.cond(vecs))


def check_actuation(p: ControllerParams, env: EnvelopeParams) -> bool:
    return actuation_condition(p, env).holds


def actuation_condition(p: ControllerParams, env: EnvelopeParams) -> Condition:
    if p.omega_limit is None:
        raise InvalidConfigError("actuation check needs omega_limit")
    vo, ao = env.max_target_speed, env.max_target_accel
    return Condition(ACTUATION, p.v * p.omega_limit, (p.v + vo) ** 2 / p.r_d + ao,
                     strict=False, description="v*w_max >= (v+vo)^2/r_d + ao")


def max_raw_omega(p: ControllerParams, env: EnvelopeParams) -> float:
    # |e_dot| <= (v + vo) / r_d, so c1 multiplies that rate bound.
    return p.omega_c + p.c1 * (p.v + env.max_target_speed) / p.r_d + p.c2


def never_saturates(p: ControllerParams, env: EnvelopeParams) -> bool:
    if p.omega_limit is None:
        raise InvalidConfigError("saturation check needs omega_limit")
    return max_raw_omega(p, env) < p.omega_limit


@dataclass
class AnalysisBounds:
    omega_o: float
    q1: float
    v_star: Optional[float]
    sin_phi_star: Optional[float]
    epsilon: Optional[float]
    epsilon_limit: Optional[float]
    T1: Optional[float]
    T3: Optional[float]
    T4: Optional[float]
    rho: Optional[float]
    Delta: float
    condition_number: Optional[float]
    min_initial_range: Optional[float]
    feasible_stationary: bool
    feasible_moving: bool
    feasible_actuation: Optional[bool]
    never_saturates: Optional[bool]

    def to_dict(self) -> dict:
        return asdict(self)


def compute_bounds(p: ControllerParams, env: EnvelopeParams,
                   v_star: Optional[float] = None) -> AnalysisBounds:
    """Evaluate every closed-form guarantee available for ``p`` and ``env``.

    Quantities whose preconditions fail are left as ``None`` instead of
    raising, so the result can always be reported.
    """
    stationary = check_stationary_gains(p).ok
    moving = check_moving_gains(p, env).ok
    rho, delta = exponential_rate(p)
    cond = eigenvector_condition(p) if stationary else None
    if not stationary:
        rho = None

    upper = v_star_range(p, env)
    vs = s = eps = eps_lim = t1 = t3 = t4 = d_min = None
    if upper > 0:
        vs = default_v_star(p, env) if v_star is None else v_star
        try:
            s = sin_phi_star(p, env, vs)
            eps = epsilon_bound(p, env, vs)
            eps_lim = epsilon_limit(p, env)
            t3, t4, t1 = dwell_times(p, env, vs)
            d_min = 2.0 * p.r_d + (p.v + env.max_target_speed) * t1
        except (InvalidInputError, InfeasibleError):
            pass

    actuation = saturates = None
    if p.omega_limit is not None:
        actuation = check_actuation(p, env)
        saturates = never_saturates(p, env)
    return AnalysisBounds(
        omega_o=env.omega_o(p.r_d), q1=q1(p), v_star=vs, sin_phi_star=s,
        epsilon=eps, epsilon_limit=eps_lim, T1=t1, T3=t3, T4=t4, rho=rho,
        Delta=delta, condition_number=cond, min_initial_range=d_min,
        feasible_stationary=stationary, feasible_moving=moving,
        feasible_actuation=actuation, never_saturates=saturates)
