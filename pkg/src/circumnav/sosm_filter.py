"""Second-order sliding-mode filter reconstructing range rate from range.

The filter keeps a range estimate ``alpha1`` and a range-rate estimate
``alpha2`` driven by the innovation ``d - alpha1`` through a square-root,
a linear, a sign and a second linear injection. Gains ``k1..k4`` weight
those four terms in that order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .analysis import Condition, GainReport, check_moving_gains, check_stationary_gains
from .controllers import ControllerParams
from .errors import InfeasibleError, InvalidConfigError, InvalidInputError
from .kinematics import EnvelopeParams

#: Factor by which default gains exceed each lower bound.
GAIN_MARGIN = 1.05


@dataclass(frozen=True)
class FilterParams:
    k1: float
    k2: float
    k3: float
    k4: float

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidConfigError(f"filter gain {name} must be > 0, got {value}")


@dataclass(frozen=True)
class FilterState:
    alpha1: float
    alpha2: float = 0.0


def sgn(x: float) -> float:
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def filter_derivative(fs: FilterState, d_measured: float, p: FilterParams) -> FilterState:
    """``(alpha1_dot, alpha2_dot)`` packed as a FilterState."""
    if not (math.isfinite(d_measured) and math.isfinite(fs.alpha1) and math.isfinite(fs.alpha2)):
        raise InvalidInputError("non-finite filter input")
    r = d_measured - fs.alpha1
    s = sgn(r)
    return FilterState(
        p.k1 * math.sqrt(abs(r)) * s + p.k2 * r + fs.alpha2,
        p.k3 * s + p.k4 * r,
    )


def sigma_forms(cp: ControllerParams, env: EnvelopeParams) -> tuple[float, float, float]:
    """Perturbation bounds ``(sigma1_short, sigma1_long, sigma2)``.

    Two expressions for the range-acceleration bound circulate; the long one
    additionally carries ``c1 wc vo``. Gain design uses the larger.
    """
    v, vo, ao = cp.v, env.max_target_speed, env.max_target_accel
    wc, c1, c2 = cp.omega_c, cp.c1, cp.c2
    short = 2.0 * wc * v + c1 * wc * v + c2 * v + wc * vo + ao
    long = wc * (2.0 * v + vo) + c1 * wc * (v + vo) + c2 * v + ao
    return short, long, c1 * wc


def gain_bounds(cp: ControllerParams, env: EnvelopeParams, k1=None, k2=None):
    """Lower bounds on k1..k4.

    The k3 and k4 bounds depend on k1 and k2; when those are not supplied
    their own lower bounds are used.
    """
    s1a, s1b, s2 = sigma_forms(cp, env)
    s1 = max(s1a, s1b)
    b1 = 2.0 * max(s1, s2)
    b2 = s2 * s2 + 2.0 * s2
    k1 = b1 if k1 is None else k1
    k2 = b2 if k2 is None else k2
    b3 = max(0.0, (k1 + 1.0) * s1 / k1 - k1 * k1 / 2.0,
             s1 - 2.0 * k1 * k1 - k1 * k1 / (2.0 * k2))
    if k1 > 2.0 * s2:
        b4 = max(0.0, k2 / 2.0 - k2 * k2, k2 * k2 * (2.0 * k1 + 5.0 * s1) / (k1 - 2.0 * s2))
    else:
        b4 = math.inf
    return b1, b2, b3, b4


def check_filter_gains(fp: FilterParams, cp: ControllerParams, env: EnvelopeParams) -> GainReport:
    b1, b2, b3, b4 = gain_bounds(cp, env, fp.k1, fp.k2)
    return GainReport([
        Condition("filter-k1", fp.k1, b1, description="k1 > 2*max(sigma1, sigma2)"),
        Condition("filter-k2", fp.k2, b2, description="k2 > sigma2^2 + 2*sigma2"),
        Condition("filter-k3", fp.k3, b3, description="k3 above its three-way bound"),
        Condition("filter-k4", fp.k4, b4, description="k4 above its three-way bound"),
    ])


def default_gains(v: float, env: EnvelopeParams, cp: ControllerParams,
                  margin: float = GAIN_MARGIN, k3_floor: float = None) -> FilterParams:
    """Smallest gains meeting every filter bound with a multiplicative margin.

    ``k3``'s bound is frequently zero; it is then set to ``k3_floor``
    (default: ``sigma2 * 1e-3``, a weak sign injection that keeps discrete
    chattering small).
    """
    if v != cp.v:
        raise InvalidConfigError(f"vehicle speed {v} disagrees with controller speed {cp.v}")
    report = check_moving_gains(cp, env) if not env.stationary else check_stationary_gains(cp)
    if not report.ok:
        names = [c.name for c in report.violated]
        raise InfeasibleError(f"controller gains infeasible for envelope: {', '.join(names)}", names)
    if not margin > 1.0:
        raise InvalidConfigError("margin must exceed 1")
    b1, b2, _, _ = gain_bounds(cp, env)
    k1, k2 = margin * b1, margin * b2
    _, _, b3, b4 = gain_bounds(cp, env, k1, k2)
    if k3_floor is None:
        k3_floor = 1e-3 * cp.c1 * cp.omega_c
    k3 = margin * b3 if b3 > 0 else k3_floor
    return FilterParams(k1, k2, k3, margin * b4)
