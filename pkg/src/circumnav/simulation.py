"""Fixed-step closed-loop simulation.

Target, vehicle and filter are integrated as one state vector with the
classical fourth-order Runge-Kutta scheme. The controller is evaluated at
every Runge-Kutta stage unless a zero-order-hold control period is set.
Range noise is drawn once per sample period and added to the true range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import default_v_star, epsilon_bound, v_star_range
from .controllers import ControllerParams
from .errors import DivergedError, InvalidConfigError, InvalidInputError
from .kinematics import (AT_TARGET_GUARD, EnvelopeParams, TargetState, VehicleState,
                         wrap_angle)
from .motion import TargetMotion
from .sosm_filter import FilterParams

MODES = ("range_based", "range_only", "saturated")

#: Trace columns, in file order.
COLUMNS = ("t", "px", "py", "theta", "ox", "oy", "ovx", "ovy", "d", "d_meas", "phi",
           "e", "e_dot", "d_dot", "omega", "saturated", "alpha1", "alpha2", "z")
STATE_NAMES = ("px", "py", "theta", "ox", "oy", "ovx", "ovy", "alpha1", "alpha2")


@dataclass(frozen=True)
class NoiseModel:
    std_dev: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.std_dev) and self.std_dev >= 0):
            raise InvalidConfigError(f"noise std_dev must be >= 0, got {self.std_dev}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidConfigError("noise seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class SimConfig:
    mode: str
    controller: ControllerParams
    vehicle: VehicleState
    target: TargetState = TargetState((0.0, 0.0))
    envelope: EnvelopeParams = EnvelopeParams()
    motion: TargetMotion = TargetMotion()
    filter: Optional[FilterParams] = None
    filter_init: str = "measured"
    noise: NoiseModel = NoiseModel()
    duration: float = 60.0
    step: float = 1e-3
    sample_period: Optional[float] = None
    control_period: Optional[float] = None
    steady_fraction: float = 0.2
    band: Optional[float] = None
    filter_tol: float = 1e-3
    v_star: Optional[float] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "range_only" and self.filter is None:
            raise InvalidConfigError("range_only mode requires filter parameters")
        if self.mode == "saturated" and self.controller.omega_limit is None:
            raise InvalidConfigError("saturated mode requires controller.omega_limit")
        if self.filter_init not in ("measured", "exact"):
            raise InvalidConfigError("filter_init must be 'measured' or 'exact'")
        if not (self.step > 0 and self.duration > 0):
            raise InvalidConfigError("step and duration must be positive")
        if not 0 < self.steady_fraction <= 1:
            raise InvalidConfigError("steady_fraction must lie in (0, 1]")
        self.step_counts()

    @property
    def period(self) -> float:
        return self.step if self.sample_period is None else self.sample_period

    def _multiple(self, value, what):
        n = round(value / self.step)
        if n < 1 or abs(n * self.step - value) > 1e-9 * max(1.0, value):
            raise InvalidConfigError(f"{what} {value} is not a positive multiple of step {self.step}")
        return n

    def step_counts(self) -> tuple[int, int, int]:
        """(total steps, steps per sample, steps per control update)."""
        per_sample = self._multiple(self.period, "sample_period")
        total = self._multiple(self.duration, "duration")
        if total % per_sample:
            raise InvalidConfigError("duration must be a whole number of sample periods")
        per_control = 1 if self.control_period is None else self._multiple(
            self.control_period, "control_period")
        return total, per_sample, per_control


@dataclass
class SimTrace:
    columns: dict

    def __getitem__(self, name) -> np.ndarray:
        return self.columns[name]

    def __len__(self):
        return len(self.columns["t"])

    def window(self, start: float, stop: float = math.inf) -> "SimTrace":
        t = self.columns["t"]
        mask = (t >= start) & (t <= stop)
        return SimTrace({k: v[mask] for k, v in self.columns.items()})

    def tail(self, fraction: float) -> "SimTrace":
        t = self.columns["t"]
        return self.window(t[-1] - fraction * (t[-1] - t[0]))


@dataclass
class Metrics:
    msse: float
    final_abs_error: float
    max_overshoot: float
    steady_max_error: float
    convergence_band: float
    convergence_time: Optional[float]
    filter_convergence_time: Optional[float]
    saturation_duty: float
    omega_match_rms: Optional[float] = None
    converged: bool = field(init=False)

    def __post_init__(self):
        self.converged = self.convergence_time is not None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def msse(trace: SimTrace, r_d: float) -> float:
    """Mean-square range error over the samples of ``trace``."""
    d = trace["d"]
    if len(d) == 0:
        raise InvalidInputError("msse of an empty trace segment")
    return float(np.mean((d - r_d) ** 2))


def settle_time(t: np.ndarray, err: np.ndarray, band: float) -> Optional[float]:
    """First time after which ``err`` stays within ``band``; None if it ends outside."""
    outside = np.flatnonzero(err > band)
    if len(outside) == 0:
        return float(t[0])
    last = outside[-1]
    if last == len(t) - 1:
        return None
    return float(t[last + 1])


def reference_omega(trace: SimTrace, p: ControllerParams) -> np.ndarray:
    """Unsaturated range-based command evaluated on the true range and range rate."""
    e = (trace["d"] - p.r_d) / p.r_d
    return p.omega_c + p.c1 * trace["d_dot"] / p.r_d + p.c2 * np.clip(e, -1.0, 1.0)


def default_band(cfg: SimConfig) -> float:
    p = cfg.controller
    band = 1e-3 * p.r_d
    if not cfg.envelope.stationary and v_star_range(p, cfg.envelope) > 0:
        vs = cfg.v_star if cfg.v_star is not None else default_v_star(p, cfg.envelope)
        band = max(band, 0.5 * epsilon_bound(p, cfg.envelope, vs))
    return band


def compute_metrics(trace: SimTrace, cfg: SimConfig) -> Metrics:
    r_d = cfg.controller.r_d
    t = trace["t"]
    err = np.abs(trace["d"] - r_d)
    steady = trace.tail(cfg.steady_fraction)

    signed = trace["d"] - r_d
    crossings = np.flatnonzero(np.sign(signed[1:]) != np.sign(signed[:-1]))
    overshoot = float(err[crossings[0] + 1:].max()) if len(crossings) else 0.0

    band = cfg.band if cfg.band is not None else default_band(cfg)
    filter_time = None
    if cfg.filter is not None:
        ferr = np.maximum(np.abs(trace["alpha1"] - trace["d"]),
                          np.abs(trace["alpha2"] - trace["d_dot"]))
        filter_time = settle_time(t, ferr, cfg.filter_tol)
    match = None
    if cfg.mode == "range_only" and filter_time is not None:
        # What range_based mode would command from the same state.
        gap = trace["omega"] - reference_omega(trace, cfg.controller)
        match = float(np.sqrt(np.mean(gap[t >= filter_time] ** 2)))
    return Metrics(
        msse=msse(steady, r_d),
        final_abs_error=float(err[-1]),
        max_overshoot=overshoot,
        steady_max_error=float(np.abs(steady["d"] - r_d).max()),
        convergence_band=band,
        convergence_time=settle_time(t, err, band),
        filter_convergence_time=filter_time,
        saturation_duty=float(np.mean(trace["saturated"])),
        omega_match_rms=match,
    )


class _Plant:
    """Closed-loop right-hand side and per-sample observation for one config."""

    def __init__(self, cfg: SimConfig, duration: float):
        p = cfg.controller
        self.v, self.r_d, self.wc = p.v, p.r_d, p.omega_c
        self.c1, self.c2 = p.c1, p.c2
        self.limit = p.omega_limit if cfg.mode == "saturated" else None
        self.range_only = cfg.mode == "range_only"
        self.filt = cfg.filter
        self.stationary = not cfg.motion.moves
        self.accel, self.piecewise = cfg.motion.accel_source(duration)
        vbar = cfg.envelope.max_target_speed
        abar = cfg.envelope.max_target_accel
        self.vbar = vbar if cfg.motion.moves and vbar > 0 else None
        self.abar = abar if abar > 0 else None
        self.eta = 0.0
        self.held_accel = (0.0, 0.0)
        self.held_omega = None

    def target_accel(self, t, vx, vy):
        if self.accel is None:
            return 0.0, 0.0
        ax, ay = self.held_accel if self.piecewise else self.accel(t)
        if self.abar is not None:
            n = math.hypot(ax, ay)
            if n > self.abar:
                ax, ay = ax * self.abar / n, ay * self.abar / n
        vbar = self.vbar
        if vbar is not None:
            sp2 = vx * vx + vy * vy
            if sp2 >= vbar * vbar * (1.0 - 1e-12):
                dot = ax * vx + ay * vy
                if dot > 0:
                    ax -= dot * vx / sp2
                    ay -= dot * vy / sp2
        return ax, ay

    def control(self, s):
        """Controller output and the signals it was computed from."""
        px, py, th, ox, oy, vx, vy, a1, a2 = s
        rx, ry = px - ox, py - oy
        d = math.hypot(rx, ry)
        c, sn = math.cos(th), math.sin(th)
        if d > AT_TARGET_GUARD:
            ux, uy = rx / d, ry / d
        else:
            # Leaving the target: direction from target to vehicle is the heading.
            ux, uy, d = c, sn, AT_TARGET_GUARD
        d_dot = self.v * (c * ux + sn * uy) - (ux * vx + uy * vy)
        d_meas = d + self.eta
        r_d, c1, c2 = self.r_d, self.c1, self.c2
        if self.range_only:
            e = (d_meas - r_d) / r_d
            e_dot = a2 / r_d
        else:
            e = (d - r_d) / r_d
            e_dot = d_dot / r_d
        satd = e if -1.0 < e < 1.0 else math.copysign(1.0, e)
        omega = self.wc + c1 * e_dot + c2 * satd
        clipped = False
        lim = self.limit
        if lim is not None and abs(omega) > lim:
            omega = math.copysign(lim, omega)
            clipped = True
        return omega, clipped, d, d_meas, d_dot, e, e_dot, satd, ux, uy

    def derivative(self, t, s):
        px, py, th, ox, oy, vx, vy, a1, a2 = s
        if self.held_omega is None:
            out = self.control(s)
            omega, d_meas = out[0], out[3]
        else:
            omega = self.held_omega
            d_meas = math.hypot(px - ox, py - oy) + self.eta
        v = self.v
        if self.stationary:
            dox = doy = dvx = dvy = 0.0
        else:
            dox, doy = vx, vy
            dvx, dvy = self.target_accel(t, vx, vy)
        f = self.filt
        if f is not None:
            r = d_meas - a1
            if r > 0:
                sg = 1.0
            elif r < 0:
                sg = -1.0
            else:
                sg = 0.0
            da1 = f.k1 * math.sqrt(abs(r)) * sg + f.k2 * r + a2
            da2 = f.k3 * sg + f.k4 * r
        else:
            da1 = da2 = 0.0
        return (v * math.cos(th), v * math.sin(th), omega, dox, doy, dvx, dvy, da1, da2)


def _rk4(f, t, s, h):
    k1 = f(t, s)
    hh = 0.5 * h
    k2 = f(t + hh, [a + hh * b for a, b in zip(s, k1)])
    k3 = f(t + hh, [a + hh * b for a, b in zip(s, k2)])
    k4 = f(t + h, [a + h * b for a, b in zip(s, k3)])
    h6 = h / 6.0
    return [a + h6 * (b + 2.0 * (c + d) + e) for a, b, c, d, e in zip(s, k1, k2, k3, k4)]


def step(state, cfg: SimConfig, h: float, t: float = 0.0, eta: float = 0.0) -> list:
    """Advance ``state`` (ordered as ``STATE_NAMES``) by one step of size ``h``.

    The controller is evaluated at every stage; the caller owns hold
    policies and noise sampling.
    """
    if not h > 0:
        raise InvalidConfigError(f"step size must be positive, got {h}")
    state = [float(x) for x in state]
    if len(state) != len(STATE_NAMES) or not math.isfinite(sum(state)):
        raise DivergedError("state must be nine finite numbers", dict(zip(STATE_NAMES, state)))
    plant = _Plant(cfg, max(cfg.duration, t + h))
    plant.eta = eta
    if plant.piecewise:
        plant.held_accel = plant.accel(t)
    s = _rk4(plant.derivative, t, state, h)
    s[2] = wrap_angle(s[2])
    if plant.vbar is not None:
        sp = math.hypot(s[5], s[6])
        if sp > plant.vbar:
            s[5] *= plant.vbar / sp
            s[6] *= plant.vbar / sp
    if not math.isfinite(sum(s)):
        raise DivergedError(f"state became non-finite at t={t + h:.6g}", dict(zip(STATE_NAMES, s)))
    return s


def initial_state(cfg: SimConfig, eta: float = 0.0) -> list:
    """State vector at t0, with the filter initialised from the first measurement."""
    vx0, vy0 = cfg.target.velocity if cfg.motion.moves else (0.0, 0.0)
    s = [*cfg.vehicle.position, cfg.vehicle.heading, *cfg.target.position,
         vx0, vy0, 0.0, 0.0]
    rx, ry = s[0] - s[3], s[1] - s[4]
    d = math.hypot(rx, ry)
    s[7] = d + eta
    if cfg.filter_init == "exact":
        if d > AT_TARGET_GUARD:
            ux, uy = rx / d, ry / d
        else:
            ux, uy = math.cos(s[2]), math.sin(s[2])
        s[8] = cfg.controller.v * (math.cos(s[2]) * ux + math.sin(s[2]) * uy) - (ux * vx0 + uy * vy0)
    return s


def run(cfg: SimConfig) -> tuple[SimTrace, Metrics]:
    """Integrate ``cfg`` and return its sampled trace and summary metrics."""
    total, per_sample, per_control = cfg.step_counts()
    h = cfg.step
    plant = _Plant(cfg, cfg.duration)
    sigma = cfg.noise.std_dev
    rng = np.random.Generator(np.random.Philox(int(cfg.noise.seed)))

    def draw():
        return float(rng.normal(0.0, sigma)) if sigma > 0 else 0.0

    plant.eta = draw()
    s = initial_state(cfg, plant.eta)
    schedule = list(cfg.motion.schedule) if cfg.motion.kind == "waypoint_teleport" else []
    vbar = plant.vbar
    r_d, ratio = plant.r_d, plant.c2 / plant.c1
    has_filter = cfg.filter is not None
    held_clipped = False
    rows = []

    def record(t):
        omega, clipped, d, d_meas, d_dot, e, e_dot, _, ux, uy = plant.control(s)
        if plant.held_omega is not None:
            omega, clipped = plant.held_omega, held_clipped
        phi = wrap_angle(s[2] - math.atan2(uy, ux))
        a1, a2 = (s[7], s[8]) if has_filter else (math.nan, math.nan)
        e_true = (d - r_d) / r_d
        z = d_dot / r_d + ratio * (e_true if -1.0 < e_true < 1.0 else math.copysign(1.0, e_true))
        rows.append((t, s[0], s[1], s[2], s[3], s[4], s[5], s[6], d, d_meas, phi,
                     e, e_dot, d_dot, omega, 1.0 if clipped else 0.0, a1, a2, z))

    def hold():
        plant.held_omega = None
        out = plant.control(s)
        plant.held_omega = out[0]
        return out[1]

    f = plant.derivative
    for n in range(total + 1):
        t = n * h
        while schedule and schedule[0][0] <= t + 0.5 * h:
            row = schedule.pop(0)
            s[3], s[4] = row[1], row[2]
            s[5], s[6] = (row[3], row[4]) if len(row) == 5 else (0.0, 0.0)
        sample = n % per_sample == 0
        if sample and n:
            plant.eta = draw()
        if per_control > 1 and n % per_control == 0:
            held_clipped = hold()
        if sample:
            record(t)
        if n == total:
            break
        if plant.piecewise:
            plant.held_accel = plant.accel(t)
        s = _rk4(f, t, s, h)
        s[2] = wrap_angle(s[2])
        if vbar is not None:
            sp = math.hypot(s[5], s[6])
            if sp > vbar:
                s[5] *= vbar / sp
                s[6] *= vbar / sp
        if not math.isfinite(sum(s)):
            raise DivergedError(f"state became non-finite at t={t + h:.6g}",
                                dict(zip(STATE_NAMES, s)))

    arr = np.array(rows, dtype=float)
    trace = SimTrace({name: arr[:, i] for i, name in enumerate(COLUMNS)})
    return trace, compute_metrics(trace, cfg)
