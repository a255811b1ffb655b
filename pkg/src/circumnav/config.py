"""Scenario files: TOML loading, writing, overrides and validation.

A scenario file has top-level run settings plus the sections
``controller``, ``vehicle``, ``target``, ``envelope``, ``motion``,
``filter``, ``noise`` and ``output``. Optional values are simply omitted
(TOML has no null). A ``[filter]`` section with ``auto = true`` is resolved
to the default filter gains at load time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import tomli
import tomli_w

from .analysis import Condition, GainReport
from .controllers import ControllerParams
from .errors import CircumnavError, ConfigError, InfeasibleError, ValidationError
from .kinematics import EnvelopeParams, TargetState, VehicleState
from .motion import TargetMotion
from .report import feasibility_report
from .simulation import NoiseModel, SimConfig
from .sosm_filter import FilterParams, default_gains

_TOP = {"name", "description", "mode", "warnings_accepted", "duration", "step",
        "sample_period", "control_period", "steady_fraction", "band", "filter_tol",
        "v_star"}
_SECTIONS = {
    "controller": {"c1", "c2", "r_d", "v", "omega_limit"},
    "vehicle": {"x", "y", "heading"},
    "target": {"x", "y", "vx", "vy"},
    "envelope": {"max_target_speed", "max_target_accel"},
    "motion": {"kind", "amplitude", "frequency", "bound", "seed", "period", "schedule"},
    "filter": {"auto", "k1", "k2", "k3", "k4", "init", "k3_floor"},
    "noise": {"std_dev", "seed"},
    "output": {"trace", "metrics", "report"},
}
_REQUIRED = {"controller": ("c1", "c2", "r_d", "v"), "vehicle": ("x", "y", "heading")}


@dataclass(frozen=True)
class OutputPaths:
    trace: str = "trace.csv"
    metrics: str = "metrics.json"
    report: str = "report.json"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    sim: SimConfig
    description: str = ""
    warnings_accepted: bool = False
    output: OutputPaths = field(default_factory=OutputPaths)

    @property
    def mode(self) -> str:
        return self.sim.mode

    def report(self) -> dict:
        return feasibility_report(self.sim.controller, self.sim.envelope,
                                  self.sim.filter, self.sim.v_star)

    def validation(self) -> GainReport:
        return GainReport([_condition_from(c) for c in self.report()["conditions"]])

    @property
    def warnings(self) -> list:
        return [c.describe() for c in self.validation().violated]

    def validate(self) -> "ScenarioConfig":
        """Raise ValidationError unless every check holds or warnings are accepted."""
        bad = self.validation().violated
        if bad and not self.warnings_accepted:
            raise ValidationError(
                f"scenario {self.name!r} violates: " + "; ".join(c.describe() for c in bad),
                [c.name for c in bad])
        return self


def _condition_from(d):
    return Condition(d["name"], d["lhs"], d["rhs"], d["strict"], d["description"])


def _number(section, key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}{key} must be a number, got {value!r}")
    return float(value)


def _get(tables, section, key, default=None, required=False):
    table = tables.get(section, {})
    if key not in table:
        if required:
            raise ConfigError(f"missing required field {section}.{key}")
        return default
    return _number(section + ".", key, table[key])


def _check_keys(data):
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{key} must be a table")
            unknown = set(value) - _SECTIONS[key]
            if unknown:
                raise ConfigError(f"unknown field(s) in [{key}]: {', '.join(sorted(unknown))}")
        elif key not in _TOP:
            raise ConfigError(f"unknown top-level field {key!r}")


def from_dict(data: dict) -> ScenarioConfig:
    """Build a config from parsed TOML, applying defaults."""
    _check_keys(data)
    for section, keys in _REQUIRED.items():
        for key in keys:
            _get(data, section, key, required=True)
    top = lambda key, default=None: (  # noqa: E731
        default if key not in data else _number("", key, data[key]))

    try:
        c = data["controller"]
        cp = ControllerParams(float(c["c1"]), float(c["c2"]), float(c["r_d"]), float(c["v"]),
                              _get(data, "controller", "omega_limit"))
        veh = data["vehicle"]
        vehicle = VehicleState((float(veh["x"]), float(veh["y"])), float(veh["heading"]))
        target = TargetState((_get(data, "target", "x", 0.0), _get(data, "target", "y", 0.0)),
                             (_get(data, "target", "vx", 0.0), _get(data, "target", "vy", 0.0)))
        env = EnvelopeParams(_get(data, "envelope", "max_target_speed", 0.0),
                             _get(data, "envelope", "max_target_accel", 0.0))
        m = data.get("motion", {})
        motion = TargetMotion(
            kind=str(m.get("kind", "stationary")),
            amplitude=_get(data, "motion", "amplitude", 0.0),
            frequency=_get(data, "motion", "frequency", 0.0),
            bound=_get(data, "motion", "bound", 0.0),
            seed=int(m.get("seed", 0)),
            period=_get(data, "motion", "period", 1.0),
            schedule=tuple(tuple(row) for row in m.get("schedule", ())))
        fp, init = None, "measured"
        if "filter" in data:
            f = data["filter"]
            init = str(f.get("init", "measured"))
            if f.get("auto", False):
                fp = default_gains(cp.v, env, cp, k3_floor=_get(data, "filter", "k3_floor"))
            else:
                fp = FilterParams(*(_get(data, "filter", k, required=True)
                                    for k in ("k1", "k2", "k3", "k4")))
        n = data.get("noise", {})
        noise = NoiseModel(_get(data, "noise", "std_dev", 0.0), int(n.get("seed", 0)))
        sim = SimConfig(
            mode=str(data.get("mode", "range_based")), controller=cp, vehicle=vehicle,
            target=target, envelope=env, motion=motion, filter=fp, filter_init=init,
            noise=noise, duration=top("duration", 60.0), step=top("step", 1e-3),
            sample_period=top("sample_period"), control_period=top("control_period"),
            steady_fraction=top("steady_fraction", 0.2), band=top("band"),
            filter_tol=top("filter_tol", 1e-3), v_star=top("v_star"))
        out = data.get("output", {})
        output = OutputPaths(**{k: str(v) for k, v in out.items()})
    except ConfigError:
        raise
    except InfeasibleError as exc:
        raise ValidationError(f"automatic filter gains: {exc}", exc.violated) from exc
    except CircumnavError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario value: {exc}") from exc
    return ScenarioConfig(name=str(data.get("name", "unnamed")), sim=sim,
                          description=str(data.get("description", "")),
                          warnings_accepted=bool(data.get("warnings_accepted", False)),
                          output=output)


def to_dict(cfg: ScenarioConfig) -> dict:
    s = cfg.sim
    cp = s.controller
    data = {"name": cfg.name, "description": cfg.description, "mode": s.mode,
            "warnings_accepted": cfg.warnings_accepted,
            "duration": s.duration, "step": s.step, "steady_fraction": s.steady_fraction,
            "filter_tol": s.filter_tol}
    for key in ("sample_period", "control_period", "band", "v_star"):
        if getattr(s, key) is not None:
            data[key] = getattr(s, key)
    data["controller"] = {"c1": cp.c1, "c2": cp.c2, "r_d": cp.r_d, "v": cp.v}
    if cp.omega_limit is not None:
        data["controller"]["omega_limit"] = cp.omega_limit
    data["vehicle"] = {"x": s.vehicle.position[0], "y": s.vehicle.position[1],
                       "heading": s.vehicle.heading}
    data["target"] = {"x": s.target.position[0], "y": s.target.position[1],
                      "vx": s.target.velocity[0], "vy": s.target.velocity[1]}
    data["envelope"] = {"max_target_speed": s.envelope.max_target_speed,
                        "max_target_accel": s.envelope.max_target_accel}
    m = s.motion
    data["motion"] = {"kind": m.kind, "amplitude": m.amplitude, "frequency": m.frequency,
                      "bound": m.bound, "seed": m.seed, "period": m.period,
                      "schedule": [list(row) for row in m.schedule]}
    if s.filter is not None:
        f = s.filter
        data["filter"] = {"k1": f.k1, "k2": f.k2, "k3": f.k3, "k4": f.k4, "init": s.filter_init}
    data["noise"] = {"std_dev": s.noise.std_dev, "seed": s.noise.seed}
    data["output"] = {"trace": cfg.output.trace, "metrics": cfg.output.metrics,
                      "report": cfg.output.report}
    return data


def parse_override(text: str):
    """Split ``key.path=value``; the value is read as a TOML literal, else a bare string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override {text!r} has an empty key")
    try:
        value = tomli.loads(f"x = {raw.strip()}")["x"]
    except tomli.TOMLDecodeError:
        value = raw.strip()
    return key.split("."), value


def apply_overrides(data: dict, overrides) -> dict:
    data = {k: (dict(v) if isinstance(v, dict) else v) for k, v in data.items()}
    for text in overrides:
        path, value = parse_override(text)
        node = data
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {text!r}: {part} is not a table")
        node[path[-1]] = value
        if path[0] == "filter" and path[-1] in ("k1", "k2", "k3", "k4"):
            data["filter"].pop("auto", None)
    return data


def read_toml(text: str, source: str = "<string>") -> dict:
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        # The decoder message already carries "(at line L, column C)".
        raise ConfigError(f"{source}: {exc}") from exc


def loads(text: str, overrides=(), source: str = "<string>") -> ScenarioConfig:
    return from_dict(apply_overrides(read_toml(text, source), overrides))


def load_config(path, overrides=()) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return loads(text, overrides, str(path))


def dumps(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def write_config(cfg: ScenarioConfig, path) -> Path:
    path = Path(path)
    path.write_text(dumps(cfg))
    return path


def bundled_names() -> list:
    root = resources.files("circumnav").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def bundled_path(name: str):
    return resources.files("circumnav").joinpath("scenarios", f"{name}.toml")


def resolve(name_or_path: str, overrides=()) -> ScenarioConfig:
    """Load a bundled scenario by name, or a scenario file by path."""
    p = Path(name_or_path)
    if p.suffix == ".toml" or p.exists():
        return load_config(p, overrides)
    if name_or_path in bundled_names():
        src = bundled_path(name_or_path)
        return loads(src.read_text(), overrides, f"{name_or_path}.toml")
    raise ConfigError(f"no bundled scenario or file named {name_or_path!r}; "
                      f"bundled: {', '.join(bundled_names())}")


def with_seed(cfg: ScenarioConfig, seed: int) -> ScenarioConfig:
    """Reseed both the noise generator and any random target motion."""
    sim = cfg.sim
    sim = replace(sim, noise=replace(sim.noise, seed=seed), motion=replace(sim.motion, seed=seed))
    return replace(cfg, sim=sim)


def finite_dict(d: dict) -> dict:
    """JSON-safe copy replacing non-finite floats by None."""
    def fix(x):
        if isinstance(x, float) and not math.isfinite(x):
            return None
        if isinstance(x, dict):
            return {k: fix(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [fix(v) for v in x]
        return x
    return fix(d)
