"""Feasibility report combining every gain check and closed-form bound."""
from __future__ import annotations

from typing import Optional

from .analysis import (GainReport, actuation_condition, check_moving_gains,
                       check_stationary_gains, compute_bounds, max_raw_omega)
from .controllers import ControllerParams
from .kinematics import EnvelopeParams
from .sosm_filter import FilterParams, check_filter_gains, sigma_forms


def feasibility_report(cp: ControllerParams, env: EnvelopeParams,
                       fp: Optional[FilterParams] = None,
                       v_star: Optional[float] = None) -> dict:
    """Machine-readable report; ``conditions`` lists every applicable check."""
    checks = check_stationary_gains(cp)
    if not env.stationary:
        checks.extend(check_moving_gains(cp, env))
    if cp.omega_limit is not None:
        checks.extend(GainReport([actuation_condition(cp, env)]))
    if fp is not None:
        checks.extend(check_filter_gains(fp, cp, env))
    short, long, sigma2 = sigma_forms(cp, env)
    bounds = compute_bounds(cp, env, v_star)
    return {
        "controller": {"c1": cp.c1, "c2": cp.c2, "r_d": cp.r_d, "v": cp.v,
                       "omega_c": cp.omega_c, "omega_limit": cp.omega_limit},
        "envelope": {"max_target_speed": env.max_target_speed,
                     "max_target_accel": env.max_target_accel},
        "filter": None if fp is None else {"k1": fp.k1, "k2": fp.k2, "k3": fp.k3, "k4": fp.k4},
        "ok": checks.ok,
        "conditions": checks.to_dict()["conditions"],
        "bounds": bounds.to_dict(),
        "sigma1_short": short,
        "sigma1_long": long,
        "sigma1_used": max(short, long),
        "sigma2": sigma2,
        "max_raw_omega": max_raw_omega(cp, env),
    }


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def format_report(report: dict) -> str:
    c = report["controller"]
    env = report["envelope"]
    b = report["bounds"]
    lines = [
        "controller: " + ", ".join(f"{k}={_fmt(v)}" for k, v in c.items()),
        "envelope: " + ", ".join(f"{k}={_fmt(v)}" for k, v in env.items()),
    ]
    if report["filter"] is not None:
        lines.append("filter: " + ", ".join(f"{k}={_fmt(v)}" for k, v in report["filter"].items()))
    lines.append("")
    lines.append("conditions:")
    for cond in report["conditions"]:
        op = ">" if cond["strict"] else ">="
        status = "ok" if cond["holds"] else f"violated by {-cond['margin']:.6g}"
        lines.append(f"  {cond['name']}: {cond['lhs']:.6g} {op} {cond['rhs']:.6g} ({status})")
    lines.append("")
    lines.append("bounds:")
    labels = [
        ("omega_o", "target angular rate ceiling [rad/s]"),
        ("q1", "q1 [m]"),
        ("v_star", "v* [m/s]"),
        ("sin_phi_star", "sin(phi*)"),
        ("epsilon", "epsilon at v* [m]"),
        ("epsilon_limit", "epsilon as v* -> 0 [m]"),
        ("T3", "T3 [s]"),
        ("T4", "T4 [s]"),
        ("T1", "T1 [s]"),
        ("min_initial_range", "minimum initial range [m]"),
        ("rho", "local exponential rate [1/s]"),
        ("Delta", "discriminant [1/s^2]"),
        ("condition_number", "eigenvector condition number C"),
        ("never_saturates", "never saturates"),
    ]
    for key, label in labels:
        lines.append(f"  {label}: {_fmt(b[key])}")
    lines.append(f"  sigma1 (short form): {_fmt(report['sigma1_short'])}")
    lines.append(f"  sigma1 (long form): {_fmt(report['sigma1_long'])}")
    lines.append(f"  sigma2: {_fmt(report['sigma2'])}")
    lines.append(f"  peak unsaturated |omega| [rad/s]: {_fmt(report['max_raw_omega'])}")
    lines.append("")
    lines.append("all conditions hold" if report["ok"] else "WARNING: some conditions are violated")
    return "\n".join(lines) + "\n"
