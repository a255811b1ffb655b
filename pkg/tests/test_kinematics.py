import math

import pytest
from hypothesis import given, strategies as st

from circumnav.errors import AtTargetError, InvalidConfigError, InvalidInputError
from circumnav.kinematics import (AT_TARGET_GUARD, EnvelopeParams, TargetState, VehicleState,
                                  handle_pass_through, polar_derivative, relative_state,
                                  target_derivative, vehicle_derivative, wrap_angle)

angles = st.floats(-1e3, 1e3, allow_nan=False)
coords = st.floats(-50, 50, allow_nan=False)


@given(angles)
def test_wrap_angle_range_and_equivalence(x):
    y = wrap_angle(x)
    assert -math.pi < y <= math.pi
    assert math.isclose(math.cos(y), math.cos(x), abs_tol=1e-9)
    assert math.isclose(math.sin(y), math.sin(x), abs_tol=1e-9)


def test_wrap_angle_maps_minus_pi_to_pi():
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)


def test_states_reject_non_finite():
    with pytest.raises(InvalidInputError):
        TargetState((math.nan, 0.0))
    with pytest.raises(InvalidInputError):
        VehicleState((0.0, 0.0), math.inf)


def test_vehicle_heading_is_wrapped():
    assert VehicleState((0, 0), 2 * math.pi + 0.5).heading == pytest.approx(0.5)


def test_target_derivative_is_double_integrator():
    d = target_derivative(TargetState((1, 2), (3, 4)), (0.5, -0.5))
    assert d.position == (3.0, 4.0)
    assert d.velocity == (0.5, -0.5)


def test_vehicle_derivative_and_speed_check():
    (dx, dy), w = vehicle_derivative(VehicleState((0, 0), math.pi / 2), 2.0, 0.3)
    assert dx == pytest.approx(0.0, abs=1e-15)
    assert dy == pytest.approx(2.0)
    assert w == 0.3
    with pytest.raises(InvalidConfigError):
        vehicle_derivative(VehicleState((0, 0)), 0.0, 0.0)


def test_relative_state_orbit_equilibrium():
    # Counter-clockwise tangent heading at (1, 0): phi = pi/2, d_dot = 0.
    rel = relative_state(VehicleState((1, 0), math.pi / 2), TargetState((0, 0)))
    assert rel.d == 1.0
    assert rel.phi == pytest.approx(math.pi / 2)
    d_dot, phi_dot = polar_derivative(rel, 1.0, 1.0)
    assert d_dot == pytest.approx(0.0, abs=1e-15)
    assert phi_dot == pytest.approx(0.0, abs=1e-15)


def test_relative_state_inside_guard():
    with pytest.raises(AtTargetError):
        relative_state(VehicleState((0, 0), 0.3), TargetState((0, 0)))
    rel = relative_state(VehicleState((0, 0), 0.3), TargetState((0, 0)), allow_at_target=True)
    assert rel.psi == pytest.approx(0.3)
    assert rel.phi == 0.0
    with pytest.raises(AtTargetError):
        polar_derivative(rel, 1.0, 0.0)


def test_pass_through_leaves_heading_outward():
    rel = relative_state(VehicleState((0, 0), 1.0), TargetState((0, 0)), allow_at_target=True)
    out = handle_pass_through(rel)
    assert out.d == AT_TARGET_GUARD and out.phi == 0.0
    far = relative_state(VehicleState((3, 0), 1.0), TargetState((0, 0)))
    assert handle_pass_through(far) is far


@given(coords, coords, angles, coords, coords, st.floats(-5, 5), st.floats(-5, 5))
def test_velocity_split_is_orthogonal_decomposition(px, py, th, ox, oy, vx, vy):
    if math.hypot(px - ox, py - oy) < 1e-3:
        return
    rel = relative_state(VehicleState((px, py), th), TargetState((ox, oy), (vx, vy)))
    assert math.isclose(rel.v1 ** 2 + rel.v2 ** 2, vx * vx + vy * vy, rel_tol=1e-9, abs_tol=1e-12)
    ux, uy = math.cos(rel.psi), math.sin(rel.psi)
    # Reconstruct the velocity from its radial and tangential parts.
    assert math.isclose(rel.v1 * ux - rel.v2 * uy, vx, abs_tol=1e-9)
    assert math.isclose(rel.v1 * uy + rel.v2 * ux, vy, abs_tol=1e-9)


@given(st.floats(1, 20), st.floats(-3, 3), st.floats(-math.pi, math.pi), st.floats(-2, 2),
       st.floats(-2, 2), st.floats(0.2, 3), st.floats(-2, 2))
def test_polar_derivative_matches_cartesian_finite_difference(d, psi, th, vx, vy, v, w):
    # Oracle: move positions and heading by a tiny Cartesian step, recompute polar coords.
    target = TargetState((0.3, -0.2), (vx, vy))
    veh = VehicleState((0.3 + d * math.cos(psi), -0.2 + d * math.sin(psi)), th)
    rel = relative_state(veh, target)
    d_dot, phi_dot = polar_derivative(rel, v, w)
    h = 1e-6

    def at(sign):
        s = sign * h
        veh2 = VehicleState((veh.position[0] + s * v * math.cos(th),
                             veh.position[1] + s * v * math.sin(th)), th + s * w)
        tgt2 = TargetState((target.position[0] + s * vx, target.position[1] + s * vy), (vx, vy))
        return relative_state(veh2, tgt2)

    a, b = at(1), at(-1)
    assert (a.d - b.d) / (2 * h) == pytest.approx(d_dot, abs=1e-5)
    assert wrap_angle(a.phi - b.phi) / (2 * h) == pytest.approx(phi_dot, abs=1e-5)


def test_envelope():
    env = EnvelopeParams(0.15, 0.01)
    assert env.omega_o(2.0) == pytest.approx(0.075)
    assert not env.stationary
    assert EnvelopeParams().stationary
    with pytest.raises(InvalidInputError):
        EnvelopeParams(-1.0, 0.0)
