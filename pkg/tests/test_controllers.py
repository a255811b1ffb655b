import math

import pytest
from hypothesis import given, strategies as st

from circumnav.controllers import (ControllerParams, range_based_control, range_only_control,
                                   sat, saturated_control, tracking_error)
from circumnav.errors import InvalidConfigError, InvalidInputError

TABLE = ControllerParams(200.0, 30.0, 1.0, 1.0)


@given(st.floats(-1e6, 1e6))
def test_sat_is_clipped_identity(z):
    assert sat(z) == max(-1.0, min(1.0, z))


def test_tracking_error():
    assert tracking_error(3.0, 1.0) == 2.0
    with pytest.raises(InvalidConfigError):
        tracking_error(1.0, 0.0)


def test_params_validation():
    assert TABLE.omega_c == 1.0
    with pytest.raises(InvalidConfigError):
        ControllerParams(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(InvalidConfigError):
        ControllerParams(1.0, 1.0, 1.0, 1.0, omega_limit=-1.0)


def test_on_orbit_command_is_bias_rate():
    assert range_based_control(0.0, 0.0, TABLE).omega == 1.0


def test_range_based_example_values():
    # e = 2 saturates to 1; e_dot = 0.1 scales by c1.
    out = range_based_control(2.0, 0.1, TABLE)
    assert out.omega == pytest.approx(1.0 + 20.0 + 30.0)
    assert not out.saturated


def test_non_finite_inputs_rejected():
    with pytest.raises(InvalidInputError):
        range_based_control(math.nan, 0.0, TABLE)


def test_saturated_needs_limit():
    with pytest.raises(InvalidConfigError):
        saturated_control(0.0, 0.0, TABLE)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.1, 5))
def test_saturated_never_exceeds_limit(e, e_dot, limit):
    p = ControllerParams(200.0, 30.0, 1.0, 1.0, omega_limit=limit)
    out = saturated_control(e, e_dot, p)
    raw = range_based_control(e, e_dot, p).omega
    assert abs(out.omega) <= limit
    assert out.saturated == (abs(raw) > limit)
    if not out.saturated:
        assert out.omega == raw


def test_range_only_uses_rate_estimate():
    p = ControllerParams(3.0, 0.5, 2.0, 1.0)
    out = range_only_control(0.1, 0.4, p)
    assert out.omega == pytest.approx(0.5 + 3.0 / 2.0 * 0.4 + 0.5 * 0.1)
