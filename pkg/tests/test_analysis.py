import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circumnav import analysis as an
from circumnav.controllers import ControllerParams
from circumnav.errors import InfeasibleError, InvalidConfigError, InvalidInputError
from circumnav.kinematics import EnvelopeParams

# Oracle values from a 30-digit independent evaluation of the closed forms.
EPSILON_REF = 0.0650275591851905
EPSILON_LIMIT_REF = 0.0518027423480081
SIN_PHI_REF = 0.759934207678533
RHO_REF = 0.155120311555285
T3_REF = 0.0774301024136025
T4_REF = math.pi / 10

TABLE = ControllerParams(200.0, 30.0, 1.0, 1.0)
MOVING = EnvelopeParams(0.15, 0.01)


def test_stationary_gain_examples():
    assert an.check_stationary_gains(TABLE).ok
    assert not an.check_stationary_gains(ControllerParams(1.0, 1.0, 1.0, 1.0)).ok
    assert not an.check_stationary_gains(ControllerParams(31.0, 30.0, 1.0, 1.0)).ok


def test_moving_gain_reference_set_misses_by_015():
    report = an.check_moving_gains(TABLE, MOVING)
    assert not report.ok
    (bad,) = report.violated
    assert bad.name == an.MOVING_GAIN_2
    assert -bad.margin == pytest.approx(0.15)
    assert "violated by 0.15" in bad.describe()
    cond1 = [c for c in report.conditions if c.name == an.MOVING_GAIN_1][0]
    assert cond1.lhs == pytest.approx(199) and cond1.rhs == pytest.approx(60.15)


def test_moving_gain_feasible_set():
    assert an.check_moving_gains(ControllerParams(200.0, 40.0, 1.0, 1.0), MOVING).ok


def test_moving_reduces_to_stationary_plus_c2_bound():
    for c2 in (1.5, 2.5, 150.0, 250.0):
        p = ControllerParams(200.0, c2, 1.0, 1.0)
        expect = an.check_stationary_gains(p).ok and c2 > 2.0
        assert an.check_moving_gains(p, EnvelopeParams()).ok == expect


def test_epsilon_reference():
    assert an.q1(TABLE) == pytest.approx(0.15)
    assert an.default_v_star(TABLE, MOVING) == pytest.approx(0.35)
    assert an.sin_phi_star(TABLE, MOVING, 0.35) == pytest.approx(SIN_PHI_REF, rel=1e-12)
    assert an.epsilon_bound(TABLE, MOVING, 0.35) == pytest.approx(EPSILON_REF, rel=1e-12)
    assert an.epsilon_limit(TABLE, MOVING) == pytest.approx(EPSILON_LIMIT_REF, rel=1e-12)


def test_epsilon_stationary_term_dropout():
    env = EnvelopeParams()
    s = an.sin_phi_star(TABLE, env, 0.3)
    expect = 1.0 / (30 * s) + 1.0 / (200 * s)
    assert an.epsilon_bound(TABLE, env, 0.3) == pytest.approx(expect, rel=1e-12)


def test_epsilon_halves_when_gains_double():
    doubled = ControllerParams(400.0, 60.0, 1.0, 1.0)
    assert an.epsilon_bound(doubled, MOVING, 0.35) == pytest.approx(
        an.epsilon_bound(TABLE, MOVING, 0.35) / 2, rel=1e-14)


def test_epsilon_rejects_bad_v_star():
    with pytest.raises(InvalidInputError):
        an.epsilon_bound(TABLE, MOVING, 0.7)
    with pytest.raises(InvalidInputError):
        an.epsilon_bound(TABLE, MOVING, 0.0)


def test_dwell_times_reference():
    p = ControllerParams(200.0, 40.0, 1.0, 1.0)
    t3, t4, t1 = an.dwell_times(p, MOVING, 0.3)
    assert t3 == pytest.approx(T3_REF, rel=1e-12)
    assert t4 == pytest.approx(T4_REF, rel=1e-12)
    assert t1 == t3 + t4


def test_dwell_times_reject_non_positive_denominator():
    with pytest.raises(InfeasibleError):
        an.dwell_times(TABLE, MOVING, 0.35)  # c2 - c1*wo = 0


def test_exponential_rate_reference():
    rho, delta = an.exponential_rate(TABLE)
    assert delta == pytest.approx(39876)
    assert rho == pytest.approx(RHO_REF, rel=1e-10)
    rho2, delta2 = an.exponential_rate(ControllerParams(2.0, 30.0, 1.0, 1.0))
    assert delta2 < 0 and rho2 == 1.0


@settings(max_examples=50, deadline=None)
@given(st.floats(2, 400), st.floats(0.01, 1), st.floats(0.2, 10), st.floats(0.1, 20))
def test_rate_matches_eigenvalue_oracle(c1, frac, r_d, v):
    wc = v / r_d
    c2 = frac * (c1 - 1) * wc * 0.999
    p = ControllerParams(c1, c2, r_d, v)
    assert an.check_stationary_gains(p).ok
    rho, _ = an.exponential_rate(p)
    eig = np.linalg.eigvals(an.linearization(p))
    assert rho == pytest.approx(-eig.real.max(), rel=1e-9, abs=1e-12)


def test_eigenvector_condition_at_least_one():
    assert an.eigenvector_condition(TABLE) >= 1.0


def test_actuation_examples():
    p = ControllerParams(200.0, 30.0, 1.0, 1.0, omega_limit=1.0)
    assert an.check_actuation(p, EnvelopeParams())
    cond = an.actuation_condition(p, MOVING)
    assert not cond.holds and cond.rhs == pytest.approx(1.3325)
    assert not an.check_actuation(p, EnvelopeParams(0.0, 1e300))
    with pytest.raises(InvalidConfigError):
        an.check_actuation(TABLE, MOVING)


def test_never_saturates_examples():
    p = ControllerParams(0.1, 0.1, 10.0, 1.0, omega_limit=1.0)
    assert an.max_raw_omega(p, EnvelopeParams()) == pytest.approx(0.21)
    assert an.never_saturates(p, EnvelopeParams())
    assert an.never_saturates(ControllerParams(200.0, 30.0, 1.0, 1.0, omega_limit=1e12), MOVING)
    assert not an.never_saturates(ControllerParams(200.0, 30.0, 1.0, 1.0, omega_limit=1.0), MOVING)


@settings(max_examples=200, deadline=None)
@given(st.floats(1.01, 300), st.floats(0.01, 50), st.floats(0.5, 10), st.floats(0.1, 10),
       st.floats(0, 1))
def test_moving_feasibility_implies_stationary(c1, c2, r_d, v, vo_frac):
    p = ControllerParams(c1, c2, r_d, v)
    if an.check_moving_gains(p, EnvelopeParams(vo_frac * v, 0.0)).ok:
        assert an.check_stationary_gains(p).ok


def test_compute_bounds_never_raises_and_flags():
    b = an.compute_bounds(TABLE, MOVING)
    assert b.epsilon == pytest.approx(EPSILON_REF, rel=1e-12)
    assert b.T1 is None  # dwell denominator is zero at these gains
    assert b.feasible_stationary and not b.feasible_moving
    good = an.compute_bounds(ControllerParams(200.0, 40.0, 1.0, 1.0), MOVING, v_star=0.3)
    assert good.T1 == pytest.approx(T3_REF + T4_REF)
    assert good.min_initial_range == pytest.approx(2.0 + 1.15 * (T3_REF + T4_REF))
    assert good.epsilon > 0
    bad = an.compute_bounds(ControllerParams(1.0, 1.0, 1.0, 1.0), EnvelopeParams())
    assert bad.rho is None and bad.epsilon is None
