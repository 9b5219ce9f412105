import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bldc_ann.motor import (
    MotorParams,
    MotorState,
    back_emf_shape,
    derivatives,
    electromagnetic_torque,
    phase_back_emfs,
)
from bldc_ann.sim import _rk4

DEG = math.pi / 180.0
P = MotorParams()


def test_shape_anchor_values():
    assert back_emf_shape(120 * DEG) == 1.0
    assert back_emf_shape(30 * DEG) == pytest.approx(0.0, abs=1e-12)
    assert back_emf_shape(300 * DEG) == -1.0


@pytest.mark.parametrize("theta", [0.1, 1.0, 2.5])
def test_shape_half_wave_antisymmetry(theta):
    assert back_emf_shape(theta + math.pi) == pytest.approx(-back_emf_shape(theta), abs=1e-12)


def test_shape_range_and_flat_width():
    probe = back_emf_shape((np.arange(360) + 0.5) * DEG)
    assert probe.min() >= -1.0 and probe.max() <= 1.0
    assert np.count_nonzero(probe == 1.0) == 120
    assert np.count_nonzero(probe == -1.0) == 120


def test_shape_periodic():
    theta = np.random.default_rng(3).uniform(-50, 50, size=1000)
    np.testing.assert_allclose(back_emf_shape(theta + 2 * math.pi), back_emf_shape(theta), atol=1e-12)


def test_shape_array_matches_scalar():
    theta = np.linspace(-7, 7, 301)
    np.testing.assert_allclose(back_emf_shape(theta), [back_emf_shape(float(t)) for t in theta],
                               atol=1e-12)


def test_back_emf_zero_speed():
    state = MotorState(electrical_angle=1.3, mechanical_speed=0.0)
    np.testing.assert_array_equal(phase_back_emfs(state, P), np.zeros(3))


def test_back_emf_flat_top_value():
    state = MotorState(electrical_angle=120 * DEG, mechanical_speed=100.0)
    assert phase_back_emfs(state, P)[0] == pytest.approx(10.0)


@pytest.mark.parametrize(
    "theta_deg, expected_sum",
    [
        # 90: a flat +1, b at 330 deg flat -1, c at 210 deg mid-ramp 0
        (90.0, 0.0),
        # 10: a on rising ramp -1 + 2*10/60, b at 250 deg -1, c at 130 deg +1
        (10.0, -2.0 / 3.0),
    ],
)
def test_back_emf_sum_by_hand(theta_deg, expected_sum):
    state = MotorState(electrical_angle=theta_deg * DEG, mechanical_speed=50.0)
    total = phase_back_emfs(state, P).sum()
    assert total == pytest.approx(P.back_emf_constant * 50.0 * expected_sum, abs=1e-9)


def test_torque_examples():
    assert electromagnetic_torque(MotorState(electrical_angle=0.7), P) == 0.0
    state = MotorState([5.0, -5.0, 0.0], electrical_angle=90 * DEG)
    assert electromagnetic_torque(state, P) == pytest.approx(1.0)


def test_torque_matches_power_balance():
    rng = np.random.default_rng(11)
    for _ in range(20):
        i = rng.normal(scale=20, size=3)
        i -= i.mean()
        w = rng.uniform(5, 400) * rng.choice([-1, 1])
        state = MotorState(i, rng.uniform(0, 2 * math.pi), w)
        power = phase_back_emfs(state, P) @ state.phase_currents
        assert electromagnetic_torque(state, P) * w == pytest.approx(power, rel=1e-9, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(-10, 10), theta=st.floats(0, 2 * math.pi),
       i=st.lists(st.floats(-100, 100), min_size=3, max_size=3))
def test_torque_linear_in_current(alpha, theta, i):
    base = electromagnetic_torque(MotorState(i, theta), P)
    scaled = electromagnetic_torque(MotorState(np.array(i) * alpha, theta), P)
    assert scaled == pytest.approx(alpha * base, rel=1e-9, abs=1e-9)


def test_derivative_equilibrium_at_standstill():
    i = np.array([4.0, -1.5, -2.5])
    state = MotorState(i, 40 * DEG, 0.0)
    te = electromagnetic_torque(state, P)
    v = P.phase_resistance * i + phase_back_emfs(state, P)
    d = derivatives(state, v, te, P)
    np.testing.assert_allclose(d.d_currents, 0.0, atol=1e-9)
    assert d.d_angle == 0.0
    assert d.d_speed == pytest.approx(0.0, abs=1e-9)


def test_derivative_equilibrium_while_turning():
    i = np.array([10.0, -10.0, 0.0])
    state = MotorState(i, 90 * DEG, 200.0)
    load = electromagnetic_torque(state, P) - P.viscous_friction * 200.0
    v = P.phase_resistance * i + phase_back_emfs(state, P)
    d = derivatives(state, v, load, P)
    np.testing.assert_allclose(d.d_currents, 0.0, atol=1e-9)
    assert d.d_speed == pytest.approx(0.0, abs=1e-9)
    assert d.d_angle == pytest.approx(P.pole_pairs * 200.0)


def test_derivative_of_rest_is_zero():
    d = derivatives(MotorState(), np.zeros(3), 0.0, P)
    np.testing.assert_array_equal(d.d_currents, np.zeros(3))
    assert d.d_angle == 0.0 and d.d_speed == 0.0


@settings(max_examples=200, deadline=None)
@given(
    v=st.lists(st.floats(-300, 300), min_size=3, max_size=3),
    i=st.lists(st.floats(-100, 100), min_size=3, max_size=3),
    theta=st.floats(0, 2 * math.pi),
    w=st.floats(-500, 500),
    floating=st.sampled_from([(False, False, False), (True, False, False),
                              (False, True, False), (False, False, True)]),
)
def test_current_derivatives_sum_to_zero(v, i, theta, w, floating):
    d = derivatives(MotorState(i, theta, w), v, 1.0, P, floating)
    scale = max(np.abs(d.d_currents).max(), 1.0)
    assert abs(d.d_currents.sum()) <= 1e-9 * scale
    for phase, fl in enumerate(floating):
        if fl:
            assert d.d_currents[phase] == 0.0


def test_pair_time_constant_is_l_over_r():
    # rotor held by an enormous inertia; phases a and b in series, c open
    params = MotorParams(inertia=1e12)
    R, L = params.phase_resistance, params.phase_inductance
    h, v = 20e-6, 10.0
    x = np.zeros(5)
    fl = np.array([False, False, True])
    volts = np.array([v / 2, -v / 2, 0.0])
    n = int(5 * (L / R) / h)
    t = np.arange(1, n + 1) * h
    current = np.empty(n)
    for k in range(n):
        _rk4(x, h, volts, fl, 0.0, R, L, params.back_emf_constant, params.torque_constant,
             params.inertia, params.viscous_friction, float(params.pole_pairs))
        current[k] = x[0]
    i_final = v / (2 * R)
    slope = np.polyfit(t, np.log(i_final - current), 1)[0]
    assert -1.0 / slope == pytest.approx(L / R, rel=0.01)


@pytest.mark.parametrize("field, value", [
    ("phase_resistance", 0.0), ("inertia", -1.0), ("pole_pairs", 0), ("peak_torque", 5.0),
    ("torque_constant", 0.2),
])
def test_params_validation(field, value):
    with pytest.raises(ValueError):
        MotorParams(**{field: value})


def test_default_peak_is_150_percent_of_rated():
    assert P.peak_torque == pytest.approx(1.5 * P.rated_torque)
