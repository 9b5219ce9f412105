import numpy as np
import pytest

from bldc_ann.drive import HALL_CODES
from bldc_ann.errors import ConfigInvalid, EmptyProfile, NumericalDivergence
from bldc_ann.motor import MotorParams
from bldc_ann.sim import (
    Profile,
    SimConfig,
    load_profile_eval,
    reference_profile_eval,
    rpm_to_rad,
    run_simulation,
    summarize,
)
from bldc_ann.trace import trace_to_csv_text

DYNAMIC = ("speed_ref", "speed_actual", "speed_rad", "te", "ia", "ib", "ic", "ea", "eb", "ec",
           "duty", "load_torque")


def test_profile_examples():
    load = Profile(((0, 0), (50, 12)))
    assert load_profile_eval(load, 25.0) == pytest.approx(6.0)
    assert load_profile_eval(load, 80.0) == 12.0
    ref = Profile(((0, 0), (20, rpm_to_rad(3000))))
    assert reference_profile_eval(ref, 10.0) == pytest.approx(rpm_to_rad(1500))
    assert rpm_to_rad(60.0) == pytest.approx(2 * np.pi)


def test_empty_profile():
    with pytest.raises(EmptyProfile):
        Profile(())


def test_unsorted_profile():
    with pytest.raises(ConfigInvalid):
        Profile(((1, 0), (0, 1)))


@pytest.mark.parametrize("kwargs", [
    {"control_step": 210e-6},
    {"log_step": 1e-4},
    {"t_end": 0.0},
    {"t_end": 0.0123},
])
def test_bad_step_ratios(kwargs):
    with pytest.raises(ConfigInvalid):
        run_simulation(SimConfig(**kwargs))


def test_carrier_must_fit_the_step():
    from bldc_ann.drive import PwmConfig
    with pytest.raises(ConfigInvalid):
        run_simulation(SimConfig(t_end=0.1, pwm=PwmConfig(3000.0)))


def test_rest_stays_at_rest():
    trace = run_simulation(SimConfig(t_end=0.5, reference_profile=Profile(((0, 0),)),
                                     load_profile=Profile(((0, 0),))))
    assert len(trace) == 51
    for name in DYNAMIC:
        np.testing.assert_array_equal(trace[name], 0.0, err_msg=name)


def test_divergence_is_reported():
    # RK4 leaves its stability region once step * R / L exceeds about 2.8
    cfg = SimConfig(t_end=0.1, ode_step=100e-6, control_step=200e-6,
                    motor=MotorParams(phase_inductance=1e-5))
    with pytest.raises(NumericalDivergence):
        run_simulation(cfg)


def _short_cfg(**kw):
    base = dict(t_end=2.0, reference_profile=Profile(((0, 0), (1, rpm_to_rad(1000)))),
                load_profile=Profile(((0, 0), (2, 2.0))))
    base.update(kw)
    return SimConfig(**base)


def test_runs_are_byte_identical():
    a = trace_to_csv_text(run_simulation(_short_cfg()))
    b = trace_to_csv_text(run_simulation(_short_cfg()))
    assert a == b


def test_step_halving_changes_little():
    coarse = run_simulation(_short_cfg())
    fine = run_simulation(_short_cfg(ode_step=10e-6))
    assert fine["speed_actual"][-1] == pytest.approx(coarse["speed_actual"][-1], rel=1e-3)


def test_hall_signals_toggle_twice_per_revolution():
    cfg = SimConfig(t_end=1.0, log_step=200e-6,
                    reference_profile=Profile(((0, rpm_to_rad(1000)),)),
                    load_profile=Profile(((0, 1.0),)))
    trace = run_simulation(cfg)
    hall = np.column_stack([trace[c] for c in ("hall_a", "hall_b", "hall_c")]).astype(int)
    tail = hall[len(hall) // 2:]
    sectors = np.array([HALL_CODES.index(tuple(h)) for h in tail])
    starts = np.flatnonzero((sectors == 0) & (np.roll(sectors, 1) == 5))
    starts = starts[starts > 0]
    assert len(starts) >= 3
    for a, b in zip(starts, starts[1:]):
        flips = np.abs(np.diff(tail[a:b + 1], axis=0)).sum(axis=0)
        np.testing.assert_array_equal(flips, [2, 2, 2])
        # the drive steps through the sectors in order
        assert list(dict.fromkeys(sectors[a:b])) == [0, 1, 2, 3, 4, 5]


def test_default_run(default_trace):
    tr = default_trace
    assert len(tr) == 7501
    np.testing.assert_allclose(np.diff(tr["t"]), 0.01, atol=1e-12)
    s = summarize(tr)
    assert s.final_load_torque == pytest.approx(12.0)
    assert s.final_speed_rpm == pytest.approx(3000.0, rel=0.01)
    assert s.settle_time is not None and s.settle_time < 30.0
    assert s.mean_te == pytest.approx(s.expected_te, rel=0.02)
    for c in ("hall_a", "hall_b", "hall_c", "pwm_a", "pwm_b", "pwm_c", "pwm_d", "pwm_e", "pwm_f"):
        assert set(np.unique(tr[c])) <= {0.0, 1.0}
    for c in ("emf_norm_a", "emf_norm_b", "emf_norm_c"):
        assert tr[c].min() >= -1.0 and tr[c].max() <= 1.0
    assert tr["duty"].min() >= 0.0 and tr["duty"].max() <= 1.0


def test_speed_columns_agree(default_trace):
    np.testing.assert_allclose(default_trace["speed_actual"],
                               default_trace["speed_rad"] * 60 / (2 * np.pi), rtol=1e-9)
