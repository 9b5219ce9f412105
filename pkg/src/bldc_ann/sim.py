"""Fixed-step closed-loop simulation of the PI-controlled six-step drive."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit

from .controller import PiGains, pi_update
from .drive import HALL_CODES, SECTOR_PAIRS, PwmConfig, sector_of
from .errors import ConfigInvalid, EmptyProfile, NumericalDivergence
from .motor import MotorParams, derivs_kernel, shape_scalar
from .trace import COLUMNS, Trace

RPM_PER_RAD_S = 60.0 / (2.0 * math.pi)
DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear schedule over ``(time, value)`` breakpoints."""

    points: tuple

    def __post_init__(self):
        pts = tuple((float(t), float(v)) for t, v in self.points)
        if not pts:
            raise EmptyProfile("profile needs at least one breakpoint")
        times = [t for t, _ in pts]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ConfigInvalid("profile breakpoints must be sorted by time")
        object.__setattr__(self, "points", pts)

    def arrays(self):
        pts = np.array(self.points, dtype=float)
        return pts[:, 0].copy(), pts[:, 1].copy()

    def __call__(self, t):
        ts, vs = self.arrays()
        return np.interp(t, ts, vs)


def load_profile_eval(profile, t: float) -> float:
    """Load torque in N*m at time ``t``; constant beyond the last breakpoint."""
    return float(_as_profile(profile)(t))


def reference_profile_eval(profile, t: float) -> float:
    """Speed reference in rad/s at time ``t``."""
    return float(_as_profile(profile)(t))


def _as_profile(profile) -> Profile:
    return profile if isinstance(profile, Profile) else Profile(tuple(profile))


def rpm_to_rad(rpm):
    return rpm / RPM_PER_RAD_S


DEFAULT_REFERENCE = Profile(((0.0, 0.0), (20.0, rpm_to_rad(3000.0))))
DEFAULT_LOAD = Profile(((0.0, 0.0), (50.0, 12.0)))


@dataclass(frozen=True)
class SimConfig:
    t_end: float = 75.0
    ode_step: float = 20e-6
    control_step: float = 200e-6
    log_step: float = 10e-3
    motor: MotorParams = field(default_factory=MotorParams)
    gains: PiGains = field(default_factory=PiGains)
    pwm: PwmConfig = field(default_factory=PwmConfig)
    reference_profile: Profile = DEFAULT_REFERENCE
    load_profile: Profile = DEFAULT_LOAD
    seed: int = 0

    def step_counts(self):
        """Return (ode steps total, ode steps per control, ode steps per log)."""
        if not (self.t_end > 0 and self.ode_step > 0):
            raise ConfigInvalid("t_end and ode_step must be positive")
        if not (self.ode_step <= self.control_step <= self.log_step):
            raise ConfigInvalid("need ode_step <= control_step <= log_step")
        ctrl = _integer_ratio(self.control_step, self.ode_step, "control_step", "ode_step")
        log = _integer_ratio(self.log_step, self.control_step, "log_step", "control_step") * ctrl
        n_log = _integer_ratio(self.t_end, self.log_step, "t_end", "log_step")
        return n_log * log, ctrl, log

    def snapshot(self) -> dict:
        d = asdict(self)
        d["reference_profile"] = [list(p) for p in self.reference_profile.points]
        d["load_profile"] = [list(p) for p in self.load_profile.points]
        return d


def _integer_ratio(big, small, big_name, small_name) -> int:
    ratio = big / small
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-6 * ratio:
        raise ConfigInvalid(f"{big_name}={big:g} is not an integer multiple of {small_name}={small:g}")
    return n


_HALL = np.array(HALL_CODES, dtype=np.float64)
_PAIRS = np.array(SECTOR_PAIRS, dtype=np.int64)


@njit(cache=True)
def _log_row(out, row, t, load, ref, x, te, duty, sector, mp, hall, pairs):
    ke = mp[2]
    th = x[3]
    w = x[4]
    fa = shape_scalar(th)
    fb = shape_scalar(th - 2.0 * math.pi / 3.0)
    fc = shape_scalar(th - 4.0 * math.pi / 3.0)
    out[row, 0] = t
    out[row, 1] = load
    out[row, 2] = ref * 60.0 / (2.0 * math.pi)
    out[row, 3] = w * 60.0 / (2.0 * math.pi)
    out[row, 4] = w
    out[row, 5] = te
    out[row, 6] = x[0]
    out[row, 7] = x[1]
    out[row, 8] = x[2]
    out[row, 9] = ke * w * fa
    out[row, 10] = ke * w * fb
    out[row, 11] = ke * w * fc
    out[row, 12] = fa
    out[row, 13] = fb
    out[row, 14] = fc
    for j in range(3):
        out[row, 15 + j] = hall[sector, j]
    for j in range(6):
        out[row, 18 + j] = 0.0
    out[row, 18 + 2 * pairs[sector, 0]] = 1.0
    out[row, 18 + 2 * pairs[sector, 1] + 1] = 1.0
    out[row, 24] = duty


@njit(cache=True)
def _rk4(x, h, v, fl, load, R, L, Ke, Kt, J, B, P):
    k1 = derivs_kernel(x[0], x[1], x[2], x[3], x[4], v[0], v[1], v[2], fl[0], fl[1], fl[2],
                       load, R, L, Ke, Kt, J, B, P)
    k2 = derivs_kernel(x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1], x[2] + 0.5 * h * k1[2],
                       x[3] + 0.5 * h * k1[3], x[4] + 0.5 * h * k1[4], v[0], v[1], v[2],
                       fl[0], fl[1], fl[2], load, R, L, Ke, Kt, J, B, P)
    k3 = derivs_kernel(x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1], x[2] + 0.5 * h * k2[2],
                       x[3] + 0.5 * h * k2[3], x[4] + 0.5 * h * k2[4], v[0], v[1], v[2],
                       fl[0], fl[1], fl[2], load, R, L, Ke, Kt, J, B, P)
    k4 = derivs_kernel(x[0] + h * k3[0], x[1] + h * k3[1], x[2] + h * k3[2],
                       x[3] + h * k3[3], x[4] + h * k3[4], v[0], v[1], v[2],
                       fl[0], fl[1], fl[2], load, R, L, Ke, Kt, J, B, P)
    for j in range(5):
        x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])


@njit(cache=True)
def _simulate(n_steps, h, ctrl_every, log_every, log_dt, mp, kp, ki, limit, n_carrier, triangle,
              ref_t, ref_v, load_t, load_v, x0, hall, pairs, ncols):
    R, L, Ke, Kt, J, B, P, vdc = mp[0], mp[1], mp[2], mp[3], mp[4], mp[5], mp[6], mp[7]
    out = np.zeros((n_steps // log_every + 1, ncols))
    x = x0.copy()
    x[3] = x[3] % (2.0 * math.pi)
    integral = 0.0
    duty = 0.0
    sector = sector_of(x[3])
    te_sum = 0.0
    te_n = 0
    for k in range(n_steps + 1):
        t = k * h
        ref = np.interp(t, ref_t, ref_v)
        load = np.interp(t, load_t, load_v)
        if k % ctrl_every == 0:
            duty, integral, _ = pi_update(ref - x[4], integral, ctrl_every * h, kp, ki, limit, True)

        s = sector_of(x[3])
        if s != sector:
            # instantaneous current hand-over: the outgoing winding drops to
            # zero and the incoming one takes the continuing winding's current
            old_float = 3 - pairs[sector, 0] - pairs[sector, 1]
            new_float = 3 - pairs[s, 0] - pairs[s, 1]
            if old_float != new_float:
                keep = 3 - old_float - new_float
                x[old_float] = -x[keep]
                x[new_float] = 0.0
            sector = s

        th = x[3]
        te_sum += Kt * (shape_scalar(th) * x[0] + shape_scalar(th - 2.0 * math.pi / 3.0) * x[1]
                        + shape_scalar(th - 4.0 * math.pi / 3.0) * x[2])
        te_n += 1
        if k % log_every == 0:
            _log_row(out, k // log_every, (k // log_every) * log_dt, load, ref, x, te_sum / te_n,
                     duty, sector, mp, hall, pairs)
            te_sum = 0.0
            te_n = 0
        if k == n_steps:
            break

        hi = pairs[sector, 0]
        lo = pairs[sector, 1]
        fl = np.ones(3, dtype=np.bool_)
        fl[hi] = False
        fl[lo] = False
        v_on = np.zeros(3)
        v_on[hi] = 0.5 * vdc
        v_on[lo] = -0.5 * vdc
        v_off = np.zeros(3)

        # split the step at the carrier crossings so switching instants are
        # exact instead of quantized to the step
        c0 = k % n_carrier
        edges = np.empty(4)
        edges[0] = 0.0
        ne = 1
        if triangle:
            for edge in (0.5 * duty * n_carrier, n_carrier - 0.5 * duty * n_carrier):
                if c0 < edge < c0 + 1:
                    edges[ne] = edge - c0
                    ne += 1
        else:
            edge = duty * n_carrier
            if c0 < edge < c0 + 1:
                edges[ne] = edge - c0
                ne += 1
        edges[ne] = 1.0
        if ne == 3 and edges[2] < edges[1]:
            edges[1], edges[2] = edges[2], edges[1]
        for piece in range(ne):
            a = edges[piece]
            b = edges[piece + 1]
            if b <= a:
                continue
            mid = c0 + 0.5 * (a + b)
            if triangle:
                cm = 2.0 * mid / n_carrier
                if cm > 1.0:
                    cm = 2.0 - cm
            else:
                cm = mid / n_carrier
            v = v_on if cm < duty else v_off
            _rk4(x, (b - a) * h, v, fl, load, R, L, Ke, Kt, J, B, P)
        x[3] = x[3] % (2.0 * math.pi)
        for j in range(5):
            if not abs(x[j]) < 1e6:
                return out, k + 1
    return out, -1


def run_simulation(config: SimConfig | None = None) -> Trace:
    """Integrate the closed loop and return the trace sampled every ``log_step``.

    Classical RK4 at ``ode_step``. The PI controller runs every
    ``control_step``; the PWM comparator is evaluated every ``ode_step`` and a
    step containing a carrier crossing is split there, so the switching
    instant is exact. The ``te`` column is the mean torque over the preceding
    log interval (sampled each ``ode_step``), which keeps the 10 ms log free of
    PWM-synchronous sampling bias. Raises :class:`NumericalDivergence` if any state leaves
    +/-1e6.
    """
    cfg = config or SimConfig()
    n_steps, ctrl_every, log_every = cfg.step_counts()
    try:
        n_carrier = cfg.pwm.samples_per_period(cfg.ode_step)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc
    ref_t, ref_v = cfg.reference_profile.arrays()
    load_t, load_v = cfg.load_profile.arrays()
    out, failed_at = _simulate(
        n_steps, cfg.ode_step, ctrl_every, log_every, cfg.log_step, cfg.motor.as_array(),
        cfg.gains.kp, cfg.gains.ki, cfg.gains.limit, n_carrier, cfg.pwm.carrier_shape == "triangle",
        ref_t, ref_v, load_t, load_v, np.zeros(5), _HALL, _PAIRS, len(COLUMNS),
    )
    if failed_at >= 0:
        raise NumericalDivergence(
            f"state exceeded {DIVERGENCE_LIMIT:g} at t={failed_at * cfg.ode_step:.6g} s"
        )
    return Trace(out, cfg.snapshot())


@dataclass(frozen=True)
class RunSummary:
    settle_time: float | None
    steady_state_error: float
    final_speed_rpm: float
    final_load_torque: float
    mean_te: float
    expected_te: float


def summarize(trace: Trace, tolerance: float = 0.01, window: float = 5.0) -> RunSummary:
    """Settling and steady-state figures for a finished run.

    ``settle_time`` is the first logged time after which the speed stays
    within ``tolerance`` of the final reference. Steady-state quantities are
    means over the last ``window`` seconds.
    """
    t = trace["t"]
    ref = trace["speed_ref"]
    spd = trace["speed_actual"]
    final_ref = ref[-1]
    settle = None
    if final_ref != 0:
        ok = np.abs(spd - final_ref) <= tolerance * abs(final_ref)
        bad = np.flatnonzero(~ok)
        if bad.size == 0:
            settle = float(t[0])
        elif bad[-1] + 1 < len(t):
            settle = float(t[bad[-1] + 1])
    tail = t >= t[-1] - window
    b = trace.config.get("motor", {}).get("viscous_friction", MotorParams().viscous_friction)
    mean_w = float(trace["speed_rad"][tail].mean())
    return RunSummary(
        settle_time=settle,
        steady_state_error=float(abs(spd[tail].mean() - final_ref) / abs(final_ref)) if final_ref else 0.0,
        final_speed_rpm=float(spd[-1]),
        final_load_torque=float(trace["load_torque"][-1]),
        mean_te=float(trace["te"][tail].mean()),
        expected_te=float(trace["load_torque"][tail].mean() + b * mean_w),
    )
