"""Three-phase BLDC motor with trapezoidal back-EMF.

The scalar kernels here are compiled with numba so the simulation loop in
:mod:`bldc_ann.sim` can call them directly; the dataclass-level functions
are thin wrappers for interactive use and testing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
# phase offsets of the b and c windings, electrical radians
PHASE_SHIFTS = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)


@dataclass(frozen=True)
class MotorParams:
    """Lumped motor constants in SI units.

    ``phase_inductance`` is the effective per-phase value with mutual
    coupling folded in.
    """

    phase_resistance: float = 0.5
    phase_inductance: float = 1e-3
    back_emf_constant: float = 0.1
    torque_constant: float = 0.1
    inertia: float = 0.002
    viscous_friction: float = 0.001
    pole_pairs: int = 4
    rated_torque: float = 12.0
    peak_torque: float = 18.0
    dc_link_voltage: float = 200.0

    def __post_init__(self):
        positive = {
            "phase_resistance": self.phase_resistance,
            "phase_inductance": self.phase_inductance,
            "back_emf_constant": self.back_emf_constant,
            "torque_constant": self.torque_constant,
            "inertia": self.inertia,
            "viscous_friction": self.viscous_friction,
            "rated_torque": self.rated_torque,
            "peak_torque": self.peak_torque,
            "dc_link_voltage": self.dc_link_voltage,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if int(self.pole_pairs) != self.pole_pairs or self.pole_pairs < 1:
            raise ValueError(f"pole_pairs must be an integer >= 1, got {self.pole_pairs!r}")
        if self.peak_torque < self.rated_torque:
            raise ValueError("peak_torque must not be below rated_torque")
        if not math.isclose(self.torque_constant, self.back_emf_constant, rel_tol=1e-9):
            raise ValueError(
                "torque_constant and back_emf_constant must be equal in SI units "
                f"({self.torque_constant} != {self.back_emf_constant})"
            )

    def as_array(self) -> np.ndarray:
        """Pack into the float vector layout used by the compiled kernels."""
        return np.array(
            [
                self.phase_resistance,
                self.phase_inductance,
                self.back_emf_constant,
                self.torque_constant,
                self.inertia,
                self.viscous_friction,
                float(self.pole_pairs),
                self.dc_link_voltage,
            ]
        )


@dataclass
class MotorState:
    phase_currents: np.ndarray = field(default_factory=lambda: np.zeros(3))
    electrical_angle: float = 0.0
    mechanical_speed: float = 0.0

    def __post_init__(self):
        self.phase_currents = np.asarray(self.phase_currents, dtype=float).reshape(3)
        self.electrical_angle = float(self.electrical_angle) % TWO_PI

    def as_array(self) -> np.ndarray:
        return np.array([*self.phase_currents, self.electrical_angle, self.mechanical_speed])


@dataclass
class StateDerivative:
    d_currents: np.ndarray
    d_angle: float
    d_speed: float


@njit(cache=True)
def shape_scalar(theta):
    x = theta % TWO_PI
    if x < math.pi / 3.0:
        return -1.0 + x * (6.0 / math.pi)
    if x < math.pi:
        return 1.0
    if x < 4.0 * math.pi / 3.0:
        return 1.0 - (x - math.pi) * (6.0 / math.pi)
    return -1.0


@njit(cache=True)
def derivs_kernel(ia, ib, ic, theta, omega, va, vb, vc, fl_a, fl_b, fl_c,
                  load, R, L, Ke, Kt, J, B, P):
    """Right-hand side of the motor ODE.

    ``fl_*`` flag floating phases: their current derivative is forced to
    zero and the neutral is solved over the connected phases only.
    """
    fa = shape_scalar(theta)
    fb = shape_scalar(theta - 2.0 * math.pi / 3.0)
    fc = shape_scalar(theta - 4.0 * math.pi / 3.0)
    ea = Ke * omega * fa
    eb = Ke * omega * fb
    ec = Ke * omega * fc

    # per-phase driving voltage before the neutral shift
    ua = va - R * ia - ea
    ub = vb - R * ib - eb
    uc = vc - R * ic - ec
    n = 0
    total = 0.0
    if not fl_a:
        n += 1
        total += ua
    if not fl_b:
        n += 1
        total += ub
    if not fl_c:
        n += 1
        total += uc

    dia = 0.0
    dib = 0.0
    dic = 0.0
    if n >= 2:
        vn = total / n
        if not fl_a:
            dia = (ua - vn) / L
        if not fl_b:
            dib = (ub - vn) / L
        if not fl_c:
            dic = (uc - vn) / L

    te = Kt * (fa * ia + fb * ib + fc * ic)
    dw = (te - load - B * omega) / J
    return dia, dib, dic, P * omega, dw


def _as_params_tuple(params: MotorParams):
    return (
        params.phase_resistance,
        params.phase_inductance,
        params.back_emf_constant,
        params.torque_constant,
        params.inertia,
        params.viscous_friction,
        float(params.pole_pairs),
    )


def back_emf_shape(theta_e):
    """Normalized trapezoidal back-EMF of phase a at electrical angle ``theta_e``.

    Ramps -1 -> +1 over [0, 60) degrees, holds +1 on [60, 180), ramps back
    down over [180, 240) and holds -1 on [240, 360). Accepts scalars or
    arrays.
    """
    if np.ndim(theta_e) == 0:
        return shape_scalar(float(theta_e))
    x = np.mod(np.asarray(theta_e, dtype=float), TWO_PI)
    out = np.full(x.shape, -1.0)
    rising = x < math.pi / 3.0
    out[rising] = -1.0 + x[rising] * (6.0 / math.pi)
    out[(x >= math.pi / 3.0) & (x < math.pi)] = 1.0
    falling = (x >= math.pi) & (x < 4.0 * math.pi / 3.0)
    out[falling] = 1.0 - (x[falling] - math.pi) * (6.0 / math.pi)
    return out


def phase_shapes(theta_e: float) -> np.ndarray:
    return np.array([shape_scalar(theta_e - s) for s in PHASE_SHIFTS])


def phase_back_emfs(state: MotorState, params: MotorParams) -> np.ndarray:
    """Per-phase back-EMF in volts: ``Ke * omega_m * shape(theta_e - shift)``."""
    return params.back_emf_constant * state.mechanical_speed * phase_shapes(state.electrical_angle)


def electromagnetic_torque(state: MotorState, params: MotorParams) -> float:
    # written with the shape function rather than e/omega so standstill is well defined
    return float(params.torque_constant * phase_shapes(state.electrical_angle) @ state.phase_currents)


def derivatives(state: MotorState, phase_voltages, load_torque: float, params: MotorParams,
                floating=(False, False, False)) -> StateDerivative:
    """Time derivative of ``state`` under the given terminal voltages.

    Connected phases share a star point whose potential is chosen so the
    current derivatives sum to zero. Phases marked in ``floating`` keep
    their current.
    """
    ia, ib, ic = state.phase_currents
    va, vb, vc = (float(v) for v in phase_voltages)
    fl = [bool(f) for f in floating]
    dia, dib, dic, dth, dw = derivs_kernel(
        ia, ib, ic, state.electrical_angle, state.mechanical_speed,
        va, vb, vc, fl[0], fl[1], fl[2], float(load_torque),
        *_as_params_tuple(params),
    )
    return StateDerivative(np.array([dia, dib, dic]), dth, dw)
