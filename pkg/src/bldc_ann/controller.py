"""Discrete PI speed controller with conditional-integration anti-windup."""
from __future__ import annotations

import math
from dataclasses import dataclass

from numba import njit


@dataclass(frozen=True)
class PiGains:
    kp: float = 0.01
    ki: float = 0.05
    integral_limit: float | None = None

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0:
            raise ValueError("PI gains must be non-negative")
        if self.integral_limit is not None and self.integral_limit <= 0:
            raise ValueError("integral_limit must be positive")

    @property
    def limit(self) -> float:
        """Integral clamp; defaults to 1/ki so the integral term alone spans full duty."""
        if self.integral_limit is not None:
            return self.integral_limit
        return 1.0 / self.ki if self.ki > 0 else math.inf


@dataclass(frozen=True)
class PiState:
    integral: float = 0.0
    last_output_saturated: bool = False


def duty_to_command(u_raw: float) -> float:
    return min(max(u_raw, 0.0), 1.0)


def pi_step(reference: float, actual: float, dt: float, gains: PiGains, state: PiState,
            anti_windup: bool = True) -> tuple[float, PiState]:
    """Advance the controller one sample.

    The error is ``reference - actual``. With ``anti_windup`` the integral is
    frozen while the output is saturated in the direction the error pushes,
    and always clamped to ``gains.limit``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    duty, integral, u_raw = pi_update(reference - actual, state.integral, dt, gains.kp, gains.ki,
                                      gains.limit, anti_windup)
    return duty, PiState(integral, duty != u_raw)


@njit(cache=True)
def pi_update(e, integral, dt, kp, ki, limit, anti_windup):
    """Scalar PI recurrence shared with the compiled simulation loop."""
    new_integral = integral + e * dt
    if anti_windup:
        u_try = kp * e + ki * new_integral
        if (u_try > 1.0 and e > 0) or (u_try < 0.0 and e < 0):
            new_integral = integral
        new_integral = min(max(new_integral, -limit), limit)
    u_raw = kp * e + ki * new_integral
    duty = min(max(u_raw, 0.0), 1.0)
    return duty, new_integral, u_raw
