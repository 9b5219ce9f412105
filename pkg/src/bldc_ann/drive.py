"""Hall sensing, six-step commutation, PWM carrier and inverter model."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import InvalidHallCode, ShootThrough

SECTOR_WIDTH = math.pi / 3.0

# Hall code of each 60 degree electrical sector, sector 0 = [0, 60)
HALL_CODES = (
    (1, 0, 0),
    (1, 1, 0),
    (0, 1, 0),
    (0, 1, 1),
    (0, 0, 1),
    (1, 0, 1),
)

# (high-side phase, low-side phase) per sector; both energized windings sit
# on the flat parts of their back-EMF trapezoid for the whole sector
SECTOR_PAIRS = (
    (2, 1),  # C+ B-
    (0, 1),  # A+ B-
    (0, 2),  # A+ C-
    (1, 2),  # B+ C-
    (1, 0),  # B+ A-
    (2, 0),  # C+ A-
)

_SECTOR_OF_CODE = {code: k for k, code in enumerate(HALL_CODES)}

CARRIER_SHAPES = ("sawtooth", "triangle")


class HallState(NamedTuple):
    h_a: int
    h_b: int
    h_c: int


class GateSignals(NamedTuple):
    """Switch commands ordered A-high, A-low, B-high, B-low, C-high, C-low."""

    g1: int = 0
    g2: int = 0
    g3: int = 0
    g4: int = 0
    g5: int = 0
    g6: int = 0


@dataclass(frozen=True)
class PwmConfig:
    carrier_frequency: float = 5000.0
    carrier_shape: str = "sawtooth"

    def __post_init__(self):
        if not (self.carrier_frequency > 0 and math.isfinite(self.carrier_frequency)):
            raise ValueError("carrier_frequency must be positive")
        if self.carrier_shape not in CARRIER_SHAPES:
            raise ValueError(f"carrier_shape must be one of {CARRIER_SHAPES}")

    def samples_per_period(self, step: float) -> int:
        """Carrier period in units of ``step``; raises if not an integer multiple."""
        ratio = 1.0 / (self.carrier_frequency * step)
        n = round(ratio)
        if n < 1 or abs(ratio - n) > 1e-6 * max(1.0, ratio):
            raise ValueError(
                f"carrier period {1.0 / self.carrier_frequency:g} s is not an integer "
                f"multiple of step {step:g} s"
            )
        return n


@njit(cache=True)
def sector_of(theta):
    x = theta % (2.0 * math.pi)
    k = int(x / (math.pi / 3.0))
    return k if k < 6 else 5


def hall_from_angle(theta_e: float) -> HallState:
    return HallState(*HALL_CODES[sector_of(float(theta_e))])


def _check_hall(hall) -> int:
    code = tuple(int(b) for b in hall)
    try:
        return _SECTOR_OF_CODE[code]
    except KeyError:
        raise InvalidHallCode(f"invalid hall code {code}") from None


def gates_for_sector(sector: int) -> GateSignals:
    hi, lo = SECTOR_PAIRS[sector]
    g = [0] * 6
    g[2 * hi] = 1
    g[2 * lo + 1] = 1
    return GateSignals(*g)


def commutation_table(hall) -> GateSignals:
    """Six-step switch pattern for a Hall code."""
    return gates_for_sector(_check_hall(hall))


@njit(cache=True)
def carrier_value(index, n, triangle):
    """Carrier level in [0, 1) at sample ``index`` of an ``n``-sample period."""
    k = index % n
    if triangle:
        c = 2.0 * k / n
        return c if c <= 1.0 else 2.0 - c
    return k / n


def pwm_generate(duty: float, time: float, cfg: PwmConfig) -> int:
    """Carrier comparison: 1 while the carrier is below ``duty``."""
    duty = min(max(float(duty), 0.0), 1.0)
    if duty >= 1.0:
        return 1
    frac = round((time * cfg.carrier_frequency) % 1.0, 12) % 1.0
    if cfg.carrier_shape == "triangle":
        c = 2.0 * frac
        carrier = c if c <= 1.0 else 2.0 - c
    else:
        carrier = frac
    return int(carrier < duty)


def apply_gates(gates, pwm_on: int, vdc: float):
    """Phase voltages for a gate pattern under hard high-side chopping.

    Returns ``(voltages, floating)``. The energized pair sees +/-Vdc/2 while
    the PWM bit is on and is shorted through the low side (0 V drive) while
    it is off. A phase with neither switch on is floating; its voltage entry
    is 0 and the motor model holds its current.
    """
    g = [int(x) for x in gates]
    voltages = np.zeros(3)
    floating = [True, True, True]
    highs = []
    lows = []
    for leg in range(3):
        hi, lo = g[2 * leg], g[2 * leg + 1]
        if hi and lo:
            raise ShootThrough(f"leg {'ABC'[leg]} has both switches on")
        if hi:
            highs.append(leg)
        if lo:
            lows.append(leg)
    if len(highs) == 1 and len(lows) == 1:
        for leg in highs + lows:
            floating[leg] = False
        if pwm_on:
            voltages[highs[0]] = vdc / 2.0
            voltages[lows[0]] = -vdc / 2.0
    return voltages, tuple(floating)
