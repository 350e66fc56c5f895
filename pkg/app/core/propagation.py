"""
Free-space channel physics: wavelength, Friis received power and
propagation delay, plus the dB helpers used around them.

Line-of-sight only; no reflection, shadowing or fading.
"""

import math

from pydantic import BaseModel, ConfigDict, Field

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact
BOLTZMANN = 1.380649e-23  # J/K, exact
REFERENCE_TEMPERATURE = 290.0  # K
NEAR_FIELD_LIMIT = 1.0  # m; Friis is evaluated at this distance below it

_FOUR_PI = 4.0 * math.pi


class Channel(BaseModel):
    """A radio channel: carrier frequency, occupied bandwidth and bit rate."""

    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    frequency_hz: float = Field(gt=0.0)
    bandwidth_hz: float = Field(gt=0.0)
    data_rate_bps: float = Field(gt=0.0)

    @property
    def band(self) -> tuple:
        half = 0.5 * self.bandwidth_hz
        return self.frequency_hz - half, self.frequency_hz + half

    @property
    def wavelength_m(self) -> float:
        return wavelength(self.frequency_hz)


def wavelength(frequency_hz: float) -> float:
    """Carrier wavelength in meters, c/f."""
    if frequency_hz <= 0:
        raise ValueError(f"frequency must be positive, got {frequency_hz}")
    return SPEED_OF_LIGHT / frequency_hz


def friis_received_power(
    p_t: float,
    g_t: float,
    g_r: float,
    wavelength_m: float,
    d: float,
    loss: float = 1.0,
) -> float:
    """
    Received power in watts: P_t G_t G_r lambda^2 / ((4 pi)^2 d^2 L).

    Distances under NEAR_FIELD_LIMIT are evaluated at the limit.

    Args:
        p_t: transmit power (W, > 0)
        g_t, g_r: linear antenna gains toward each other (>= 0)
        wavelength_m: carrier wavelength (m, > 0)
        d: separation (m, >= 0)
        loss: system loss factor L (>= 1)
    """
    if p_t <= 0:
        raise ValueError(f"transmit power must be positive, got {p_t}")
    if g_t < 0 or g_r < 0:
        raise ValueError(f"antenna gains must be nonnegative, got g_t={g_t}, g_r={g_r}")
    if wavelength_m <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength_m}")
    if loss < 1.0:
        raise ValueError(f"system loss must be >= 1, got {loss}")
    if d < 0:
        raise ValueError(f"distance must be nonnegative, got {d}")
    d = max(d, NEAR_FIELD_LIMIT)
    return p_t * g_t * g_r * wavelength_m**2 / (_FOUR_PI**2 * d**2 * loss)


def propagation_delay(d: float) -> float:
    """Time of flight in seconds over d meters."""
    if d < 0:
        raise ValueError(f"distance must be nonnegative, got {d}")
    return d / SPEED_OF_LIGHT


def free_space_path_loss_db(d: float, frequency_hz: float) -> float:
    """Free-space path loss in dB: 20 log10(4 pi d f / c)."""
    if frequency_hz <= 0:
        raise ValueError("frequency must be positive")
    d = max(d, NEAR_FIELD_LIMIT)
    return 20.0 * math.log10(_FOUR_PI * d * frequency_hz / SPEED_OF_LIGHT)


def to_db(ratio: float) -> float:
    if ratio < 0:
        raise ValueError(f"cannot express a negative ratio in dB: {ratio}")
    return 10.0 * math.log10(ratio) if ratio > 0 else -math.inf


def from_db(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def watts_to_dbm(power_w: float) -> float:
    return to_db(power_w) + 30.0
