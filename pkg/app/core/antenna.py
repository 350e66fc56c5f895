"""
Antenna radiation patterns and the antenna position system (APS).

Three pattern families are supported: isotropic, directional (Gaussian
main lobe over a sidelobe floor) and cone/discone (omnidirectional in
azimuth, Gaussian in elevation). Gains are linear power ratios relative
to an isotropic radiator.

The APS resolves where a mounted antenna points each time a packet is
exchanged: either along the node's own heading ("fixed to object") or
straight at another node ("locked to target"). In both modes the
rotation angle spins the antenna about its pointing axis.
"""

import math
import logging
from typing import Annotated, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.errors import PointingError
from app.core.geometry import (
    HALF_PI,
    Orientation,
    Vec3,
    azimuth_elevation,
    direction_angles,
    wrap_positive,
)
from app.core.propagation import SPEED_OF_LIGHT

logger = logging.getLogger(__name__)

_FOUR_LN2 = 4.0 * math.log(2.0)


class _PatternBase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    def evaluate(self, theta, phi):
        """Vectorized gain over arrays of angles (no rotation applied)."""
        raise NotImplementedError

    def rotate(self, theta: float, phi: float, roll: float) -> Tuple[float, float]:
        return theta, phi

    def gain(self, theta: float, phi: float, roll: float = 0.0) -> float:
        if roll:
            theta, phi = self.rotate(theta, phi, roll)
        return float(self.evaluate(theta, phi))


class IsotropicPattern(_PatternBase):
    kind: Literal["isotropic"]

    def evaluate(self, theta, phi):
        return np.ones(np.broadcast(theta, phi).shape)


class DirectionalPattern(_PatternBase):
    """max(peak * exp(-k (theta^2 + phi^2)), floor), k = 4 ln2 / beamwidth^2."""

    kind: Literal["directional"]
    peak_gain_linear: float = Field(gt=1.0)
    beamwidth_3db_rad: float = Field(gt=0.0, le=math.pi)
    sidelobe_floor_linear: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def validate_floor(self):
        if self.sidelobe_floor_linear >= self.peak_gain_linear:
            raise ValueError("sidelobe_floor_linear must be below peak_gain_linear")
        return self

    @property
    def k(self) -> float:
        return _FOUR_LN2 / self.beamwidth_3db_rad**2

    def evaluate(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        lobe = self.peak_gain_linear * np.exp(-self.k * (theta**2 + phi**2))
        return np.maximum(lobe, self.sidelobe_floor_linear)

    def rotate(self, theta: float, phi: float, roll: float) -> Tuple[float, float]:
        # Rolling about the boresight turns the angular offset; its length is unchanged.
        c, s = math.cos(roll), math.sin(roll)
        return theta * c - phi * s, theta * s + phi * c


class ConePattern(_PatternBase):
    """Discone: uniform in azimuth, Gaussian in elevation around elevation_center_rad."""

    kind: Literal["cone"]
    peak_gain_linear: float = Field(gt=0.0)
    elevation_center_rad: float = Field(default=0.0, ge=-HALF_PI, le=HALF_PI)
    elevation_width_rad: float = Field(gt=0.0)

    def evaluate(self, theta, phi):
        offset = np.asarray(phi, dtype=float) - self.elevation_center_rad
        values = self.peak_gain_linear * np.exp(-_FOUR_LN2 * offset**2 / self.elevation_width_rad**2)
        return np.broadcast_to(values, np.broadcast(theta, phi).shape)

    def rotate(self, theta: float, phi: float, roll: float) -> Tuple[float, float]:
        # The cone's pointing axis is vertical, so rolling it is an azimuth shift.
        return theta + roll, phi


Pattern = Annotated[
    Union[IsotropicPattern, DirectionalPattern, ConePattern],
    Field(discriminator="kind"),
]


class PointingMode(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["fixed_to_object", "locked_to_target"] = "fixed_to_object"
    target: Optional[str] = None
    rotation_rad: float = 0.0

    @field_validator("rotation_rad")
    @classmethod
    def normalize_rotation(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("rotation_rad must be finite")
        return wrap_positive(v)

    @model_validator(mode="after")
    def validate_target(self):
        if self.kind == "locked_to_target" and not self.target:
            raise ValueError("locked_to_target pointing needs a target node id")
        if self.kind == "fixed_to_object" and self.target is not None:
            raise ValueError("fixed_to_object pointing does not take a target")
        return self


class AntennaSystem(BaseModel):
    """A pattern plus how it is pointed."""

    model_config = ConfigDict(extra="forbid")

    pattern: Pattern
    pointing: PointingMode = Field(default_factory=PointingMode)
    check_normalization: bool = False


def gain(pattern: _PatternBase, theta: float, phi: float) -> float:
    """Linear gain of ``pattern`` toward (theta, phi) relative to its boresight."""
    return pattern.gain(theta, phi)


def gain_from_area(effective_area: float, frequency: float) -> float:
    """G = 4 pi A_e f^2 / c^2."""
    if effective_area <= 0 or frequency <= 0:
        raise ValueError(
            f"effective area and frequency must be positive, got {effective_area}, {frequency}"
        )
    return 4.0 * math.pi * effective_area * frequency**2 / SPEED_OF_LIGHT**2


def effective_area(gain_linear: float, frequency: float) -> float:
    """A_e = G c^2 / (4 pi f^2)."""
    if gain_linear <= 0 or frequency <= 0:
        raise ValueError(f"gain and frequency must be positive, got {gain_linear}, {frequency}")
    return gain_linear * SPEED_OF_LIGHT**2 / (4.0 * math.pi * frequency**2)


def resolve_boresight(
    system: AntennaSystem,
    node_pose: Tuple[Vec3, Orientation],
    target_pos: Optional[Vec3] = None,
) -> Orientation:
    """Where the antenna points for this exchange; roll is the rotation angle."""
    position, orientation = node_pose
    rotation = system.pointing.rotation_rad
    if system.pointing.kind == "fixed_to_object":
        return Orientation(yaw=orientation.yaw, pitch=orientation.pitch, roll=rotation)

    if target_pos is None:
        raise PointingError(f"locked_to_target on '{system.pointing.target}' needs a target position")
    if tuple(position) == tuple(target_pos):
        raise PointingError("degenerate pointing")
    yaw, pitch = direction_angles(position, target_pos)
    return Orientation(yaw=yaw, pitch=pitch, roll=rotation)


def gain_toward(pattern: _PatternBase, boresight: Orientation, origin: Vec3, target: Vec3) -> float:
    """Gain of an antenna at ``origin`` pointed along ``boresight`` toward ``target``."""
    theta, phi = azimuth_elevation(boresight, origin, target)
    return pattern.gain(theta, phi, roll=boresight.roll)


def mean_spherical_gain(pattern: _PatternBase, n_theta: int = 1440, n_phi: int = 720) -> float:
    """(1 / 4 pi) times the gain integrated over the sphere, midpoint rule."""
    d_theta = 2.0 * math.pi / n_theta
    d_phi = math.pi / n_phi
    theta = -math.pi + (np.arange(n_theta) + 0.5) * d_theta
    phi = -HALF_PI + (np.arange(n_phi) + 0.5) * d_phi
    theta_grid, phi_grid = np.meshgrid(theta, phi, indexing="ij")
    integrand = pattern.evaluate(theta_grid, phi_grid) * np.cos(phi_grid)
    return float(integrand.sum() * d_theta * d_phi / (4.0 * math.pi))
