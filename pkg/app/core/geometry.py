"""
Positions, headings and trajectories of the simulated nodes, plus the
azimuth/elevation angles between a pointed antenna and a remote point.

Trajectories are pydantic models so they can be read straight from a
scenario file. Evaluation is read-only: anything that needs precomputing
(interpolation tables, random-waypoint legs) is built once in
``model_post_init``.
"""

import math
import logging
from dataclasses import dataclass
from typing import Annotated, List, Literal, NamedTuple, Optional, Tuple, Union

import numpy as np
from pydantic import AfterValidator, BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from app.core.errors import GeometryError
from app.utils.rng import make_stream

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


class Vec3(NamedTuple):
    """A point or vector in meters (or m/s for velocities)."""

    x: float
    y: float
    z: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)

    @classmethod
    def from_array(cls, values) -> "Vec3":
        return cls(float(values[0]), float(values[1]), float(values[2]))


def _check_finite(value: Vec3) -> Vec3:
    if not all(math.isfinite(c) for c in value):
        raise ValueError(f"all components must be finite, got {tuple(value)}")
    return value


Position = Annotated[Vec3, AfterValidator(_check_finite)]


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians to [-pi, pi)."""
    wrapped = (angle + math.pi) % TWO_PI - math.pi
    if wrapped >= math.pi:
        wrapped -= TWO_PI
    return wrapped


def wrap_positive(angle: float) -> float:
    """Wrap an angle in radians to [0, 2*pi)."""
    wrapped = angle % TWO_PI
    return 0.0 if wrapped >= TWO_PI else wrapped


@dataclass(frozen=True)
class Orientation:
    """Yaw is measured counterclockwise from +x in the ground plane."""

    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))
        object.__setattr__(self, "pitch", min(max(self.pitch, -HALF_PI), HALF_PI))
        object.__setattr__(self, "roll", wrap_positive(self.roll))


def direction_angles(origin: Vec3, target: Vec3) -> Tuple[float, float]:
    """Absolute bearing and elevation of the ray origin -> target.

    Both pointing and the azimuth/elevation computation go through this
    function, so a boresight resolved toward a target sees it at exactly 0.
    """
    dx = target[0] - origin[0]
    dy = target[1] - origin[1]
    dz = target[2] - origin[2]
    horizontal = math.hypot(dx, dy)
    if horizontal == 0.0 and dz == 0.0:
        raise GeometryError("zero-length direction")
    return math.atan2(dy, dx), math.atan2(dz, horizontal)


def azimuth_elevation(boresight: Orientation, origin: Vec3, target: Vec3) -> Tuple[float, float]:
    """Angles of ``target`` as seen from an antenna at ``origin``.

    theta is the signed horizontal angle from the boresight, in [-pi, pi);
    phi is the elevation of the ray relative to the boresight pitch,
    clipped to [-pi/2, pi/2].
    """
    bearing, elevation = direction_angles(origin, target)
    theta = wrap_angle(bearing - boresight.yaw)
    phi = min(max(elevation - boresight.pitch, -HALF_PI), HALF_PI)
    return theta, phi


def distance(a: Vec3, b: Vec3) -> float:
    """Euclidean distance in meters."""
    return math.dist(a, b)


class _TrajectoryBase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    def position_at(self, t: float) -> Vec3:
        raise NotImplementedError

    def heading_at(self, t: float) -> Orientation:
        raise NotImplementedError


class StaticTrajectory(_TrajectoryBase):
    kind: Literal["static"]
    position_m: Position

    def position_at(self, t: float) -> Vec3:
        return self.position_m

    def heading_at(self, t: float) -> Orientation:
        return Orientation()


class LinearTrajectory(_TrajectoryBase):
    kind: Literal["linear"]
    start_m: Position
    velocity_mps: Position

    def position_at(self, t: float) -> Vec3:
        t = max(t, 0.0)
        s, v = self.start_m, self.velocity_mps
        return Vec3(s.x + v.x * t, s.y + v.y * t, s.z + v.z * t)

    def heading_at(self, t: float) -> Orientation:
        v = self.velocity_mps
        if v.x == 0.0 and v.y == 0.0:
            return Orientation()
        return Orientation(yaw=math.atan2(v.y, v.x))


class Waypoint(BaseModel):
    model_config = ConfigDict(extra="forbid")

    time_s: float = Field(ge=0.0)
    position_m: Position


class WaypointTrajectory(_TrajectoryBase):
    """Piecewise-linear motion through timed points; clamps outside the covered range."""

    kind: Literal["waypoints"]
    points: List[Waypoint] = Field(min_length=1)

    # Tuples, so the model supports ==.
    _times: Tuple[float, ...] = PrivateAttr()
    _columns: Tuple[Tuple[float, ...], Tuple[float, ...], Tuple[float, ...]] = PrivateAttr()
    _segment_yaw: Tuple[float, ...] = PrivateAttr()

    @field_validator("points")
    @classmethod
    def validate_increasing_times(cls, v):
        times = [p.time_s for p in v]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("waypoint times must be strictly increasing")
        return v

    def model_post_init(self, __context) -> None:
        self._times = tuple(float(p.time_s) for p in self.points)
        coords = np.array([p.position_m for p in self.points], dtype=float)
        self._columns = tuple(tuple(float(c) for c in coords[:, axis]) for axis in range(3))

        # Segments without horizontal motion hold the previous heading.
        yaw = 0.0
        segment_yaw = []
        for delta in np.diff(coords, axis=0):
            if delta[0] != 0.0 or delta[1] != 0.0:
                yaw = math.atan2(delta[1], delta[0])
            segment_yaw.append(yaw)
        self._segment_yaw = tuple(segment_yaw)

    def position_at(self, t: float) -> Vec3:
        return Vec3(*(float(np.interp(t, self._times, column)) for column in self._columns))

    def heading_at(self, t: float) -> Orientation:
        if not self._segment_yaw:
            return Orientation()
        index = int(np.searchsorted(self._times, t, side="right")) - 1
        index = min(max(index, 0), len(self._segment_yaw) - 1)
        return Orientation(yaw=self._segment_yaw[index])


class RandomWaypointTrajectory(_TrajectoryBase):
    """Random waypoint mobility inside an axis-aligned rectangle.

    The legs are drawn once, from a stream seeded by ``seed`` alone, and
    stored as a waypoint path covering ``horizon_s`` seconds.
    """

    kind: Literal["random_waypoint"]
    bounds_m: Tuple[float, float, float, float]  # x_min, y_min, x_max, y_max
    speed_mps: float = Field(gt=0.0)
    pause_s: float = Field(default=0.0, ge=0.0)
    seed: int = Field(ge=0)
    start_m: Optional[Position] = None
    horizon_s: float = Field(default=3600.0, gt=0.0)

    _path: WaypointTrajectory = PrivateAttr()

    @field_validator("bounds_m")
    @classmethod
    def validate_bounds(cls, v):
        x_min, y_min, x_max, y_max = v
        if not all(math.isfinite(c) for c in v) or not (x_max > x_min and y_max > y_min):
            raise ValueError(f"bounds_m must be finite and non-degenerate, got {v}")
        return v

    @model_validator(mode="after")
    def validate_start(self):
        x_min, y_min, x_max, y_max = self.bounds_m
        if self.start_m is not None:
            if not (x_min <= self.start_m.x <= x_max and y_min <= self.start_m.y <= y_max):
                raise ValueError(f"start_m {tuple(self.start_m)} lies outside bounds_m")
        return self

    def model_post_init(self, __context) -> None:
        rng = make_stream(self.seed)
        x_min, y_min, x_max, y_max = self.bounds_m
        low = np.array([x_min, y_min])
        high = np.array([x_max, y_max])

        if self.start_m is not None:
            current = np.array([self.start_m.x, self.start_m.y])
            z = self.start_m.z
        else:
            current = rng.uniform(low, high)
            z = 0.0

        t = 0.0
        points = [Waypoint(time_s=0.0, position_m=Vec3(float(current[0]), float(current[1]), z))]
        while t < self.horizon_s:
            destination = rng.uniform(low, high)
            leg = float(np.linalg.norm(destination - current))
            if leg == 0.0:
                continue
            t += leg / self.speed_mps
            point = Vec3(float(destination[0]), float(destination[1]), z)
            points.append(Waypoint(time_s=t, position_m=point))
            if self.pause_s > 0.0:
                t += self.pause_s
                points.append(Waypoint(time_s=t, position_m=point))
            current = destination

        self._path = WaypointTrajectory(kind="waypoints", points=points)
        logger.debug(f"Random waypoint path (seed {self.seed}): {len(points)} points over {t:.1f} s")

    @property
    def waypoints(self) -> List[Waypoint]:
        return self._path.points

    def position_at(self, t: float) -> Vec3:
        return self._path.position_at(t)

    def heading_at(self, t: float) -> Orientation:
        return self._path.heading_at(t)


Trajectory = Annotated[
    Union[StaticTrajectory, LinearTrajectory, WaypointTrajectory, RandomWaypointTrajectory],
    Field(discriminator="kind"),
]


def position_at(trajectory: _TrajectoryBase, t: float) -> Vec3:
    """Position of a node at simulation time ``t`` (seconds)."""
    return trajectory.position_at(t)


def heading_at(trajectory: _TrajectoryBase, t: float) -> Orientation:
    """Heading of a node at ``t``: yaw along the instantaneous velocity, 0 when static."""
    return trajectory.heading_at(t)
