import math

import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError

from app.core.antenna import (
    AntennaSystem,
    ConePattern,
    DirectionalPattern,
    IsotropicPattern,
    Pattern,
    PointingMode,
    effective_area,
    gain,
    gain_from_area,
    gain_toward,
    mean_spherical_gain,
    resolve_boresight,
)
from app.core.errors import PointingError
from app.core.geometry import Orientation, Vec3, azimuth_elevation
from app.core.propagation import SPEED_OF_LIGHT

PATTERN = TypeAdapter(Pattern)

ISOTROPIC = IsotropicPattern(kind="isotropic")
NARROW = DirectionalPattern(kind="directional", peak_gain_linear=100.0, beamwidth_3db_rad=0.2, sidelobe_floor_linear=0.01)
BASELINE_DISH = DirectionalPattern(
    kind="directional", peak_gain_linear=100.0, beamwidth_3db_rad=0.35, sidelobe_floor_linear=0.01
)
DISCONE = ConePattern(kind="cone", peak_gain_linear=10.0, elevation_center_rad=0.0, elevation_width_rad=0.6)


def random_directions(n, seed=0):
    rng = np.random.default_rng(seed)
    return zip(rng.uniform(-math.pi, math.pi, n), rng.uniform(-math.pi / 2, math.pi / 2, n))


def locked(target="rsu", rotation=0.0):
    return AntennaSystem(
        pattern=BASELINE_DISH,
        pointing=PointingMode(kind="locked_to_target", target=target, rotation_rad=rotation),
    )


def test_isotropic_gain_is_one_everywhere():
    for theta, phi in random_directions(100):
        assert gain(ISOTROPIC, theta, phi) == 1.0


def test_directional_peak_and_half_power_point():
    assert gain(NARROW, 0.0, 0.0) == pytest.approx(100.0, rel=1e-12)
    assert gain(NARROW, 0.1, 0.0) == pytest.approx(50.0, rel=1e-9)
    assert gain(NARROW, 0.0, -0.1) == pytest.approx(50.0, rel=1e-9)


def test_directional_is_even_and_monotone_down_to_floor():
    thetas = np.linspace(0.0, math.pi, 400)
    values = [gain(NARROW, float(t), 0.0) for t in thetas]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(0.01)
    for t in thetas[::20]:
        assert gain(NARROW, float(t), 0.05) == gain(NARROW, -float(t), -0.05)


def test_cone_is_azimuth_symmetric():
    for phi in np.linspace(-1.5, 1.5, 31):
        reference = gain(DISCONE, 0.0, float(phi))
        for theta in np.linspace(-math.pi, math.pi, 17, endpoint=False):
            assert gain(DISCONE, float(theta), float(phi)) == reference
    assert gain(DISCONE, 1.0, 0.0) == pytest.approx(10.0)
    assert gain(DISCONE, 1.0, 0.3) == pytest.approx(5.0)


def test_gain_is_nonnegative():
    for pattern in (ISOTROPIC, NARROW, BASELINE_DISH, DISCONE):
        for theta, phi in random_directions(200, seed=3):
            value = gain(pattern, theta, phi)
            assert value >= 0.0
            assert math.isfinite(value)


@pytest.mark.parametrize("pattern", [ISOTROPIC, NARROW, DISCONE])
def test_rotation_angle_leaves_gain_unchanged(pattern):
    rng = np.random.default_rng(9)
    for theta, phi in random_directions(100, seed=4):
        roll = float(rng.uniform(0.0, 2 * math.pi))
        assert pattern.gain(theta, phi, roll=roll) == pytest.approx(pattern.gain(theta, phi), rel=1e-12)


def test_patterns_parse_from_dicts():
    parsed = PATTERN.validate_python({"kind": "cone", "peak_gain_linear": 10.0, "elevation_width_rad": 0.6})
    assert isinstance(parsed, ConePattern)
    assert parsed.elevation_center_rad == 0.0


@pytest.mark.parametrize(
    "params",
    [
        {"kind": "directional", "peak_gain_linear": 1.0, "beamwidth_3db_rad": 0.2},
        {"kind": "directional", "peak_gain_linear": 10.0, "beamwidth_3db_rad": 0.0},
        {"kind": "directional", "peak_gain_linear": 10.0, "beamwidth_3db_rad": 0.2, "sidelobe_floor_linear": 20.0},
        {"kind": "cone", "peak_gain_linear": 10.0, "elevation_width_rad": -0.1},
        {"kind": "dipole"},
        {"kind": "isotropic", "peak_gain_linear": 2.0},
    ],
)
def test_invalid_patterns_are_rejected(params):
    with pytest.raises(ValidationError):
        PATTERN.validate_python(params)


def test_gain_area_examples():
    f = 2.4e9
    wavelength = SPEED_OF_LIGHT / f
    assert gain_from_area(wavelength**2 / (4 * math.pi), f) == pytest.approx(1.0, rel=1e-12)
    assert gain_from_area(2.0, f) == pytest.approx(2.0 * gain_from_area(1.0, f), rel=1e-12)
    # 4 pi f^2 / c^2 for 1 m^2 at 2.4 GHz
    assert gain_from_area(1.0, f) == pytest.approx(4 * math.pi * f**2 / SPEED_OF_LIGHT**2, rel=1e-12)
    assert gain_from_area(1.0, f) == pytest.approx(805.36, rel=1e-4)


def test_effective_area_examples():
    assert effective_area(1.0, SPEED_OF_LIGHT) == pytest.approx(1.0 / (4 * math.pi), rel=1e-12)
    assert effective_area(2.0, 5.9e9) == pytest.approx(2.0 * effective_area(1.0, 5.9e9), rel=1e-12)


def test_gain_area_round_trip():
    rng = np.random.default_rng(2)
    for area, f in zip(rng.uniform(1e-4, 10.0, 100), rng.uniform(1e8, 1e11, 100)):
        assert effective_area(gain_from_area(area, f), f) == pytest.approx(area, rel=1e-12)
        assert gain_from_area(effective_area(area, f), f) == pytest.approx(area, rel=1e-12)


@pytest.mark.parametrize("args", [(0.0, 2.4e9), (1.0, 0.0), (-1.0, 2.4e9)])
def test_gain_area_rejects_nonpositive_inputs(args):
    with pytest.raises(ValueError):
        gain_from_area(*args)
    with pytest.raises(ValueError):
        effective_area(*args)


def test_pointing_mode_validation():
    assert PointingMode(rotation_rad=-0.5).rotation_rad == pytest.approx(2 * math.pi - 0.5)
    assert PointingMode(rotation_rad=2 * math.pi).rotation_rad == 0.0
    with pytest.raises(ValidationError):
        PointingMode(kind="locked_to_target")
    with pytest.raises(ValidationError):
        PointingMode(kind="fixed_to_object", target="rsu")


def test_fixed_to_object_follows_heading():
    system = AntennaSystem(pattern=BASELINE_DISH, pointing=PointingMode(rotation_rad=0.3))
    boresight = resolve_boresight(system, (Vec3(0.0, 0.0, 0.0), Orientation(yaw=math.pi / 4)))
    assert boresight.yaw == pytest.approx(math.pi / 4)
    assert boresight.pitch == 0.0
    assert boresight.roll == pytest.approx(0.3)


def test_locked_to_target_examples():
    boresight = resolve_boresight(locked(), (Vec3(0.0, 0.0, 0.0), Orientation()), Vec3(0.0, 100.0, 0.0))
    assert (boresight.yaw, boresight.pitch) == pytest.approx((math.pi / 2, 0.0))
    boresight = resolve_boresight(locked(), (Vec3(0.0, 0.0, 0.0), Orientation()), Vec3(100.0, 0.0, 100.0))
    assert (boresight.yaw, boresight.pitch) == pytest.approx((0.0, math.pi / 4))


def test_locked_pointing_sees_target_on_boresight():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        node = Vec3(*rng.uniform(-5000.0, 5000.0, 3))
        target = Vec3(*rng.uniform(-5000.0, 5000.0, 3))
        heading = Orientation(yaw=float(rng.uniform(-math.pi, math.pi)))
        system = locked(rotation=float(rng.uniform(0.0, 2 * math.pi)))
        boresight = resolve_boresight(system, (node, heading), target)
        theta, phi = azimuth_elevation(boresight, node, target)
        assert abs(theta) <= 1e-12
        assert abs(phi) <= 1e-12
        assert gain_toward(system.pattern, boresight, node, target) == pytest.approx(100.0, rel=1e-12)


def test_locked_pointing_errors():
    with pytest.raises(PointingError, match="degenerate pointing"):
        resolve_boresight(locked(), (Vec3(1.0, 1.0, 0.0), Orientation()), Vec3(1.0, 1.0, 0.0))
    with pytest.raises(PointingError):
        resolve_boresight(locked(), (Vec3(1.0, 1.0, 0.0), Orientation()), None)


def test_gain_toward_off_boresight():
    boresight = Orientation(yaw=0.0)
    target = Vec3(100.0 * math.cos(0.1), 100.0 * math.sin(0.1), 0.0)
    assert gain_toward(NARROW, boresight, Vec3(0.0, 0.0, 0.0), target) == pytest.approx(50.0, rel=1e-9)


def test_mean_spherical_gain():
    assert mean_spherical_gain(ISOTROPIC) == pytest.approx(1.0, abs=1e-3)
    assert 0.0 < mean_spherical_gain(BASELINE_DISH) < 100.0
    # Peak chosen so the Gaussian beam radiates the power of an isotropic source.
    normalized = DirectionalPattern(
        kind="directional", peak_gain_linear=16 * math.log(2) / 0.2**2, beamwidth_3db_rad=0.2
    )
    assert mean_spherical_gain(normalized) == pytest.approx(1.0, abs=0.05)
