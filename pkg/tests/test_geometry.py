import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from insarfopt.geometry import (
    Formation,
    baseline,
    coverage,
    footprint,
    look_angle_master,
    master_x_for,
    perpendicular_baseline,
    projection_point,
    signed_overlap,
    sin_look_angle_slave,
    slant_ranges,
    swath,
)
from insarfopt.scenario import with_overrides

T30, T60 = math.tan(math.radians(30)), math.tan(math.radians(60))
coord = st.floats(-200.0, 200.0)
alt = st.floats(0.5, 200.0)


def test_formation_validation():
    with pytest.raises(ValueError):
        Formation((0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        Formation((0.0, 1.0), (math.nan, 1.0))
    f = Formation((1, 2), (3, 4))
    assert (f.x1, f.z1, f.x2, f.z2) == (1.0, 2.0, 3.0, 4.0)
    assert f.to_dict() == {"q1": [1.0, 2.0], "q2": [3.0, 4.0]}


@pytest.mark.parametrize("q1,q2,expected", [
    ((1.0, 1.0), (1.0, 1.0), 0.0),
    ((0.0, 1.0), (3.0, 5.0), 5.0),
    ((-80.0, 100.0), (-80.0, 90.0), 10.0),
])
def test_baseline(q1, q2, expected):
    f = Formation(q1, q2)
    assert baseline(f) == pytest.approx(expected)
    assert baseline(f.swapped()) == baseline(f)


def test_footprint_examples(ref):
    fp = footprint((-80.0, 100.0), ref.radar)
    assert (fp.near, fp.far) == pytest.approx((-80 + 100 * T30, -80 + 100 * T60))
    assert (fp.near, fp.far) == pytest.approx((-22.265, 93.205), abs=1e-3)
    fp = footprint((0.0, 1.0), ref.radar)
    assert (fp.near, fp.far) == pytest.approx((0.57735, 1.73205), abs=1e-5)


@given(coord, alt)
def test_footprint_width_linear_in_z(x, z):
    from insarfopt.scenario import reference_scenario
    r = reference_scenario().radar
    fp = footprint((x, z), r)
    assert fp.near <= fp.far
    assert fp.width == pytest.approx(z * (T60 - T30), rel=1e-9, abs=1e-9)


def test_swath_examples(ref):
    r = ref.radar
    assert swath(Formation((0.0, 100.0), (0.0, 100.0)), r) == pytest.approx(100 * (T60 - T30))
    assert swath(Formation((0.0, 100.0), (0.0, 100.0)), r) == pytest.approx(115.470, abs=1e-3)
    assert swath(Formation((-80.0, 100.0), (100.0, 1.0)), r) == 0.0
    # interval-intersection oracle written out by hand
    n1, f1 = -80 + 100 * T30, -80 + 100 * T60
    n2, f2 = -30 + 50 * T30, -30 + 50 * T60
    expected = min(f1, f2) - max(n1, n2)
    assert swath(Formation((-80.0, 100.0), (-30.0, 50.0)), r) == pytest.approx(expected)
    assert expected == pytest.approx(57.735, abs=1e-3)


@given(coord, alt, coord, alt)
def test_swath_symmetric_and_nonnegative(x1, z1, x2, z2):
    from insarfopt.scenario import reference_scenario
    r = reference_scenario().radar
    f = Formation((x1, z1), (x2, z2))
    assert swath(f, r) >= 0.0
    assert swath(f, r) == swath(f.swapped(), r)


def test_coverage_examples(ref):
    f = Formation((0.0, 100.0), (0.0, 100.0))
    total = sum(swath(f, ref.radar) * 2.0 * 0.5 for _ in range(100))
    assert coverage(f, ref.mission, ref.radar) == pytest.approx(total, rel=1e-12)
    assert coverage(f, ref.mission, ref.radar) == pytest.approx(11547.0, abs=0.1)
    assert coverage(Formation((-80.0, 100.0), (100.0, 1.0)), ref.mission, ref.radar) == 0.0
    half = with_overrides(ref, {"mission.delta_t": 0.25})
    assert coverage(f, half.mission, half.radar) == pytest.approx(coverage(f, ref.mission, ref.radar) / 2)


def test_slant_ranges():
    r1, r2 = slant_ranges(Formation((-80.0, 100.0), (20.0, 50.0)), 20.0)
    assert r1 == pytest.approx(141.421, abs=1e-3)
    assert r2 == 50.0
    _, r2 = slant_ranges(Formation((-80.0, 100.0), (10.0, 4.0)), 20.0)
    assert r2 == pytest.approx(math.sqrt(116), rel=1e-12)


def test_master_x_for():
    assert master_x_for(100.0, 20.0, math.pi / 4) == pytest.approx(-80.0)
    assert master_x_for(50.0, 20.0, math.pi / 4) == pytest.approx(-30.0)
    assert master_x_for(1e-12, 20.0, math.pi / 4) == pytest.approx(20.0)


def test_master_beam_centred(ref):
    x1 = master_x_for(70.0, 20.0, ref.radar.theta_d)
    assert (20.0 - x1) / 70.0 == pytest.approx(math.tan(ref.radar.theta_d))


def test_look_angles():
    assert look_angle_master(math.pi / 4) == math.pi / 4
    assert look_angle_master(math.pi / 6) == math.pi / 6
    assert sin_look_angle_slave((20.0, 50.0), 20.0) == 0.0
    assert sin_look_angle_slave((20.0 - 30.0, 30.0), 20.0) == pytest.approx(1 / math.sqrt(2))
    assert sin_look_angle_slave((10.0, 4.0), 20.0) == pytest.approx(10 / math.sqrt(116))
    assert sin_look_angle_slave((10.0, 4.0), 20.0) == pytest.approx(0.9285, abs=1e-4)


def test_perpendicular_baseline_examples():
    th = math.pi / 4
    assert perpendicular_baseline((20.0 - 37.0, 37.0), 20.0, th) == pytest.approx(0.0, abs=1e-12)
    assert perpendicular_baseline((10.0, 4.0), 20.0, th) == pytest.approx(6 / math.sqrt(2))
    assert perpendicular_baseline((10.0, 4.0), 20.0, th) == pytest.approx(4.243, abs=1e-3)
    assert perpendicular_baseline((-80.0, 90.0), 20.0, th) == pytest.approx(7.071, abs=1e-3)


def test_projection_point_examples():
    th = math.pi / 4
    xp, zp = projection_point((10.0, 4.0), 20.0, th)
    assert (xp, zp) == pytest.approx((13.0, 7.0))
    # on the line of sight x_t - x = tan(theta) z
    assert 20.0 - xp == pytest.approx(zp)
    q = (20.0 - 25.0, 25.0)
    assert projection_point(q, 20.0, th) == pytest.approx(q)


@given(coord, alt, st.floats(0.1, 1.4))
def test_projection_perpendicular(x2, z2, theta):
    x_t = 20.0
    xp, zp = projection_point((x2, z2), x_t, theta)
    t = math.tan(theta)
    scale = 1.0 + abs(x2) + z2
    assert (x_t - xp) - t * zp == pytest.approx(0.0, abs=1e-10 * scale)
    direction = (-math.sin(theta), math.cos(theta))
    dot = (xp - x2) * direction[0] + (zp - z2) * direction[1]
    assert dot == pytest.approx(0.0, abs=1e-10 * scale)


@given(coord, alt, st.floats(1.0, 150.0), alt)
def test_bperp_not_above_baseline(x2, z2, z1, _):
    x_t, th = 20.0, math.pi / 4
    f = Formation((master_x_for(z1, x_t, th), z1), (x2, z2))
    assert perpendicular_baseline(f.q2, x_t, th) <= baseline(f) + 1e-9


def test_signed_overlap_vectorized(ref):
    z = np.array([50.0, 100.0])
    out = signed_overlap(-30.0, z, -30.0, z, ref.radar)
    np.testing.assert_allclose(out, z * (T60 - T30))
