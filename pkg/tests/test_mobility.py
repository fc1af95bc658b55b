import math

import numpy as np
from hypothesis import given, strategies as st

from vlcris.geometry import Point3, VerticalCylinder, segment_intersects_cylinder, Segment3
from vlcris.mobility import (
    Blocker,
    WaypointTrack,
    blockage_degree,
    blockage_indicator,
    jitter_offsets,
    position_at,
)
from vlcris.optics import AccessPoint, Receiver

AP = AccessPoint(1, Point3(2.5, 2.5, 3.0))
RX = Receiver(Point3(1.0, 1.0, 0.85))


def track(seed=0, speed=1.0):
    return WaypointTrack(5.0, 5.0, speed, np.random.default_rng(seed))


def test_start_and_arrival():
    tr = track(3, 1.3)
    assert position_at(tr, 0.0) == tr.current_start
    s, e = tr.current_start.as_array(), tr.current_end.as_array()
    t_arr = np.linalg.norm(e - s) / 1.3
    np.testing.assert_allclose(position_at(tr, t_arr).as_array(), e, atol=1e-12)


def test_constant_speed_along_leg():
    tr = track(5, 0.7)
    s, e = tr.current_start.as_array(), tr.current_end.as_array()
    t = 0.4 * np.linalg.norm(e - s) / 0.7
    np.testing.assert_allclose(position_at(tr, t).as_array(), s + 0.4 * (e - s), atol=1e-12)


def test_deterministic_and_order_free():
    a, b = track(11), track(11)
    times = np.linspace(0, 120, 97)
    fwd = [a.xy_at(t) for t in times]
    back = [b.xy_at(t) for t in times[::-1]][::-1]
    np.testing.assert_array_equal(fwd, back)
    np.testing.assert_array_equal(a.xy_at(37.0), a.xy_at(37.0))


def test_positions_stay_in_room():
    tr = track(2, 2.0)
    pts = np.array([tr.xy_at(t) for t in np.linspace(0, 300, 3001)])
    assert pts.min() >= 0 and pts[:, 0].max() <= 5 and pts[:, 1].max() <= 5


def test_speed_must_be_positive():
    import pytest
    with pytest.raises(ValueError):
        track(speed=0.0)


def test_indicator_examples():
    on_path = VerticalCylinder((1.75, 1.75), 0.3, 1.8)
    away = VerticalCylinder((4.5, 0.5), 0.3, 1.8)
    assert blockage_indicator(AP, RX, []) == 1
    assert blockage_indicator(AP, RX, [on_path]) == 0
    assert blockage_indicator(AP, RX, [away, on_path]) == 0
    assert blockage_indicator(AP, RX, [away]) == 1


def test_indicator_is_product_of_per_blocker(rng):
    seg = Segment3(AP.position, RX.position)
    for _ in range(200):
        cyls = [VerticalCylinder(tuple(rng.uniform(0, 5, 2)), 0.3, 1.8) for _ in range(3)]
        per = [0 if segment_intersects_cylinder(seg, c) else 1 for c in cyls]
        assert blockage_indicator(AP, RX, cyls) == math.prod(per)


def test_indicator_with_moving_blockers():
    b = Blocker(track(4), 0.3, 1.8)
    for t in (0.0, 1.0, 5.5):
        assert blockage_indicator(AP, RX, [b], t) == blockage_indicator(AP, RX, [b.cylinder_at(t)])


def test_degree_examples():
    assert blockage_degree(AP, RX, []) == 0.0
    swallow = VerticalCylinder((1.0, 1.0), 0.3, 1.8)  # PD inside the body
    assert blockage_degree(AP, RX, [swallow]) == 1.0
    for c in [(1.75, 1.75), (1.2, 1.3), (3.0, 3.0)]:
        cyl = VerticalCylinder(c, 0.3, 1.8)
        assert blockage_degree(AP, RX, [cyl], samples=1) == 1 - blockage_indicator(AP, RX, [cyl])


def test_partial_degree_at_body_edge():
    # a blocker whose surface cuts through the sample disc blocks only some rays
    d = np.array([2.5 - 1.0, 2.5 - 1.0]) / np.hypot(1.5, 1.5)
    normal = np.array([-d[1], d[0]])
    centre = np.array([1.0, 1.0]) + 0.3 * d + (0.3 + 0.02) * normal
    xi = blockage_degree(AP, RX, [VerticalCylinder(tuple(centre), 0.3, 1.8)])
    assert 0.0 < xi < 1.0


def test_jitter_points_in_disc():
    off = jitter_offsets(16, 0.05)
    assert off.shape == (16, 3)
    assert np.all(off[0] == 0)
    assert np.all(np.hypot(off[:, 0], off[:, 1]) <= 0.05 + 1e-15)
    assert np.all(off[:, 2] == 0)
    assert len({tuple(np.round(p, 12)) for p in off}) == 16


@given(st.lists(st.tuples(st.floats(0, 5), st.floats(0, 5)), max_size=5),
       st.floats(0.2, 4.8), st.floats(0.2, 4.8), st.integers(1, 32))
def test_degree_range_and_extremes(centres, x, y, k):
    rx = Receiver(Point3(x, y, 0.85))
    cyls = [VerticalCylinder(c, 0.3, 1.8) for c in centres]
    xi = blockage_degree(AP, rx, cyls, samples=k)
    assert 0.0 <= xi <= 1.0
    assert xi * k == round(xi * k)
