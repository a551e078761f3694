import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unitaryband.arcs import TWO_PI, ArcSet, circle_gap, directed_distance, hausdorff_points


def test_merge_and_wrap():
    s = ArcSet.from_intervals([(6.0, 6.2), (0.5, 0.8), (0.7, 1.0)])
    assert len(s.arcs) == 2
    assert s.arcs[0] == pytest.approx((0.5, 1.0))
    assert s.arcs[1] == pytest.approx((6.0, 6.2))
    assert s.contains([6.1, 0.9]).all()
    assert not s.contains([3.0])[0]
    assert s.measure == pytest.approx(0.7)


def test_wrap_swallows_first_arc():
    s = ArcSet.from_intervals([(0.1, 0.3), (6.0, TWO_PI + 0.2)])
    assert len(s.arcs) == 1 and s.arcs[0][1] == pytest.approx(TWO_PI + 0.3)


def test_full_circle():
    assert ArcSet.from_intervals([(1.0, 1.0 + TWO_PI)]).full_circle
    assert ArcSet.full().measure == pytest.approx(TWO_PI)


def test_points_inside_arcs_are_dropped():
    s = ArcSet.from_intervals([(1.0, 2.0)], points=[1.5, 3.0])
    assert s.points == (3.0,)


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_circle_gap_bounds(a, b):
    g = circle_gap(a, b)
    assert 0 <= g <= np.pi + 1e-12
    assert g == pytest.approx(circle_gap(b, a), abs=1e-12)


def test_distances():
    pts = np.array([0.1, 3.0])
    assert directed_distance([TWO_PI - 0.1], pts)[0] == pytest.approx(0.2)
    assert hausdorff_points([0.0], [0.5]) == pytest.approx(0.5)
    s = ArcSet.from_intervals([(1.0, 2.0)])
    assert s.distance([0.5, 1.5, 2.25]) == pytest.approx([0.5, 0.0, 0.25])
    assert s.hausdorff([1.0, 2.0], step=1e-4) == pytest.approx(0.5, abs=1e-4)


def test_rotation_and_endpoints():
    s = ArcSet.from_intervals([(1.0, 2.0), (4.0, 5.0)])
    r = s.rotated(-1.5)
    assert r.endpoint_distance(ArcSet.from_intervals([(-0.5, 0.5), (2.5, 3.5)])) < 1e-14
    assert s.endpoint_distance(ArcSet.from_intervals([(1.0, 2.0)])) == np.inf


def test_json_round_trip(tmp_path):
    s = ArcSet.from_intervals([(1.0, 2.0)], points=[4.0])
    text = s.to_json(tmp_path / "a.json")
    doc = json.loads(text)
    assert doc["full_circle"] is False and doc["degenerate_points"] == [4.0]
    assert ArcSet.from_dict(doc) == s
