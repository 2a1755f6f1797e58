import math
import random

import numpy as np
import pytest

from src.errors import MalformedXml, OutOfRange, UnknownLane, UnsupportedFeature, UnsupportedGeometry
from src.opendrive.geometry import (
    clothoid_rk4,
    eval_reference_line,
    eval_segment,
    lane_borders,
    normalize_angle,
    segment_curvature,
)
from src.opendrive.lanelets import convert_opendrive_to_lanelets
from src.opendrive.model import GeometrySegment
from src.opendrive.parser import parse_opendrive
from src.opendrive.road_map import OpenDriveMap
from src.opendrive.topology import driving_direction, shift_lane


# ---------------------------------------------------------------- geometry

@pytest.mark.parametrize("heading", [0.0, 0.3, -2.0, math.pi])
@pytest.mark.parametrize("ds", [0.0, 1.0, 37.5])
def test_line_closed_form(heading, ds):
    seg = GeometrySegment(s_offset=0.0, x=1.0, y=2.0, heading=heading, length=50.0, kind="line")
    pose = eval_segment(seg, ds)
    assert pose.x == pytest.approx(1.0 + ds * math.cos(heading), abs=1e-9)
    assert pose.y == pytest.approx(2.0 + ds * math.sin(heading), abs=1e-9)
    assert pose.h == pytest.approx(heading, abs=1e-9)


@pytest.mark.parametrize("curvature", [0.02, -0.05, 0.5])
def test_arc_stays_on_its_circle(curvature):
    seg = GeometrySegment(s_offset=0.0, x=3.0, y=-4.0, heading=0.7, length=20.0, kind="arc", curvature=curvature)
    cx = seg.x - math.sin(seg.heading) / curvature
    cy = seg.y + math.cos(seg.heading) / curvature
    for ds in np.linspace(0.0, seg.length, 9):
        pose = eval_segment(seg, float(ds))
        assert math.hypot(pose.x - cx, pose.y - cy) == pytest.approx(1.0 / abs(curvature), abs=1e-9)
        assert pose.h == pytest.approx(seg.heading + curvature * ds, abs=1e-9)
    assert segment_curvature(seg, 5.0) == curvature


def test_spiral_matches_rk4_reference():
    rng = random.Random(20240501)
    for _ in range(100):
        h0 = rng.uniform(-math.pi, math.pi)
        k0 = rng.uniform(-0.05, 0.05)
        k1 = rng.uniform(-0.05, 0.05)
        length = rng.uniform(5.0, 120.0)
        seg = GeometrySegment(s_offset=0.0, x=0.0, y=0.0, heading=h0, length=length, kind="spiral",
                              curv_start=k0, curv_end=k1)
        pose = eval_segment(seg, length)
        dx, dy = clothoid_rk4(h0, k0, (k1 - k0) / length, length)
        assert pose.x == pytest.approx(dx, abs=1e-6)
        assert pose.y == pytest.approx(dy, abs=1e-6)
        assert pose.h == pytest.approx(h0 + 0.5 * (k0 + k1) * length, abs=1e-9)


def test_spiral_with_constant_curvature_is_an_arc():
    spiral = GeometrySegment(s_offset=0.0, x=0.0, y=0.0, heading=0.2, length=30.0, kind="spiral",
                             curv_start=0.04, curv_end=0.04)
    arc = GeometrySegment(s_offset=0.0, x=0.0, y=0.0, heading=0.2, length=30.0, kind="arc", curvature=0.04)
    assert eval_segment(spiral, 17.0) == pytest.approx(eval_segment(arc, 17.0), abs=1e-12)


def test_poly3_and_param_poly3_lines():
    flat = GeometrySegment(s_offset=0.0, x=5.0, y=1.0, heading=0.5, length=40.0, kind="poly3",
                           poly=(0.0, 0.0, 0.0, 0.0))
    param = GeometrySegment(s_offset=0.0, x=5.0, y=1.0, heading=0.5, length=40.0, kind="paramPoly3",
                            poly=(0.0, 40.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), p_range="normalized")
    for ds in (0.0, 12.5, 40.0):
        expected = (5.0 + ds * math.cos(0.5), 1.0 + ds * math.sin(0.5))
        assert eval_segment(flat, ds)[:2] == pytest.approx(expected, abs=1e-9)
        assert eval_segment(param, ds)[:2] == pytest.approx(expected, abs=1e-9)


def test_poly3_follows_arc_length():
    seg = GeometrySegment(s_offset=0.0, x=0.0, y=0.0, heading=0.0, length=30.0, kind="poly3",
                          poly=(0.0, 0.0, 0.01, 0.0))
    samples = [eval_segment(seg, float(ds)) for ds in np.linspace(0.0, 30.0, 3001)]
    chord = sum(math.hypot(b.x - a.x, b.y - a.y) for a, b in zip(samples, samples[1:]))
    assert chord == pytest.approx(30.0, abs=1e-4)


def test_curved_road_primitives_join_up(curved_map):
    road = curved_map.road("1")
    for seg, following in zip(road.geometry, road.geometry[1:]):
        end = eval_segment(seg, seg.length)
        assert end.x == pytest.approx(following.x, abs=1e-5)
        assert end.y == pytest.approx(following.y, abs=1e-5)
        assert normalize_angle(end.h - following.heading) == pytest.approx(0.0, abs=1e-9)


def test_reference_line_outside_road_raises(straight_map):
    with pytest.raises(OutOfRange):
        eval_reference_line(straight_map.road("1"), 600.5)


@pytest.mark.parametrize("angle, expected", [(3 * math.pi, math.pi), (-math.pi, math.pi), (0.5, 0.5),
                                             (-7.0, -7.0 + 2 * math.pi)])
def test_normalize_angle(angle, expected):
    assert normalize_angle(angle) == pytest.approx(expected, abs=1e-12)


def test_lane_borders_stack_outwards(straight_map):
    borders = lane_borders(straight_map.road("1"), 0, 50.0)
    assert borders[1] == pytest.approx((0.0, 3.5))
    assert borders[-1] == pytest.approx((0.0, -3.5))
    assert borders[-2] == pytest.approx((-3.5, -7.0))
    assert borders[-3] == pytest.approx((-7.0, -9.0))


# ---------------------------------------------------------------- parser

def test_unknown_primitive_is_rejected(osc):
    text = osc.xodr('<geometry s="0" x="0" y="0" hdg="0" length="10"><clothoid/></geometry>', 10.0)
    with pytest.raises(UnsupportedGeometry) as info:
        parse_opendrive(text, "bad.xodr")
    assert info.value.kind == "clothoid"
    assert info.value.line is not None


def test_border_records_are_rejected(osc):
    text = osc.straight_xodr(100.0).replace(
        '<width sOffset="0" a="3.5" b="0" c="0" d="0"/></lane></left>',
        '<border sOffset="0" a="3.5" b="0" c="0" d="0"/></lane></left>')
    with pytest.raises(UnsupportedFeature):
        parse_opendrive(text)


@pytest.mark.parametrize("text", ["<OpenDRIVE><road", "<OpenSCENARIO/>"])
def test_malformed_documents(text):
    with pytest.raises(MalformedXml):
        parse_opendrive(text, "broken.xodr")


@pytest.mark.parametrize("lane_id", ["1.7", "one", "inf"])
def test_non_integral_lane_id_is_rejected(osc, lane_id):
    text = osc.straight_xodr(100.0, left=(lane_id,))
    with pytest.raises(MalformedXml) as info:
        parse_opendrive(text, "bad.xodr")
    assert lane_id in info.value.message
    assert info.value.line is not None


def test_flat_world_elements_are_reported(curved_map):
    codes = [d.code for d in curved_map.diagnostics]
    assert "ignored_element" in codes


def test_missing_linked_road_is_a_warning(osc):
    text = osc.straight_xodr(100.0, extra_road="").replace(
        "<planView>", '<link><successor elementType="road" elementId="99" contactPoint="start"/></link><planView>')
    road_map = OpenDriveMap.from_xml(text, "dangling.xodr")
    assert [d.code for d in road_map.diagnostics if d.level == "warning"] == ["dangling_link"]
    assert road_map.network.dangling_references() == []


# ---------------------------------------------------------------- topology

@pytest.mark.parametrize("lane_id, steps, expected", [
    (-1, 1, 1),
    (1, -1, -1),
    (-2, 1, -1),
    (-1, -1, -2),
    (2, -3, -2),
    (3, 0, 3),
])
def test_shift_lane_skips_the_reference_line(lane_id, steps, expected):
    assert shift_lane(lane_id, steps) == expected


def test_driving_direction_is_right_hand():
    assert driving_direction(-1) == 1
    assert driving_direction(2) == -1


# ---------------------------------------------------------------- lanelets

def test_straight_road_lanelets(straight_map):
    network = straight_map.network
    assert [l.lanelet_id for l in network] == [1, 2, 3]
    assert [l.lane_key for l in network] == [("1", 0, 1), ("1", 0, -1), ("1", 0, -2)]

    left_lane, right_lane, outer_lane = network
    assert len(right_lane.left_bound) == 601
    assert right_lane.left_bound[0] == pytest.approx([0.0, 0.0])
    assert right_lane.right_bound[-1] == pytest.approx([600.0, -3.5])
    # positive lanes run against s
    assert left_lane.left_bound[0] == pytest.approx([600.0, 0.0])
    assert left_lane.right_bound[-1] == pytest.approx([0.0, 3.5])

    assert (right_lane.adj_left, right_lane.adj_left_same_direction) == (1, False)
    assert (right_lane.adj_right, right_lane.adj_right_same_direction) == (3, True)
    assert (outer_lane.adj_left, outer_lane.adj_right) == (2, None)
    assert (left_lane.adj_left, left_lane.adj_right) == (2, None)
    assert network.dangling_references() == []


def test_lane_types_select_lanelets(straight_map):
    network = convert_opendrive_to_lanelets(straight_map.document, 5.0, ("driving", "sidewalk"))
    assert len(network) == 4
    sidewalk = network.get(4)
    assert sidewalk.lane_type == "sidewalk"
    assert len(sidewalk.left_bound) == 121
    assert sidewalk.right_bound[0] == pytest.approx([0.0, -9.0])


def test_section_boundaries_link_lanelets(curved_map):
    network = curved_map.network
    assert len(network) == 6
    ids = curved_map.lanelet_ids
    assert network.get(ids[("1", 0, -1)]).successors == [ids[("1", 1, -1)]]
    assert network.get(ids[("1", 1, -1)]).predecessors == [ids[("1", 0, -1)]]
    # lane 1 drives against s, so its successor is the earlier section
    assert network.get(ids[("1", 1, 1)]).successors == [ids[("1", 0, 1)]]


def test_lanelet_bounds_keep_lane_width(curved_map):
    for lanelet in curved_map.network:
        widths = np.hypot(*(lanelet.left_bound - lanelet.right_bound).T)
        assert widths == pytest.approx(np.full(len(widths), 3.5), abs=1e-6)


# ---------------------------------------------------------------- map queries

def test_locate_lane_positions(straight_map):
    assert straight_map.locate("1", -1, 100.0) == pytest.approx((100.0, -1.75, 0.0))
    assert straight_map.locate("1", -2, 10.0, 0.5) == pytest.approx((10.0, -4.75, 0.0))
    pose = straight_map.locate("1", 1, 100.0)
    assert pose[:2] == pytest.approx((100.0, 1.75))
    assert abs(pose.h) == pytest.approx(math.pi)


def test_missing_lane_is_reported(straight_map):
    assert not straight_map.lane_exists("1", 2, 10.0)
    with pytest.raises(UnknownLane):
        straight_map.lane_center_t("1", 2, 10.0)


def test_advance_along_lane(straight_map):
    cursor = straight_map.advance("1", -1, 590.0, 5.0)
    assert (cursor.lane_id, cursor.s, cursor.dead_end) == (-1, pytest.approx(595.0), False)
    backwards = straight_map.advance("1", 1, 10.0, 4.0)
    assert (backwards.s, backwards.direction) == (pytest.approx(6.0), -1)


def test_advance_stops_at_dead_end(straight_map):
    cursor = straight_map.advance("1", -1, 598.0, 5.0)
    assert cursor.dead_end
    assert cursor.s == pytest.approx(600.0)


def test_advance_crosses_lane_sections(curved_map):
    cursor = curved_map.advance("1", -1, 125.0, 10.0)
    assert (cursor.road_id, cursor.lane_id, cursor.dead_end) == ("1", -1, False)
    assert cursor.s == pytest.approx(135.0)


def test_project_returns_lane_offset(straight_map):
    road_id, lane_id, s, t = straight_map.project(100.2, -1.0, 0.0)
    assert (road_id, lane_id) == ("1", -1)
    assert s == pytest.approx(100.2)
    assert t == pytest.approx(0.75)


def test_lane_at(straight_map):
    assert straight_map.lane_at("1", 50.0, -8.0) == -3
    assert straight_map.lane_at("1", 50.0, 2.0) == 1
    assert straight_map.lane_at("1", 50.0, -20.0) is None
