"""
Road map queries

``OpenDriveMap`` bundles the parsed roads, the lane graph and the lanelet
network, and answers the lane-level questions the simulator asks: where a
lane position lies in the world, how a position advances along a lane
through section and road boundaries, and which lane a world pose sits on.
"""

import logging
import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import OutOfRange, UnknownLane, UnknownRoad
from src.monitoring.diagnostics import Diagnostic, DiagnosticLog
from src.opendrive.geometry import (
    Pose,
    eval_reference_line,
    lane_borders,
    normalize_angle,
    offset_point,
    reference_curvature,
)
from src.opendrive.lanelets import LaneletNetwork, convert_opendrive_to_lanelets, section_samples
from src.opendrive.model import OpenDriveDocument, OpenDriveRoad
from src.opendrive.parser import parse_opendrive
from src.opendrive.topology import LaneGraph, LaneKey, driving_direction

logger = logging.getLogger("osc2cr.opendrive")

S_TOLERANCE = 1e-9


class LaneCursor(NamedTuple):
    """Lane position reached by ``advance``."""
    road_id: str
    lane_id: int
    s: float
    direction: int = 1
    dead_end: bool = False


class OpenDriveMap:
    """Parsed roads plus lane graph and lanelet network."""

    def __init__(self, document: OpenDriveDocument, sampling_step: float = 1.0,
                 lane_types: Sequence[str] = ("driving",), source: Optional[str] = None):
        self.document = document
        self.source = source
        self.sampling_step = sampling_step
        self.lane_types = tuple(lane_types)
        self._roads: Dict[str, OpenDriveRoad] = {road.road_id: road for road in document.roads}

        log = DiagnosticLog(logger, source)
        log.extend(document.diagnostics)
        self.graph = LaneGraph.build(document.roads, document.junctions, log)
        self.network: LaneletNetwork = convert_opendrive_to_lanelets(
            document.roads, sampling_step, self.lane_types, document.junctions, log, self.graph,
        )
        self.diagnostics: List[Diagnostic] = log.entries
        self.lanelet_ids: Dict[LaneKey, int] = {
            lanelet.lane_key: lanelet.lanelet_id for lanelet in self.network
        }
        self._centers: Optional[Tuple[np.ndarray, np.ndarray, List[Tuple[LaneKey, float]]]] = None

    @classmethod
    def from_xml(cls, xml_text: Union[str, bytes], source: Optional[str] = None,
                 sampling_step: float = 1.0, lane_types: Sequence[str] = ("driving",)) -> "OpenDriveMap":
        return cls(parse_opendrive(xml_text, source), sampling_step, lane_types, source)

    @property
    def roads(self) -> List[OpenDriveRoad]:
        return self.document.roads

    def road(self, road_id: str) -> OpenDriveRoad:
        road = self._roads.get(str(road_id))
        if road is None:
            raise UnknownRoad(f"road '{road_id}' does not exist", source=self.source)
        return road

    def _check_s(self, road: OpenDriveRoad, s: float) -> None:
        if s < -S_TOLERANCE or s > road.length + S_TOLERANCE:
            raise OutOfRange(f"s={s} outside road {road.road_id} [0, {road.length}]", source=self.source)

    def lane_key(self, road_id: str, lane_id: int, s: float) -> LaneKey:
        road = self.road(road_id)
        self._check_s(road, s)
        index = road.section_index(s)
        if (lane_id != 0 and index > 0 and road.lane_sections[index].lane(lane_id) is None
                and abs(road.lane_sections[index].s_start - s) <= S_TOLERANCE):
            # exactly on a section boundary: the lane may only exist in the earlier section
            index -= 1
        if lane_id != 0 and road.lane_sections[index].lane(lane_id) is None:
            raise UnknownLane(f"lane {lane_id} does not exist on road {road_id} at s={s}", source=self.source)
        return road.road_id, index, lane_id

    def lane_exists(self, road_id: str, lane_id: int, s: float) -> bool:
        try:
            self.lane_key(road_id, lane_id, s)
        except (UnknownRoad, UnknownLane, OutOfRange):
            return False
        return True

    def lane_center_t(self, road_id: str, lane_id: int, s: float) -> float:
        """Lateral offset of the lane centre from the reference line."""
        _, index, _ = self.lane_key(road_id, lane_id, s)
        inner, outer = lane_borders(self.road(road_id), index, s)[lane_id]
        return 0.5 * (inner + outer)

    def lane_width(self, road_id: str, lane_id: int, s: float) -> float:
        _, index, _ = self.lane_key(road_id, lane_id, s)
        inner, outer = lane_borders(self.road(road_id), index, s)[lane_id]
        return abs(outer - inner)

    def lane_heading(self, road_id: str, lane_id: int, s: float) -> float:
        pose = eval_reference_line(self.road(road_id), s)
        if driving_direction(lane_id) < 0:
            return normalize_angle(pose.h + math.pi)
        return normalize_angle(pose.h)

    def curvature(self, road_id: str, s: float) -> float:
        return reference_curvature(self.road(road_id), s)

    def world_point(self, road_id: str, s: float, t: float) -> Pose:
        """Reference-line pose at s shifted by t along the left normal."""
        road = self.road(road_id)
        self._check_s(road, s)
        pose = eval_reference_line(road, s)
        x, y = offset_point(pose, t)
        return Pose(x, y, pose.h)

    def locate(self, road_id: str, lane_id: int, s: float, t_offset: float = 0.0) -> Pose:
        """
        World pose of a lane position.

        Args:
            road_id: road identifier
            lane_id: lane id (0 is the reference line)
            s: arc length along the reference line
            t_offset: lateral offset from the lane centre, along the road's left normal

        Returns:
            Pose with heading along the lane's driving direction
        """
        t = self.lane_center_t(road_id, lane_id, s) + t_offset
        pose = self.world_point(road_id, s, t)
        return Pose(pose.x, pose.y, self.lane_heading(road_id, lane_id, s))

    def travel_heading(self, road_id: str, s: float, direction: int) -> float:
        """Heading of motion along a road in the given s direction."""
        pose = eval_reference_line(self.road(road_id), s)
        return normalize_angle(pose.h if direction > 0 else pose.h + math.pi)

    def lane_pose(self, road_id: str, lane_id: int, s: float, t: float, direction: int) -> Pose:
        """
        Pose of an entity travelling along a lane.

        Args:
            t: lateral offset from the lane centre, left of the direction of travel
            direction: +1 when travelling towards increasing s, -1 otherwise
        """
        t_road = self.road_offset(road_id, lane_id, s, t, direction)
        point = self.world_point(road_id, s, t_road)
        return Pose(point.x, point.y, self.travel_heading(road_id, s, direction))

    def lane_at(self, road_id: str, s: float, t: float) -> Optional[int]:
        """Lane whose borders contain the reference-line offset t, or None."""
        road = self.road(road_id)
        self._check_s(road, s)
        index = road.section_index(s)
        for lane_id, (inner, outer) in sorted(lane_borders(road, index, s).items()):
            if lane_id != 0 and min(inner, outer) - S_TOLERANCE <= t <= max(inner, outer) + S_TOLERANCE:
                return lane_id
        return None

    def road_offset(self, road_id: str, lane_id: int, s: float, t: float, direction: int) -> float:
        """Reference-line offset of a point `t` left of travel direction from a lane centre."""
        return self.lane_center_t(road_id, lane_id, s) + direction * t

    def next_lane(self, key: LaneKey, direction: int) -> Optional[Tuple[LaneKey, int]]:
        """
        Lane reached when leaving `key` in travel direction `direction`, with the
        new travel direction. Lanes whose traffic flows the same way are
        preferred; among them the smallest heading change wins, ties broken by
        the lowest lanelet id.
        """
        exit_side = "end" if direction > 0 else "start"
        road_id = key[0]
        s0, s1 = self.road(road_id).section_bounds(key[1])
        heading = self.travel_heading(road_id, s1 if direction > 0 else s0, direction)

        candidates = []
        for other, own_end, other_end in self.graph.joins(key):
            if own_end != exit_side:
                continue
            new_direction = 1 if other_end == "start" else -1
            o0, o1 = self.road(other[0]).section_bounds(other[1])
            entry_h = self.travel_heading(other[0], o0 if new_direction > 0 else o1, new_direction)
            with_traffic = new_direction == driving_direction(other[2])
            candidates.append((
                (with_traffic != (direction == driving_direction(key[2])),
                 round(abs(normalize_angle(entry_h - heading)), 9),
                 self.lanelet_ids.get(other, math.inf),
                 other),
                other,
                new_direction,
            ))
        if not candidates:
            return None
        _, other, new_direction = min(candidates)
        return other, new_direction

    def advance(self, road_id: str, lane_id: int, s: float, distance: float,
                direction: Optional[int] = None) -> LaneCursor:
        """
        Move a lane position `distance` metres of reference-line arc length,
        continuing into joined lanes at section and road boundaries. Stops at
        dead ends.

        Args:
            direction: travel direction along s; defaults to the lane's driving direction
        """
        key = self.lane_key(road_id, lane_id, s)
        direction = direction or driving_direction(lane_id)
        remaining = max(distance, 0.0)
        while True:
            s0, s1 = self.road(key[0]).section_bounds(key[1])
            room = (s1 - s) if direction > 0 else (s - s0)
            if remaining <= room + S_TOLERANCE:
                s = min(max(s + direction * remaining, s0), s1)
                return LaneCursor(key[0], key[2], s, direction)
            remaining -= max(room, 0.0)
            following = self.next_lane(key, direction)
            if following is None:
                return LaneCursor(key[0], key[2], s1 if direction > 0 else s0, direction, dead_end=True)
            key, direction = following
            o0, o1 = self.road(key[0]).section_bounds(key[1])
            s = o0 if direction > 0 else o1

    def _center_index(self) -> Tuple[np.ndarray, np.ndarray, List[Tuple[LaneKey, float]]]:
        if self._centers is None:
            points, headings, refs = [], [], []
            for lanelet in self.network:
                road_id, index, lane_id = lanelet.lane_key
                road = self.road(road_id)
                for s in section_samples(road, index, self.sampling_step):
                    pose = self.locate(road_id, lane_id, float(s))
                    points.append((pose.x, pose.y))
                    headings.append(pose.h)
                    refs.append((lanelet.lane_key, float(s)))
            self._centers = (np.asarray(points).reshape(-1, 2), np.asarray(headings), refs)
        return self._centers

    def project(self, x: float, y: float, h: Optional[float] = None) -> Optional[Tuple[str, int, float, float]]:
        """
        Nearest lane position of a world pose.

        Returns:
            (road_id, lane_id, s, t) with t the lateral offset from the lane centre
            in driving direction (left positive), or None for an empty network
        """
        points, headings, refs = self._center_index()
        if len(points) == 0:
            return None
        dist = np.hypot(points[:, 0] - x, points[:, 1] - y)
        if h is not None:
            misaligned = np.abs(np.angle(np.exp(1j * (headings - h)))) > math.pi / 2
            if not misaligned.all():
                dist = np.where(misaligned, np.inf, dist)
        (road_id, index, lane_id), s_near = refs[int(np.argmin(dist))]

        road = self.road(road_id)
        s0, s1 = road.section_bounds(index)
        pose = eval_reference_line(road, s_near)
        # first-order correction along the reference tangent
        s = s_near + (x - pose.x) * math.cos(pose.h) + (y - pose.y) * math.sin(pose.h)
        s = min(max(s, s0), s1)
        ref = eval_reference_line(road, s)
        t_road = -(x - ref.x) * math.sin(ref.h) + (y - ref.y) * math.cos(ref.h)
        t = driving_direction(lane_id) * (t_road - self.lane_center_t(road_id, lane_id, s))
        return road_id, lane_id, s, t
