"""
Lanelet conversion

Samples every allowed lane of every lane section into a lanelet: left and
right bound polylines in driving direction plus successor, predecessor and
adjacency links restricted from the lane graph.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.monitoring.diagnostics import DiagnosticLog
from src.opendrive.geometry import eval_reference_line, lane_borders
from src.opendrive.model import Junction, OpenDriveDocument, OpenDriveRoad
from src.opendrive.topology import LaneGraph, LaneKey, driving_direction, shift_lane

logger = logging.getLogger("osc2cr.opendrive")

DEFAULT_FRAME = "global_cartesian"
MIN_WIDTH = 1e-9


@dataclass(eq=False)
class Lanelet:
    """Drivable lane piece; bounds are (n, 2) arrays ordered in driving direction."""
    lanelet_id: int
    left_bound: np.ndarray
    right_bound: np.ndarray
    successors: List[int] = field(default_factory=list)
    predecessors: List[int] = field(default_factory=list)
    adj_left: Optional[int] = None
    adj_left_same_direction: bool = True
    adj_right: Optional[int] = None
    adj_right_same_direction: bool = True
    lane_key: Optional[LaneKey] = None
    lane_type: str = "driving"

    @property
    def center_line(self) -> np.ndarray:
        return 0.5 * (self.left_bound + self.right_bound)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Lanelet):
            return NotImplemented
        return (
            self.lanelet_id == other.lanelet_id
            and np.array_equal(self.left_bound, other.left_bound)
            and np.array_equal(self.right_bound, other.right_bound)
            and self.successors == other.successors
            and self.predecessors == other.predecessors
            and self.adj_left == other.adj_left
            and self.adj_right == other.adj_right
            and (self.adj_left is None or self.adj_left_same_direction == other.adj_left_same_direction)
            and (self.adj_right is None or self.adj_right_same_direction == other.adj_right_same_direction)
        )


@dataclass(eq=False)
class LaneletNetwork:
    lanelets: Dict[int, Lanelet] = field(default_factory=dict)
    frame: str = DEFAULT_FRAME

    def __len__(self) -> int:
        return len(self.lanelets)

    def __iter__(self) -> Iterator[Lanelet]:
        for lanelet_id in sorted(self.lanelets):
            yield self.lanelets[lanelet_id]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaneletNetwork):
            return NotImplemented
        return self.frame == other.frame and self.lanelets == other.lanelets

    def get(self, lanelet_id: int) -> Optional[Lanelet]:
        return self.lanelets.get(lanelet_id)

    def add(self, lanelet: Lanelet) -> None:
        if lanelet.lanelet_id in self.lanelets:
            raise ValueError(f"duplicate lanelet id {lanelet.lanelet_id}")
        self.lanelets[lanelet.lanelet_id] = lanelet

    def dangling_references(self) -> List[Tuple[int, int]]:
        """(lanelet id, referenced id) pairs that do not resolve."""
        missing = []
        for lanelet in self:
            refs = list(lanelet.successors) + list(lanelet.predecessors)
            refs += [r for r in (lanelet.adj_left, lanelet.adj_right) if r is not None]
            missing.extend((lanelet.lanelet_id, r) for r in refs if r not in self.lanelets)
        return missing


def section_samples(road: OpenDriveRoad, section_index: int, sampling_step: float) -> np.ndarray:
    """Arc-length samples covering a section, both endpoints included."""
    s0, s1 = road.section_bounds(section_index)
    count = max(int(math.ceil((s1 - s0) / sampling_step - 1e-9)), 1) + 1
    return np.linspace(s0, s1, count)


def _neighbor_id(lane_id: int, side: str) -> int:
    """Lane id to the driver's left/right; crossing lane 0 changes direction."""
    toward_left = driving_direction(lane_id)
    return shift_lane(lane_id, toward_left if side == "left" else -toward_left)


def _sample_lane(road: OpenDriveRoad, section_index: int, lane_id: int,
                 s_values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    inner = np.empty((len(s_values), 2))
    outer = np.empty((len(s_values), 2))
    for i, s in enumerate(s_values):
        pose = eval_reference_line(road, float(s))
        t_in, t_out = lane_borders(road, section_index, float(s))[lane_id]
        nx, ny = -math.sin(pose.h), math.cos(pose.h)
        inner[i] = (pose.x + t_in * nx, pose.y + t_in * ny)
        outer[i] = (pose.x + t_out * nx, pose.y + t_out * ny)
    return inner, outer


def _max_width(road: OpenDriveRoad, section_index: int, lane_id: int, s_values: np.ndarray) -> float:
    section = road.lane_sections[section_index]
    lane = section.lane(lane_id)
    return max(abs(lane.width(float(s) - section.s_start)) for s in s_values)


def convert_opendrive_to_lanelets(
    roads: Union[OpenDriveDocument, Sequence[OpenDriveRoad]],
    sampling_step: float = 1.0,
    lane_types: Sequence[str] = ("driving",),
    junctions: Sequence[Junction] = (),
    log: Optional[DiagnosticLog] = None,
    graph: Optional[LaneGraph] = None,
) -> LaneletNetwork:
    """
    Convert parsed roads into a lanelet network.

    Args:
        roads: parsed document or plain road list
        sampling_step: maximum arc-length spacing of bound vertices (m)
        lane_types: lane types turned into lanelets
        junctions: junction records (taken from the document when one is given)
        log: diagnostic collector for dropped links
        graph: prebuilt lane graph

    Returns:
        LaneletNetwork with ids assigned 1..n in road, section, lane order
    """
    if sampling_step <= 0:
        raise ValueError("sampling_step must be positive")
    if isinstance(roads, OpenDriveDocument):
        junctions = roads.junctions
        roads = roads.roads
    log = log or DiagnosticLog(logger)
    graph = graph or LaneGraph.build(roads, junctions, log)

    ids: Dict[LaneKey, int] = {}
    network = LaneletNetwork()
    for road in roads:
        for index, section in enumerate(road.lane_sections):
            s_values = section_samples(road, index, sampling_step)
            for lane in section.lanes:
                if lane.lane_id == 0 or lane.lane_type not in lane_types:
                    continue
                if _max_width(road, index, lane.lane_id, s_values) <= MIN_WIDTH:
                    logger.debug(f"road {road.road_id} lane {lane.lane_id}: zero width, no lanelet")
                    continue
                inner, outer = _sample_lane(road, index, lane.lane_id, s_values)
                if driving_direction(lane.lane_id) < 0:
                    inner, outer = inner[::-1].copy(), outer[::-1].copy()
                key = (road.road_id, index, lane.lane_id)
                ids[key] = len(ids) + 1
                network.add(Lanelet(
                    lanelet_id=ids[key],
                    left_bound=inner,
                    right_bound=outer,
                    lane_key=key,
                    lane_type=lane.lane_type,
                ))

    for key, lanelet_id in ids.items():
        lanelet = network.lanelets[lanelet_id]
        lanelet.successors = sorted(ids[k] for k in graph.successors(key) if k in ids)
        lanelet.predecessors = sorted(ids[k] for k in graph.predecessors(key) if k in ids)
        road_id, index, lane_id = key
        for side in ("left", "right"):
            neighbor = (road_id, index, _neighbor_id(lane_id, side))
            if neighbor in ids:
                same = (neighbor[2] < 0) == (lane_id < 0)
                setattr(lanelet, f"adj_{side}", ids[neighbor])
                setattr(lanelet, f"adj_{side}_same_direction", same)

    logger.info(f"Converted {len(network)} lanelet(s) at {sampling_step} m sampling")
    return network
