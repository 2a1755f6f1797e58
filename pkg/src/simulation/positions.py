"""
Position resolution

Turns OpenSCENARIO positions into world poses plus, where the pose lies on a
lane, the lane bookkeeping the lane-following controller needs.
"""

import math
from typing import Optional, Tuple

from src.errors import OutOfRange, UnknownLane, UnknownRoad, UnresolvablePosition
from src.opendrive.geometry import Pose, normalize_angle
from src.opendrive.road_map import OpenDriveMap
from src.opendrive.topology import driving_direction
from src.openscenario.model import LanePosition, Position, RoadPosition, WorldPosition
from src.simulation.state import LaneRef

MAP_ERRORS = (UnknownRoad, UnknownLane, OutOfRange)


def _lane_position(road_map: OpenDriveMap, position: LanePosition) -> Tuple[Pose, LaneRef]:
    direction = driving_direction(position.lane_id)
    relative = normalize_angle(position.relative_heading or 0.0)
    if abs(relative) > math.pi / 2:
        # facing against the lane's traffic
        direction = -direction
        relative = normalize_angle(relative - math.pi)
    # LanePosition offsets are measured along the road's left normal
    t = direction * position.offset
    pose = road_map.lane_pose(position.road_id, position.lane_id, position.s, t, direction)
    pose = Pose(pose.x, pose.y, normalize_angle(pose.h + relative))
    return pose, LaneRef(str(position.road_id), position.lane_id, position.s, t, direction)


def _road_position(road_map: OpenDriveMap, position: RoadPosition) -> Tuple[Pose, Optional[LaneRef]]:
    point = road_map.world_point(position.road_id, position.s, position.t)
    lane_id = road_map.lane_at(position.road_id, position.s, position.t)
    if lane_id is None:
        return point, None
    direction = driving_direction(lane_id)
    t = direction * (position.t - road_map.lane_center_t(position.road_id, lane_id, position.s))
    heading = road_map.travel_heading(position.road_id, position.s, direction)
    return Pose(point.x, point.y, heading), LaneRef(str(position.road_id), lane_id, position.s, t, direction)


def attach_to_lane(road_map: OpenDriveMap, x: float, y: float, h: float) -> Optional[LaneRef]:
    """
    Lane bookkeeping for a free world pose.

    The pose is attached to the nearest lane only when it lies within that
    lane's borders; the travel direction follows the heading.
    """
    projected = road_map.project(x, y, h)
    if projected is None:
        return None
    road_id, lane_id, s, t = projected
    if abs(t) > 0.5 * road_map.lane_width(road_id, lane_id, s) + 1e-6:
        return None
    direction = driving_direction(lane_id)
    forward = road_map.travel_heading(road_id, s, direction)
    if abs(normalize_angle(h - forward)) > math.pi / 2:
        direction, t = -direction, -t
    return LaneRef(road_id, lane_id, s, t, direction)


def resolve_position(road_map: OpenDriveMap, position: Position,
                     source: Optional[str] = None) -> Tuple[Pose, Optional[LaneRef]]:
    """
    World pose of a position and its lane bookkeeping.

    Raises:
        UnresolvablePosition: the position references a missing road/lane or
            lies outside the road
    """
    try:
        if isinstance(position, WorldPosition):
            pose = Pose(position.x, position.y, position.h)
            return pose, attach_to_lane(road_map, pose.x, pose.y, pose.h)
        if isinstance(position, LanePosition):
            return _lane_position(road_map, position)
        if isinstance(position, RoadPosition):
            return _road_position(road_map, position)
    except MAP_ERRORS as e:
        raise UnresolvablePosition(f"cannot resolve {position}: {e.message}", source=source) from e
    raise UnresolvablePosition(f"unsupported position {position!r}", source=source)
