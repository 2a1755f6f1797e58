"""
Action runtimes

One runtime per (action, actor). A runtime is started on the frame-k
snapshot, then queried by the engine each frame for what it wants the
entity to do next. Runtimes claim control domains; starting one terminates
running runtimes of the same entity whose domains overlap.
"""

import math
from typing import FrozenSet, List, Optional, Tuple

import numpy as np

from src.errors import TargetLaneMissing
from src.opendrive.geometry import Pose, normalize_angle
from src.opendrive.topology import shift_lane
from src.openscenario.model import (
    Action,
    DynamicsDimension,
    DynamicsShape,
    FollowPolylineAction,
    LaneChangeAbsoluteAction,
    LaneChangeRelativeAction,
    SpeedAbsoluteAction,
    SpeedRelativeAction,
    TeleportAction,
)
from src.simulation.conditions import Snapshot
from src.simulation.dynamics import shape_value, speed_duration
from src.simulation.positions import resolve_position
from src.simulation.state import LaneRef, SimConfig

LONGITUDINAL = "longitudinal"
LATERAL = "lateral"


class ActionRuntime:
    """Base class of running actions."""

    domains: FrozenSet[str] = frozenset()

    def __init__(self, path: str, entity: str, action: Action):
        self.path = path
        self.entity = entity
        self.action = action
        self.start_frame: Optional[int] = None
        self.done = False

    def start(self, snapshot: Snapshot, config: SimConfig) -> None:
        self.start_frame = snapshot.frame

    def terminate(self) -> None:
        self.done = True

    def elapsed(self, frame: int, config: SimConfig) -> float:
        return (frame - self.start_frame) * config.dt_sim

    def overlaps(self, other: "ActionRuntime") -> bool:
        return bool(self.domains & other.domains)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.path!r}, {self.entity!r}, done={self.done})"


class SpeedRuntime(ActionRuntime):
    """SpeedAction with absolute or relative target."""

    domains = frozenset({LONGITUDINAL})

    def __init__(self, path: str, entity: str, action: Action):
        super().__init__(path, entity, action)
        self.v0 = 0.0
        self.v1 = 0.0
        self.duration = 0.0

    @property
    def shape(self) -> DynamicsShape:
        return self.action.dynamics.shape

    @property
    def continuous(self) -> bool:
        return isinstance(self.action, SpeedRelativeAction) and self.action.continuous

    @property
    def rate_limited(self) -> bool:
        """Step-shaped and zero-duration transitions bypass acceleration limits."""
        return self.shape is not DynamicsShape.STEP and self.duration > 0.0

    def target(self, snapshot: Snapshot) -> float:
        action = self.action
        if isinstance(action, SpeedAbsoluteAction):
            return max(action.target, 0.0)
        reference = snapshot.states[action.entity_ref].speed
        if action.value_type == "factor":
            return max(reference * action.value, 0.0)
        return max(reference + action.value, 0.0)

    def start(self, snapshot: Snapshot, config: SimConfig) -> None:
        super().start(snapshot, config)
        self.v0 = snapshot.states[self.entity].speed
        self.v1 = self.target(snapshot)
        self.duration = speed_duration(self.action.dynamics, self.v0, self.v1)

    def desired_speed(self, snapshot: Snapshot, frame: int, config: SimConfig) -> float:
        """Speed the profile asks for at `frame` (the frame being produced)."""
        if self.continuous:
            self.v1 = self.target(snapshot)
        if self.duration <= 0.0:
            return self.v1
        progress = self.elapsed(frame, config) / self.duration
        return self.v0 + (self.v1 - self.v0) * shape_value(self.shape, progress)

    def finish_frame(self, previous: float, speed: float, frame: int, config: SimConfig) -> None:
        if self.continuous:
            return
        if self.elapsed(frame, config) >= self.duration - 1e-12:
            # a cap below the target ends the action once the speed stops changing
            if abs(speed - self.v1) <= 1e-6 or abs(speed - previous) <= 1e-12:
                self.done = True


class LaneChangeRuntime(ActionRuntime):
    """Lateral transition from the current lane to a target lane."""

    domains = frozenset({LATERAL})

    def __init__(self, path: str, entity: str, action: Action):
        super().__init__(path, entity, action)
        self.source_t = 0.0
        self.target_lane = 0
        self.target_ref: Optional[LaneRef] = None
        self.goal = 0.0
        self.initial_gap = 0.0
        self.distance = 0.0

    def resolve_target_lane(self, snapshot: Snapshot, own: LaneRef) -> int:
        action = self.action
        if isinstance(action, LaneChangeAbsoluteAction):
            return action.lane_id
        reference = snapshot.states[action.entity_ref].lane_ref
        if reference is None or reference.road_id != own.road_id:
            raise TargetLaneMissing(
                f"{self.entity}: reference entity '{action.entity_ref}' is not on road {own.road_id}")
        return shift_lane(reference.lane_id, own.direction * action.value)

    def start(self, snapshot: Snapshot, config: SimConfig) -> None:
        super().start(snapshot, config)
        own = snapshot.states[self.entity].lane_ref
        if own is None:
            raise TargetLaneMissing(f"{self.entity}: lane change requested off the road network")
        target = self.resolve_target_lane(snapshot, own)
        if not snapshot.road_map.lane_exists(own.road_id, target, own.s):
            raise TargetLaneMissing(f"{self.entity}: lane {target} does not exist on road "
                                    f"{own.road_id} at s={own.s:.3f}")
        self.target_lane = target
        self.source_t = own.t
        self.target_ref = LaneRef(own.road_id, target, own.s, self.action.target_lane_offset, own.direction)
        self.goal = self.goal_offset(snapshot.road_map, own, self.target_ref)
        self.initial_gap = abs(self.goal - self.source_t)

    def goal_offset(self, road_map, own: LaneRef, target: LaneRef) -> float:
        """Target lateral offset measured from the source lane centre."""
        if target.road_id != own.road_id:
            return self.goal
        shift = road_map.lane_center_t(own.road_id, target.lane_id, own.s) \
            - road_map.lane_center_t(own.road_id, own.lane_id, own.s)
        return own.direction * shift + self.action.target_lane_offset

    def progress(self, frame: int, config: SimConfig) -> float:
        dynamics = self.action.dynamics
        if dynamics.value <= 0.0:
            return 1.0
        if dynamics.dimension is DynamicsDimension.TIME:
            return self.elapsed(frame, config) / dynamics.value
        if dynamics.dimension is DynamicsDimension.DISTANCE:
            return self.distance / dynamics.value
        if self.initial_gap <= 1e-12:
            return 1.0
        return self.elapsed(frame, config) * dynamics.value / self.initial_gap

    def lateral(self, fraction: float) -> float:
        return (1.0 - fraction) * self.source_t + fraction * self.goal


class PolylineRuntime(ActionRuntime):
    """FollowTrajectoryAction along a polyline, timed or at the current speed."""

    domains = frozenset({LONGITUDINAL, LATERAL})

    def __init__(self, path: str, entity: str, action: Action):
        super().__init__(path, entity, action)
        self.points = np.empty((0, 2))
        self.times: Optional[np.ndarray] = None
        self.lengths = np.zeros(1)
        self.distance = 0.0
        self.last_speed = 0.0

    def start(self, snapshot: Snapshot, config: SimConfig) -> None:
        super().start(snapshot, config)
        state = snapshot.states[self.entity]
        action: FollowPolylineAction = self.action
        vertices = [(resolve_position(snapshot.road_map, v.position)[0], v.time) for v in action.vertices]
        timed = action.timing is not None and all(time is not None for _, time in vertices)
        points: List[Tuple[float, float]] = [(state.x, state.y)]
        if timed:
            timing = action.timing
            base = 0.0 if timing.domain == "absolute" else snapshot.time
            times = [snapshot.time]
            for pose, time in vertices:
                at = base + time * timing.scale + timing.offset
                if at > times[-1] + 1e-12:
                    points.append((pose.x, pose.y))
                    times.append(at)
            self.times = np.asarray(times)
        else:
            points.extend((pose.x, pose.y) for pose, _ in vertices)
        self.points = np.asarray(points, dtype=float)
        steps = np.hypot(*np.diff(self.points, axis=0).T) if len(self.points) > 1 else np.zeros(0)
        self.lengths = np.concatenate(([0.0], np.cumsum(steps)))
        self.last_speed = state.speed
        if len(self.points) < 2:
            self.done = True

    def _segment(self, index: int) -> Tuple[float, float, float]:
        index = min(max(index, 0), len(self.points) - 2)
        dx, dy = self.points[index + 1] - self.points[index]
        return dx, dy, math.hypot(dx, dy)

    def pose_at(self, frame: int, current: Pose, speed: float, config: SimConfig) -> Tuple[Pose, float]:
        """Pose and speed for `frame`; marks the runtime done at the last vertex."""
        if self.times is not None:
            t = frame * config.dt_sim
            if t >= self.times[-1] - 1e-12:
                self.done = True
                t = self.times[-1]
            index = int(np.searchsorted(self.times, t, side="right")) - 1
            index = min(max(index, 0), len(self.times) - 2)
            span = self.times[index + 1] - self.times[index]
            dx, dy, length = self._segment(index)
            fraction = (t - self.times[index]) / span if span > 0 else 1.0
            x, y = self.points[index] + fraction * np.array([dx, dy])
            self.last_speed = length / span if span > 0 else 0.0
        else:
            self.distance += speed * config.dt_sim
            if self.distance >= self.lengths[-1] - 1e-12:
                self.done = True
                self.distance = float(self.lengths[-1])
            x = float(np.interp(self.distance, self.lengths, self.points[:, 0]))
            y = float(np.interp(self.distance, self.lengths, self.points[:, 1]))
            index = int(np.searchsorted(self.lengths, self.distance, side="right")) - 1
            dx, dy, length = self._segment(index)
            self.last_speed = speed
        heading = math.atan2(dy, dx) if length > 1e-9 else current.h
        return Pose(float(x), float(y), normalize_angle(heading)), self.last_speed


class TeleportRuntime(ActionRuntime):
    """TeleportAction inside a story: the new pose is taken in the next frame."""

    domains = frozenset({LATERAL})

    def __init__(self, path: str, entity: str, action: Action):
        super().__init__(path, entity, action)
        self.pose: Optional[Pose] = None
        self.lane_ref: Optional[LaneRef] = None

    def start(self, snapshot: Snapshot, config: SimConfig) -> None:
        super().start(snapshot, config)
        self.pose, self.lane_ref = resolve_position(snapshot.road_map, self.action.position)


RUNTIMES = {
    SpeedAbsoluteAction: SpeedRuntime,
    SpeedRelativeAction: SpeedRuntime,
    LaneChangeRelativeAction: LaneChangeRuntime,
    LaneChangeAbsoluteAction: LaneChangeRuntime,
    FollowPolylineAction: PolylineRuntime,
    TeleportAction: TeleportRuntime,
}


def create_runtime(path: str, entity: str, action: Action) -> ActionRuntime:
    try:
        runtime_class = RUNTIMES[type(action)]
    except KeyError:
        raise TypeError(f"no runtime for action {action!r}") from None
    return runtime_class(path, entity, action)
