"""
CommonRoad scenario model

The subset of the CommonRoad scenario format this converter emits: a lanelet
network, dynamic and static obstacles with state-list trajectories, and one
planning problem.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from src.opendrive.lanelets import LaneletNetwork

COORDINATE_DIGITS = 6


class ObstacleType(str, Enum):
    CAR = "car"
    TRUCK = "truck"
    BUS = "bus"
    MOTORCYCLE = "motorcycle"
    BICYCLE = "bicycle"
    TRAIN = "train"
    PEDESTRIAN = "pedestrian"
    BUILDING = "building"
    MEDIAN_STRIP = "medianStrip"
    PILLAR = "pillar"
    ROAD_BOUNDARY = "roadBoundary"
    CONSTRUCTION_ZONE = "constructionZone"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CrState:
    time_step: int
    position: Tuple[float, float]
    orientation: float
    velocity: float = 0.0
    steering_angle: float = 0.0


@dataclass(frozen=True)
class Rectangle:
    length: float
    width: float
    center: Tuple[float, float] = (0.0, 0.0)
    orientation: float = 0.0

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise ValueError(f"rectangle needs positive size, got {self.length} x {self.width}")

    @property
    def area(self) -> float:
        return self.length * self.width

    def corners(self) -> List[Tuple[float, float]]:
        c, s = math.cos(self.orientation), math.sin(self.orientation)
        half_l, half_w = 0.5 * self.length, 0.5 * self.width
        points = []
        for dl, dw in ((half_l, half_w), (-half_l, half_w), (-half_l, -half_w), (half_l, -half_w)):
            points.append((self.center[0] + dl * c - dw * s, self.center[1] + dl * s + dw * c))
        return points


@dataclass(frozen=True)
class DynamicObstacle:
    obstacle_id: int
    obstacle_type: ObstacleType
    shape: Rectangle
    initial_state: CrState
    trajectory: Tuple[CrState, ...] = ()
    name: str = field(default="", compare=False)

    @property
    def final_time_step(self) -> int:
        return self.trajectory[-1].time_step if self.trajectory else self.initial_state.time_step


@dataclass(frozen=True)
class StaticObstacle:
    obstacle_id: int
    obstacle_type: ObstacleType
    shape: Rectangle
    initial_state: CrState
    name: str = field(default="", compare=False)


@dataclass(frozen=True)
class Interval:
    start: float
    end: float

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"empty interval [{self.start}, {self.end}]")


@dataclass(frozen=True)
class GoalState:
    position: Rectangle
    time_step: Interval
    orientation: Optional[Interval] = None
    velocity: Optional[Interval] = None


@dataclass(frozen=True)
class PlanningProblem:
    problem_id: int
    initial_state: CrState
    goal: GoalState


@dataclass(frozen=True)
class ScenarioMetadata:
    benchmark_id: str
    dt: float
    author: str = "unknown"
    affiliation: str = ""
    source: str = "OpenSCENARIO"
    date: str = "1970-01-01"
    version: str = "2023.1"


@dataclass(eq=False)
class Scenario:
    """Converted concrete scenario."""
    metadata: ScenarioMetadata
    lanelet_network: LaneletNetwork
    dynamic_obstacles: List[DynamicObstacle] = field(default_factory=list)
    static_obstacles: List[StaticObstacle] = field(default_factory=list)
    planning_problem: Optional[PlanningProblem] = None
    # ego trajectory is drawn by the renderer but never serialized
    ego_trajectory: Tuple[CrState, ...] = ()
    ego_shape: Optional[Rectangle] = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.metadata == other.metadata
            and self.lanelet_network == other.lanelet_network
            and sorted(self.dynamic_obstacles, key=_obstacle_id) == sorted(other.dynamic_obstacles, key=_obstacle_id)
            and sorted(self.static_obstacles, key=_obstacle_id) == sorted(other.static_obstacles, key=_obstacle_id)
            and self.planning_problem == other.planning_problem
        )

    @property
    def obstacles(self) -> List:
        return sorted(list(self.dynamic_obstacles) + list(self.static_obstacles), key=_obstacle_id)

    @property
    def max_time_step(self) -> int:
        steps = [o.final_time_step for o in self.dynamic_obstacles]
        if self.ego_trajectory:
            steps.append(self.ego_trajectory[-1].time_step)
        return max(steps, default=0)


def _obstacle_id(obstacle) -> int:
    return obstacle.obstacle_id


# ---------------------------------------------------------------- precision

def _round(value: float, digits: int) -> float:
    return round(float(value), digits)


def _round_state(state: CrState, digits: int) -> CrState:
    return CrState(
        time_step=state.time_step,
        position=(_round(state.position[0], digits), _round(state.position[1], digits)),
        orientation=_round(state.orientation, digits),
        velocity=_round(state.velocity, digits),
        steering_angle=_round(state.steering_angle, digits),
    )


def _round_rect(rect: Rectangle, digits: int) -> Rectangle:
    return Rectangle(
        length=_round(rect.length, digits),
        width=_round(rect.width, digits),
        center=(_round(rect.center[0], digits), _round(rect.center[1], digits)),
        orientation=_round(rect.orientation, digits),
    )


def _round_interval(interval: Optional[Interval], digits: int) -> Optional[Interval]:
    if interval is None:
        return None
    return Interval(round(interval.start, digits), round(interval.end, digits))


def quantize_scenario(scenario: Scenario, digits: int = COORDINATE_DIGITS) -> Scenario:
    """Copy of a scenario with every coordinate rounded to `digits` decimals."""
    network = LaneletNetwork(frame=scenario.lanelet_network.frame)
    for lanelet in scenario.lanelet_network:
        network.add(replace(lanelet, left_bound=np.round(lanelet.left_bound, digits),
                            right_bound=np.round(lanelet.right_bound, digits),
                            successors=list(lanelet.successors), predecessors=list(lanelet.predecessors)))
    problem = scenario.planning_problem
    if problem is not None:
        goal = problem.goal
        problem = PlanningProblem(
            problem_id=problem.problem_id,
            initial_state=_round_state(problem.initial_state, digits),
            goal=GoalState(
                position=_round_rect(goal.position, digits),
                time_step=goal.time_step,
                orientation=_round_interval(goal.orientation, digits),
                velocity=_round_interval(goal.velocity, digits),
            ),
        )
    return Scenario(
        metadata=scenario.metadata,
        lanelet_network=network,
        dynamic_obstacles=[
            replace(o, shape=_round_rect(o.shape, digits), initial_state=_round_state(o.initial_state, digits),
                    trajectory=tuple(_round_state(s, digits) for s in o.trajectory))
            for o in scenario.dynamic_obstacles
        ],
        static_obstacles=[
            replace(o, shape=_round_rect(o.shape, digits), initial_state=_round_state(o.initial_state, digits))
            for o in scenario.static_obstacles
        ],
        planning_problem=problem,
        ego_trajectory=tuple(_round_state(s, digits) for s in scenario.ego_trajectory),
        ego_shape=_round_rect(scenario.ego_shape, digits) if scenario.ego_shape else None,
    )
