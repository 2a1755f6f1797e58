"""
CommonRoad scenario builder

Turns a simulation trace into a CommonRoad scenario: obstacle types and
states follow the OpenSCENARIO to CommonRoad mapping table, the ego vehicle
is taken out of the obstacle set and becomes the subject of the planning
problem.
"""

import logging
import math
import re
from typing import Dict, Optional, Sequence

from src.commonroad.model import (
    CrState,
    DynamicObstacle,
    GoalState,
    Interval,
    ObstacleType,
    PlanningProblem,
    Rectangle,
    Scenario,
    ScenarioMetadata,
    StaticObstacle,
    quantize_scenario,
)
from src.commonroad.resampling import resample_trajectory
from src.errors import IdSpaceExhausted, NoVehicleEntity, OverrideNotFound, TrajectoryTooShort
from src.opendrive.geometry import normalize_angle
from src.opendrive.lanelets import LaneletNetwork
from src.openscenario.model import EntityConfig, ScenarioDocument
from src.settings import ConverterSettings, GoalSettings
from src.simulation.state import EntityState, SimulationTrace

logger = logging.getLogger("osc2cr.commonroad")

MAX_ID = 2 ** 31 - 1
EGO_NAMES = ("ego", "hero", "ego_vehicle")

OBSTACLE_TYPES: Dict[str, ObstacleType] = {
    "VEHICLE.CAR": ObstacleType.CAR,
    "VEHICLE.VAN": ObstacleType.CAR,
    "VEHICLE.TRUCK": ObstacleType.TRUCK,
    "VEHICLE.TRAILER": ObstacleType.TRUCK,
    "VEHICLE.SEMITRAILER": ObstacleType.TRUCK,
    "VEHICLE.BUS": ObstacleType.BUS,
    "VEHICLE.MOTORBIKE": ObstacleType.MOTORCYCLE,
    "VEHICLE.BICYCLE": ObstacleType.BICYCLE,
    "VEHICLE.TRAIN": ObstacleType.TRAIN,
    "VEHICLE.TRAM": ObstacleType.TRAIN,
    "MISC_OBJECT.BUILDING": ObstacleType.BUILDING,
    "MISC_OBJECT.TRAFFICISLAND": ObstacleType.MEDIAN_STRIP,
    "MISC_OBJECT.STREETLAMP": ObstacleType.PILLAR,
    "MISC_OBJECT.POLE": ObstacleType.ROAD_BOUNDARY,
    "MISC_OBJECT.BARRIER": ObstacleType.ROAD_BOUNDARY,
    "MISC_OBJECT.RAILING": ObstacleType.ROAD_BOUNDARY,
    "MISC_OBJECT.SOUNDBARRIER": ObstacleType.ROAD_BOUNDARY,
    "MISC_OBJECT.PATCH": ObstacleType.CONSTRUCTION_ZONE,
}


def map_obstacle_type(category: str) -> ObstacleType:
    """CommonRoad obstacle type of an OpenSCENARIO category such as ``VEHICLE.VAN``."""
    tag = category.strip().upper()
    if tag == "PEDESTRIAN" or tag.startswith("PEDESTRIAN."):
        return ObstacleType.PEDESTRIAN
    return OBSTACLE_TYPES.get(tag, ObstacleType.UNKNOWN)


def convert_state(state: EntityState, time_step: Optional[int] = None) -> CrState:
    return CrState(
        time_step=state.frame if time_step is None else time_step,
        position=(state.x, state.y),
        orientation=normalize_angle(state.h),
        velocity=state.speed,
        steering_angle=state.wheel_angle,
    )


def find_ego_vehicle(entities: Sequence[EntityConfig], override: Optional[str] = None) -> EntityConfig:
    """
    Pick the ego vehicle: the override name, else a conventional ego name,
    else the first declared vehicle.

    Raises:
        OverrideNotFound: `override` names no entity
        NoVehicleEntity: no override and no vehicle entity
    """
    if override is not None:
        for entity in entities:
            if entity.name == override:
                return entity
        raise OverrideNotFound(f"ego override '{override}' matches no entity")

    vehicles = [e for e in entities if e.object_type == "VEHICLE"]
    if not vehicles:
        raise NoVehicleEntity("scenario declares no vehicle entity to use as ego")
    for vehicle in vehicles:
        if vehicle.name.lower() in EGO_NAMES:
            return vehicle
    return vehicles[0]


def build_planning_problem(ego_states: Sequence[CrState], shape: Rectangle,
                           goal: Optional[GoalSettings] = None, problem_id: int = 1) -> PlanningProblem:
    """
    Planning problem around the ego vehicle's recorded run.

    The goal is an oriented rectangle at the final pose, sized from the ego
    shape, reachable in the last part of the run with a heading margin.

    Raises:
        TrajectoryTooShort: fewer than two states
    """
    goal = goal or GoalSettings()
    if len(ego_states) < 2:
        raise TrajectoryTooShort(f"ego trajectory has {len(ego_states)} state(s), need at least 2")

    final = ego_states[-1]
    region = Rectangle(
        length=goal.length_factor * shape.length,
        width=goal.width_factor * shape.width,
        center=final.position,
        orientation=final.orientation,
    )
    horizon = final.time_step
    time_window = Interval(math.floor(goal.time_window_fraction * horizon), horizon)
    orientation = Interval(final.orientation - goal.orientation_margin, final.orientation + goal.orientation_margin)
    velocity = None
    if goal.velocity_margin is not None:
        velocity = Interval(max(final.velocity - goal.velocity_margin, 0.0), final.velocity + goal.velocity_margin)
    return PlanningProblem(
        problem_id=problem_id,
        initial_state=ego_states[0],
        goal=GoalState(position=region, time_step=time_window, orientation=orientation, velocity=velocity),
    )


def benchmark_id(stem: str, country_code: str = "ZAM") -> str:
    name = re.sub(r"[^A-Za-z0-9]", "", stem) or "Scenario"
    return f"{country_code}_{name}-1_1_T-1"


def _metadata(document: ScenarioDocument, settings: ConverterSettings, stem: str) -> ScenarioMetadata:
    header = document.header
    date = settings.date or (header.date.split("T", 1)[0] if header.date else "") or "1970-01-01"
    return ScenarioMetadata(
        benchmark_id=benchmark_id(stem, settings.country_code),
        dt=settings.dt_cr,
        author=settings.author or header.author or "unknown",
        affiliation=settings.affiliation,
        source=settings.source,
        date=date,
        version=settings.commonroad_version,
    )


def _shape(entity: EntityConfig) -> Rectangle:
    box = entity.bounding_box
    return Rectangle(length=box.length, width=box.width)


def _is_static(entity: EntityConfig, states: Sequence[EntityState]) -> bool:
    if entity.object_type != "MISC_OBJECT":
        return False
    first = states[0]
    return all((s.x, s.y, s.h) == (first.x, first.y, first.h) for s in states)


class _IdAllocator:
    def __init__(self, start: int):
        self.next_id = start

    def __call__(self) -> int:
        if self.next_id > MAX_ID:
            raise IdSpaceExhausted(f"element id {self.next_id} exceeds {MAX_ID}")
        allocated = self.next_id
        self.next_id += 1
        return allocated


def build_scenario(trace: SimulationTrace, network: LaneletNetwork, document: ScenarioDocument,
                   settings: Optional[ConverterSettings] = None, stem: str = "Scenario") -> Scenario:
    """
    Assemble the CommonRoad scenario of a finished simulation.

    Ids: lanelets keep theirs, obstacles follow in declaration order, the
    planning problem comes last.
    """
    settings = settings or ConverterSettings()
    ego = find_ego_vehicle(document.entities, settings.ego_name)
    next_id = _IdAllocator(max((lanelet.lanelet_id for lanelet in network), default=0) + 1)

    scenario = Scenario(metadata=_metadata(document, settings, stem), lanelet_network=network)
    for entity in document.entities:
        if entity.name == ego.name:
            continue
        obstacle_id = next_id()
        recorded = trace.states[entity.name]
        obstacle_type = map_obstacle_type(entity.category)
        if _is_static(entity, recorded):
            scenario.static_obstacles.append(StaticObstacle(
                obstacle_id, obstacle_type, _shape(entity), convert_state(recorded[0], 0), name=entity.name))
            continue
        states = [convert_state(s) for s in resample_trajectory(recorded, trace.dt_sim, settings.dt_cr)]
        scenario.dynamic_obstacles.append(DynamicObstacle(
            obstacle_id, obstacle_type, _shape(entity), states[0], tuple(states[1:]), name=entity.name))

    ego_states = [convert_state(s) for s in resample_trajectory(trace.states[ego.name], trace.dt_sim, settings.dt_cr)]
    scenario.ego_trajectory = tuple(ego_states)
    scenario.ego_shape = _shape(ego)
    scenario.planning_problem = build_planning_problem(ego_states, scenario.ego_shape, settings.goal, next_id())
    logger.info(f"Built {scenario.metadata.benchmark_id}: {len(scenario.dynamic_obstacles)} dynamic, "
                f"{len(scenario.static_obstacles)} static obstacle(s), ego '{ego.name}'")
    return quantize_scenario(scenario)
