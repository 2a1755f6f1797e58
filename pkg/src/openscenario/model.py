"""
OpenSCENARIO storyboard model

Typed, immutable representation of the supported OpenSCENARIO subset:
entities, Init actions and the Story > Act > ManeuverGroup > Maneuver >
Event > Action hierarchy with its start/stop triggers.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple, Union

from src.monitoring.diagnostics import Diagnostic


class DynamicsShape(str, Enum):
    STEP = "step"
    LINEAR = "linear"
    CUBIC = "cubic"
    SINUSOIDAL = "sinusoidal"


class DynamicsDimension(str, Enum):
    TIME = "time"
    DISTANCE = "distance"
    RATE = "rate"


class Rule(str, Enum):
    LESS_THAN = "lessThan"
    GREATER_THAN = "greaterThan"
    EQUAL_TO = "equalTo"
    GREATER_OR_EQUAL = "greaterOrEqual"
    LESS_OR_EQUAL = "lessOrEqual"
    NOT_EQUAL_TO = "notEqualTo"

    def compare(self, value: float, threshold: float) -> bool:
        equal = math.isclose(value, threshold, rel_tol=0.0, abs_tol=1e-9)
        if self is Rule.LESS_THAN:
            return value < threshold and not equal
        if self is Rule.GREATER_THAN:
            return value > threshold and not equal
        if self is Rule.EQUAL_TO:
            return equal
        if self is Rule.GREATER_OR_EQUAL:
            return value > threshold or equal
        if self is Rule.LESS_OR_EQUAL:
            return value < threshold or equal
        return not equal


class ConditionEdge(str, Enum):
    RISING = "rising"
    FALLING = "falling"
    RISING_OR_FALLING = "risingOrFalling"
    NONE = "none"


class Priority(str, Enum):
    OVERWRITE = "overwrite"
    SKIP = "skip"
    PARALLEL = "parallel"


class ElementState(str, Enum):
    COMPLETE = "completeState"
    RUNNING = "runningState"
    STANDBY = "standbyState"
    START_TRANSITION = "startTransition"
    END_TRANSITION = "endTransition"

    @property
    def is_transition(self) -> bool:
        return self in (ElementState.START_TRANSITION, ElementState.END_TRANSITION)


class StoryboardElementType(str, Enum):
    STORY = "story"
    ACT = "act"
    MANEUVER_GROUP = "maneuverGroup"
    MANEUVER = "maneuver"
    EVENT = "event"
    ACTION = "action"


class RelativeDistanceType(str, Enum):
    LONGITUDINAL = "longitudinal"
    LATERAL = "lateral"
    CARTESIAN = "cartesianDistance"


# ---------------------------------------------------------------- positions

@dataclass(frozen=True)
class WorldPosition:
    x: float
    y: float
    z: float = 0.0
    h: float = 0.0


@dataclass(frozen=True)
class LanePosition:
    road_id: str
    lane_id: int
    s: float
    offset: float = 0.0
    relative_heading: Optional[float] = None


@dataclass(frozen=True)
class RoadPosition:
    road_id: str
    s: float
    t: float = 0.0


Position = Union[WorldPosition, LanePosition, RoadPosition]


# ---------------------------------------------------------------- actions

@dataclass(frozen=True)
class TransitionDynamics:
    shape: DynamicsShape
    dimension: DynamicsDimension
    value: float


@dataclass(frozen=True)
class TeleportAction:
    position: Position


@dataclass(frozen=True)
class SpeedAbsoluteAction:
    target: float
    dynamics: TransitionDynamics


@dataclass(frozen=True)
class SpeedRelativeAction:
    entity_ref: str
    value: float
    dynamics: TransitionDynamics
    value_type: str = "delta"  # delta | factor
    continuous: bool = False


@dataclass(frozen=True)
class LaneChangeRelativeAction:
    entity_ref: str
    value: int
    dynamics: TransitionDynamics
    target_lane_offset: float = 0.0


@dataclass(frozen=True)
class LaneChangeAbsoluteAction:
    lane_id: int
    dynamics: TransitionDynamics
    target_lane_offset: float = 0.0


@dataclass(frozen=True)
class PolylineVertex:
    position: Position
    time: Optional[float] = None


@dataclass(frozen=True)
class Timing:
    domain: str = "absolute"  # absolute | relative
    scale: float = 1.0
    offset: float = 0.0


@dataclass(frozen=True)
class FollowPolylineAction:
    vertices: Tuple[PolylineVertex, ...]
    timing: Optional[Timing] = None
    trajectory_name: str = ""


@dataclass(frozen=True)
class UnsupportedAction:
    """Inert placeholder; filtered out before simulation."""
    tag: str


Action = Union[
    TeleportAction,
    SpeedAbsoluteAction,
    SpeedRelativeAction,
    LaneChangeRelativeAction,
    LaneChangeAbsoluteAction,
    FollowPolylineAction,
    UnsupportedAction,
]


# ---------------------------------------------------------------- conditions

@dataclass(frozen=True)
class SimulationTimeCondition:
    value: float
    rule: Rule


@dataclass(frozen=True)
class RelativeDistanceCondition:
    entity_ref: str
    value: float
    rule: Rule
    distance_type: RelativeDistanceType = RelativeDistanceType.CARTESIAN
    freespace: bool = False


@dataclass(frozen=True)
class SpeedCondition:
    value: float
    rule: Rule


@dataclass(frozen=True)
class TraveledDistanceCondition:
    value: float


@dataclass(frozen=True)
class StoryboardElementStateCondition:
    element_type: StoryboardElementType
    element_ref: str
    state: ElementState


Predicate = Union[
    SimulationTimeCondition,
    RelativeDistanceCondition,
    SpeedCondition,
    TraveledDistanceCondition,
    StoryboardElementStateCondition,
]

ENTITY_PREDICATES = (RelativeDistanceCondition, SpeedCondition, TraveledDistanceCondition)


@dataclass(frozen=True)
class Condition:
    name: str
    predicate: Predicate
    edge: ConditionEdge = ConditionEdge.RISING
    delay: float = 0.0
    triggering_entities: Tuple[str, ...] = ()
    triggering_rule: str = "any"  # any | all


@dataclass(frozen=True)
class ConditionGroup:
    """AND over conditions."""
    conditions: Tuple[Condition, ...]


@dataclass(frozen=True)
class Trigger:
    """OR over condition groups; an empty trigger never fires."""
    groups: Tuple[ConditionGroup, ...] = ()

    def conditions(self) -> Iterator[Condition]:
        for group in self.groups:
            yield from group.conditions


def immediate_trigger() -> Trigger:
    """Trigger that holds from frame 0 on."""
    condition = Condition(
        name="immediate",
        predicate=SimulationTimeCondition(0.0, Rule.GREATER_OR_EQUAL),
        edge=ConditionEdge.NONE,
    )
    return Trigger(groups=(ConditionGroup(conditions=(condition,)),))


# ---------------------------------------------------------------- storyboard

@dataclass(frozen=True)
class StoryAction:
    name: str
    action: Action


@dataclass(frozen=True)
class Event:
    name: str
    priority: Priority
    actions: Tuple[StoryAction, ...]
    start_trigger: Trigger
    maximum_execution_count: int = 1


@dataclass(frozen=True)
class Maneuver:
    name: str
    events: Tuple[Event, ...]


@dataclass(frozen=True)
class ManeuverGroup:
    name: str
    actors: Tuple[str, ...]
    maneuvers: Tuple[Maneuver, ...]
    maximum_execution_count: int = 1
    select_triggering_entities: bool = False


@dataclass(frozen=True)
class Act:
    name: str
    maneuver_groups: Tuple[ManeuverGroup, ...]
    start_trigger: Trigger
    stop_trigger: Optional[Trigger] = None


@dataclass(frozen=True)
class Story:
    name: str
    acts: Tuple[Act, ...]


@dataclass(frozen=True)
class InitAction:
    entity: str
    action: Action


@dataclass(frozen=True)
class Storyboard:
    init_actions: Tuple[InitAction, ...] = ()
    stories: Tuple[Story, ...] = ()
    stop_trigger: Optional[Trigger] = None

    def elements(self) -> Iterator[Tuple[str, StoryboardElementType, object]]:
        """Depth-first (path, type, element) over the hierarchy; paths join names with '/'."""
        for story in self.stories:
            story_path = story.name
            yield story_path, StoryboardElementType.STORY, story
            for act in story.acts:
                act_path = f"{story_path}/{act.name}"
                yield act_path, StoryboardElementType.ACT, act
                for group in act.maneuver_groups:
                    group_path = f"{act_path}/{group.name}"
                    yield group_path, StoryboardElementType.MANEUVER_GROUP, group
                    for maneuver in group.maneuvers:
                        maneuver_path = f"{group_path}/{maneuver.name}"
                        yield maneuver_path, StoryboardElementType.MANEUVER, maneuver
                        for event in maneuver.events:
                            event_path = f"{maneuver_path}/{event.name}"
                            yield event_path, StoryboardElementType.EVENT, event
                            for action in event.actions:
                                yield f"{event_path}/{action.name}", StoryboardElementType.ACTION, action

    def triggers(self) -> Iterator[Tuple[str, Trigger]]:
        if self.stop_trigger is not None:
            yield "StopTrigger", self.stop_trigger
        for path, kind, element in self.elements():
            if kind in (StoryboardElementType.ACT, StoryboardElementType.EVENT):
                yield path, element.start_trigger
            if kind is StoryboardElementType.ACT and element.stop_trigger is not None:
                yield f"{path}#stop", element.stop_trigger

    def resolve_element(self, ref: str,
                        element_type: Optional[StoryboardElementType] = None) -> List[str]:
        """Paths matching a reference given as a full path or a bare element name."""
        matches = []
        for path, kind, _ in self.elements():
            if element_type is not None and kind is not element_type:
                continue
            if path == ref or path.rsplit("/", 1)[-1] == ref:
                matches.append(path)
        return matches


# ---------------------------------------------------------------- entities

@dataclass(frozen=True)
class BoundingBox:
    length: float
    width: float
    height: float = 1.5
    center_x: float = 0.0
    center_y: float = 0.0
    center_z: float = 0.0


@dataclass(frozen=True)
class Performance:
    max_speed: float
    max_acceleration: float
    max_deceleration: float


@dataclass(frozen=True)
class EntityConfig:
    name: str
    category: str  # e.g. VEHICLE.CAR, PEDESTRIAN, MISC_OBJECT.POLE
    bounding_box: BoundingBox
    performance: Optional[Performance] = None
    model: str = ""

    @property
    def object_type(self) -> str:
        return self.category.split(".", 1)[0]


@dataclass(frozen=True)
class FileHeader:
    author: str = ""
    date: str = ""
    description: str = ""
    rev_major: int = 1
    rev_minor: int = 0


@dataclass
class ScenarioDocument:
    """Parsed and parameter-resolved OpenSCENARIO file."""
    header: FileHeader
    road_network_ref: str
    entities: Tuple[EntityConfig, ...]
    storyboard: Storyboard
    parameters: Dict[str, str] = field(default_factory=dict)
    source: Optional[str] = field(default=None, compare=False)
    diagnostics: List[Diagnostic] = field(default_factory=list, compare=False)

    def entity(self, name: str) -> Optional[EntityConfig]:
        for entity in self.entities:
            if entity.name == name:
                return entity
        return None

    @property
    def entity_names(self) -> List[str]:
        return [entity.name for entity in self.entities]
