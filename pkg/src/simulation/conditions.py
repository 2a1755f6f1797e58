"""
Condition evaluation

Raw predicates are evaluated on a frame snapshot; ``ConditionRuntime`` adds
the edge and delay semantics on top, and ``TriggerRuntime`` combines
conditions (AND within a group, OR across groups).
"""

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Set, Tuple

from src.opendrive.road_map import OpenDriveMap
from src.openscenario.model import (
    Condition,
    ConditionEdge,
    ElementState,
    EntityConfig,
    RelativeDistanceCondition,
    RelativeDistanceType,
    SimulationTimeCondition,
    SpeedCondition,
    StoryboardElementStateCondition,
    TraveledDistanceCondition,
    Trigger,
)
from src.simulation.state import EntityState


@dataclass
class Snapshot:
    """Everything a condition may look at in frame k."""
    frame: int
    time: float
    states: Dict[str, EntityState]
    entities: Dict[str, EntityConfig]
    road_map: OpenDriveMap
    traveled: Dict[str, float] = field(default_factory=dict)
    phases: Dict[str, ElementState] = field(default_factory=dict)
    # (path, START_TRANSITION | END_TRANSITION) observed since the previous frame
    transitions: Set[Tuple[str, ElementState]] = field(default_factory=set)


def _road_coordinates(road_map: OpenDriveMap, state: EntityState) -> Optional[Tuple[str, float, float]]:
    ref = state.lane_ref
    if ref is None:
        return None
    return ref.road_id, ref.s, road_map.road_offset(ref.road_id, ref.lane_id, ref.s, ref.t, ref.direction)


def relative_distance(snapshot: Snapshot, entity: str, reference: str,
                      distance_type: RelativeDistanceType, freespace: bool = False) -> float:
    """
    Distance between two entities.

    Longitudinal and lateral distances use road coordinates when both
    entities are on the same road; otherwise the offset vector is projected
    onto the heading of the entity in front (longitudinal) or onto the
    entity's left normal (lateral).
    """
    a, b = snapshot.states[entity], snapshot.states[reference]
    dx, dy = b.x - a.x, b.y - a.y

    if distance_type is RelativeDistanceType.CARTESIAN:
        distance = math.hypot(dx, dy)
    else:
        coords_a = _road_coordinates(snapshot.road_map, a)
        coords_b = _road_coordinates(snapshot.road_map, b)
        same_road = coords_a is not None and coords_b is not None and coords_a[0] == coords_b[0]
        if distance_type is RelativeDistanceType.LONGITUDINAL:
            if same_road:
                distance = abs(coords_b[1] - coords_a[1])
            elif dx * math.cos(a.h) + dy * math.sin(a.h) >= 0.0:
                distance = abs(dx * math.cos(b.h) + dy * math.sin(b.h))
            else:
                distance = abs(dx * math.cos(a.h) + dy * math.sin(a.h))
        elif same_road:
            distance = abs(coords_b[2] - coords_a[2])
        else:
            distance = abs(-dx * math.sin(a.h) + dy * math.cos(a.h))

    if freespace:
        box_a = snapshot.entities[entity].bounding_box
        box_b = snapshot.entities[reference].bounding_box
        if distance_type is RelativeDistanceType.LATERAL:
            distance -= 0.5 * (box_a.width + box_b.width)
        else:
            distance -= 0.5 * (box_a.length + box_b.length)
        distance = max(distance, 0.0)
    return distance


def _entity_holds(condition: Condition, snapshot: Snapshot, entity: str) -> bool:
    predicate = condition.predicate
    if isinstance(predicate, RelativeDistanceCondition):
        value = relative_distance(snapshot, entity, predicate.entity_ref,
                                  predicate.distance_type, predicate.freespace)
        return predicate.rule.compare(value, predicate.value)
    if isinstance(predicate, SpeedCondition):
        return predicate.rule.compare(snapshot.states[entity].speed, predicate.value)
    if isinstance(predicate, TraveledDistanceCondition):
        return snapshot.traveled.get(entity, 0.0) >= predicate.value - 1e-9
    raise TypeError(f"not an entity condition: {predicate!r}")


def evaluate_predicate(condition: Condition, snapshot: Snapshot, element_path: Optional[str] = None) -> bool:
    """Raw truth value of a condition in the snapshot's frame (no edge, no delay)."""
    predicate = condition.predicate
    if isinstance(predicate, SimulationTimeCondition):
        return predicate.rule.compare(snapshot.time, predicate.value)
    if isinstance(predicate, StoryboardElementStateCondition):
        if element_path is None:
            return False
        if predicate.state.is_transition:
            return (element_path, predicate.state) in snapshot.transitions
        return snapshot.phases.get(element_path, ElementState.STANDBY) is predicate.state

    entities = condition.triggering_entities
    if not entities:
        return False
    results = (_entity_holds(condition, snapshot, name) for name in entities)
    return all(results) if condition.triggering_rule == "all" else any(results)


class ConditionRuntime:
    """Edge and delay bookkeeping of one condition over the frames of a run."""

    def __init__(self, condition: Condition, delay_frames: int = 0, element_path: Optional[str] = None):
        self.condition = condition
        self.delay_frames = max(delay_frames, 0)
        self.element_path = element_path
        self._raw: Optional[bool] = None
        # post-edge values of the last delay_frames + 1 frames
        self._edged: Deque[bool] = deque(maxlen=self.delay_frames + 1)

    def _apply_edge(self, raw: bool) -> bool:
        previous = self._raw
        edge = self.condition.edge
        if edge is ConditionEdge.NONE:
            return raw
        if previous is None:
            # no edge can exist in the first evaluated frame
            return False
        if edge is ConditionEdge.RISING:
            return raw and not previous
        if edge is ConditionEdge.FALLING:
            return previous and not raw
        return raw != previous

    def update(self, raw: bool) -> bool:
        """Feed the raw value of the next frame; returns the post-edge, post-delay value."""
        self._edged.append(self._apply_edge(raw))
        self._raw = raw
        return self.value

    def evaluate(self, snapshot: Snapshot) -> bool:
        return self.update(evaluate_predicate(self.condition, snapshot, self.element_path))

    @property
    def value(self) -> bool:
        index = len(self._edged) - 1 - self.delay_frames
        return index >= 0 and self._edged[index]


class TriggerRuntime:
    """OR over groups of AND over condition runtimes."""

    def __init__(self, trigger: Trigger, groups: List[List[ConditionRuntime]]):
        self.trigger = trigger
        self.groups = groups

    @property
    def conditions(self) -> List[ConditionRuntime]:
        return [runtime for group in self.groups for runtime in group]

    @property
    def value(self) -> bool:
        return any(group and all(runtime.value for runtime in group) for group in self.groups)


def evaluate_condition(runtime: ConditionRuntime, snapshot: Snapshot) -> bool:
    """Post-edge, post-delay value of a condition in the snapshot's frame."""
    return runtime.evaluate(snapshot)
