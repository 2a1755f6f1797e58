"""
Storyboard simulator

Fixed-step execution of a parsed storyboard on an OpenDRIVE map. Each frame
k runs in a fixed order: evaluate every condition on the frame-k snapshot,
check the storyboard stop trigger, apply act stop triggers, check for
completion and the time limit, start acts and events, move every entity
(running actions or the lane-following default), record frame k+1 and
complete whatever finished.
"""

import logging
import math
from typing import Dict, List, Optional, Set, Tuple

from src.errors import ConversionError, MissingInitPosition
from src.monitoring.diagnostics import DiagnosticLog
from src.opendrive.geometry import Pose, normalize_angle
from src.opendrive.road_map import OpenDriveMap
from src.openscenario.model import (
    DynamicsShape,
    ElementState,
    EntityConfig,
    Priority,
    ScenarioDocument,
    SpeedAbsoluteAction,
    SpeedRelativeAction,
    StoryboardElementStateCondition,
    StoryboardElementType,
    TeleportAction,
    Trigger,
    UnsupportedAction,
)
from src.simulation.actions import (
    ActionRuntime,
    LaneChangeRuntime,
    PolylineRuntime,
    SpeedRuntime,
    TeleportRuntime,
    create_runtime,
)
from src.simulation.conditions import ConditionRuntime, Snapshot, TriggerRuntime
from src.simulation.dynamics import arc_length_step, clamp_speed, displacement, shape_value, wheel_angle
from src.simulation.positions import MAP_ERRORS, attach_to_lane, resolve_position
from src.simulation.state import (
    ElementRuntime,
    EntityState,
    LaneRef,
    SimConfig,
    SimulationTrace,
    TerminationReason,
)
from src.simulation.storyboard import StoryboardRuntime

logger = logging.getLogger("osc2cr.simulation")

RUNNING = ElementState.RUNNING
STANDBY = ElementState.STANDBY


def _immediate_speed(action) -> bool:
    """Init speed actions that set the frame-0 speed instead of running."""
    if not isinstance(action, (SpeedAbsoluteAction, SpeedRelativeAction)):
        return False
    if isinstance(action, SpeedRelativeAction) and action.continuous:
        return False
    return action.dynamics.shape is DynamicsShape.STEP or action.dynamics.value <= 0.0


def init_entities(document: ScenarioDocument, road_map: OpenDriveMap) -> Dict[str, EntityState]:
    """
    Frame-0 state of every entity from the Init actions.

    Raises:
        MissingInitPosition: an entity has no TeleportAction in Init
        UnresolvablePosition: a Teleport position is not on the map
    """
    poses: Dict[str, Tuple[Pose, Optional[LaneRef]]] = {}
    speeds: Dict[str, float] = {}
    for init in document.storyboard.init_actions:
        if isinstance(init.action, TeleportAction):
            poses[init.entity] = resolve_position(road_map, init.action.position, document.source)

    for entity in document.entities:
        if entity.name not in poses:
            raise MissingInitPosition(entity.name, source=document.source)

    # absolute targets first so relative ones can refer to them
    for init in document.storyboard.init_actions:
        if isinstance(init.action, SpeedAbsoluteAction) and _immediate_speed(init.action):
            speeds[init.entity] = max(init.action.target, 0.0)
    for init in document.storyboard.init_actions:
        action = init.action
        if isinstance(action, SpeedRelativeAction) and _immediate_speed(action):
            reference = speeds.get(action.entity_ref, 0.0)
            target = reference * action.value if action.value_type == "factor" else reference + action.value
            speeds[init.entity] = max(target, 0.0)

    states = {}
    for entity in document.entities:
        pose, lane_ref = poses[entity.name]
        states[entity.name] = EntityState(
            frame=0, x=pose.x, y=pose.y, h=pose.h,
            speed=speeds.get(entity.name, 0.0), lane_ref=lane_ref,
        )
    return states


class Simulator:
    """One simulation run over a document and its map."""

    def __init__(self, document: ScenarioDocument, road_map: OpenDriveMap, config: Optional[SimConfig] = None):
        self.document = document
        self.road_map = road_map
        self.config = config or SimConfig()
        self.log = DiagnosticLog(logger, document.source)
        self.entities: Dict[str, EntityConfig] = {e.name: e for e in document.entities}
        self.storyboard = StoryboardRuntime(document.storyboard)

        self.conditions: List[ConditionRuntime] = []
        sb = document.storyboard
        self.stop_trigger = self._trigger(sb.stop_trigger) if sb.stop_trigger is not None else None
        self.start_triggers: Dict[str, TriggerRuntime] = {}
        self.stop_triggers: Dict[str, TriggerRuntime] = {}
        for path, kind, element in sb.elements():
            if kind in (StoryboardElementType.ACT, StoryboardElementType.EVENT):
                self.start_triggers[path] = self._trigger(element.start_trigger)
            if kind is StoryboardElementType.ACT and element.stop_trigger is not None:
                self.stop_triggers[path] = self._trigger(element.stop_trigger)

        initial = init_entities(document, road_map)
        self.states: Dict[str, List[EntityState]] = {name: [state] for name, state in initial.items()}
        self.traveled: Dict[str, float] = {name: 0.0 for name in initial}
        self.active: Dict[str, List[ActionRuntime]] = {name: [] for name in initial}
        self.action_runtimes: Dict[str, List[ActionRuntime]] = {}
        self._dead_ends: Set[str] = set()
        self._init_runtimes = [
            create_runtime(f"Init/{init.entity}/{index}", init.entity, init.action)
            for index, init in enumerate(sb.init_actions)
            if not isinstance(init.action, (TeleportAction, UnsupportedAction))
            and not _immediate_speed(init.action)
        ]

        for story in self.storyboard.stories:
            self.storyboard.start(story, 0)

    def _trigger(self, trigger: Trigger) -> TriggerRuntime:
        groups = []
        for group in trigger.groups:
            runtimes = []
            for condition in group.conditions:
                element_path = None
                predicate = condition.predicate
                if isinstance(predicate, StoryboardElementStateCondition):
                    matches = self.document.storyboard.resolve_element(predicate.element_ref, predicate.element_type)
                    element_path = matches[0] if matches else None
                runtime = ConditionRuntime(condition, self.config.frames(condition.delay), element_path)
                self.conditions.append(runtime)
                runtimes.append(runtime)
            groups.append(runtimes)
        return TriggerRuntime(trigger, groups)

    # ------------------------------------------------------------ snapshot

    def current(self, name: str) -> EntityState:
        return self.states[name][-1]

    def snapshot(self, frame: int) -> Snapshot:
        return Snapshot(
            frame=frame,
            time=self.config.time(frame),
            states={name: states[-1] for name, states in self.states.items()},
            entities=self.entities,
            road_map=self.road_map,
            traveled=dict(self.traveled),
            phases=self.storyboard.phases(),
            transitions=self.storyboard.observe(),
        )

    # ------------------------------------------------------------ actions

    def start_action(self, runtime: ActionRuntime, snapshot: Snapshot) -> None:
        """Start a runtime, terminating overlapping runtimes of the same entity."""
        for other in self.active[runtime.entity]:
            if not other.done and other.overlaps(runtime):
                logger.debug(f"{runtime.path} preempts {other.path} on {runtime.entity}")
                other.terminate()
        self.active[runtime.entity] = [r for r in self.active[runtime.entity] if not r.done]
        try:
            runtime.start(snapshot, self.config)
        except ConversionError as e:
            self.log.downgrade(e.with_context(self.document.source))
            runtime.terminate()
            return
        self.active[runtime.entity].append(runtime)

    def _terminate_element(self, element: ElementRuntime) -> None:
        for runtime in self.action_runtimes.get(element.path, []):
            runtime.terminate()

    def _start_event(self, event: ElementRuntime, actors: List[str], snapshot: Snapshot, frame: int) -> None:
        self.storyboard.start(event, frame)
        for action in event.children:
            self.storyboard.start(action, frame)
            if isinstance(action.element.action, UnsupportedAction):
                # inert: without runtimes it completes on the next completion pass
                logger.debug(f"placeholder {action.path} started at frame {frame}")
                self.action_runtimes[action.path] = []
                continue
            runtimes = [create_runtime(action.path, actor, action.element.action) for actor in actors]
            self.action_runtimes[action.path] = runtimes
            for runtime in runtimes:
                self.start_action(runtime, snapshot)

    def _actors(self, group: ElementRuntime, event: ElementRuntime) -> List[str]:
        actors = list(group.element.actors)
        if group.element.select_triggering_entities:
            for condition in event.element.start_trigger.conditions():
                actors.extend(n for n in condition.triggering_entities if n not in actors)
        return [name for name in actors if name in self.entities]

    def _start_elements(self, snapshot: Snapshot, frame: int) -> None:
        for story in self.storyboard.stories:
            if story.phase is not RUNNING:
                continue
            for act in story.children:
                if act.phase is STANDBY and not act.exhausted and self.start_triggers[act.path].value:
                    self.storyboard.start_act(act, frame)
                if act.phase is not RUNNING:
                    continue
                for group in act.children:
                    if group.phase is not RUNNING:
                        continue
                    for maneuver in group.children:
                        if maneuver.phase is RUNNING:
                            self._start_events(group, maneuver, snapshot, frame)

    def _start_events(self, group: ElementRuntime, maneuver: ElementRuntime, snapshot: Snapshot, frame: int) -> None:
        for event in maneuver.children:
            if event.phase is not STANDBY or event.exhausted or not self.start_triggers[event.path].value:
                continue
            others = [e for e in maneuver.children if e is not event and e.phase is RUNNING]
            priority = event.element.priority
            if priority is Priority.SKIP and others:
                logger.debug(f"{event.path} skipped at frame {frame}")
                continue
            if priority is Priority.OVERWRITE:
                for other in others:
                    for action in self.storyboard.force_complete(other, frame):
                        self._terminate_element(action)
            self._start_event(event, self._actors(group, event), snapshot, frame)

    def _complete_finished(self, frame: int) -> None:
        for event in list(self.storyboard.of_type(StoryboardElementType.EVENT)):
            if event.phase is not RUNNING:
                continue
            for action in event.children:
                if action.phase is RUNNING and all(r.done for r in self.action_runtimes.get(action.path, [])):
                    self.storyboard.set_phase(action, ElementState.COMPLETE, frame)
            if all(action.phase is ElementState.COMPLETE for action in event.children):
                self.storyboard.complete_event(event, frame)
        self.storyboard.propagate(frame)
        for name in self.active:
            self.active[name] = [r for r in self.active[name] if not r.done]

    # ------------------------------------------------------------ motion

    def _lane_motion(self, name: str, state: EntityState, distance: float,
                     lane_change: Optional[LaneChangeRuntime], frame: int) -> Tuple[Pose, LaneRef, bool]:
        road_map = self.road_map
        ref = state.lane_ref
        t_road = road_map.road_offset(ref.road_id, ref.lane_id, ref.s, ref.t, ref.direction)
        ds = arc_length_step(distance, road_map.curvature(ref.road_id, ref.s), t_road)
        cursor = road_map.advance(ref.road_id, ref.lane_id, ref.s, ds, ref.direction)

        lateral = ref.t
        target_ref = None
        if lane_change is not None:
            lane_change.distance += distance
            target = lane_change.target_ref
            moved = road_map.advance(target.road_id, target.lane_id, target.s, ds, target.direction)
            target_ref = LaneRef(moved.road_id, moved.lane_id, moved.s, target.t, moved.direction)
            lane_change.target_ref = target_ref
            own = LaneRef(cursor.road_id, cursor.lane_id, cursor.s, ref.t, cursor.direction)
            try:
                lane_change.goal = lane_change.goal_offset(road_map, own, target_ref)
            except MAP_ERRORS:
                pass
            progress = lane_change.progress(frame, self.config)
            lateral = lane_change.lateral(shape_value(lane_change.action.dynamics.shape, progress))
            if progress >= 1.0 - 1e-12:
                lane_change.done = True

        pose = road_map.lane_pose(cursor.road_id, cursor.lane_id, cursor.s, lateral, cursor.direction)
        if distance > 1e-9 and lateral != ref.t:
            pose = Pose(pose.x, pose.y, normalize_angle(pose.h + math.atan2(lateral - ref.t, distance)))
        if lane_change is not None and lane_change.done:
            new_ref = target_ref
        else:
            new_ref = LaneRef(cursor.road_id, cursor.lane_id, cursor.s, lateral, cursor.direction)
        if cursor.dead_end and name not in self._dead_ends:
            self._dead_ends.add(name)
            self.log.info(f"entity '{name}' reached a dead end on road {cursor.road_id} "
                          f"lane {cursor.lane_id} at frame {frame}", "dead_end")
        return pose, new_ref, cursor.dead_end

    def _next_state(self, name: str, snapshot: Snapshot, frame: int) -> Tuple[EntityState, float]:
        """State of one entity at `frame` from its frame-k state and running actions."""
        state = snapshot.states[name]
        entity = self.entities[name]
        runtimes = [r for r in self.active[name] if not r.done]
        by_type = {type(r): r for r in runtimes}
        dt = self.config.dt_sim

        teleport = by_type.get(TeleportRuntime)
        if teleport is not None:
            teleport.done = True
            pose = teleport.pose
            return EntityState(frame, pose.x, pose.y, pose.h, state.speed, 0.0, teleport.lane_ref), 0.0

        current = Pose(state.x, state.y, state.h)
        polyline = by_type.get(PolylineRuntime)
        if polyline is not None:
            pose, speed = polyline.pose_at(frame, current, state.speed, self.config)
            distance = math.hypot(pose.x - state.x, pose.y - state.y)
            lane_ref = attach_to_lane(self.road_map, pose.x, pose.y, pose.h) if polyline.done else None
        else:
            speed_runtime = by_type.get(SpeedRuntime)
            speed = state.speed
            if speed_runtime is not None:
                desired = speed_runtime.desired_speed(snapshot, frame, self.config)
                speed = clamp_speed(state.speed, desired, dt, entity.performance, speed_runtime.rate_limited)
                speed_runtime.finish_frame(state.speed, speed, frame, self.config)
            distance = displacement(state.speed, speed, dt)
            if state.lane_ref is None:
                pose = Pose(state.x + distance * math.cos(state.h), state.y + distance * math.sin(state.h), state.h)
                lane_ref = None
            else:
                pose, lane_ref, dead_end = self._lane_motion(
                    name, state, distance, by_type.get(LaneChangeRuntime), frame)
                if dead_end:
                    speed = 0.0

        steer = wheel_angle(entity.bounding_box.length, normalize_angle(pose.h - state.h), distance,
                            steerable=entity.object_type == "VEHICLE")
        return EntityState(frame, pose.x, pose.y, pose.h, speed, steer, lane_ref), distance

    # ------------------------------------------------------------ loop

    def step(self, frame: int) -> Optional[TerminationReason]:
        """
        Advance the world from `frame` to `frame + 1`.

        Returns:
            The termination reason when the run ends at `frame`, else None
        """
        snapshot = self.snapshot(frame)
        for condition in self.conditions:
            condition.evaluate(snapshot)

        if self.stop_trigger is not None and self.stop_trigger.value:
            return TerminationReason.STOP_TRIGGER

        for path, trigger in self.stop_triggers.items():
            act = self.storyboard[path]
            if not act.finished and trigger.value:
                logger.debug(f"stop trigger of {path} fired at frame {frame}")
                for action in self.storyboard.force_complete(act, frame):
                    self._terminate_element(action)
        self._complete_finished(frame)

        init_running = any(not runtime.done for runtime in self._init_runtimes)
        if self.storyboard.all_complete() and not init_running:
            return TerminationReason.ALL_COMPLETE
        if frame >= self.config.max_frame:
            return TerminationReason.T_MAX

        if frame == 0:
            for runtime in self._init_runtimes:
                self.start_action(runtime, snapshot)
        self._start_elements(snapshot, frame)

        for name in self.states:
            state, distance = self._next_state(name, snapshot, frame + 1)
            self.states[name].append(state)
            self.traveled[name] += distance

        self._complete_finished(frame + 1)
        return None

    def run(self) -> SimulationTrace:
        frame = 0
        while True:
            reason = self.step(frame)
            if reason is not None:
                break
            frame += 1
        logger.info(f"Simulation ended at frame {frame} ({frame * self.config.dt_sim:.2f} s): {reason.value}")
        return SimulationTrace(
            states=self.states,
            termination_reason=reason,
            dt_sim=self.config.dt_sim,
            transitions=list(self.storyboard.transitions),
            traveled=dict(self.traveled),
            diagnostics=list(self.log.entries),
        )


def apply_action(runtime: ActionRuntime, simulator: Simulator, frame: int) -> EntityState:
    """
    Start `runtime` if needed and compute its entity's state for frame + 1.

    The simulator's recorded states are left untouched.
    """
    snapshot = simulator.snapshot(frame)
    if runtime.start_frame is None:
        simulator.start_action(runtime, snapshot)
    state, _ = simulator._next_state(runtime.entity, snapshot, frame + 1)
    return state


def run(document: ScenarioDocument, road_map: OpenDriveMap, config: Optional[SimConfig] = None) -> SimulationTrace:
    """Execute a validated document; errors from Init propagate."""
    return Simulator(document, road_map, config).run()
