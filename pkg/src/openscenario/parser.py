"""
OpenSCENARIO parser

Turns an OpenSCENARIO 1.0-1.2 document into a ScenarioDocument. Parameters
are substituted on the XML tree first; the typed pass then reads entities,
Init actions and the storyboard hierarchy. Unsupported actions become inert
placeholders and unsupported conditions drop their condition group, both
with a warning.
"""

import copy
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.errors import (
    DuplicateEntityName,
    MalformedXml,
    MissingRoadNetwork,
    UnresolvedCatalogReference,
)
from src.monitoring.diagnostics import DiagnosticLog
from src.opendrive.parser import load_xml
from src.openscenario.model import (
    Act,
    Action,
    BoundingBox,
    Condition,
    ConditionEdge,
    ConditionGroup,
    DynamicsDimension,
    DynamicsShape,
    ElementState,
    EntityConfig,
    Event,
    FileHeader,
    FollowPolylineAction,
    InitAction,
    LaneChangeAbsoluteAction,
    LaneChangeRelativeAction,
    LanePosition,
    Maneuver,
    ManeuverGroup,
    Performance,
    PolylineVertex,
    Position,
    Priority,
    RelativeDistanceCondition,
    RelativeDistanceType,
    RoadPosition,
    Rule,
    ScenarioDocument,
    SimulationTimeCondition,
    SpeedAbsoluteAction,
    SpeedCondition,
    SpeedRelativeAction,
    Story,
    StoryAction,
    Storyboard,
    StoryboardElementStateCondition,
    StoryboardElementType,
    TeleportAction,
    Timing,
    TransitionDynamics,
    TraveledDistanceCondition,
    Trigger,
    UnsupportedAction,
    WorldPosition,
    immediate_trigger,
)
from src.openscenario.parameters import substitute_parameters

logger = logging.getLogger("osc2cr.openscenario")

SUPPORTED_REVISIONS = {(1, 0), (1, 1), (1, 2)}

PRIORITY_ALIASES = {"override": Priority.OVERWRITE}
DISTANCE_TYPE_ALIASES = {"euclidianDistance": RelativeDistanceType.CARTESIAN}


class _Unsupported(Exception):
    """Element outside the supported subset; carries the offending tag."""

    def __init__(self, tag: str, line: Optional[int] = None):
        super().__init__(tag)
        self.tag = tag
        self.line = line


def _children(element) -> List:
    return [child for child in element if isinstance(child.tag, str)]


def _child(element, tag: str):
    for child in _children(element):
        if child.tag == tag:
            return child
    return None


def _first(element):
    children = _children(element)
    return children[0] if children else None


class _ScenarioReader:
    def __init__(self, source: Optional[str], base_dir: Optional[Path], default_edge: ConditionEdge):
        self.source = source
        self.base_dir = base_dir
        self.default_edge = default_edge
        self.log = DiagnosticLog(logger, source)
        self._catalog_roots: Optional[List[Tuple[Path, Any]]] = None

    # ------------------------------------------------------------ scalars

    def _attr(self, element, name: str, default: Optional[str] = None) -> str:
        value = element.get(name)
        if value is None:
            if default is None:
                raise MalformedXml(f"<{element.tag}> is missing attribute '{name}'",
                                   source=self.source, line=element.sourceline)
            return default
        return value

    def _float(self, element, name: str, default: Optional[float] = None) -> float:
        raw = element.get(name)
        if raw is None:
            if default is None:
                raise MalformedXml(f"<{element.tag}> is missing attribute '{name}'",
                                   source=self.source, line=element.sourceline)
            return default
        try:
            return float(raw)
        except ValueError:
            raise MalformedXml(f"<{element.tag}> attribute '{name}' is not a number: '{raw}'",
                               source=self.source, line=element.sourceline) from None

    def _int(self, element, name: str, default: Optional[int] = None) -> int:
        value = self._float(element, name, None if default is None else float(default))
        if not value.is_integer():
            raise MalformedXml(f"<{element.tag}> attribute '{name}' must be an integer",
                               source=self.source, line=element.sourceline)
        return int(value)

    def _bool(self, element, name: str, default: bool = False) -> bool:
        raw = element.get(name)
        if raw is None:
            return default
        return raw.strip().lower() in ("true", "1")

    def _enum(self, enum_cls, element, name: str, aliases: Optional[Dict] = None, default=None):
        raw = element.get(name)
        if raw is None:
            if default is None:
                raise MalformedXml(f"<{element.tag}> is missing attribute '{name}'",
                                   source=self.source, line=element.sourceline)
            return default
        if aliases and raw in aliases:
            return aliases[raw]
        try:
            return enum_cls(raw)
        except ValueError:
            raise _Unsupported(element.tag, element.sourceline) from None

    # ------------------------------------------------------------ document

    def read(self, root) -> ScenarioDocument:
        header = self.read_header(_child(root, "FileHeader"))

        network = _child(root, "RoadNetwork")
        logic = _child(network, "LogicFile") if network is not None else None
        road_network_ref = logic.get("filepath", "").strip() if logic is not None else ""
        if not road_network_ref:
            raise MissingRoadNetwork("scenario has no RoadNetwork/LogicFile filepath",
                                     source=self.source, line=(network if network is not None else root).sourceline)

        entities_el = _child(root, "Entities")
        entities = self.read_entities(entities_el) if entities_el is not None else ()

        storyboard_el = _child(root, "Storyboard")
        if storyboard_el is None:
            self.log.warning("scenario has no <Storyboard>", "missing_storyboard", root.sourceline)
            storyboard = Storyboard()
        else:
            storyboard = self.read_storyboard(storyboard_el)

        return ScenarioDocument(
            header=header,
            road_network_ref=road_network_ref,
            entities=entities,
            storyboard=storyboard,
            source=self.source,
            diagnostics=self.log.entries,
        )

    def read_header(self, element) -> FileHeader:
        if element is None:
            self.log.warning("scenario has no <FileHeader>", "missing_header")
            return FileHeader()
        header = FileHeader(
            author=element.get("author", ""),
            date=element.get("date", ""),
            description=element.get("description", ""),
            rev_major=self._int(element, "revMajor", 1),
            rev_minor=self._int(element, "revMinor", 0),
        )
        if (header.rev_major, header.rev_minor) not in SUPPORTED_REVISIONS:
            self.log.warning(f"OpenSCENARIO revision {header.rev_major}.{header.rev_minor} outside 1.0-1.2; "
                             f"parsing as 1.2", "unsupported_revision", element.sourceline)
        return header

    # ------------------------------------------------------------ entities

    def read_entities(self, element) -> Tuple[EntityConfig, ...]:
        entities: List[EntityConfig] = []
        seen = set()
        for obj in _children(element):
            if obj.tag != "ScenarioObject":
                self.log.warning(f"<{obj.tag}> in Entities is not supported and was ignored",
                                 "unsupported_element", obj.sourceline)
                continue
            name = self._attr(obj, "name")
            if name in seen:
                raise DuplicateEntityName(f"entity name '{name}' declared twice", source=self.source,
                                          line=obj.sourceline)
            seen.add(name)
            entities.append(self.read_entity(name, obj))
        return tuple(entities)

    def read_entity(self, name: str, obj) -> EntityConfig:
        body = None
        for child in _children(obj):
            if child.tag in ("Vehicle", "Pedestrian", "MiscObject"):
                body = child
            elif child.tag == "CatalogReference":
                body = self.resolve_catalog_entry(child)
        if body is None:
            raise MalformedXml(f"entity '{name}' has no Vehicle, Pedestrian, MiscObject or CatalogReference",
                               source=self.source, line=obj.sourceline)

        if body.tag == "Vehicle":
            category = f"VEHICLE.{body.get('vehicleCategory', 'car').upper()}"
        elif body.tag == "Pedestrian":
            kind = body.get("pedestrianCategory", "pedestrian")
            category = "PEDESTRIAN" if kind == "pedestrian" else f"PEDESTRIAN.{kind.upper()}"
        else:
            category = f"MISC_OBJECT.{body.get('miscObjectCategory', 'none').upper()}"

        box_el = _child(body, "BoundingBox")
        if box_el is None:
            raise MalformedXml(f"entity '{name}' has no BoundingBox", source=self.source, line=body.sourceline)
        box = self.read_bounding_box(box_el)

        performance = None
        perf_el = _child(body, "Performance")
        if perf_el is not None:
            performance = Performance(
                max_speed=self._float(perf_el, "maxSpeed"),
                max_acceleration=self._float(perf_el, "maxAcceleration"),
                max_deceleration=self._float(perf_el, "maxDeceleration"),
            )
            if min(performance.max_speed, performance.max_acceleration, performance.max_deceleration) <= 0:
                raise MalformedXml(f"entity '{name}' performance limits must be positive",
                                   source=self.source, line=perf_el.sourceline)

        return EntityConfig(
            name=name,
            category=category,
            bounding_box=box,
            performance=performance,
            model=body.get("model", body.get("name", "")),
        )

    def read_bounding_box(self, element) -> BoundingBox:
        center = _child(element, "Center")
        dims = _child(element, "Dimensions")
        if dims is None:
            raise MalformedXml("BoundingBox has no Dimensions", source=self.source, line=element.sourceline)
        box = BoundingBox(
            length=self._float(dims, "length"),
            width=self._float(dims, "width"),
            height=self._float(dims, "height", 1.5),
            center_x=self._float(center, "x", 0.0) if center is not None else 0.0,
            center_y=self._float(center, "y", 0.0) if center is not None else 0.0,
            center_z=self._float(center, "z", 0.0) if center is not None else 0.0,
        )
        if box.length <= 0 or box.width <= 0:
            raise MalformedXml("bounding box length and width must be positive", source=self.source,
                               line=dims.sourceline)
        return box

    def _catalogs(self) -> List[Tuple[Path, Any]]:
        if self._catalog_roots is None:
            self._catalog_roots = []
            own = Path(self.source).resolve() if self.source else None
            for path in sorted(self.base_dir.glob("*.xosc")):
                if own is not None and path.resolve() == own:
                    continue
                try:
                    root = load_xml(path.read_bytes(), "OpenSCENARIO", str(path))
                except (OSError, MalformedXml):
                    continue
                if _child(root, "Catalog") is not None:
                    self._catalog_roots.append((path, root))
        return self._catalog_roots

    def resolve_catalog_entry(self, reference):
        catalog_name = self._attr(reference, "catalogName")
        entry_name = self._attr(reference, "entryName")
        if self.base_dir is not None:
            for path, root in self._catalogs():
                catalog = _child(root, "Catalog")
                if catalog.get("name") != catalog_name:
                    continue
                for entry in _children(catalog):
                    if entry.get("name") == entry_name:
                        entry = copy.deepcopy(entry)
                        assignments = {
                            a.get("parameterRef"): a.get("value", "")
                            for a in reference.iter("ParameterAssignment")
                        }
                        substitute_parameters(entry, assignments, str(path))
                        self.log.info(f"catalog entry {catalog_name}/{entry_name} resolved from {path.name}",
                                      "catalog", reference.sourceline)
                        return entry
        raise UnresolvedCatalogReference(
            f"catalog entry '{entry_name}' of catalog '{catalog_name}' not found beside the scenario",
            source=self.source, line=reference.sourceline,
        )

    # ------------------------------------------------------------ positions

    def read_position(self, element) -> Position:
        body = _first(element)
        if body is None:
            raise MalformedXml("empty <Position>", source=self.source, line=element.sourceline)
        if body.tag == "WorldPosition":
            return WorldPosition(
                x=self._float(body, "x"),
                y=self._float(body, "y"),
                z=self._float(body, "z", 0.0),
                h=self._float(body, "h", 0.0),
            )
        if body.tag == "LanePosition":
            relative_heading = None
            orientation = _child(body, "Orientation")
            if orientation is not None:
                if orientation.get("type", "relative") == "relative":
                    relative_heading = self._float(orientation, "h", 0.0)
                else:
                    self.log.warning("absolute orientation on a LanePosition ignored", "unsupported_attribute",
                                     orientation.sourceline)
            return LanePosition(
                road_id=self._attr(body, "roadId"),
                lane_id=self._int(body, "laneId"),
                s=self._float(body, "s"),
                offset=self._float(body, "offset", 0.0),
                relative_heading=relative_heading,
            )
        if body.tag == "RoadPosition":
            return RoadPosition(road_id=self._attr(body, "roadId"), s=self._float(body, "s"),
                                t=self._float(body, "t", 0.0))
        raise _Unsupported(body.tag, body.sourceline)

    # ------------------------------------------------------------ actions

    def read_dynamics(self, element) -> TransitionDynamics:
        dynamics = TransitionDynamics(
            shape=self._enum(DynamicsShape, element, "dynamicsShape"),
            dimension=self._enum(DynamicsDimension, element, "dynamicsDimension", default=DynamicsDimension.TIME),
            value=self._float(element, "value", 0.0),
        )
        if dynamics.value < 0:
            raise MalformedXml("transition dynamics value must be >= 0", source=self.source,
                               line=element.sourceline)
        return dynamics

    def read_private_action(self, element) -> Action:
        """Typed action of a <PrivateAction>; placeholders for anything unsupported."""
        try:
            return self._private_action(element)
        except _Unsupported as e:
            self.log.warning(f"unsupported action element <{e.tag}> replaced by a placeholder",
                             "unsupported_action", e.line or element.sourceline)
            return UnsupportedAction(tag=e.tag)

    def _private_action(self, element) -> Action:
        kind = _first(element)
        if kind is None:
            raise MalformedXml("empty <PrivateAction>", source=self.source, line=element.sourceline)
        inner = _first(kind)

        if kind.tag == "TeleportAction":
            return TeleportAction(position=self.read_position(_child(kind, "Position")))

        if kind.tag == "LongitudinalAction" and inner is not None and inner.tag == "SpeedAction":
            dynamics = self.read_dynamics(_child(inner, "SpeedActionDynamics"))
            target = _first(_child(inner, "SpeedActionTarget"))
            if target is not None and target.tag == "AbsoluteTargetSpeed":
                return SpeedAbsoluteAction(target=self._float(target, "value"), dynamics=dynamics)
            if target is not None and target.tag == "RelativeTargetSpeed":
                value_type = target.get("speedTargetValueType", "delta")
                if value_type not in ("delta", "factor"):
                    raise _Unsupported(target.tag, target.sourceline)
                return SpeedRelativeAction(
                    entity_ref=self._attr(target, "entityRef"),
                    value=self._float(target, "value"),
                    dynamics=dynamics,
                    value_type=value_type,
                    continuous=self._bool(target, "continuous"),
                )
            raise _Unsupported("SpeedActionTarget", inner.sourceline)

        if kind.tag == "LateralAction" and inner is not None and inner.tag == "LaneChangeAction":
            dynamics = self.read_dynamics(_child(inner, "LaneChangeActionDynamics"))
            offset = self._float(inner, "targetLaneOffset", 0.0)
            target = _first(_child(inner, "LaneChangeTarget"))
            if target is not None and target.tag == "RelativeTargetLane":
                return LaneChangeRelativeAction(entity_ref=self._attr(target, "entityRef"),
                                                value=self._int(target, "value"),
                                                dynamics=dynamics, target_lane_offset=offset)
            if target is not None and target.tag == "AbsoluteTargetLane":
                return LaneChangeAbsoluteAction(lane_id=self._int(target, "value"), dynamics=dynamics,
                                                target_lane_offset=offset)
            raise _Unsupported("LaneChangeTarget", inner.sourceline)

        if kind.tag == "RoutingAction" and inner is not None and inner.tag == "FollowTrajectoryAction":
            return self.read_follow_trajectory(inner)

        wrapped = kind.tag in ("LongitudinalAction", "LateralAction", "RoutingAction") and inner is not None
        raise _Unsupported(inner.tag if wrapped else kind.tag, kind.sourceline)

    def read_follow_trajectory(self, element) -> FollowPolylineAction:
        trajectory = _child(element, "Trajectory")
        ref = _child(element, "TrajectoryRef")
        if trajectory is None and ref is not None:
            trajectory = _child(ref, "Trajectory")
        if trajectory is None:
            raise _Unsupported("TrajectoryRef", element.sourceline)
        shape = _first(_child(trajectory, "Shape")) if _child(trajectory, "Shape") is not None else None
        if shape is None or shape.tag != "Polyline":
            raise _Unsupported(shape.tag if shape is not None else "Shape", trajectory.sourceline)

        vertices = []
        for vertex in _children(shape):
            if vertex.tag != "Vertex":
                continue
            time = vertex.get("time")
            vertices.append(PolylineVertex(
                position=self.read_position(_child(vertex, "Position")),
                time=float(time) if time is not None else None,
            ))
        if len(vertices) < 2:
            raise MalformedXml("polyline needs at least two vertices", source=self.source,
                               line=shape.sourceline)

        timing = None
        time_ref = _child(element, "TimeReference")
        if time_ref is not None and _child(time_ref, "Timing") is not None:
            timing_el = _child(time_ref, "Timing")
            timing = Timing(
                domain=timing_el.get("domainAbsoluteRelative", "absolute"),
                scale=self._float(timing_el, "scale", 1.0),
                offset=self._float(timing_el, "offset", 0.0),
            )
        return FollowPolylineAction(vertices=tuple(vertices), timing=timing,
                                    trajectory_name=trajectory.get("name", ""))

    # ------------------------------------------------------------ conditions

    def read_trigger(self, element) -> Optional[Trigger]:
        if element is None:
            return None
        groups = []
        for group_el in _children(element):
            if group_el.tag != "ConditionGroup":
                continue
            conditions = []
            dropped = False
            for cond_el in _children(group_el):
                if cond_el.tag != "Condition":
                    continue
                try:
                    conditions.append(self.read_condition(cond_el))
                except _Unsupported as e:
                    self.log.warning(f"unsupported condition <{e.tag}>; its condition group is dropped",
                                     "unsupported_condition", e.line or cond_el.sourceline)
                    dropped = True
            if conditions and not dropped:
                groups.append(ConditionGroup(conditions=tuple(conditions)))
        return Trigger(groups=tuple(groups))

    def read_condition(self, element) -> Condition:
        delay = self._float(element, "delay", 0.0)
        if delay < 0:
            raise MalformedXml("condition delay must be >= 0", source=self.source, line=element.sourceline)
        edge = self._enum(ConditionEdge, element, "conditionEdge", default=self.default_edge)

        body = _first(element)
        if body is None:
            raise MalformedXml("empty <Condition>", source=self.source, line=element.sourceline)

        entities: Tuple[str, ...] = ()
        rule = "any"
        if body.tag == "ByValueCondition":
            predicate_el = _first(body)
            if predicate_el is None:
                raise MalformedXml("empty <ByValueCondition>", source=self.source, line=body.sourceline)
            predicate = self.read_value_predicate(predicate_el)
        elif body.tag == "ByEntityCondition":
            triggering = _child(body, "TriggeringEntities")
            if triggering is not None:
                rule = triggering.get("triggeringEntitiesRule", "any")
                entities = tuple(self._attr(ref, "entityRef") for ref in _children(triggering)
                                 if ref.tag == "EntityRef")
            entity_condition = _child(body, "EntityCondition")
            predicate_el = _first(entity_condition) if entity_condition is not None else None
            if predicate_el is None:
                raise MalformedXml("<ByEntityCondition> without EntityCondition", source=self.source,
                                   line=body.sourceline)
            predicate = self.read_entity_predicate(predicate_el)
        else:
            raise _Unsupported(body.tag, body.sourceline)

        return Condition(
            name=element.get("name", ""),
            predicate=predicate,
            edge=edge,
            delay=delay,
            triggering_entities=entities,
            triggering_rule=rule,
        )

    def read_value_predicate(self, element):
        if element.tag == "SimulationTimeCondition":
            return SimulationTimeCondition(value=self._float(element, "value"), rule=self._enum(Rule, element, "rule"))
        if element.tag == "StoryboardElementStateCondition":
            return StoryboardElementStateCondition(
                element_type=self._enum(StoryboardElementType, element, "storyboardElementType"),
                element_ref=self._attr(element, "storyboardElementRef"),
                state=self._enum(ElementState, element, "state"),
            )
        raise _Unsupported(element.tag, element.sourceline)

    def read_entity_predicate(self, element):
        if element.tag == "RelativeDistanceCondition":
            return RelativeDistanceCondition(
                entity_ref=self._attr(element, "entityRef"),
                value=self._float(element, "value"),
                rule=self._enum(Rule, element, "rule"),
                distance_type=self._enum(RelativeDistanceType, element, "relativeDistanceType",
                                         DISTANCE_TYPE_ALIASES, RelativeDistanceType.CARTESIAN),
                freespace=self._bool(element, "freespace"),
            )
        if element.tag == "SpeedCondition":
            return SpeedCondition(value=self._float(element, "value"), rule=self._enum(Rule, element, "rule"))
        if element.tag == "TraveledDistanceCondition":
            return TraveledDistanceCondition(value=self._float(element, "value"))
        raise _Unsupported(element.tag, element.sourceline)

    # ------------------------------------------------------------ storyboard

    def read_storyboard(self, element) -> Storyboard:
        init_actions: List[InitAction] = []
        init = _child(element, "Init")
        actions = _child(init, "Actions") if init is not None else None
        if actions is not None:
            for item in _children(actions):
                if item.tag != "Private":
                    self.log.warning(f"<{item.tag}> in Init is not supported and was ignored",
                                     "unsupported_action", item.sourceline)
                    continue
                entity = self._attr(item, "entityRef")
                for pa in _children(item):
                    if pa.tag != "PrivateAction":
                        continue
                    action = self.read_private_action(pa)
                    if not isinstance(action, UnsupportedAction):
                        init_actions.append(InitAction(entity=entity, action=action))

        stories = tuple(self.read_story(story) for story in _children(element) if story.tag == "Story")
        stop_trigger = self.read_trigger(_child(element, "StopTrigger"))
        return Storyboard(init_actions=tuple(init_actions), stories=stories, stop_trigger=stop_trigger)

    def read_story(self, element) -> Story:
        name = self._attr(element, "name")
        acts = tuple(self.read_act(act) for act in _children(element) if act.tag == "Act")
        return Story(name=name, acts=acts)

    def _start_trigger(self, element, what: str) -> Trigger:
        trigger = self.read_trigger(_child(element, "StartTrigger"))
        if trigger is None:
            self.log.warning(f"{what} has no StartTrigger; it starts immediately", "missing_start_trigger",
                             element.sourceline)
            return immediate_trigger()
        return trigger

    def read_act(self, element) -> Act:
        name = self._attr(element, "name")
        groups = tuple(self.read_maneuver_group(g) for g in _children(element) if g.tag == "ManeuverGroup")
        return Act(
            name=name,
            maneuver_groups=groups,
            start_trigger=self._start_trigger(element, f"act '{name}'"),
            stop_trigger=self.read_trigger(_child(element, "StopTrigger")),
        )

    def read_maneuver_group(self, element) -> ManeuverGroup:
        actors_el = _child(element, "Actors")
        actors: Tuple[str, ...] = ()
        select = False
        if actors_el is not None:
            actors = tuple(self._attr(ref, "entityRef") for ref in _children(actors_el) if ref.tag == "EntityRef")
            select = self._bool(actors_el, "selectTriggeringEntities")
        maneuvers = []
        for child in _children(element):
            if child.tag == "Maneuver":
                maneuvers.append(self.read_maneuver(child))
            elif child.tag == "CatalogReference":
                self.log.warning("maneuver catalog references are not supported and were ignored",
                                 "unsupported_element", child.sourceline)
        return ManeuverGroup(
            name=self._attr(element, "name"),
            actors=actors,
            maneuvers=tuple(maneuvers),
            maximum_execution_count=self._int(element, "maximumExecutionCount", 1),
            select_triggering_entities=select,
        )

    def read_maneuver(self, element) -> Maneuver:
        events = []
        for child in _children(element):
            if child.tag != "Event":
                continue
            event = self.read_event(child)
            if event is not None:
                events.append(event)
        return Maneuver(name=self._attr(element, "name"), events=tuple(events))

    def read_event(self, element) -> Optional[Event]:
        name = self._attr(element, "name")
        actions = []
        for action_el in _children(element):
            if action_el.tag != "Action":
                continue
            body = _first(action_el)
            if body is not None and body.tag == "PrivateAction":
                action = self.read_private_action(body)
            else:
                tag = body.tag if body is not None else "Action"
                self.log.warning(f"unsupported action element <{tag}> replaced by a placeholder",
                                 "unsupported_action", action_el.sourceline)
                action = UnsupportedAction(tag=tag)
            actions.append(StoryAction(name=self._attr(action_el, "name"), action=action))

        if all(isinstance(a.action, UnsupportedAction) for a in actions):
            self.log.warning(f"event '{name}' has no supported action and was dropped", "dropped_event",
                             element.sourceline)
            return None

        count = self._int(element, "maximumExecutionCount", 1)
        if count < 1:
            raise MalformedXml(f"event '{name}' maximumExecutionCount must be >= 1", source=self.source,
                               line=element.sourceline)
        return Event(
            name=name,
            priority=self._enum(Priority, element, "priority", PRIORITY_ALIASES, Priority.OVERWRITE),
            actions=tuple(actions),
            start_trigger=self._start_trigger(element, f"event '{name}'"),
            maximum_execution_count=count,
        )


def is_catalog(xml_text: Union[str, bytes]) -> bool:
    """True for OpenSCENARIO catalog files (a <Catalog> instead of a storyboard)."""
    try:
        root = load_xml(xml_text, "OpenSCENARIO")
    except MalformedXml:
        return False
    return _child(root, "Catalog") is not None and _child(root, "Storyboard") is None


def parse_openscenario(
    xml_text: Union[str, bytes],
    overrides: Optional[Mapping[str, Any]] = None,
    source: Optional[str] = None,
    base_dir: Optional[Union[str, Path]] = None,
    default_edge: Union[str, ConditionEdge] = ConditionEdge.RISING,
) -> ScenarioDocument:
    """
    Parse an OpenSCENARIO document into a typed storyboard tree.

    Args:
        xml_text: file content
        overrides: parameter values that shadow the declarations
        source: file name used in diagnostics
        base_dir: directory searched for catalog files (defaults to the source's directory)
        default_edge: edge used for conditions without a conditionEdge attribute

    Returns:
        ScenarioDocument with all parameters resolved
    """
    root = load_xml(xml_text, "OpenSCENARIO", source)
    if _child(root, "Catalog") is not None and _child(root, "Storyboard") is None:
        raise MalformedXml("file is an OpenSCENARIO catalog, not a scenario", source=source, line=root.sourceline)
    parameters = substitute_parameters(root, overrides, source)

    if base_dir is None and source is not None:
        base_dir = Path(source).parent
    reader = _ScenarioReader(source, Path(base_dir) if base_dir is not None else None, ConditionEdge(default_edge))
    document = reader.read(root)
    document.parameters = parameters
    logger.info(f"Parsed scenario with {len(document.entities)} entities and "
                f"{len(document.storyboard.stories)} story(ies)")
    return document


def resolve_parameters(document: Union[str, bytes, ScenarioDocument],
                       overrides: Optional[Mapping[str, Any]] = None, **kwargs) -> ScenarioDocument:
    """
    Make a logical scenario concrete: substitute every ``$name`` reference and
    return the typed document. Already-resolved documents pass through a
    serialize/parse cycle, which leaves them unchanged.
    """
    if isinstance(document, ScenarioDocument):
        from src.openscenario.serializer import serialize_openscenario

        kwargs.setdefault("source", document.source)
        document = serialize_openscenario(document)
    return parse_openscenario(document, overrides=overrides, **kwargs)
