"""
OpenSCENARIO serializer

Writes a ScenarioDocument back to OpenSCENARIO XML. Only the supported subset
is emitted, with resolved parameter values, so parsing the output yields the
same document.
"""

from typing import Optional

from lxml import etree

from src.openscenario.model import (
    Act,
    Action,
    Condition,
    EntityConfig,
    Event,
    FollowPolylineAction,
    LaneChangeAbsoluteAction,
    LaneChangeRelativeAction,
    LanePosition,
    ManeuverGroup,
    Position,
    RelativeDistanceCondition,
    RoadPosition,
    ScenarioDocument,
    SimulationTimeCondition,
    SpeedAbsoluteAction,
    SpeedCondition,
    SpeedRelativeAction,
    StoryboardElementStateCondition,
    TeleportAction,
    TransitionDynamics,
    TraveledDistanceCondition,
    Trigger,
    UnsupportedAction,
    WorldPosition,
)

SubElement = etree.SubElement


def _num(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _position(parent, position: Position) -> None:
    el = SubElement(parent, "Position")
    if isinstance(position, WorldPosition):
        SubElement(el, "WorldPosition", x=_num(position.x), y=_num(position.y), z=_num(position.z),
                   h=_num(position.h))
    elif isinstance(position, LanePosition):
        lane = SubElement(el, "LanePosition", roadId=position.road_id, laneId=str(position.lane_id),
                          s=_num(position.s), offset=_num(position.offset))
        if position.relative_heading is not None:
            SubElement(lane, "Orientation", h=_num(position.relative_heading), type="relative")
    elif isinstance(position, RoadPosition):
        SubElement(el, "RoadPosition", roadId=position.road_id, s=_num(position.s), t=_num(position.t))
    else:
        raise TypeError(f"cannot serialize position {position!r}")


def _dynamics(parent, tag: str, dynamics: TransitionDynamics) -> None:
    SubElement(parent, tag, dynamicsShape=dynamics.shape.value, value=_num(dynamics.value),
               dynamicsDimension=dynamics.dimension.value)


def _private_action(parent, action: Action) -> None:
    pa = SubElement(parent, "PrivateAction")
    if isinstance(action, TeleportAction):
        _position(SubElement(pa, "TeleportAction"), action.position)
    elif isinstance(action, (SpeedAbsoluteAction, SpeedRelativeAction)):
        speed = SubElement(SubElement(pa, "LongitudinalAction"), "SpeedAction")
        _dynamics(speed, "SpeedActionDynamics", action.dynamics)
        target = SubElement(speed, "SpeedActionTarget")
        if isinstance(action, SpeedAbsoluteAction):
            SubElement(target, "AbsoluteTargetSpeed", value=_num(action.target))
        else:
            SubElement(target, "RelativeTargetSpeed", entityRef=action.entity_ref, value=_num(action.value),
                       speedTargetValueType=action.value_type, continuous=_num(action.continuous))
    elif isinstance(action, (LaneChangeRelativeAction, LaneChangeAbsoluteAction)):
        change = SubElement(SubElement(pa, "LateralAction"), "LaneChangeAction",
                            targetLaneOffset=_num(action.target_lane_offset))
        _dynamics(change, "LaneChangeActionDynamics", action.dynamics)
        target = SubElement(change, "LaneChangeTarget")
        if isinstance(action, LaneChangeRelativeAction):
            SubElement(target, "RelativeTargetLane", entityRef=action.entity_ref, value=str(action.value))
        else:
            SubElement(target, "AbsoluteTargetLane", value=str(action.lane_id))
    elif isinstance(action, FollowPolylineAction):
        follow = SubElement(SubElement(pa, "RoutingAction"), "FollowTrajectoryAction")
        trajectory = SubElement(SubElement(follow, "TrajectoryRef"), "Trajectory",
                                name=action.trajectory_name, closed="false")
        polyline = SubElement(SubElement(trajectory, "Shape"), "Polyline")
        for vertex in action.vertices:
            v = SubElement(polyline, "Vertex")
            if vertex.time is not None:
                v.set("time", _num(vertex.time))
            _position(v, vertex.position)
        time_ref = SubElement(follow, "TimeReference")
        if action.timing is None:
            SubElement(time_ref, "None")
        else:
            SubElement(time_ref, "Timing", domainAbsoluteRelative=action.timing.domain,
                       scale=_num(action.timing.scale), offset=_num(action.timing.offset))
        SubElement(follow, "TrajectoryFollowingMode", followingMode="position")
    elif isinstance(action, UnsupportedAction):
        SubElement(pa, action.tag)
    else:
        raise TypeError(f"cannot serialize action {action!r}")


def _condition(parent, condition: Condition) -> None:
    el = SubElement(parent, "Condition", name=condition.name, delay=_num(condition.delay),
                    conditionEdge=condition.edge.value)
    predicate = condition.predicate
    if isinstance(predicate, SimulationTimeCondition):
        SubElement(SubElement(el, "ByValueCondition"), "SimulationTimeCondition",
                   value=_num(predicate.value), rule=predicate.rule.value)
        return
    if isinstance(predicate, StoryboardElementStateCondition):
        SubElement(SubElement(el, "ByValueCondition"), "StoryboardElementStateCondition",
                   storyboardElementType=predicate.element_type.value,
                   storyboardElementRef=predicate.element_ref, state=predicate.state.value)
        return

    by_entity = SubElement(el, "ByEntityCondition")
    triggering = SubElement(by_entity, "TriggeringEntities", triggeringEntitiesRule=condition.triggering_rule)
    for name in condition.triggering_entities:
        SubElement(triggering, "EntityRef", entityRef=name)
    entity_condition = SubElement(by_entity, "EntityCondition")
    if isinstance(predicate, RelativeDistanceCondition):
        SubElement(entity_condition, "RelativeDistanceCondition", entityRef=predicate.entity_ref,
                   freespace=_num(predicate.freespace), relativeDistanceType=predicate.distance_type.value,
                   rule=predicate.rule.value, value=_num(predicate.value))
    elif isinstance(predicate, SpeedCondition):
        SubElement(entity_condition, "SpeedCondition", value=_num(predicate.value), rule=predicate.rule.value)
    elif isinstance(predicate, TraveledDistanceCondition):
        SubElement(entity_condition, "TraveledDistanceCondition", value=_num(predicate.value))
    else:
        raise TypeError(f"cannot serialize condition {predicate!r}")


def _trigger(parent, tag: str, trigger: Optional[Trigger]) -> None:
    if trigger is None:
        return
    el = SubElement(parent, tag)
    for group in trigger.groups:
        group_el = SubElement(el, "ConditionGroup")
        for condition in group.conditions:
            _condition(group_el, condition)


def _entity(parent, entity: EntityConfig) -> None:
    obj = SubElement(parent, "ScenarioObject", name=entity.name)
    kind, _, sub = entity.category.partition(".")
    if kind == "VEHICLE":
        body = SubElement(obj, "Vehicle", name=entity.model, vehicleCategory=sub.lower())
    elif kind == "PEDESTRIAN":
        body = SubElement(obj, "Pedestrian", name=entity.model, model=entity.model, mass="80",
                          pedestrianCategory=sub.lower() or "pedestrian")
    else:
        body = SubElement(obj, "MiscObject", name=entity.model, mass="0",
                          miscObjectCategory=sub.lower() or "none")
    if entity.performance is not None:
        SubElement(body, "Performance", maxSpeed=_num(entity.performance.max_speed),
                   maxAcceleration=_num(entity.performance.max_acceleration),
                   maxDeceleration=_num(entity.performance.max_deceleration))
    box = entity.bounding_box
    box_el = SubElement(body, "BoundingBox")
    SubElement(box_el, "Center", x=_num(box.center_x), y=_num(box.center_y), z=_num(box.center_z))
    SubElement(box_el, "Dimensions", width=_num(box.width), length=_num(box.length), height=_num(box.height))


def _event(parent, event: Event) -> None:
    el = SubElement(parent, "Event", name=event.name, priority=event.priority.value,
                    maximumExecutionCount=str(event.maximum_execution_count))
    for story_action in event.actions:
        _private_action(SubElement(el, "Action", name=story_action.name), story_action.action)
    _trigger(el, "StartTrigger", event.start_trigger)


def _maneuver_group(parent, group: ManeuverGroup) -> None:
    el = SubElement(parent, "ManeuverGroup", name=group.name,
                    maximumExecutionCount=str(group.maximum_execution_count))
    actors = SubElement(el, "Actors", selectTriggeringEntities=_num(group.select_triggering_entities))
    for actor in group.actors:
        SubElement(actors, "EntityRef", entityRef=actor)
    for maneuver in group.maneuvers:
        maneuver_el = SubElement(el, "Maneuver", name=maneuver.name)
        for event in maneuver.events:
            _event(maneuver_el, event)


def _act(parent, act: Act) -> None:
    el = SubElement(parent, "Act", name=act.name)
    for group in act.maneuver_groups:
        _maneuver_group(el, group)
    _trigger(el, "StartTrigger", act.start_trigger)
    _trigger(el, "StopTrigger", act.stop_trigger)


def serialize_openscenario(document: ScenarioDocument) -> str:
    """Render a document as OpenSCENARIO XML text."""
    root = etree.Element("OpenSCENARIO")
    header = document.header
    SubElement(root, "FileHeader", revMajor=str(header.rev_major), revMinor=str(header.rev_minor),
               date=header.date, description=header.description, author=header.author)

    declarations = SubElement(root, "ParameterDeclarations")
    for name in sorted(document.parameters):
        SubElement(declarations, "ParameterDeclaration", name=name, parameterType="string",
                   value=document.parameters[name])

    SubElement(root, "CatalogLocations")
    SubElement(SubElement(root, "RoadNetwork"), "LogicFile", filepath=document.road_network_ref)

    entities = SubElement(root, "Entities")
    for entity in document.entities:
        _entity(entities, entity)

    storyboard = document.storyboard
    sb = SubElement(root, "Storyboard")
    actions = SubElement(SubElement(sb, "Init"), "Actions")
    for init in storyboard.init_actions:
        _private_action(SubElement(actions, "Private", entityRef=init.entity), init.action)
    for story in storyboard.stories:
        story_el = SubElement(sb, "Story", name=story.name)
        for act in story.acts:
            _act(story_el, act)
    _trigger(sb, "StopTrigger", storyboard.stop_trigger)

    return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8").decode("utf-8")
