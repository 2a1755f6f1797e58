import shutil
from pathlib import Path
from types import SimpleNamespace

import pytest

from src.opendrive.road_map import OpenDriveMap
from src.openscenario.model import BoundingBox, EntityConfig, FileHeader, ScenarioDocument, Storyboard
from src.optimization.caching import map_cache
from src.simulation.state import EntityState, SimulationTrace, TerminationReason

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

CORPUS = (
    "CurvedRoad.xosc",
    "LaneKeep.xosc",
    "NoStopTrigger.xosc",
    "SimpleOvertake.xosc",
    "SpeedProfile.xosc",
    "pedestrian_collision.xosc",
)


# ---------------------------------------------------------------- OpenDRIVE

def _lane(lane_id, lane_type="driving", width=3.5, links=""):
    return (f'<lane id="{lane_id}" type="{lane_type}" level="false">{links}'
            f'<width sOffset="0" a="{width}" b="0" c="0" d="0"/></lane>')


def xodr(geometry, length, left=(1,), right=(-1, -2), extra_road="", sections=None):
    """OpenDRIVE text of one road with the given planView and uniform 3.5 m lanes."""
    if sections is None:
        sections = [(0.0, left, right)]
    section_xml = []
    for s, lefts, rights in sections:
        section_xml.append(
            f'<laneSection s="{s}">'
            + (f'<left>{"".join(_lane(i) for i in lefts)}</left>' if lefts else "")
            + '<center><lane id="0" type="none" level="false"/></center>'
            + (f'<right>{"".join(_lane(i) for i in rights)}</right>' if rights else "")
            + "</laneSection>"
        )
    return (
        '<?xml version="1.0" encoding="UTF-8"?>'
        '<OpenDRIVE><header revMajor="1" revMinor="6" name="test"/>'
        f'<road id="1" name="test" length="{length}" junction="-1">'
        f"<planView>{geometry}</planView>{extra_road}"
        f'<lanes>{"".join(section_xml)}</lanes></road></OpenDRIVE>'
    )


def straight_xodr(length=600.0, **kwargs):
    geometry = f'<geometry s="0" x="0" y="0" hdg="0" length="{length}"><line/></geometry>'
    return xodr(geometry, length, **kwargs)


# ---------------------------------------------------------------- OpenSCENARIO

def vehicle(name, category="car", length=5.0, width=2.0, max_speed=70.0, accel=10.0, decel=10.0):
    return (
        f'<ScenarioObject name="{name}"><Vehicle name="{name}_model" vehicleCategory="{category}">'
        f'<BoundingBox><Center x="0" y="0" z="0.75"/><Dimensions width="{width}" length="{length}" height="1.5"/>'
        f'</BoundingBox><Performance maxSpeed="{max_speed}" maxAcceleration="{accel}" '
        f'maxDeceleration="{decel}"/></Vehicle></ScenarioObject>'
    )


def misc_object(name, category="pole", length=0.3, width=0.3):
    return (
        f'<ScenarioObject name="{name}"><MiscObject mass="10" name="{name}_model" miscObjectCategory="{category}">'
        f'<BoundingBox><Center x="0" y="0" z="0"/><Dimensions width="{width}" length="{length}" height="2"/>'
        f'</BoundingBox></MiscObject></ScenarioObject>'
    )


def lane_position(lane_id, s, road="1", offset=0.0):
    return f'<Position><LanePosition roadId="{road}" laneId="{lane_id}" offset="{offset}" s="{s}"/></Position>'


def init_private(entity, position, speed=None):
    actions = f"<PrivateAction><TeleportAction>{position}</TeleportAction></PrivateAction>"
    if speed is not None:
        actions += (
            "<PrivateAction><LongitudinalAction><SpeedAction>"
            '<SpeedActionDynamics dynamicsShape="step" value="0" dynamicsDimension="time"/>'
            f'<SpeedActionTarget><AbsoluteTargetSpeed value="{speed}"/></SpeedActionTarget>'
            "</SpeedAction></LongitudinalAction></PrivateAction>"
        )
    return f'<Private entityRef="{entity}">{actions}</Private>'


def time_condition(value, rule="greaterThan", edge="rising", name="AtTime", delay=0.0):
    return (f'<Condition name="{name}" delay="{delay}" conditionEdge="{edge}"><ByValueCondition>'
            f'<SimulationTimeCondition value="{value}" rule="{rule}"/></ByValueCondition></Condition>')


def trigger(tag, *conditions):
    return f"<{tag}><ConditionGroup>{''.join(conditions)}</ConditionGroup></{tag}>"


def speed_action(target, shape="linear", dimension="time", value=2.0):
    return (
        "<PrivateAction><LongitudinalAction><SpeedAction>"
        f'<SpeedActionDynamics dynamicsShape="{shape}" value="{value}" dynamicsDimension="{dimension}"/>'
        f'<SpeedActionTarget><AbsoluteTargetSpeed value="{target}"/></SpeedActionTarget>'
        "</SpeedAction></LongitudinalAction></PrivateAction>"
    )


def lane_change_action(lane_id, shape="sinusoidal", dimension="time", value=3.0):
    return (
        "<PrivateAction><LateralAction><LaneChangeAction>"
        f'<LaneChangeActionDynamics dynamicsShape="{shape}" value="{value}" dynamicsDimension="{dimension}"/>'
        f'<LaneChangeTarget><AbsoluteTargetLane value="{lane_id}"/></LaneChangeTarget>'
        "</LaneChangeAction></LateralAction></PrivateAction>"
    )


def event(name, action, start_trigger, priority="overwrite"):
    return (f'<Event name="{name}" priority="{priority}"><Action name="{name}Action">{action}</Action>'
            f"{start_trigger}</Event>")


def story(actor, events, act_trigger=None):
    act_trigger = act_trigger or trigger("StartTrigger", time_condition(0, "greaterOrEqual", "none", "ActStart"))
    return (
        '<Story name="Story"><Act name="Act">'
        '<ManeuverGroup maximumExecutionCount="1" name="Group">'
        f'<Actors selectTriggeringEntities="false"><EntityRef entityRef="{actor}"/></Actors>'
        f'<Maneuver name="Maneuver">{"".join(events)}</Maneuver></ManeuverGroup>'
        f"{act_trigger}</Act></Story>"
    )


def scenario(entities, init, stories="", stop_trigger=None, parameters="", road="road.xodr"):
    """OpenSCENARIO 1.0 text assembled from the fragment builders above."""
    stop = stop_trigger if stop_trigger is not None else ""
    return (
        '<?xml version="1.0" encoding="UTF-8"?><OpenSCENARIO>'
        '<FileHeader revMajor="1" revMinor="0" date="2024-05-01T10:00:00" description="test" author="tests"/>'
        f"<ParameterDeclarations>{parameters}</ParameterDeclarations>"
        f'<RoadNetwork><LogicFile filepath="{road}"/></RoadNetwork>'
        f'<Entities>{"".join(entities)}</Entities>'
        f'<Storyboard><Init><Actions>{"".join(init)}</Actions></Init>{stories}{stop}</Storyboard>'
        "</OpenSCENARIO>"
    )


def stop_after(seconds):
    return trigger("StopTrigger", time_condition(seconds, name="End"))


@pytest.fixture
def osc():
    """XML fragment builders for OpenSCENARIO and OpenDRIVE test inputs."""
    return SimpleNamespace(
        xodr=xodr, straight_xodr=straight_xodr, vehicle=vehicle, misc_object=misc_object,
        lane_position=lane_position, init_private=init_private, time_condition=time_condition,
        trigger=trigger, speed_action=speed_action, lane_change_action=lane_change_action,
        event=event, story=story, scenario=scenario, stop_after=stop_after,
    )


@pytest.fixture(scope="session")
def straight_map():
    return OpenDriveMap.from_xml((SCENARIOS / "straight_road.xodr").read_bytes(), "straight_road.xodr")


@pytest.fixture(scope="session")
def curved_map():
    return OpenDriveMap.from_xml((SCENARIOS / "curved_road.xodr").read_bytes(), "curved_road.xodr")


@pytest.fixture
def corpus_dir(tmp_path):
    """Writable copy of the bundled scenario corpus."""
    target = tmp_path / "scenarios"
    shutil.copytree(SCENARIOS, target)
    return target


@pytest.fixture(autouse=True)
def _fresh_map_cache():
    map_cache.clear()
    yield
    map_cache.clear()


@pytest.fixture
def handmade():
    """Three-entity document with a 0.2 s trace: ego and truck drive, the pole stands."""
    entities = (
        EntityConfig("Ego", "VEHICLE.CAR", BoundingBox(length=5.0, width=2.0)),
        EntityConfig("Pole", "MISC_OBJECT.POLE", BoundingBox(length=0.3, width=0.3)),
        EntityConfig("Truck", "VEHICLE.TRUCK", BoundingBox(length=12.0, width=2.5)),
    )
    document = ScenarioDocument(
        header=FileHeader(author="tests", date="2024-05-01T10:00:00"),
        road_network_ref="straight_road.xodr",
        entities=entities,
        storyboard=Storyboard(),
    )
    frames = range(21)
    trace = SimulationTrace(
        states={
            "Ego": [EntityState(k, 5.0 + 0.1 * k, -1.75, 0.0, 10.0) for k in frames],
            "Pole": [EntityState(k, 30.0, -8.0, 0.0) for k in frames],
            "Truck": [EntityState(k, 40.0 + 0.15 * k, -5.25, 0.0, 15.0) for k in frames],
        },
        termination_reason=TerminationReason.T_MAX,
        dt_sim=0.01,
    )
    return SimpleNamespace(document=document, trace=trace)
