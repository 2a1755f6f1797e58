import math
from dataclasses import replace

import numpy as np
import pytest
from lxml import etree

from src.commonroad.builder import build_scenario
from src.commonroad.model import CrState, DynamicObstacle, ObstacleType, Rectangle, Scenario, ScenarioMetadata
from src.commonroad.reader import parse_scenario, read_scenario
from src.commonroad.render import SVG_NS, render_svg, write_svg
from src.commonroad.writer import fmt, scenario_to_xml, write_xml
from src.errors import ConversionIOError, SerializationOverflow
from src.opendrive.lanelets import LaneletNetwork
from src.settings import ConverterSettings

SVG = {"svg": SVG_NS}


@pytest.fixture
def scenario(handmade, straight_map):
    return build_scenario(handmade.trace, straight_map.network, handmade.document, stem="handmade")


def _random_scenario(seed, straight_map, handmade):
    rng = np.random.default_rng(seed)
    frames = int(rng.integers(11, 22))
    states = {}
    for name, recorded in handmade.trace.states.items():
        dx, dy = rng.uniform(-0.5, 0.5, size=2)
        heading = rng.uniform(-math.pi, math.pi)
        states[name] = [replace(s, x=s.x + dx * s.frame, y=s.y + dy * s.frame, h=heading,
                                speed=float(rng.uniform(0.0, 30.0))) for s in recorded[:frames]]
    trace = replace(handmade.trace, states=states)
    settings = ConverterSettings(ego_name=str(rng.choice(["Ego", "Truck"])))
    return build_scenario(trace, straight_map.network, handmade.document, settings, stem=f"random{seed}")


# ---------------------------------------------------------------- numbers

@pytest.mark.parametrize("value, text", [
    (1, "1.000000"),
    (3.14159265, "3.141593"),
    (-2.5, "-2.500000"),
    (-0.0, "0.000000"),
    (-1e-9, "0.000000"),
    (1e6, "1000000.000000"),
])
def test_fmt(value, text):
    assert fmt(value) == text


@pytest.mark.parametrize("value", [math.nan, math.inf, -math.inf])
def test_fmt_rejects_non_finite(value):
    with pytest.raises(SerializationOverflow):
        fmt(value)


# ---------------------------------------------------------------- xml

def test_document_layout(scenario):
    root = etree.fromstring(scenario_to_xml(scenario))
    assert root.tag == "commonRoad"
    assert root.get("benchmarkID") == "ZAM_handmade-1_1_T-1"
    assert root.get("timeStepSize") == "0.100000"
    assert [el.tag for el in root] == ["lanelet"] * 3 + ["staticObstacle", "dynamicObstacle", "planningProblem"]
    assert [el.get("id") for el in root] == ["1", "2", "3", "4", "5", "6"]

    lanelet = root.find("lanelet[@id='2']")
    assert lanelet.find("adjacentLeft").attrib == {"ref": "1", "drivingDir": "opposite"}
    assert lanelet.find("adjacentRight").attrib == {"ref": "3", "drivingDir": "same"}
    assert lanelet.findtext("leftBound/point/y") == "0.000000"

    truck = root.find("dynamicObstacle")
    assert truck.findtext("type") == "truck"
    assert [s.findtext("time/exact") for s in truck.findall("trajectory/state")] == ["1", "2"]
    goal = root.find("planningProblem/goalState")
    assert goal.findtext("time/intervalStart") == "1"
    assert goal.findtext("position/rectangle/length") == "15.000000"


def test_writer_is_deterministic(scenario):
    first = scenario_to_xml(scenario)
    assert scenario_to_xml(scenario) == first
    shuffled = Scenario(
        metadata=scenario.metadata,
        lanelet_network=scenario.lanelet_network,
        dynamic_obstacles=list(reversed(scenario.dynamic_obstacles)),
        static_obstacles=scenario.static_obstacles,
        planning_problem=scenario.planning_problem,
    )
    assert scenario_to_xml(shuffled) == first


@pytest.mark.parametrize("seed", range(200))
def test_read_write_round_trip(seed, straight_map, handmade):
    scenario = _random_scenario(seed, straight_map, handmade)
    data = scenario_to_xml(scenario)
    reread = parse_scenario(data)
    assert reread == scenario
    assert scenario_to_xml(reread) == data
    assert [o.obstacle_id for o in reread.obstacles] == [o.obstacle_id for o in scenario.obstacles]
    assert reread.planning_problem.goal.time_step == scenario.planning_problem.goal.time_step


def test_empty_scenario(tmp_path):
    scenario = Scenario(metadata=ScenarioMetadata("ZAM_Empty-1_1_T-1", 0.1), lanelet_network=LaneletNetwork())
    path = tmp_path / "empty.xml"
    written = write_xml(scenario, path)
    assert written == path.stat().st_size
    reread = read_scenario(path)
    assert reread == scenario
    assert reread.obstacles == []
    assert reread.planning_problem is None


def test_non_finite_state_is_rejected(scenario):
    state = CrState(0, (math.nan, 0.0), 0.0)
    broken = DynamicObstacle(99, ObstacleType.CAR, Rectangle(4.0, 2.0), state)
    scenario.dynamic_obstacles.append(broken)
    with pytest.raises(SerializationOverflow):
        scenario_to_xml(scenario)


def test_io_errors(scenario, tmp_path):
    with pytest.raises(ConversionIOError):
        write_xml(scenario, tmp_path / "missing" / "out.xml")
    with pytest.raises(ConversionIOError):
        read_scenario(tmp_path / "nope.xml")


def test_rectangle_needs_positive_size():
    with pytest.raises(ValueError):
        Rectangle(0.0, 2.0)


# ---------------------------------------------------------------- svg

def test_svg_elements(scenario):
    root = etree.fromstring(render_svg(scenario).encode("utf-8"))
    assert root.tag == f"{{{SVG_NS}}}svg"
    assert root.findtext("svg:title", namespaces=SVG) == "ZAM_handmade-1_1_T-1"

    def count(tag, css_class):
        return len(root.xpath(f"//svg:{tag}[@class='{css_class}']", namespaces=SVG))

    assert count("polygon", "lanelet") == len(scenario.lanelet_network)
    assert count("polyline", "trajectory") == len(scenario.dynamic_obstacles) + 1
    assert count("polygon", "goal") == 1
    assert count("polygon", "ego-initial") == 1
    assert count("polygon", "static-obstacle") == len(scenario.static_obstacles)


def test_svg_file(scenario, tmp_path):
    path = tmp_path / "scenario.svg"
    assert write_svg(scenario, path) == path.stat().st_size
    assert path.read_text(encoding="utf-8").startswith("<?xml")


def test_svg_of_single_state_ego():
    scenario = Scenario(metadata=ScenarioMetadata("ZAM_One-1_1_T-1", 0.1), lanelet_network=LaneletNetwork())
    scenario.ego_trajectory = (CrState(0, (1.0, 2.0), 0.0),)
    root = etree.fromstring(render_svg(scenario).encode("utf-8"))
    assert len(root.xpath("//svg:polyline", namespaces=SVG)) == 1
