"""
CommonRoad XML reader

Parses exactly the subset ``writer`` emits back into the scenario model.
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np

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
)
from src.errors import ConversionIOError, MalformedXml
from src.opendrive.lanelets import Lanelet, LaneletNetwork
from src.opendrive.parser import load_xml


def _float(el, path: str) -> float:
    node = el.find(path)
    if node is None or node.text is None:
        raise MalformedXml(f"<{el.tag}> lacks {path}", line=el.sourceline)
    return float(node.text)


def _point(el) -> tuple:
    return _float(el, "x"), _float(el, "y")


def _state(el) -> CrState:
    return CrState(
        time_step=int(_float(el, "time/exact")),
        position=_point(el.find("position/point")),
        orientation=_float(el, "orientation/exact"),
        velocity=_float(el, "velocity/exact"),
        steering_angle=_float(el, "steeringAngle/exact"),
    )


def _rectangle(el) -> Rectangle:
    center = el.find("center")
    return Rectangle(
        length=_float(el, "length"),
        width=_float(el, "width"),
        center=_point(center) if center is not None else (0.0, 0.0),
        orientation=_float(el, "orientation") if el.find("orientation") is not None else 0.0,
    )


def _interval(el) -> Optional[Interval]:
    if el is None:
        return None
    return Interval(_float(el, "intervalStart"), _float(el, "intervalEnd"))


def _lanelet(el) -> Lanelet:
    def bound(tag):
        return np.array([_point(p) for p in el.findall(f"{tag}/point")], dtype=float).reshape(-1, 2)

    lanelet = Lanelet(
        lanelet_id=int(el.get("id")),
        left_bound=bound("leftBound"),
        right_bound=bound("rightBound"),
        predecessors=[int(p.get("ref")) for p in el.findall("predecessor")],
        successors=[int(s.get("ref")) for s in el.findall("successor")],
    )
    for side in ("Left", "Right"):
        adjacent = el.find(f"adjacent{side}")
        if adjacent is not None:
            setattr(lanelet, f"adj_{side.lower()}", int(adjacent.get("ref")))
            setattr(lanelet, f"adj_{side.lower()}_same_direction", adjacent.get("drivingDir") == "same")
    return lanelet


def parse_scenario(xml_text: Union[str, bytes], source: Optional[str] = None) -> Scenario:
    root = load_xml(xml_text, "commonRoad", source)
    metadata = ScenarioMetadata(
        benchmark_id=root.get("benchmarkID", ""),
        dt=float(root.get("timeStepSize", "0.1")),
        author=root.get("author", ""),
        affiliation=root.get("affiliation", ""),
        source=root.get("source", ""),
        date=root.get("date", ""),
        version=root.get("commonRoadVersion", ""),
    )
    network = LaneletNetwork()
    for el in root.findall("lanelet"):
        network.add(_lanelet(el))

    scenario = Scenario(metadata=metadata, lanelet_network=network)
    for el in root.findall("dynamicObstacle"):
        scenario.dynamic_obstacles.append(DynamicObstacle(
            obstacle_id=int(el.get("id")),
            obstacle_type=ObstacleType(el.findtext("type")),
            shape=_rectangle(el.find("shape/rectangle")),
            initial_state=_state(el.find("initialState")),
            trajectory=tuple(_state(s) for s in el.findall("trajectory/state")),
        ))
    for el in root.findall("staticObstacle"):
        scenario.static_obstacles.append(StaticObstacle(
            obstacle_id=int(el.get("id")),
            obstacle_type=ObstacleType(el.findtext("type")),
            shape=_rectangle(el.find("shape/rectangle")),
            initial_state=_state(el.find("initialState")),
        ))
    problem = root.find("planningProblem")
    if problem is not None:
        goal = problem.find("goalState")
        time_window = _interval(goal.find("time"))
        scenario.planning_problem = PlanningProblem(
            problem_id=int(problem.get("id")),
            initial_state=_state(problem.find("initialState")),
            goal=GoalState(
                position=_rectangle(goal.find("position/rectangle")),
                time_step=Interval(int(time_window.start), int(time_window.end)),
                orientation=_interval(goal.find("orientation")),
                velocity=_interval(goal.find("velocity")),
            ),
        )
    return scenario


def read_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise ConversionIOError(f"cannot read {path}: {e.strerror or e}", source=str(path)) from e
    return parse_scenario(data, str(path))
