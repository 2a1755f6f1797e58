"""
CommonRoad XML writer

Serializes a Scenario to the CommonRoad XML subset documented in
docs/commonroad_schema.md. Numbers are written with six decimals and
elements in id / time-step order, so equal scenarios give equal bytes.
"""

import logging
import math
from pathlib import Path
from typing import Union

from lxml import etree

from src.commonroad.model import (
    COORDINATE_DIGITS,
    CrState,
    DynamicObstacle,
    Interval,
    PlanningProblem,
    Rectangle,
    Scenario,
)
from src.errors import ConversionIOError, SerializationOverflow
from src.opendrive.lanelets import Lanelet

logger = logging.getLogger("osc2cr.commonroad")

PRECISION = COORDINATE_DIGITS

SubElement = etree.SubElement


def fmt(value: float) -> str:
    value = float(value)
    if not math.isfinite(value):
        raise SerializationOverflow(f"cannot serialize non-finite number {value}")
    text = f"{value:.{PRECISION}f}"
    return "0.000000" if text == "-0.000000" else text


def _text(parent, tag: str, text: str):
    el = SubElement(parent, tag)
    el.text = text
    return el


def _point(parent, x: float, y: float, tag: str = "point"):
    el = SubElement(parent, tag)
    _text(el, "x", fmt(x))
    _text(el, "y", fmt(y))
    return el


def _exact(parent, tag: str, text: str) -> None:
    _text(SubElement(parent, tag), "exact", text)


def _interval(parent, tag: str, interval: Interval, integer: bool = False) -> None:
    el = SubElement(parent, tag)
    render = (lambda v: str(int(v))) if integer else fmt
    _text(el, "intervalStart", render(interval.start))
    _text(el, "intervalEnd", render(interval.end))


def _rectangle(parent, rect: Rectangle, with_pose: bool = False) -> None:
    el = SubElement(parent, "rectangle")
    _text(el, "length", fmt(rect.length))
    _text(el, "width", fmt(rect.width))
    if with_pose:
        _point(el, rect.center[0], rect.center[1], tag="center")
        _text(el, "orientation", fmt(rect.orientation))


def _state(parent, tag: str, state: CrState) -> None:
    el = SubElement(parent, tag)
    _point(SubElement(el, "position"), *state.position)
    _exact(el, "orientation", fmt(state.orientation))
    _exact(el, "time", str(state.time_step))
    _exact(el, "velocity", fmt(state.velocity))
    _exact(el, "steeringAngle", fmt(state.steering_angle))


def _lanelet(parent, lanelet: Lanelet) -> None:
    el = SubElement(parent, "lanelet", id=str(lanelet.lanelet_id))
    for tag, bound in (("leftBound", lanelet.left_bound), ("rightBound", lanelet.right_bound)):
        bound_el = SubElement(el, tag)
        for x, y in bound:
            _point(bound_el, x, y)
    for ref in lanelet.predecessors:
        SubElement(el, "predecessor", ref=str(ref))
    for ref in lanelet.successors:
        SubElement(el, "successor", ref=str(ref))
    if lanelet.adj_left is not None:
        SubElement(el, "adjacentLeft", ref=str(lanelet.adj_left),
                   drivingDir="same" if lanelet.adj_left_same_direction else "opposite")
    if lanelet.adj_right is not None:
        SubElement(el, "adjacentRight", ref=str(lanelet.adj_right),
                   drivingDir="same" if lanelet.adj_right_same_direction else "opposite")


def _obstacle(parent, obstacle) -> None:
    dynamic = isinstance(obstacle, DynamicObstacle)
    el = SubElement(parent, "dynamicObstacle" if dynamic else "staticObstacle", id=str(obstacle.obstacle_id))
    _text(el, "type", obstacle.obstacle_type.value)
    _rectangle(SubElement(el, "shape"), obstacle.shape)
    _state(el, "initialState", obstacle.initial_state)
    if dynamic:
        trajectory = SubElement(el, "trajectory")
        for state in sorted(obstacle.trajectory, key=lambda s: s.time_step):
            _state(trajectory, "state", state)


def _planning_problem(parent, problem: PlanningProblem) -> None:
    el = SubElement(parent, "planningProblem", id=str(problem.problem_id))
    _state(el, "initialState", problem.initial_state)
    goal = SubElement(el, "goalState")
    _rectangle(SubElement(goal, "position"), problem.goal.position, with_pose=True)
    _interval(goal, "time", problem.goal.time_step, integer=True)
    if problem.goal.orientation is not None:
        _interval(goal, "orientation", problem.goal.orientation)
    if problem.goal.velocity is not None:
        _interval(goal, "velocity", problem.goal.velocity)


def scenario_to_xml(scenario: Scenario) -> bytes:
    meta = scenario.metadata
    root = etree.Element(
        "commonRoad",
        benchmarkID=meta.benchmark_id,
        commonRoadVersion=meta.version,
        date=meta.date,
        author=meta.author,
        affiliation=meta.affiliation,
        source=meta.source,
        timeStepSize=fmt(meta.dt),
    )
    for lanelet in scenario.lanelet_network:
        _lanelet(root, lanelet)
    for obstacle in scenario.obstacles:
        _obstacle(root, obstacle)
    if scenario.planning_problem is not None:
        _planning_problem(root, scenario.planning_problem)
    return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8")


def write_xml(scenario: Scenario, path: Union[str, Path]) -> int:
    """
    Write a scenario to `path`.

    Returns:
        Number of bytes written
    """
    data = scenario_to_xml(scenario)
    path = Path(path)
    try:
        path.write_bytes(data)
    except OSError as e:
        raise ConversionIOError(f"cannot write {path}: {e.strerror or e}", source=str(path)) from e
    logger.debug(f"Wrote {len(data)} bytes to {path}")
    return len(data)
