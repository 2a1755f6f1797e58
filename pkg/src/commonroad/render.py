"""
SVG overview

Draws a scenario the way scenario figures usually look: lanelets as grey
outlines, obstacle and ego trajectories as polylines with fading position
markers, the ego start pose and the goal region highlighted.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

from lxml import etree

from src.commonroad.model import CrState, Rectangle, Scenario
from src.commonroad.writer import fmt
from src.errors import ConversionIOError

SVG_NS = "http://www.w3.org/2000/svg"
SubElement = etree.SubElement

Point = Tuple[float, float]


@dataclass(frozen=True)
class RenderOptions:
    width_px: int = 1000
    margin: float = 5.0
    marker_every: int = 10
    marker_radius: float = 0.4
    lanelet_color: str = "#9e9e9e"
    obstacle_color: str = "#1d7eea"
    ego_color: str = "#d95558"
    goal_color: str = "#f1b514"


def _points(points: Iterable[Point]) -> str:
    return " ".join(f"{fmt(x)},{fmt(y)}" for x, y in points)


def _bounds(scenario: Scenario) -> Tuple[float, float, float, float]:
    xs: List[float] = []
    ys: List[float] = []
    for lanelet in scenario.lanelet_network:
        for bound in (lanelet.left_bound, lanelet.right_bound):
            xs.extend(bound[:, 0].tolist())
            ys.extend(bound[:, 1].tolist())
    for states in _trajectories(scenario):
        xs.extend(s.position[0] for s in states)
        ys.extend(s.position[1] for s in states)
    if scenario.planning_problem is not None:
        for x, y in scenario.planning_problem.goal.position.corners():
            xs.append(x)
            ys.append(y)
    if not xs:
        return 0.0, 0.0, 0.0, 0.0
    return min(xs), min(ys), max(xs), max(ys)


def _trajectories(scenario: Scenario) -> List[Sequence[CrState]]:
    paths = [(o.initial_state,) + tuple(o.trajectory) for o in scenario.dynamic_obstacles]
    if scenario.ego_trajectory:
        paths.append(scenario.ego_trajectory)
    return paths


def _trajectory(parent, states: Sequence[CrState], color: str, css_class: str, options: RenderOptions) -> None:
    group = SubElement(parent, "g", {"class": css_class})
    SubElement(group, "polyline", {
        "class": "trajectory",
        "points": _points(s.position for s in states),
        "fill": "none",
        "stroke": color,
        "stroke-width": "0.3",
    })
    markers = states[::max(options.marker_every, 1)]
    for index, state in enumerate(markers):
        opacity = 1.0 - 0.8 * index / max(len(markers) - 1, 1)
        SubElement(group, "circle", {
            "cx": fmt(state.position[0]), "cy": fmt(state.position[1]),
            "r": fmt(options.marker_radius), "fill": color, "fill-opacity": f"{opacity:.3f}",
        })


def _box(parent, rect: Rectangle, css_class: str, fill: str, opacity: str) -> None:
    SubElement(parent, "polygon", {
        "class": css_class,
        "points": _points(rect.corners()),
        "fill": fill,
        "fill-opacity": opacity,
        "stroke": fill,
        "stroke-width": "0.2",
    })


def render_svg(scenario: Scenario, options: RenderOptions = RenderOptions()) -> str:
    """SVG 1.1 text of a scenario; y points up in scenario coordinates."""
    x0, y0, x1, y1 = _bounds(scenario)
    x0, y0 = x0 - options.margin, y0 - options.margin
    width, height = (x1 - x0) + options.margin, (y1 - y0) + options.margin
    pixels_high = round(options.width_px * height / width) if width > 0 else options.width_px

    root = etree.Element("svg", nsmap={None: SVG_NS}, version="1.1",
                         width=str(options.width_px), height=str(pixels_high),
                         viewBox=f"{fmt(x0)} {fmt(-(y0 + height))} {fmt(width)} {fmt(height)}")
    SubElement(root, "title").text = scenario.metadata.benchmark_id
    canvas = SubElement(root, "g", id="canvas", transform="scale(1,-1)")

    lanes = SubElement(canvas, "g", {"class": "lanelets"})
    for lanelet in scenario.lanelet_network:
        outline = list(map(tuple, lanelet.left_bound)) + list(map(tuple, lanelet.right_bound[::-1]))
        SubElement(lanes, "polygon", {
            "class": "lanelet", "id": f"lanelet-{lanelet.lanelet_id}",
            "points": _points(outline), "fill": "#eeeeee",
            "stroke": options.lanelet_color, "stroke-width": "0.1",
        })

    for obstacle in scenario.static_obstacles:
        state = obstacle.initial_state
        _box(canvas, Rectangle(obstacle.shape.length, obstacle.shape.width, state.position, state.orientation),
             "static-obstacle", options.obstacle_color, "0.6")
    for obstacle in scenario.dynamic_obstacles:
        states = (obstacle.initial_state,) + tuple(obstacle.trajectory)
        _trajectory(canvas, states, options.obstacle_color, "dynamic-obstacle", options)

    if scenario.ego_trajectory:
        _trajectory(canvas, scenario.ego_trajectory, options.ego_color, "ego", options)
    if scenario.planning_problem is not None:
        problem = scenario.planning_problem
        shape = scenario.ego_shape or Rectangle(4.5, 2.0)
        start = problem.initial_state
        _box(canvas, Rectangle(shape.length, shape.width, start.position, start.orientation),
             "ego-initial", options.ego_color, "0.8")
        _box(canvas, problem.goal.position, "goal", options.goal_color, "0.3")

    return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8").decode("utf-8")


def write_svg(scenario: Scenario, path: Union[str, Path], options: RenderOptions = RenderOptions()) -> int:
    data = render_svg(scenario, options).encode("utf-8")
    path = Path(path)
    try:
        path.write_bytes(data)
    except OSError as e:
        raise ConversionIOError(f"cannot write {path}: {e.strerror or e}", source=str(path)) from e
    return len(data)
