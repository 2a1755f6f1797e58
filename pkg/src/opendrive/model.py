"""
OpenDRIVE road model

Typed records produced by the parser: reference-line geometry segments,
lane sections with width polynomials, road/lane link records and junction
connections.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from src.monitoring.diagnostics import Diagnostic

GEOMETRY_KINDS = ("line", "arc", "spiral", "poly3", "paramPoly3")


@dataclass(frozen=True)
class Poly3:
    """Cubic a + b*ds + c*ds^2 + d*ds^3 starting at s_offset."""
    s_offset: float
    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def value(self, ds: float) -> float:
        return self.a + ds * (self.b + ds * (self.c + ds * self.d))

    def slope(self, ds: float) -> float:
        return self.b + ds * (2.0 * self.c + ds * 3.0 * self.d)


@dataclass(frozen=True)
class GeometrySegment:
    """One planView primitive of a road reference line."""
    s_offset: float
    x: float
    y: float
    heading: float
    length: float
    kind: str
    curvature: float = 0.0        # arc
    curv_start: float = 0.0       # spiral
    curv_end: float = 0.0         # spiral
    poly: Tuple[float, ...] = ()  # poly3: (a, b, c, d); paramPoly3: (aU..dU, aV..dV)
    p_range: str = "arcLength"    # paramPoly3: arcLength | normalized

    @property
    def s_end(self) -> float:
        return self.s_offset + self.length


@dataclass(frozen=True)
class LaneLink:
    predecessors: Tuple[int, ...] = ()
    successors: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Lane:
    lane_id: int
    lane_type: str
    widths: Tuple[Poly3, ...] = ()
    link: LaneLink = LaneLink()

    def width(self, ds: float) -> float:
        """Width at section-local ds."""
        record = None
        for w in self.widths:
            if w.s_offset <= ds + 1e-12:
                record = w
            else:
                break
        if record is None:
            return 0.0
        return record.value(ds - record.s_offset)


@dataclass(frozen=True)
class LaneSection:
    s_start: float
    lanes: Tuple[Lane, ...]  # ordered by id, left (positive) first

    def lane(self, lane_id: int) -> Optional[Lane]:
        for lane in self.lanes:
            if lane.lane_id == lane_id:
                return lane
        return None

    @property
    def lane_ids(self) -> Tuple[int, ...]:
        return tuple(lane.lane_id for lane in self.lanes)


@dataclass(frozen=True)
class RoadLink:
    element_type: str      # road | junction
    element_id: str
    contact_point: Optional[str] = None  # start | end (roads only)


@dataclass(frozen=True)
class OpenDriveRoad:
    road_id: str
    name: str
    length: float
    junction: str
    geometry: Tuple[GeometrySegment, ...]
    lane_sections: Tuple[LaneSection, ...]
    lane_offsets: Tuple[Poly3, ...] = ()
    predecessor: Optional[RoadLink] = None
    successor: Optional[RoadLink] = None
    line: Optional[int] = None

    def section_index(self, s: float) -> int:
        """Index of the lane section containing s (sections are half-open except the last)."""
        index = 0
        for i, section in enumerate(self.lane_sections):
            if section.s_start <= s + 1e-9:
                index = i
            else:
                break
        return index

    def section_bounds(self, index: int) -> Tuple[float, float]:
        start = self.lane_sections[index].s_start
        if index + 1 < len(self.lane_sections):
            return start, self.lane_sections[index + 1].s_start
        return start, self.length

    def lane_offset(self, s: float) -> float:
        record = None
        for o in self.lane_offsets:
            if o.s_offset <= s + 1e-12:
                record = o
            else:
                break
        if record is None:
            return 0.0
        return record.value(s - record.s_offset)


@dataclass(frozen=True)
class JunctionConnection:
    incoming_road: str
    connecting_road: str
    contact_point: str
    lane_links: Tuple[Tuple[int, int], ...]  # (from, to)


@dataclass(frozen=True)
class Junction:
    junction_id: str
    name: str
    connections: Tuple[JunctionConnection, ...]


@dataclass
class OpenDriveDocument:
    """Parsed OpenDRIVE file."""
    roads: List[OpenDriveRoad]
    junctions: List[Junction] = field(default_factory=list)
    name: str = ""
    diagnostics: List[Diagnostic] = field(default_factory=list)

    def road(self, road_id: str) -> Optional[OpenDriveRoad]:
        for road in self.roads:
            if road.road_id == road_id:
                return road
        return None
