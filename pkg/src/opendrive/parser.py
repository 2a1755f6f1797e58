"""
OpenDRIVE parser

Reads the supported OpenDRIVE subset (planView primitives line, arc, spiral,
poly3, paramPoly3; lane sections with <width> records; road, lane and junction
links). Elevation, superelevation and other 3D or furniture records are
parsed-and-ignored with a warning (flat-world assumption).
"""

import logging
from typing import List, Optional, Tuple, Union

from lxml import etree

from src.errors import MalformedXml, UnsupportedFeature, UnsupportedGeometry
from src.monitoring.diagnostics import DiagnosticLog
from src.opendrive.model import (
    GeometrySegment,
    Junction,
    JunctionConnection,
    Lane,
    LaneLink,
    LaneSection,
    OpenDriveDocument,
    OpenDriveRoad,
    Poly3,
    RoadLink,
)

logger = logging.getLogger("osc2cr.opendrive")

GAP_TOLERANCE = 1e-6

# road children dropped by the flat-world assumption
IGNORED_ROAD_ELEMENTS = {"elevationProfile", "lateralProfile", "objects", "signals", "surface", "railroad"}
SILENT_ROAD_ELEMENTS = {"type", "userData", "include", "dataQuality"}
SILENT_LANE_ELEMENTS = {"roadMark", "speed", "userData", "material", "height", "access", "rule", "visibility", "include"}
SILENT_TOP_ELEMENTS = {"header", "controller", "station", "userData", "include", "dataQuality"}


def _children(element) -> List:
    return [child for child in element if isinstance(child.tag, str)]


def _float(element, name: str, default: Optional[float] = None, source: Optional[str] = None) -> float:
    raw = element.get(name)
    if raw is None:
        if default is None:
            raise MalformedXml(f"<{element.tag}> is missing attribute '{name}'", source=source, line=element.sourceline)
        return default
    try:
        return float(raw)
    except ValueError:
        raise MalformedXml(f"<{element.tag}> attribute '{name}' is not a number: '{raw}'",
                           source=source, line=element.sourceline) from None


def _int(element, name: str, source: Optional[str] = None) -> int:
    raw = element.get(name)
    try:
        value = float(raw)
        if not value.is_integer():
            raise ValueError(raw)
        return int(value)
    except (TypeError, ValueError):
        raise MalformedXml(f"<{element.tag}> attribute '{name}' is not an integer: '{raw}'",
                           source=source, line=element.sourceline) from None


def load_xml(data: Union[str, bytes], root_tag: str, source: Optional[str] = None):
    """Parse XML text into an lxml element and check the root tag."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    parser = etree.XMLParser(remove_comments=True, resolve_entities=False, no_network=True)
    try:
        root = etree.fromstring(data, parser)
    except etree.XMLSyntaxError as e:
        line = e.position[0] if e.position else None
        raise MalformedXml(f"not well-formed XML: {e.msg}", source=source, line=line) from None
    if root.tag != root_tag:
        raise MalformedXml(f"expected root <{root_tag}>, found <{root.tag}>", source=source, line=root.sourceline)
    return root


class _OpenDriveReader:
    def __init__(self, source: Optional[str]):
        self.source = source
        self.log = DiagnosticLog(logger, source)

    def read(self, root) -> OpenDriveDocument:
        roads: List[OpenDriveRoad] = []
        junctions: List[Junction] = []
        name = ""
        for child in _children(root):
            if child.tag == "road":
                roads.append(self.read_road(child))
            elif child.tag == "junction":
                junctions.append(self.read_junction(child))
            elif child.tag == "header":
                name = child.get("name", "")
            elif child.tag not in SILENT_TOP_ELEMENTS:
                self.log.warning(f"unknown element <{child.tag}> ignored", "unknown_element", child.sourceline)
        return OpenDriveDocument(roads=roads, junctions=junctions, name=name, diagnostics=self.log.entries)

    def read_road(self, element) -> OpenDriveRoad:
        road_id = element.get("id")
        if road_id is None:
            raise MalformedXml("<road> is missing attribute 'id'", source=self.source, line=element.sourceline)

        geometry: Tuple[GeometrySegment, ...] = ()
        sections: Tuple[LaneSection, ...] = ()
        offsets: Tuple[Poly3, ...] = ()
        predecessor = successor = None

        for child in _children(element):
            if child.tag == "link":
                predecessor, successor = self.read_road_link(child)
            elif child.tag == "planView":
                geometry = self.read_plan_view(child, road_id)
            elif child.tag == "lanes":
                offsets, sections = self.read_lanes(child, road_id)
            elif child.tag in IGNORED_ROAD_ELEMENTS:
                self.log.warning(f"road {road_id}: <{child.tag}> ignored (flat-world assumption)",
                                 "ignored_element", child.sourceline)
            elif child.tag not in SILENT_ROAD_ELEMENTS:
                self.log.warning(f"road {road_id}: unknown element <{child.tag}> ignored",
                                 "unknown_element", child.sourceline)

        if not geometry:
            raise MalformedXml(f"road {road_id} has no usable planView geometry",
                               source=self.source, line=element.sourceline)
        if not sections:
            raise MalformedXml(f"road {road_id} has no lane section", source=self.source, line=element.sourceline)

        if element.get("length") is not None:
            length = _float(element, "length", source=self.source)
        else:
            length = geometry[-1].s_end

        return OpenDriveRoad(
            road_id=road_id,
            name=element.get("name", ""),
            length=length,
            junction=element.get("junction", "-1"),
            geometry=geometry,
            lane_sections=sections,
            lane_offsets=offsets,
            predecessor=predecessor,
            successor=successor,
            line=element.sourceline,
        )

    def read_road_link(self, element) -> Tuple[Optional[RoadLink], Optional[RoadLink]]:
        links = {"predecessor": None, "successor": None}
        for child in _children(element):
            if child.tag in links:
                links[child.tag] = RoadLink(
                    element_type=child.get("elementType", "road"),
                    element_id=child.get("elementId", ""),
                    contact_point=child.get("contactPoint"),
                )
        return links["predecessor"], links["successor"]

    def read_plan_view(self, element, road_id: str) -> Tuple[GeometrySegment, ...]:
        segments: List[GeometrySegment] = []
        for geo in _children(element):
            if geo.tag != "geometry":
                continue
            segment = self.read_geometry(geo, road_id)
            if segment is not None:
                segments.append(segment)
        segments.sort(key=lambda g: g.s_offset)

        for prev, nxt in zip(segments, segments[1:]):
            gap = nxt.s_offset - prev.s_end
            if abs(gap) > GAP_TOLERANCE:
                self.log.warning(f"road {road_id}: geometry gap of {gap:.6g} m at s={nxt.s_offset}", "geometry_gap")
        return tuple(segments)

    def read_geometry(self, geo, road_id: str) -> Optional[GeometrySegment]:
        s = _float(geo, "s", source=self.source)
        x = _float(geo, "x", source=self.source)
        y = _float(geo, "y", source=self.source)
        hdg = _float(geo, "hdg", source=self.source)
        length = _float(geo, "length", source=self.source)

        kinds = _children(geo)
        if not kinds:
            raise MalformedXml("<geometry> without primitive", source=self.source, line=geo.sourceline)
        prim = kinds[0]
        if length <= 0.0:
            self.log.warning(f"road {road_id}: zero-length <{prim.tag}> at s={s} skipped",
                             "degenerate_geometry", geo.sourceline)
            return None

        base = dict(s_offset=s, x=x, y=y, heading=hdg, length=length)
        if prim.tag == "line":
            return GeometrySegment(kind="line", **base)
        if prim.tag == "arc":
            curvature = _float(prim, "curvature", source=self.source)
            if curvature == 0.0:
                self.log.info(f"road {road_id}: arc with zero curvature read as line", "degenerate_geometry",
                              prim.sourceline)
                return GeometrySegment(kind="line", **base)
            return GeometrySegment(kind="arc", curvature=curvature, **base)
        if prim.tag == "spiral":
            return GeometrySegment(
                kind="spiral",
                curv_start=_float(prim, "curvStart", source=self.source),
                curv_end=_float(prim, "curvEnd", source=self.source),
                **base,
            )
        if prim.tag == "poly3":
            coeffs = tuple(_float(prim, k, 0.0) for k in ("a", "b", "c", "d"))
            return GeometrySegment(kind="poly3", poly=coeffs, **base)
        if prim.tag == "paramPoly3":
            coeffs = tuple(_float(prim, k, 0.0) for k in ("aU", "bU", "cU", "dU", "aV", "bV", "cV", "dV"))
            p_range = prim.get("pRange", "normalized")
            if p_range not in ("arcLength", "normalized"):
                raise MalformedXml(f"paramPoly3 pRange '{p_range}' is invalid", source=self.source,
                                   line=prim.sourceline)
            return GeometrySegment(kind="paramPoly3", poly=coeffs, p_range=p_range, **base)
        raise UnsupportedGeometry(prim.tag, source=self.source, line=prim.sourceline)

    def read_lanes(self, element, road_id: str) -> Tuple[Tuple[Poly3, ...], Tuple[LaneSection, ...]]:
        offsets: List[Poly3] = []
        sections: List[LaneSection] = []
        for child in _children(element):
            if child.tag == "laneOffset":
                offsets.append(self.read_poly(child, "s"))
            elif child.tag == "laneSection":
                sections.append(self.read_lane_section(child, road_id))
        offsets.sort(key=lambda p: p.s_offset)
        sections.sort(key=lambda sec: sec.s_start)
        return tuple(offsets), tuple(sections)

    def read_poly(self, element, s_name: str) -> Poly3:
        return Poly3(
            s_offset=_float(element, s_name, source=self.source),
            a=_float(element, "a", 0.0),
            b=_float(element, "b", 0.0),
            c=_float(element, "c", 0.0),
            d=_float(element, "d", 0.0),
        )

    def read_lane_section(self, element, road_id: str) -> LaneSection:
        lanes: List[Lane] = []
        for side in _children(element):
            if side.tag not in ("left", "center", "right"):
                continue
            for lane_el in _children(side):
                if lane_el.tag == "lane":
                    lanes.append(self.read_lane(lane_el, road_id))

        ids = [lane.lane_id for lane in lanes]
        if len(set(ids)) != len(ids):
            raise MalformedXml(f"road {road_id}: duplicate lane ids in lane section", source=self.source,
                               line=element.sourceline)
        lanes.sort(key=lambda lane: -lane.lane_id)
        return LaneSection(s_start=_float(element, "s", source=self.source), lanes=tuple(lanes))

    def read_lane(self, element, road_id: str) -> Lane:
        lane_id = _int(element, "id", source=self.source)
        widths: List[Poly3] = []
        predecessors: List[int] = []
        successors: List[int] = []
        for child in _children(element):
            if child.tag == "width":
                widths.append(self.read_poly(child, "sOffset"))
            elif child.tag == "border":
                raise UnsupportedFeature(
                    f"road {road_id} lane {lane_id}: <border> lane records are not supported, use <width>",
                    source=self.source, line=child.sourceline,
                )
            elif child.tag == "link":
                for link in _children(child):
                    if link.tag == "predecessor":
                        predecessors.append(_int(link, "id", source=self.source))
                    elif link.tag == "successor":
                        successors.append(_int(link, "id", source=self.source))
            elif child.tag not in SILENT_LANE_ELEMENTS:
                self.log.warning(f"road {road_id} lane {lane_id}: unknown element <{child.tag}> ignored",
                                 "unknown_element", child.sourceline)
        widths.sort(key=lambda w: w.s_offset)
        return Lane(
            lane_id=lane_id,
            lane_type=element.get("type", "none"),
            widths=tuple(widths),
            link=LaneLink(predecessors=tuple(predecessors), successors=tuple(successors)),
        )

    def read_junction(self, element) -> Junction:
        connections: List[JunctionConnection] = []
        for conn in _children(element):
            if conn.tag != "connection":
                continue
            lane_links = tuple(
                (_int(ll, "from", source=self.source), _int(ll, "to", source=self.source))
                for ll in _children(conn) if ll.tag == "laneLink"
            )
            connections.append(JunctionConnection(
                incoming_road=conn.get("incomingRoad", ""),
                connecting_road=conn.get("connectingRoad", ""),
                contact_point=conn.get("contactPoint", "start"),
                lane_links=lane_links,
            ))
        return Junction(junction_id=element.get("id", ""), name=element.get("name", ""),
                        connections=tuple(connections))


def parse_opendrive(xml_text: Union[str, bytes], source: Optional[str] = None) -> OpenDriveDocument:
    """
    Parse an OpenDRIVE document.

    Args:
        xml_text: file content
        source: file name used in diagnostics and error messages

    Returns:
        OpenDriveDocument with roads, junctions and warning records
    """
    root = load_xml(xml_text, "OpenDRIVE", source)
    document = _OpenDriveReader(source).read(root)
    logger.info(f"Parsed {len(document.roads)} road(s), {len(document.junctions)} junction(s)")
    return document
