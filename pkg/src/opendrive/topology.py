"""
Lane topology

Lane-level connectivity graph over every lane of every section. Geometric
joins (lane end touching lane start) come from implicit same-id links between
sections, explicit lane links, road links and junction connections; traffic
successors are derived from the joins using right-hand driving direction
(negative lane ids drive along +s, positive ids along -s).
"""

import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Set, Tuple

from src.errors import DanglingLink
from src.monitoring.diagnostics import DiagnosticLog
from src.opendrive.model import Junction, OpenDriveRoad, RoadLink

logger = logging.getLogger("osc2cr.opendrive")

LaneKey = Tuple[str, int, int]  # (road_id, section_index, lane_id)
Join = Tuple[LaneKey, str, str]  # (other lane, own end, other end)


def driving_direction(lane_id: int) -> int:
    """+1 when traffic follows increasing s, -1 otherwise."""
    return 1 if lane_id < 0 else -1


def exit_end(lane_id: int) -> str:
    return "end" if driving_direction(lane_id) > 0 else "start"


def entry_end(lane_id: int) -> str:
    return "start" if driving_direction(lane_id) > 0 else "end"


def shift_lane(lane_id: int, steps: int) -> int:
    """
    Lane id `steps` lanes towards +t (negative steps: towards -t). Lane 0 is
    the reference line and is skipped.
    """
    for _ in range(abs(steps)):
        lane_id += 1 if steps > 0 else -1
        if lane_id == 0:
            lane_id += 1 if steps > 0 else -1
    return lane_id


class LaneGraph:
    """Undirected lane joins plus the traffic successors they imply."""

    def __init__(self):
        self.lanes: List[LaneKey] = []
        self._joins: Dict[LaneKey, Set[Join]] = defaultdict(set)

    def add_lane(self, key: LaneKey) -> None:
        self.lanes.append(key)

    def connect(self, a: LaneKey, end_a: str, b: LaneKey, end_b: str) -> None:
        self._joins[a].add((b, end_a, end_b))
        self._joins[b].add((a, end_b, end_a))

    def joins(self, key: LaneKey) -> List[Join]:
        return sorted(self._joins.get(key, ()))

    def successors(self, key: LaneKey) -> List[LaneKey]:
        """Lanes a vehicle driving in `key` can continue into."""
        out = {
            other for other, own_end, other_end in self._joins.get(key, ())
            if own_end == exit_end(key[2]) and other_end == entry_end(other[2])
        }
        return sorted(out)

    def predecessors(self, key: LaneKey) -> List[LaneKey]:
        out = {
            other for other, own_end, other_end in self._joins.get(key, ())
            if own_end == entry_end(key[2]) and other_end == exit_end(other[2])
        }
        return sorted(out)

    @classmethod
    def build(cls, roads: Iterable[OpenDriveRoad], junctions: Iterable[Junction] = (),
              log: Optional[DiagnosticLog] = None) -> "LaneGraph":
        log = log or DiagnosticLog(logger)
        roads = list(roads)
        by_id = {road.road_id: road for road in roads}
        junction_by_id = {j.junction_id: j for j in junctions}
        graph = cls()

        for road in roads:
            for index, section in enumerate(road.lane_sections):
                for lane_id in section.lane_ids:
                    if lane_id != 0:
                        graph.add_lane((road.road_id, index, lane_id))
            graph._link_sections(road)

        for road in roads:
            for link, own_end in ((road.successor, "end"), (road.predecessor, "start")):
                if link is None:
                    continue
                if link.element_type == "junction":
                    junction = junction_by_id.get(link.element_id)
                    if junction is None:
                        log.downgrade(DanglingLink(link.element_id,
                                                   f"road {road.road_id} links to missing junction "
                                                   f"'{link.element_id}'", line=road.line))
                        continue
                    graph._link_junction(road, own_end, junction, by_id, log)
                else:
                    other = by_id.get(link.element_id)
                    if other is None:
                        log.downgrade(DanglingLink(link.element_id,
                                                   f"road {road.road_id} links to missing road "
                                                   f"'{link.element_id}'", line=road.line))
                        continue
                    graph._link_roads(road, own_end, other, link, log)
        return graph

    def _link_sections(self, road: OpenDriveRoad) -> None:
        sections = road.lane_sections
        for i in range(len(sections) - 1):
            here, there = sections[i], sections[i + 1]
            for lane in here.lanes:
                if lane.lane_id == 0:
                    continue
                targets = lane.link.successors or ((lane.lane_id,) if there.lane(lane.lane_id) else ())
                for target in targets:
                    if target != 0 and there.lane(target) is not None:
                        self.connect((road.road_id, i, lane.lane_id), "end", (road.road_id, i + 1, target), "start")
            for lane in there.lanes:
                for source in lane.link.predecessors:
                    if lane.lane_id != 0 and source != 0 and here.lane(source) is not None:
                        self.connect((road.road_id, i, source), "end", (road.road_id, i + 1, lane.lane_id), "start")

    def _link_roads(self, road: OpenDriveRoad, own_end: str, other: OpenDriveRoad,
                    link: RoadLink, log: DiagnosticLog) -> None:
        contact = link.contact_point or ("start" if own_end == "end" else "end")
        own_index = len(road.lane_sections) - 1 if own_end == "end" else 0
        other_index = 0 if contact == "start" else len(other.lane_sections) - 1
        own_section = road.lane_sections[own_index]
        other_section = other.lane_sections[other_index]

        for lane in own_section.lanes:
            if lane.lane_id == 0:
                continue
            explicit = lane.link.successors if own_end == "end" else lane.link.predecessors
            if explicit:
                targets = explicit
            else:
                # without lane links, head-to-tail joins keep the id and head-to-head joins mirror it
                same_orientation = (own_end == "end") == (contact == "start")
                targets = (lane.lane_id if same_orientation else -lane.lane_id,)
            for target in targets:
                if target == 0:
                    continue
                if other_section.lane(target) is None:
                    if explicit:
                        log.warning(f"road {road.road_id} lane {lane.lane_id}: link to missing lane {target} "
                                    f"of road {other.road_id} dropped", DanglingLink.code, road.line)
                    continue
                self.connect((road.road_id, own_index, lane.lane_id), own_end,
                             (other.road_id, other_index, target), contact)

    def _link_junction(self, road: OpenDriveRoad, own_end: str, junction: Junction,
                       by_id: Dict[str, OpenDriveRoad], log: DiagnosticLog) -> None:
        own_index = len(road.lane_sections) - 1 if own_end == "end" else 0
        own_section = road.lane_sections[own_index]
        for conn in junction.connections:
            if conn.incoming_road != road.road_id:
                continue
            connecting = by_id.get(conn.connecting_road)
            if connecting is None:
                log.downgrade(DanglingLink(conn.connecting_road,
                                           f"junction {junction.junction_id} references missing road "
                                           f"'{conn.connecting_road}'"))
                continue
            other_index = 0 if conn.contact_point == "start" else len(connecting.lane_sections) - 1
            other_section = connecting.lane_sections[other_index]
            for source, target in conn.lane_links:
                if own_section.lane(source) is None or other_section.lane(target) is None:
                    log.warning(f"junction {junction.junction_id}: lane link {source}->{target} "
                                f"between roads {road.road_id} and {connecting.road_id} dropped",
                                DanglingLink.code)
                    continue
                self.connect((road.road_id, own_index, source), own_end,
                             (connecting.road_id, other_index, target), conn.contact_point)
