"""
Simulation State

Value types shared by the storyboard simulator: run configuration, per-frame
entity states, storyboard element runtimes and the finished trace.
"""

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional

from src.monitoring.diagnostics import Diagnostic
from src.openscenario.model import ElementState, StoryboardElementType


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step settings of one simulation run."""
    dt_sim: float = 0.01
    t_max: float = 60.0

    def __post_init__(self):
        if not self.dt_sim > 0:
            raise ValueError(f"dt_sim must be > 0, got {self.dt_sim}")
        if self.t_max < self.dt_sim:
            raise ValueError(f"t_max ({self.t_max}) must be >= dt_sim ({self.dt_sim})")

    @property
    def max_frame(self) -> int:
        return int(round(self.t_max / self.dt_sim))

    def frames(self, seconds: float) -> int:
        """Seconds as a whole number of frames, rounded to nearest."""
        return int(round(seconds / self.dt_sim))

    def time(self, frame: int) -> float:
        return frame * self.dt_sim


class LaneRef(NamedTuple):
    """
    Lane bookkeeping of the lane-following controller.

    ``t`` is the offset from the lane centre, positive to the left of the
    direction of travel; ``direction`` is +1 when travelling towards
    increasing s.
    """
    road_id: str
    lane_id: int
    s: float
    t: float = 0.0
    direction: int = 1


@dataclass(frozen=True)
class EntityState:
    frame: int
    x: float
    y: float
    h: float
    speed: float = 0.0
    wheel_angle: float = 0.0
    lane_ref: Optional[LaneRef] = None

    def distance_to(self, other: "EntityState") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["lane_ref"] = self.lane_ref._asdict() if self.lane_ref else None
        return data


class TerminationReason(str, Enum):
    STOP_TRIGGER = "stop_trigger"
    ALL_COMPLETE = "all_complete"
    T_MAX = "t_max"


class PhaseTransition(NamedTuple):
    frame: int
    path: str
    element_type: StoryboardElementType
    phase: ElementState


@dataclass
class ElementRuntime:
    """Runtime phase of one storyboard element."""
    path: str
    element_type: StoryboardElementType
    element: Any = None
    maximum_execution_count: int = 1
    phase: ElementState = ElementState.STANDBY
    executions_done: int = 0
    start_frame: Optional[int] = None
    end_frame: Optional[int] = None
    stopped: bool = False
    children: List["ElementRuntime"] = field(default_factory=list)

    @property
    def exhausted(self) -> bool:
        return self.executions_done >= self.maximum_execution_count

    @property
    def finished(self) -> bool:
        """Complete with no executions left, or stopped."""
        return self.phase is ElementState.COMPLETE and (self.exhausted or self.stopped)

    @property
    def name(self) -> str:
        return self.path.rsplit("/", 1)[-1]


@dataclass
class SimulationTrace:
    """Recorded output of one simulation run."""
    states: Dict[str, List[EntityState]]
    termination_reason: TerminationReason
    dt_sim: float
    transitions: List[PhaseTransition] = field(default_factory=list)
    traveled: Dict[str, float] = field(default_factory=dict)
    diagnostics: List[Diagnostic] = field(default_factory=list)

    @property
    def entity_names(self) -> List[str]:
        return list(self.states)

    @property
    def final_frame(self) -> int:
        for states in self.states.values():
            return states[-1].frame
        return 0

    @property
    def num_frames(self) -> int:
        return self.final_frame + 1

    @property
    def duration(self) -> float:
        return self.final_frame * self.dt_sim

    def phase_log(self, path: str) -> List[PhaseTransition]:
        return [entry for entry in self.transitions if entry.path == path]

    def first_frame(self, path: str, phase: ElementState) -> Optional[int]:
        for entry in self.transitions:
            if entry.path == path and entry.phase is phase:
                return entry.frame
        return None
