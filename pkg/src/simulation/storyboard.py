"""
Storyboard runtime

Phase bookkeeping for the Story > Act > ManeuverGroup > Maneuver > Event >
Action tree: starts, natural completion, re-arming of events and maneuver
groups with executions left, and forced completion by stop triggers or
overwriting events. Every phase change is appended to the transition log.
"""

from typing import Dict, Iterator, List, Set, Tuple

from src.openscenario.model import ElementState, Storyboard, StoryboardElementType
from src.simulation.state import ElementRuntime, PhaseTransition

RUNNING = ElementState.RUNNING
COMPLETE = ElementState.COMPLETE
STANDBY = ElementState.STANDBY


class StoryboardRuntime:
    """Runtime tree mirroring a Storyboard."""

    def __init__(self, storyboard: Storyboard):
        self.storyboard = storyboard
        self.elements: Dict[str, ElementRuntime] = {}
        self.stories: List[ElementRuntime] = []
        self.transitions: List[PhaseTransition] = []
        self._unobserved: Set[Tuple[str, ElementState]] = set()

        parents: Dict[str, ElementRuntime] = {}
        for path, kind, element in storyboard.elements():
            count = getattr(element, "maximum_execution_count", 1)
            runtime = ElementRuntime(path=path, element_type=kind, element=element, maximum_execution_count=count)
            self.elements[path] = runtime
            parents[path] = runtime
            parent_path = path.rsplit("/", 1)[0] if "/" in path else None
            if parent_path is None:
                self.stories.append(runtime)
            else:
                parents[parent_path].children.append(runtime)

    def __getitem__(self, path: str) -> ElementRuntime:
        return self.elements[path]

    def of_type(self, kind: StoryboardElementType) -> Iterator[ElementRuntime]:
        return (rt for rt in self.elements.values() if rt.element_type is kind)

    def phases(self) -> Dict[str, ElementState]:
        return {path: rt.phase for path, rt in self.elements.items()}

    def observe(self) -> Set[Tuple[str, ElementState]]:
        """Transitions since the last call, as (path, START/END_TRANSITION)."""
        seen, self._unobserved = self._unobserved, set()
        return seen

    # ------------------------------------------------------------ phases

    def set_phase(self, runtime: ElementRuntime, phase: ElementState, frame: int) -> None:
        if runtime.phase is phase:
            return
        runtime.phase = phase
        self.transitions.append(PhaseTransition(frame, runtime.path, runtime.element_type, phase))
        if phase is RUNNING:
            runtime.start_frame = frame
            self._unobserved.add((runtime.path, ElementState.START_TRANSITION))
        elif phase is COMPLETE:
            runtime.end_frame = frame
            self._unobserved.add((runtime.path, ElementState.END_TRANSITION))

    def start(self, runtime: ElementRuntime, frame: int) -> None:
        runtime.executions_done += 1
        self.set_phase(runtime, RUNNING, frame)

    def start_act(self, act: ElementRuntime, frame: int) -> None:
        """Start an act together with its maneuver groups and their maneuvers."""
        self.start(act, frame)
        for group in act.children:
            self._start_group(group, frame)

    def _start_group(self, group: ElementRuntime, frame: int) -> None:
        self.start(group, frame)
        for maneuver in group.children:
            self.start(maneuver, frame)

    def _reset(self, runtime: ElementRuntime, frame: int) -> None:
        for child in runtime.children:
            child.executions_done = 0
            child.stopped = False
            self.set_phase(child, STANDBY, frame)
            self._reset(child, frame)

    def force_complete(self, runtime: ElementRuntime, frame: int) -> List[ElementRuntime]:
        """
        Complete an element and every unfinished descendant.

        Returns:
            The action elements that were still running
        """
        interrupted = []
        for child in runtime.children:
            interrupted.extend(self.force_complete(child, frame))
        if runtime.phase is not COMPLETE or not runtime.finished:
            if runtime.phase is RUNNING and runtime.element_type is StoryboardElementType.ACTION:
                interrupted.append(runtime)
            runtime.stopped = True
            self.set_phase(runtime, COMPLETE, frame)
        return interrupted

    # ------------------------------------------------------------ completion

    def complete_event(self, event: ElementRuntime, frame: int) -> None:
        self.set_phase(event, COMPLETE, frame)
        if not event.exhausted:
            self.set_phase(event, STANDBY, frame)
            self._reset(event, frame)

    def propagate(self, frame: int) -> None:
        """Complete maneuvers, groups, acts and stories whose children are all finished."""
        for story in self.stories:
            for act in story.children:
                if act.phase is not RUNNING:
                    continue
                for group in act.children:
                    if group.phase is not RUNNING:
                        continue
                    for maneuver in group.children:
                        if maneuver.phase is RUNNING and all(e.finished for e in maneuver.children):
                            self.set_phase(maneuver, COMPLETE, frame)
                    if all(m.finished for m in group.children):
                        self.set_phase(group, COMPLETE, frame)
                        if not group.exhausted:
                            self._reset(group, frame)
                            self._start_group(group, frame)
                if all(g.finished for g in act.children):
                    self.set_phase(act, COMPLETE, frame)
            if story.phase is RUNNING and all(a.finished for a in story.children):
                self.set_phase(story, COMPLETE, frame)

    def all_complete(self) -> bool:
        return all(story.finished for story in self.stories)
