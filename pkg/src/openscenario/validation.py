"""
Storyboard validation

Static checks run before simulation. Nothing here raises; every finding is
returned as a Diagnostic (errors block conversion in the pipeline).
"""

import logging
from typing import List

from src.monitoring.diagnostics import Diagnostic, DiagnosticLog
from src.openscenario.model import (
    ENTITY_PREDICATES,
    LaneChangeRelativeAction,
    RelativeDistanceCondition,
    ScenarioDocument,
    SpeedRelativeAction,
    StoryboardElementStateCondition,
    StoryboardElementType,
    TeleportAction,
    UnsupportedAction,
)

logger = logging.getLogger("osc2cr.openscenario")

NO_STOP_TRIGGER = "no stop trigger; t_max applies"


def validate_storyboard(document: ScenarioDocument) -> List[Diagnostic]:
    """
    Check entity and element references of a parsed document.

    Returns:
        Diagnostics: errors for dangling references, a warning when no stop
        trigger exists, info records for skipped placeholders
    """
    log = DiagnosticLog(logger, document.source)
    names = set(document.entity_names)
    storyboard = document.storyboard

    def check_entity(name: str, where: str) -> None:
        if name not in names:
            log.error(f"{where} references unknown entity '{name}'", "unknown_entity")

    positioned = set()
    for init in storyboard.init_actions:
        check_entity(init.entity, "Init action")
        if isinstance(init.action, TeleportAction):
            positioned.add(init.entity)
        if isinstance(init.action, (SpeedRelativeAction, LaneChangeRelativeAction)):
            check_entity(init.action.entity_ref, f"Init action of '{init.entity}'")
    for name in document.entity_names:
        if name not in positioned:
            log.error(f"entity '{name}' has no TeleportAction in Init", "missing_init_position")

    placeholders = 0
    for path, kind, element in storyboard.elements():
        if kind is StoryboardElementType.MANEUVER_GROUP:
            if not element.actors:
                log.error(f"maneuver group '{path}' has no actors", "missing_actors")
            for actor in element.actors:
                check_entity(actor, f"maneuver group '{path}'")
        elif kind is StoryboardElementType.ACTION:
            action = element.action
            if isinstance(action, UnsupportedAction):
                placeholders += 1
            elif isinstance(action, (SpeedRelativeAction, LaneChangeRelativeAction)):
                check_entity(action.entity_ref, f"action '{path}'")
    if placeholders:
        log.info(f"{placeholders} placeholder action(s) will be skipped", "placeholder_actions")

    has_stop = False
    for owner, trigger in storyboard.triggers():
        if owner == "StopTrigger" and trigger.groups:
            has_stop = True
        for condition in trigger.conditions():
            predicate = condition.predicate
            where = f"condition '{condition.name}' of {owner}"
            if isinstance(predicate, ENTITY_PREDICATES):
                if not condition.triggering_entities:
                    log.error(f"{where} has no triggering entities", "missing_triggering_entities")
                for name in condition.triggering_entities:
                    check_entity(name, where)
            if isinstance(predicate, RelativeDistanceCondition):
                check_entity(predicate.entity_ref, where)
            if isinstance(predicate, StoryboardElementStateCondition):
                matches = storyboard.resolve_element(predicate.element_ref, predicate.element_type)
                if not matches:
                    log.error(f"{where} references unknown {predicate.element_type.value} "
                              f"'{predicate.element_ref}'", "unknown_element")
                elif len(matches) > 1:
                    log.warning(f"{where}: '{predicate.element_ref}' is ambiguous, using {matches[0]}",
                                "ambiguous_element")

    if not has_stop:
        log.warning(NO_STOP_TRIGGER, "no_stop_trigger")
    return log.entries
