"""
Conversion pipeline

OpenSCENARIO to CommonRoad for one file: parse the scenario, load its road
network, validate, simulate the storyboard, build the CommonRoad scenario and
write the outputs. ``convert_file`` never raises for conversion problems; it
returns a ``ConversionResult`` with an exit code instead.
"""

import hashlib
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.commonroad.builder import build_scenario
from src.commonroad.model import Scenario
from src.commonroad.render import write_svg
from src.commonroad.writer import write_xml
from src.errors import ConversionError, ConversionIOError, MissingRoadNetwork, RoadNetworkNotFound
from src.monitoring.diagnostics import Diagnostic
from src.opendrive.road_map import OpenDriveMap
from src.openscenario.model import ScenarioDocument
from src.openscenario.parser import parse_openscenario
from src.openscenario.validation import validate_storyboard
from src.optimization.caching import map_cache
from src.settings import ConverterSettings
from src.simulation.engine import run
from src.simulation.state import SimulationTrace
from src.simulation.trace_csv import write_trace_csv

logger = logging.getLogger("osc2cr.pipeline")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# missing inputs are usage errors, everything else is a failed conversion
USAGE_ERRORS = (ConversionIOError, MissingRoadNetwork, RoadNetworkNotFound)


class ValidationFailed(ConversionError):
    code = "validation_failed"


@dataclass
class Conversion:
    """In-memory result of a successful conversion."""
    document: ScenarioDocument
    road_map: OpenDriveMap
    trace: SimulationTrace
    scenario: Scenario
    diagnostics: List[Diagnostic] = field(default_factory=list)


@dataclass
class ConversionResult:
    """Outcome of converting one file, as listed in the batch report."""
    input_path: str
    success: bool
    exit_code: int
    conversion_time: float = 0.0
    scenario_duration: Optional[float] = None
    termination_reason: Optional[str] = None
    warnings: int = 0
    outputs: Dict[str, str] = field(default_factory=dict)
    output_sha256: Dict[str, str] = field(default_factory=dict)
    error: Optional[str] = None
    error_code: Optional[str] = None
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def load_road_map(path: Path, settings: ConverterSettings) -> OpenDriveMap:
    """Road map of an .xodr file, shared through the map cache."""
    try:
        data = path.read_bytes()
    except OSError as e:
        raise RoadNetworkNotFound(f"road network '{path}' cannot be read: {e.strerror or e}", source=str(path)) from e
    key = map_cache.key(data, settings.sampling_step, settings.lane_types)
    return map_cache.get_or_build(key, lambda: OpenDriveMap.from_xml(
        data, source=str(path), sampling_step=settings.sampling_step, lane_types=settings.lane_types))


def convert_document(document: ScenarioDocument, road_map: OpenDriveMap,
                     settings: Optional[ConverterSettings] = None, stem: str = "Scenario") -> Conversion:
    """
    Validate, simulate and build: the in-memory part of the pipeline.

    Raises:
        ValidationFailed: the storyboard has error-level findings
    """
    settings = settings or ConverterSettings()
    diagnostics = list(document.diagnostics) + list(road_map.diagnostics)
    findings = validate_storyboard(document)
    diagnostics.extend(findings)
    errors = [d for d in findings if d.level == "error"]
    if errors:
        raise ValidationFailed(f"{len(errors)} validation error(s); first: {errors[0].message}",
                               source=document.source)

    trace = run(document, road_map, settings.sim_config())
    diagnostics.extend(trace.diagnostics)
    scenario = build_scenario(trace, road_map.network, document, settings, stem)
    return Conversion(document, road_map, trace, scenario, diagnostics)


def convert_scenario(input_path: Union[str, Path], settings: Optional[ConverterSettings] = None) -> Conversion:
    """Parse an .xosc file and its road network, then convert in memory."""
    settings = settings or ConverterSettings()
    input_path = Path(input_path)
    try:
        text = input_path.read_bytes()
    except OSError as e:
        raise ConversionIOError(f"cannot read input: {e.strerror or e}", source=str(input_path)) from e

    document = parse_openscenario(text, overrides=settings.parameters, source=str(input_path),
                                  base_dir=input_path.parent, default_edge=settings.default_condition_edge)
    road_path = (input_path.parent / document.road_network_ref).resolve()
    road_map = load_road_map(road_path, settings)
    return convert_document(document, road_map, settings, input_path.stem)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def convert_file(input_path: Union[str, Path], output_dir: Optional[Union[str, Path]] = None,
                 settings: Optional[ConverterSettings] = None) -> ConversionResult:
    """
    Convert one .xosc file and write `<stem>.xml` (plus `.svg` / `.trace.csv`
    when enabled) into `output_dir` (default: next to the input).

    Returns:
        ConversionResult; exit code 0 on success, 1 on conversion failure,
        2 when the input or its road network cannot be found
    """
    settings = settings or ConverterSettings()
    input_path = Path(input_path)
    out = Path(output_dir) if output_dir is not None else input_path.parent
    result = ConversionResult(input_path=str(input_path), success=False, exit_code=EXIT_FAILURE)
    started = time.perf_counter()

    try:
        conversion = convert_scenario(input_path, settings)
        out.mkdir(parents=True, exist_ok=True)
        outputs = {"commonroad": out / f"{input_path.stem}.xml"}
        write_xml(conversion.scenario, outputs["commonroad"])
        if settings.render:
            outputs["svg"] = out / f"{input_path.stem}.svg"
            write_svg(conversion.scenario, outputs["svg"])
        if settings.trace_csv:
            outputs["trace_csv"] = out / f"{input_path.stem}.trace.csv"
            write_trace_csv(conversion.trace, outputs["trace_csv"])
    except USAGE_ERRORS as e:
        result.exit_code = EXIT_USAGE
        result.error, result.error_code = str(e), e.code
    except ConversionError as e:
        result.error, result.error_code = str(e), e.code
    except OSError as e:
        result.error, result.error_code = f"{input_path}: {e}", ConversionIOError.code
    else:
        trace = conversion.trace
        result.success = True
        result.exit_code = EXIT_OK
        result.scenario_duration = trace.duration
        result.termination_reason = trace.termination_reason.value
        result.outputs = {kind: str(path) for kind, path in outputs.items()}
        result.output_sha256 = {kind: _sha256(path) for kind, path in outputs.items()}
        result.warnings = sum(1 for d in conversion.diagnostics if d.level == "warning")
        result.diagnostics = [d.model_dump() for d in conversion.diagnostics]

    result.conversion_time = time.perf_counter() - started
    if result.success:
        logger.info(f"Converted {input_path} in {result.conversion_time:.2f} s "
                    f"({result.termination_reason}, {result.warnings} warning(s))")
    else:
        logger.error(f"Conversion of {input_path} failed: {result.error}")
    return result
