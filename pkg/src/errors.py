"""
Conversion Errors

Single exception hierarchy for the converter. Every error carries a stable
``code`` plus optional file/line context so the CLI can report
``source:line: message`` for any failure.
"""

from typing import Optional


class ConversionError(Exception):
    """Base class of every error raised by the converter."""

    code = "conversion_error"

    def __init__(self, message: str, *, source: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.source = source
        self.line = line

    def with_context(self, source: Optional[str] = None, line: Optional[int] = None) -> "ConversionError":
        """Fill in missing file/line context and return self (for re-raising)."""
        if self.source is None and source is not None:
            self.source = source
        if self.line is None and line is not None:
            self.line = line
        return self

    def __str__(self) -> str:
        prefix = ""
        if self.source:
            prefix = f"{self.source}:"
            if self.line is not None:
                prefix += f"{self.line}:"
            prefix += " "
        elif self.line is not None:
            prefix = f"line {self.line}: "
        return f"{prefix}{self.message}"


class MalformedXml(ConversionError):
    code = "malformed_xml"


class UnsupportedGeometry(ConversionError):
    code = "unsupported_geometry"

    def __init__(self, kind: str, **context):
        super().__init__(f"unsupported planView geometry <{kind}>", **context)
        self.kind = kind


class UnsupportedFeature(ConversionError):
    code = "unsupported_feature"


class OutOfRange(ConversionError):
    code = "out_of_range"


class DanglingLink(ConversionError):
    code = "dangling_link"

    def __init__(self, road_id: str, message: Optional[str] = None, **context):
        super().__init__(message or f"link references missing road '{road_id}'", **context)
        self.road_id = road_id


class UnknownRoad(ConversionError):
    code = "unknown_road"


class UnknownLane(ConversionError):
    code = "unknown_lane"


class MissingRoadNetwork(ConversionError):
    code = "missing_road_network"


class RoadNetworkNotFound(ConversionError):
    code = "road_network_not_found"


class DuplicateEntityName(ConversionError):
    code = "duplicate_entity_name"


class UnresolvedParameter(ConversionError):
    code = "unresolved_parameter"

    def __init__(self, name: str, **context):
        super().__init__(f"parameter '${name}' is neither declared nor overridden", **context)
        self.name = name


class TypeMismatch(ConversionError):
    code = "type_mismatch"

    def __init__(self, name: str, expected: str, value: str, **context):
        super().__init__(f"parameter '{name}' expects {expected}, got '{value}'", **context)
        self.name = name


class UnresolvedCatalogReference(ConversionError):
    code = "unresolved_catalog_reference"


class MissingInitPosition(ConversionError):
    code = "missing_init_position"

    def __init__(self, entity: str, **context):
        super().__init__(f"entity '{entity}' has no TeleportAction in Init", **context)
        self.entity = entity


class UnresolvablePosition(ConversionError):
    code = "unresolvable_position"


class TargetLaneMissing(ConversionError):
    code = "target_lane_missing"


class EmptyTrajectory(ConversionError):
    code = "empty_trajectory"


class NoVehicleEntity(ConversionError):
    code = "no_vehicle_entity"


class OverrideNotFound(ConversionError):
    code = "override_not_found"


class TrajectoryTooShort(ConversionError):
    code = "trajectory_too_short"


class IdSpaceExhausted(ConversionError):
    code = "id_space_exhausted"


class SerializationOverflow(ConversionError):
    code = "serialization_overflow"


class ConversionIOError(ConversionError):
    code = "io_error"
