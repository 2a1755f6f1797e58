"""
Parameter substitution

Resolves ``$name`` references in an OpenSCENARIO XML tree before typed
parsing. Values come from ``ParameterDeclaration`` elements, overridden by a
caller-supplied map; declared types are checked on the final value.
"""

import logging
import re
from typing import Any, Dict, Mapping, Optional

from src.errors import TypeMismatch, UnresolvedParameter, UnsupportedFeature

logger = logging.getLogger("osc2cr.openscenario")

REFERENCE = re.compile(r"\$([A-Za-z_][A-Za-z0-9_]*)")
EXPRESSION = re.compile(r"\$\{")

INTEGER_TYPES = {"integer", "int", "unsignedInt", "unsignedShort"}


def _check_type(name: str, parameter_type: str, value: str, line: Optional[int], source: Optional[str]) -> None:
    try:
        if parameter_type in INTEGER_TYPES:
            number = int(value)
            if parameter_type != "integer" and parameter_type != "int" and number < 0:
                raise ValueError(value)
        elif parameter_type == "double":
            float(value)
        elif parameter_type == "boolean":
            if value not in ("true", "false"):
                raise ValueError(value)
    except ValueError:
        raise TypeMismatch(name, parameter_type, value, source=source, line=line) from None


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _substitute_text(text: str, values: Mapping[str, str], line: Optional[int], source: Optional[str]) -> str:
    if EXPRESSION.search(text):
        raise UnsupportedFeature(f"parameter expression '{text}' is not supported; only $name references are",
                                 source=source, line=line)

    def replace(match: "re.Match") -> str:
        name = match.group(1)
        if name not in values:
            raise UnresolvedParameter(name, source=source, line=line)
        return values[name]

    return REFERENCE.sub(replace, text)


def collect_declarations(root, overrides: Optional[Mapping[str, Any]] = None,
                         source: Optional[str] = None) -> Dict[str, str]:
    """
    Final parameter values of a tree: declarations in document order, each
    value resolved against the ones declared before it, then overrides.
    """
    overrides = {k: format_value(v) for k, v in (overrides or {}).items()}
    values: Dict[str, str] = {}
    types: Dict[str, str] = {}
    lines: Dict[str, Optional[int]] = {}

    for decl in root.iter("ParameterDeclaration"):
        name = decl.get("name")
        if not name:
            continue
        raw = decl.get("value", "")
        if "$" in raw:
            raw = _substitute_text(raw, {**values, **overrides}, decl.sourceline, source)
        if name not in values:
            values[name] = raw
            types[name] = decl.get("parameterType", "string")
            lines[name] = decl.sourceline

    values.update(overrides)
    for name, value in values.items():
        if name in types:
            _check_type(name, types[name], value, lines[name], source)
    return values


def substitute_parameters(root, overrides: Optional[Mapping[str, Any]] = None,
                          source: Optional[str] = None) -> Dict[str, str]:
    """
    Replace every ``$name`` occurrence in attribute values in place.

    Args:
        root: lxml element (modified in place)
        overrides: name -> value map that shadows declarations
        source: file name for error context

    Returns:
        The resolved parameter values

    Raises:
        UnresolvedParameter: reference to a name neither declared nor overridden
        TypeMismatch: value does not parse as the declared type
    """
    values = collect_declarations(root, overrides, source)
    count = 0
    for element in root.iter():
        if not isinstance(element.tag, str):
            continue
        for attr, text in element.attrib.items():
            if "$" in text:
                element.set(attr, _substitute_text(text, values, element.sourceline, source))
                count += 1
    for decl in root.iter("ParameterDeclaration"):
        if decl.get("name") in values:
            decl.set("value", values[decl.get("name")])
    if count:
        logger.debug(f"Substituted {count} parameter reference(s)")
    return values
