"""A small property-schema checker.

Fragments are written like JSON Schema ``properties`` objects::

    screen_size: {type: number, minimum: 0}
    resolution: {type: string, enum: [SD, HD, 4K], required: true}

Supported keywords: ``type``, ``enum``, ``minimum``, ``maximum``, ``pattern``,
``required``, ``items`` (sequences) and ``properties`` (nested mappings).
Anything else in a rule (``description`` for instance) is ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .diagnostics import Diagnostic, MetadataError, error, join_path
from .nodes import Node

# JSON Schema spellings map onto the node kinds used here
_KIND_ALIASES = {
    "string": "string", "integer": "integer", "number": "number", "boolean": "boolean",
    "null": "null", "sequence": "sequence", "array": "sequence",
    "mapping": "mapping", "object": "mapping",
}


def _value_kinds(value: Any) -> set[str]:
    if isinstance(value, bool):
        return {"boolean"}
    if isinstance(value, int):
        return {"integer", "number"}
    if isinstance(value, float):
        return {"number"}
    if isinstance(value, str):
        return {"string"}
    if value is None:
        return {"null"}
    if isinstance(value, dict):
        return {"mapping"}
    if isinstance(value, tuple):
        return {"sequence"}
    return {type(value).__name__}


@dataclass(frozen=True)
class PropertyRule:
    kinds: tuple[str, ...] = ()
    enum: Optional[tuple] = None
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    pattern: Optional[str] = None
    required: bool = False
    items: Optional["PropertyRule"] = None
    properties: Optional["SchemaFragment"] = None


@dataclass(frozen=True)
class SchemaFragment:
    properties: Mapping[str, PropertyRule] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.properties

    def __len__(self) -> int:
        return len(self.properties)


def rule_from_doc(doc: Mapping[str, Any], path: str = "") -> PropertyRule:
    if not isinstance(doc, Mapping):
        raise MetadataError("E-SCHEMA-FRAGMENT", f"a property rule must be a mapping, got {doc!r}",
                            path)
    kinds = doc.get("type", ())
    if isinstance(kinds, str):
        kinds = (kinds,)
    unknown = [k for k in kinds if k not in _KIND_ALIASES]
    if unknown:
        raise MetadataError("E-SCHEMA-FRAGMENT", f"unknown type {unknown[0]!r}",
                            join_path(path, "type"))
    minimum, maximum = doc.get("minimum"), doc.get("maximum")
    if minimum is not None and maximum is not None and minimum > maximum:
        raise MetadataError("E-SCHEMA-FRAGMENT", f"minimum {minimum} exceeds maximum {maximum}",
                            path)
    pattern = doc.get("pattern")
    if pattern is not None:
        try:
            re.compile(pattern)
        except re.error as exc:
            raise MetadataError("E-SCHEMA-FRAGMENT", f"bad pattern {pattern!r}: {exc}",
                                join_path(path, "pattern")) from None
    items = doc.get("items")
    props = doc.get("properties")
    enum = doc.get("enum")
    return PropertyRule(
        kinds=tuple(_KIND_ALIASES[k] for k in kinds),
        enum=tuple(enum) if enum is not None else None,
        minimum=minimum,
        maximum=maximum,
        pattern=pattern,
        required=bool(doc.get("required", False)),
        items=rule_from_doc(items, join_path(path, "items")) if items is not None else None,
        properties=(fragment_from_doc(props, join_path(path, "properties"))
                    if props is not None else None),
    )


def fragment_from_doc(doc: Optional[Mapping[str, Any]], path: str = "") -> SchemaFragment:
    """Build a fragment from a ``{property name: rule}`` mapping."""
    if not doc:
        return SchemaFragment()
    return SchemaFragment({name: rule_from_doc(rule, join_path(path, name))
                           for name, rule in doc.items()})


def fragment_to_doc(fragment: SchemaFragment) -> dict:
    return {name: _rule_to_doc(rule) for name, rule in fragment.properties.items()}


def _rule_to_doc(rule: PropertyRule) -> dict:
    doc: dict[str, Any] = {}
    if rule.kinds:
        doc["type"] = rule.kinds[0] if len(rule.kinds) == 1 else list(rule.kinds)
    if rule.enum is not None:
        doc["enum"] = list(rule.enum)
    for key in ("minimum", "maximum", "pattern"):
        if getattr(rule, key) is not None:
            doc[key] = getattr(rule, key)
    if rule.required:
        doc["required"] = True
    if rule.items is not None:
        doc["items"] = _rule_to_doc(rule.items)
    if rule.properties is not None:
        doc["properties"] = fragment_to_doc(rule.properties)
    return doc


def validate_value(node: Node, rule: PropertyRule, path: str) -> list[Diagnostic]:
    """Check one value against one rule."""
    out = []
    value = node.value
    kinds = _value_kinds(value)
    if rule.kinds and not kinds & set(rule.kinds):
        shown = value if node.kind == "scalar" else node.kind
        out.append(error("E-SCHEMA-KIND", path,
                         f"expected {' or '.join(rule.kinds)}, got {shown!r}", node.span))
        return out
    if rule.enum is not None and node.to_python() not in rule.enum:
        out.append(error("E-SCHEMA-ENUM", path,
                         f"{value!r} is not one of {list(rule.enum)}", node.span))
    if kinds & {"integer", "number"}:
        if rule.minimum is not None and value < rule.minimum:
            out.append(error("E-SCHEMA-MINIMUM", path,
                             f"{value} is below the minimum {rule.minimum}", node.span))
        if rule.maximum is not None and value > rule.maximum:
            out.append(error("E-SCHEMA-MAXIMUM", path,
                             f"{value} is above the maximum {rule.maximum}", node.span))
    if rule.pattern is not None and isinstance(value, str) and not re.search(rule.pattern, value):
        out.append(error("E-SCHEMA-PATTERN", path,
                         f"{value!r} does not match {rule.pattern!r}", node.span))
    if rule.items is not None and isinstance(value, tuple):
        for i, item in enumerate(value):
            out.extend(validate_value(item, rule.items, join_path(path, i)))
    if rule.properties is not None and isinstance(value, dict):
        out.extend(validate_against_fragment(node, rule.properties, path))
    return out


def validate_against_fragment(node: Node, fragment: SchemaFragment,
                              path: str = "") -> list[Diagnostic]:
    """Check a mapping node's properties against ``fragment``.

    Properties the fragment does not mention are not reported here.
    """
    node = Node.from_python(node)
    if node.kind != "mapping":
        return [error("E-SCHEMA-KIND", path, f"expected a mapping, got {node.kind}", node.span)]
    out = []
    for name, rule in fragment.properties.items():
        child = node.value.get(name)
        if child is None:
            if rule.required:
                out.append(error("E-SCHEMA-REQUIRED", join_path(path, name),
                                 f"required property {name!r} is missing", node.span))
            continue
        out.extend(validate_value(child, rule, join_path(path, name)))
    return out
