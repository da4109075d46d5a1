"""Property merging for prototype inheritance.

A child mapping is merged over its parent mapping:

* keys only in the parent are copied, unless listed in ``do_not_inherit``;
* sequences present in both become the union of the two (parent items first,
  deep-equal duplicates collapsed);
* scalars in the child shadow the parent's;
* mappings present in both are merged recursively by the same rules.

``do_not_inherit`` applies to the top level only.
"""

from __future__ import annotations

import datetime as dt
from typing import Collection, Hashable

from .diagnostics import MetadataError, join_path
from .nodes import MAPPING, SEQUENCE, Node


def structural_key(node: Node) -> Hashable:
    """Hashable identity for deep equality.

    Scalars are tagged with their type so that ``1``, ``1.0`` and ``True`` stay
    distinct, matching their distinct lexical kinds in the source document.
    """
    kind = node.kind
    if kind == MAPPING:
        return ("map", tuple(sorted((k, structural_key(v)) for k, v in node.value.items())))
    if kind == SEQUENCE:
        return ("seq", tuple(structural_key(v) for v in node.value))
    value = node.value
    if isinstance(value, dt.date):
        return ("date", value.isoformat())
    return (type(value).__name__, value)


def union_sequences(parent: tuple[Node, ...], child: tuple[Node, ...]) -> tuple[Node, ...]:
    seen = set()
    out = []
    for item in (*parent, *child):
        key = structural_key(item)
        if key not in seen:
            seen.add(key)
            out.append(item)
    return tuple(out)


def merge_node(parent: Node, child: Node, do_not_inherit: Collection[str] = (),
               path: str = "") -> Node:
    """Merge ``child`` over ``parent`` and return a new mapping node.

    Neither input is modified.  Raises MetadataError(E-MERGE-KIND-CONFLICT)
    when a key holds different node kinds in parent and child.
    """
    for side, node in (("parent", parent), ("child", child)):
        if node.kind != MAPPING:
            raise MetadataError("E-MERGE-KIND-CONFLICT",
                                f"{side} must be a mapping, got {node.kind}", path, node.span)
    blocked = set(do_not_inherit)
    merged: dict[str, Node] = {}
    for key, value in parent.value.items():
        if key not in blocked and key not in child.value:
            merged[key] = value
    for key, value in child.value.items():
        inherited = parent.value.get(key)
        if inherited is None or key in blocked:
            merged[key] = value
        else:
            merged[key] = _combine(inherited, value, join_path(path, key))
    return Node(merged, child.span)


def _combine(parent: Node, child: Node, path: str) -> Node:
    if parent.kind != child.kind:
        raise MetadataError("E-MERGE-KIND-CONFLICT",
                            f"cannot merge {child.kind} over {parent.kind}", path, child.span)
    if child.kind == MAPPING:
        return merge_node(parent, child, (), path)
    if child.kind == SEQUENCE:
        return Node(union_sequences(parent.value, child.value), child.span)
    return child
