"""Document node trees with source spans, and the YAML / JSON parsers that build them."""

from __future__ import annotations

import bisect
import datetime as dt
import json
import json.decoder
import json.scanner
import types
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml

from .diagnostics import MetadataError, Span

SCALAR = "scalar"
SEQUENCE = "sequence"
MAPPING = "mapping"


@dataclass(frozen=True)
class Node:
    """A scalar, a sequence of nodes or a string-keyed mapping of nodes.

    Sequences hold a tuple of nodes, mappings a dict of str -> Node.  Spans do
    not take part in equality.
    """
    value: Any
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    @property
    def kind(self) -> str:
        if isinstance(self.value, dict):
            return MAPPING
        if isinstance(self.value, tuple):
            return SEQUENCE
        return SCALAR

    def get(self, key: str) -> Optional["Node"]:
        return self.value.get(key) if isinstance(self.value, dict) else None

    def to_python(self) -> Any:
        if isinstance(self.value, dict):
            return {k: v.to_python() for k, v in self.value.items()}
        if isinstance(self.value, tuple):
            return [v.to_python() for v in self.value]
        return self.value

    @classmethod
    def from_python(cls, value: Any, span: Optional[Span] = None) -> "Node":
        if isinstance(value, Node):
            return value
        if isinstance(value, dict):
            return cls({str(k): cls.from_python(v, span) for k, v in value.items()}, span)
        if isinstance(value, (list, tuple)):
            return cls(tuple(cls.from_python(v, span) for v in value), span)
        return cls(value, span)


def empty_mapping(source: str = "<string>") -> Node:
    return Node({}, Span(source, 1))


# --------------------------------------------------------------------------
# YAML


def _parse_yaml(text: str, source: str) -> Node:
    loader = yaml.SafeLoader(text)
    try:
        root = loader.get_single_node()
        if root is None:
            return empty_mapping(source)
        return _convert_yaml(loader, root, source)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        span = Span(source, mark.line + 1, mark.column + 1) if mark else Span(source, 1)
        raise MetadataError("E-PARSE", f"malformed YAML: {exc.problem or exc}",
                            span=span) from exc
    except yaml.YAMLError as exc:
        raise MetadataError("E-PARSE", f"malformed YAML: {exc}", span=Span(source, 1)) from exc
    finally:
        loader.dispose()


def _convert_yaml(loader: yaml.SafeLoader, node: yaml.Node, source: str) -> Node:
    span = Span(source, node.start_mark.line + 1, node.start_mark.column + 1)
    if isinstance(node, yaml.MappingNode):
        loader.flatten_mapping(node)
        out: dict[str, Node] = {}
        for key_node, value_node in node.value:
            key = loader.construct_object(key_node)
            if not isinstance(key, str):
                key = str(key)
            if key in out:
                raise MetadataError(
                    "E-DUP-KEY", f"duplicate mapping key {key!r}",
                    span=Span(source, key_node.start_mark.line + 1,
                              key_node.start_mark.column + 1))
            out[key] = _convert_yaml(loader, value_node, source)
        return Node(out, span)
    if isinstance(node, yaml.SequenceNode):
        return Node(tuple(_convert_yaml(loader, v, source) for v in node.value), span)
    value = loader.construct_object(node)
    if isinstance(value, dt.datetime):
        value = value.date()
    return Node(value, span)


# --------------------------------------------------------------------------
# JSON
#
# The stdlib pure-Python scanner is rebuilt around a context whose object and
# array parsers hand a wrapping scan_once to the nested calls, so that every
# value comes back as a Node carrying the offset it started at.


class _JsonSpans:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self._line_starts = [0] + [i + 1 for i, c in enumerate(text) if c == "\n"]
        ctx = types.SimpleNamespace(
            strict=True, object_hook=None, object_pairs_hook=self._pairs,
            parse_float=float, parse_int=int, parse_constant=self._constant,
            parse_string=json.decoder.scanstring, memo={},
            parse_object=self._object, parse_array=self._array,
        )
        self._scan = json.scanner.py_make_scanner(ctx)

    def span(self, idx: int) -> Span:
        line = bisect.bisect_right(self._line_starts, idx)
        return Span(self.source, line, idx - self._line_starts[line - 1] + 1)

    def _constant(self, name: str):
        raise ValueError(f"non-standard JSON constant {name}")

    def _wrap(self, scan_once):
        def scan(s, idx):
            value, end = scan_once(s, idx)
            if isinstance(value, Node):
                return value, end
            if isinstance(value, list):
                value = tuple(value)
            return Node(value, self.span(idx)), end
        return scan

    def _object(self, s_and_end, strict, scan_once, object_hook, object_pairs_hook,
                memo=None, _w=json.decoder.WHITESPACE.match, _ws=json.decoder.WHITESPACE_STR):
        return json.decoder.JSONObject(s_and_end, strict, self._wrap(scan_once),
                                       object_hook, object_pairs_hook, memo, _w, _ws)

    def _array(self, s_and_end, scan_once, _w=json.decoder.WHITESPACE.match,
               _ws=json.decoder.WHITESPACE_STR):
        values, end = json.decoder.JSONArray(s_and_end, self._wrap(scan_once), _w, _ws)
        return tuple(values), end

    def _pairs(self, pairs):
        out = {}
        for key, value in pairs:
            if key in out:
                raise MetadataError("E-DUP-KEY", f"duplicate mapping key {key!r}",
                                    span=value.span)
            out[key] = value
        return out

    def parse(self) -> Node:
        idx = json.decoder.WHITESPACE.match(self.text, 0).end()
        try:
            node, end = self._wrap(self._scan)(self.text, idx)
        except StopIteration as exc:
            raise MetadataError("E-PARSE", "malformed JSON: expecting value",
                                span=self.span(exc.value)) from None
        except json.JSONDecodeError as exc:
            raise MetadataError("E-PARSE", f"malformed JSON: {exc.msg}",
                                span=Span(self.source, exc.lineno, exc.colno)) from None
        except ValueError as exc:
            raise MetadataError("E-PARSE", f"malformed JSON: {exc}",
                                span=self.span(idx)) from None
        end = json.decoder.WHITESPACE.match(self.text, end).end()
        if end != len(self.text):
            raise MetadataError("E-PARSE", "malformed JSON: extra data after document",
                                span=self.span(end))
        return node


def parse_document(data: bytes, format: str, source: str = "<string>") -> Node:
    """Parse one YAML or JSON document into a Node tree.

    Empty documents parse to an empty mapping.  Raises MetadataError with
    code E-PARSE (malformed input, bad encoding) or E-DUP-KEY.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MetadataError("E-PARSE", f"document is not valid UTF-8: {exc.reason}",
                            span=Span(source, 1)) from None
    text = text.lstrip("﻿")
    if format == "yaml":
        return _parse_yaml(text, source)
    if format == "json":
        if not text.strip():
            return empty_mapping(source)
        return _JsonSpans(text, source).parse()
    raise ValueError(f"unsupported format {format!r}; expected 'yaml' or 'json'")


FORMAT_BY_SUFFIX = {".yaml": "yaml", ".yml": "yaml", ".json": "json"}


def parse_file(path) -> Node:
    from pathlib import Path

    path = Path(path)
    fmt = FORMAT_BY_SUFFIX.get(path.suffix)
    if fmt is None:
        raise MetadataError("E-PARSE", f"unsupported file extension {path.suffix!r}",
                            span=Span(str(path), 1))
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise MetadataError("E-IO", f"cannot read {path}: {exc.strerror}") from None
    return parse_document(data, fmt, source=str(path))
