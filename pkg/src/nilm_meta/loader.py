"""Read metadata folders and bind their node trees to the domain types.

A metadata folder holds exactly one ``dataset.yaml`` (or ``.yml`` / ``.json``)
plus any number of ``building<I>.yaml`` documents.  A single document with an
embedded ``buildings`` list (the canonical export) is accepted as well.
"""

from __future__ import annotations

import datetime as dt
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from .diagnostics import Diagnostic, MetadataError, Span, error, join_path, warning
from .model import (
    Appliance, ApplianceRef, ApplianceType, Building, Categories, Dataset, DateRange,
    DistributionData, DistributionSet, ElecMeter, GeoLocation, LearntModel, Measurement,
    MeterDevice, ModelSpec, PreprocessingStep, Prior, Room, RoomRef, Sensor,
)
from .nodes import FORMAT_BY_SUFFIX, MAPPING, SEQUENCE, Node, parse_document, parse_file

logger = logging.getLogger(__name__)

__all__ = [
    "Node", "RawDatasetFolder", "parse_document", "load_dataset_dir", "load_dataset",
    "bind", "bind_appliance", "bind_appliance_type", "bind_learnt_model", "bind_prior",
    "APPLIANCE_FIELDS",
]

_BUILDING_FILE = re.compile(r"^building([1-9][0-9]*)\.(yaml|yml|json)$")
_DATASET_FILES = ("dataset.yaml", "dataset.yml", "dataset.json")


@dataclass(frozen=True)
class RawDatasetFolder:
    dataset_doc: Node
    building_docs: dict[int, Node] = field(default_factory=dict)
    diagnostics: tuple[Diagnostic, ...] = ()


def load_dataset_dir(path) -> RawDatasetFolder:
    """Parse ``dataset.*`` and every ``building<I>.*`` in ``path``.

    A ``metadata/`` sub-folder is used when ``path`` itself has no dataset
    document.  Other files are skipped with a W-IGNORED-FILE warning.
    """
    path = Path(path)
    if not path.is_dir():
        raise MetadataError("E-IO", f"{path} is not a readable directory")
    names = sorted(p.name for p in path.iterdir() if p.is_file())
    dataset_names = [n for n in names if n in _DATASET_FILES]
    if not dataset_names and (path / "metadata").is_dir():
        return load_dataset_dir(path / "metadata")
    if not dataset_names:
        raise MetadataError("E-NO-DATASET-DOC", f"no dataset.yaml in {path}",
                            span=Span(str(path), 0))
    if len(dataset_names) > 1:
        raise MetadataError("E-DUP-DATASET-DOC",
                            f"more than one dataset document in {path}: {dataset_names}",
                            span=Span(str(path / dataset_names[1]), 0))
    dataset_doc = parse_file(path / dataset_names[0])

    building_docs: dict[int, Node] = {}
    diags = []
    for name in names:
        if name in dataset_names:
            continue
        m = _BUILDING_FILE.match(name)
        if m is None:
            diags.append(warning("W-IGNORED-FILE", name, f"ignoring {name}",
                                 Span(str(path / name), 0)))
            continue
        index = int(m.group(1))
        if index in building_docs:
            raise MetadataError("E-DUP-BUILDING-FILE",
                                f"more than one document for building {index}",
                                path=f"buildings/{index}", span=Span(str(path / name), 0))
        building_docs[index] = parse_file(path / name)
    logger.debug("loaded %s with %d building documents", path, len(building_docs))
    return RawDatasetFolder(dataset_doc, building_docs, tuple(diags))


def load_dataset(path) -> RawDatasetFolder:
    """Load a metadata folder, or a single-file dataset such as a canonical export."""
    path = Path(path)
    if path.is_dir():
        return load_dataset_dir(path)
    if not path.exists():
        raise MetadataError("E-IO", f"{path} does not exist")
    if path.suffix not in FORMAT_BY_SUFFIX:
        raise MetadataError("E-IO", f"{path} is neither a folder nor a YAML/JSON document")
    return RawDatasetFolder(parse_file(path))


# --------------------------------------------------------------------------
# binding

DATASET_FIELDS = frozenset({
    "name", "long_name", "publication_date", "rights_list", "geospatial_coverage",
    "temporal_coverage", "funding", "creators", "related_documents", "timezone",
    "geo_location", "meter_devices", "buildings", "elec_meters",
})
BUILDING_FIELDS = frozenset({
    "instance", "rooms", "timezone", "geo_location", "temporal_coverage", "elec_meters",
})
METER_FIELDS = frozenset({
    "instance", "device_model", "site_meter", "submeter_of", "upstream_meter_in_building",
    "sensors", "appliances", "dominant_appliance", "preprocessing",
})
DEVICE_FIELDS = frozenset({"model", "manufacturer", "sample_period", "measurements",
                           "description"})
MEASUREMENT_FIELDS = frozenset({"physical_quantity", "ac_type", "lower_limit", "upper_limit"})
APPLIANCE_FIELDS = frozenset({
    "type", "instance", "subtype", "components", "count", "multiple", "on_power_threshold",
    "nominal_consumption", "manufacturer", "year_of_manufacture", "room", "main_room_light",
    "dates_active", "distributions",
})
PRIOR_FIELDS = frozenset({"distribution_of_data", "model", "source", "citation",
                          "specific_to", "training_data", "distance"})
LEARNT_MODEL_FIELDS = frozenset({"model_type", "appliance_type", "training_data",
                                 "date_prepared", "parameters"})

_MISSING = object()


def _plain(node: Node) -> Any:
    """Plain Python value of an opaque subtree, with dates as ISO strings."""
    if node.kind == MAPPING:
        return {k: _plain(v) for k, v in node.value.items()}
    if node.kind == SEQUENCE:
        return [_plain(v) for v in node.value]
    if isinstance(node.value, dt.date):
        return node.value.isoformat()
    return node.value


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _as_date(v):
    if _is_int(v) and 1 <= v <= 9999:
        return v
    if isinstance(v, dt.date):
        return v
    if isinstance(v, str):
        if re.fullmatch(r"[0-9]{4}", v):
            return int(v)
        try:
            return dt.date.fromisoformat(v)
        except ValueError:
            return _MISSING
    return _MISSING


# kind name -> (predicate/converter, description for messages)
_KINDS: dict[str, tuple[Callable[[Any], Any], str]] = {
    "str": (lambda v: v if isinstance(v, str) else _MISSING, "a string"),
    "int": (lambda v: v if _is_int(v) else _MISSING, "an integer"),
    "number": (lambda v: v if _is_number(v) else _MISSING, "a number"),
    "bool": (lambda v: v if isinstance(v, bool) else _MISSING, "a boolean"),
    "date": (_as_date, "a year or an ISO-8601 date"),
}


class _Binder:
    def __init__(self):
        self.diagnostics: list[Diagnostic] = []
        self.errors = 0

    # -- reporting

    def error(self, code, path, message, node: Optional[Node]):
        self.errors += 1
        self.diagnostics.append(error(code, path, message, node.span if node else None))

    def warn(self, code, path, message, node: Optional[Node]):
        self.diagnostics.append(warning(code, path, message, node.span if node else None))

    # -- generic extraction

    def mapping(self, node: Node, path: str) -> Optional[Node]:
        if node.kind != MAPPING:
            self.error("E-TYPE-MISMATCH", path, f"expected a mapping, got {node.kind}", node)
            return None
        return node

    def sequence(self, m: Node, key: str, path: str) -> tuple[Node, ...]:
        node = m.get(key)
        if node is None or node.value is None:
            return ()
        if node.kind != SEQUENCE:
            self.error("E-TYPE-MISMATCH", join_path(path, key),
                       f"expected a sequence, got {node.kind}", node)
            return ()
        return node.value

    def scalar(self, m: Node, key: str, path: str, kind: str, required: bool = False):
        node = m.get(key)
        if node is None or (node.value is None and not required):
            if required:
                self.error("E-MISSING-REQUIRED", join_path(path, key),
                           f"required field {key!r} is missing", m)
                return _MISSING
            return None
        convert, desc = _KINDS[kind]
        value = convert(node.value) if node.kind == "scalar" else _MISSING
        if value is _MISSING:
            shown = node.value if node.kind == "scalar" else node.kind
            self.error("E-TYPE-MISMATCH", join_path(path, key),
                       f"{key} must be {desc}, got {shown!r}", node)
        return value

    def strings(self, m: Node, key: str, path: str) -> tuple[str, ...]:
        out = []
        for i, item in enumerate(self.sequence(m, key, path)):
            if not isinstance(item.value, str):
                self.error("E-TYPE-MISMATCH", join_path(path, key, i),
                           f"expected a string, got {item.value!r}", item)
            else:
                out.append(item.value)
        return tuple(out)

    def numbers(self, m: Node, key: str, path: str) -> Optional[tuple[float, ...]]:
        if m.get(key) is None:
            return None
        out = []
        for i, item in enumerate(self.sequence(m, key, path)):
            if not _is_number(item.value):
                self.error("E-TYPE-MISMATCH", join_path(path, key, i),
                           f"expected a number, got {item.value!r}", item)
            else:
                out.append(item.value)
        return tuple(out)

    def plain_mapping(self, m: Node, key: str, path: str) -> Optional[dict]:
        node = m.get(key)
        if node is None or node.value is None:
            return None
        if node.kind != MAPPING:
            self.error("E-TYPE-MISMATCH", join_path(path, key),
                       f"expected a mapping, got {node.kind}", node)
            return None
        return _plain(node)

    def unknown(self, m: Node, path: str, known: frozenset):
        for key, value in m.value.items():
            if key not in known:
                self.warn("W-UNKNOWN-FIELD", join_path(path, key),
                          f"unknown field {key!r}", value)

    @staticmethod
    def instance_segment(node: Node, position: int):
        inst = node.get("instance") if node.kind == MAPPING else None
        if inst is not None and _is_int(inst.value):
            return inst.value
        return position

    # -- domain objects

    def date_range(self, node: Optional[Node], path: str) -> Optional[DateRange]:
        if node is None or node.value is None or self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, frozenset({"start", "end"}))
        begin = self.scalar(node, "start", path, "date", required=True)
        end = self.scalar(node, "end", path, "date")
        if self.errors > start:
            return None
        return DateRange(begin, end, span=node.span)

    def geo_location(self, node: Optional[Node], path: str) -> Optional[GeoLocation]:
        if node is None or node.value is None or self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, frozenset({"latitude", "longitude", "locality", "country"}))
        lat = self.scalar(node, "latitude", path, "number", required=True)
        lon = self.scalar(node, "longitude", path, "number", required=True)
        locality = self.scalar(node, "locality", path, "str")
        country = self.scalar(node, "country", path, "str")
        if self.errors > start:
            return None
        return GeoLocation(lat, lon, locality, country, span=node.span)

    def measurement(self, node: Node, path: str) -> Optional[Measurement]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, MEASUREMENT_FIELDS)
        values = dict(
            physical_quantity=self.scalar(node, "physical_quantity", path, "str",
                                          required=True),
            ac_type=self.scalar(node, "ac_type", path, "str"),
            lower_limit=self.scalar(node, "lower_limit", path, "number"),
            upper_limit=self.scalar(node, "upper_limit", path, "number"),
        )
        if self.errors > start:
            return None
        return Measurement(**values, span=node.span)

    def meter_device(self, node: Node, path: str, model=None) -> Optional[MeterDevice]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, DEVICE_FIELDS)
        declared = self.scalar(node, "model", path, "str", required=model is None)
        measurements = [self.measurement(item, join_path(path, "measurements", i))
                        for i, item in enumerate(self.sequence(node, "measurements", path))]
        values = dict(
            manufacturer=self.scalar(node, "manufacturer", path, "str"),
            sample_period=self.scalar(node, "sample_period", path, "number"),
            description=self.scalar(node, "description", path, "str"),
        )
        if self.errors > start:
            return None
        return MeterDevice(model=declared if declared is not None else model,
                           measurements=tuple(measurements), **values, span=node.span)

    def meter_devices(self, m: Node, path: str) -> dict[str, MeterDevice]:
        node = m.get("meter_devices")
        base = join_path(path, "meter_devices")
        out: dict[str, MeterDevice] = {}
        if node is None or node.value is None:
            return out
        if node.kind == MAPPING:
            for key, item in node.value.items():
                device = self.meter_device(item, join_path(base, key), model=key)
                if device is not None:
                    out[key] = device
        elif node.kind == SEQUENCE:
            for i, item in enumerate(node.value):
                model_node = item.get("model") if item.kind == MAPPING else None
                label = model_node.value if model_node is not None else i
                device = self.meter_device(item, join_path(base, label))
                if device is None:
                    continue
                if device.model in out:
                    self.error("E-DEVICE-DUP", join_path(base, device.model),
                               f"meter device {device.model!r} declared more than once", item)
                out[device.model] = device
        else:
            self.error("E-TYPE-MISMATCH", base,
                       "meter_devices must be a mapping or a sequence", node)
        return out

    def sensor(self, node: Node, path: str) -> Optional[Sensor]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, frozenset({"data_location", "annotations"}))
        location = self.scalar(node, "data_location", path, "str", required=True)
        annotations = self.plain_mapping(node, "annotations", path) or {}
        if self.errors > start:
            return None
        return Sensor(location, annotations, span=node.span)

    def preprocessing_step(self, node: Node, path: str) -> Optional[PreprocessingStep]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        name = self.scalar(node, "filter", path, "str", required=True)
        params = {}
        for key, value in node.value.items():
            if key == "filter":
                continue
            if value.kind != "scalar":
                self.error("E-TYPE-MISMATCH", join_path(path, key),
                           "preprocessing parameters must be scalars", value)
            params[key] = _plain(value)
        if self.errors > start:
            return None
        return PreprocessingStep(name, params, span=node.span)

    def room(self, node: Node, path: str) -> Optional[Room]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, frozenset({"name", "instance"}))
        name = self.scalar(node, "name", path, "str", required=True)
        inst = self.scalar(node, "instance", path, "int")
        if self.errors > start:
            return None
        return Room(name, 1 if inst is None else inst, span=node.span)

    def _reference(self, node: Optional[Node], path: str, name_key: str):
        """Parse ``name``, ``"name,instance"`` or ``{name_key: ..., instance: ...}``."""
        if node is None or node.value is None:
            return None
        if isinstance(node.value, str):
            name, _, inst = node.value.partition(",")
            if not inst:
                return name.strip(), 1
            if inst.strip().isdigit():
                return name.strip(), int(inst)
        elif node.kind == MAPPING:
            start = self.errors
            name = self.scalar(node, name_key, path, "str", required=True)
            inst = self.scalar(node, "instance", path, "int")
            if self.errors > start:
                return None
            return name, 1 if inst is None else inst
        self.error("E-TYPE-MISMATCH", path,
                   f"expected a {name_key} reference, got {node.value!r}", node)
        return None

    def prior(self, node: Node, path: str) -> Optional[Prior]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, PRIOR_FIELDS)
        if node.get("distance") is not None:
            self.error("E-PRIOR-DISTANCE-AUTHORED", join_path(path, "distance"),
                       "distance is assigned when priors are collected; do not author it",
                       node.get("distance"))
        data = None
        data_node = node.get("distribution_of_data")
        if data_node is not None:
            data = self.distribution_data(data_node, join_path(path, "distribution_of_data"))
        model = None
        model_node = node.get("model")
        if model_node is not None:
            model = self.model_spec(model_node, join_path(path, "model"))
        values = {k: self.scalar(node, k, path, "str")
                  for k in ("source", "citation", "specific_to", "training_data")}
        if self.errors > start:
            return None
        return Prior(data, model, **values, span=node.span)

    def distribution_data(self, node: Node, path: str) -> Optional[DistributionData]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, frozenset({"bin_edges", "categories", "frequencies"}))
        if node.get("frequencies") is None:
            self.error("E-MISSING-REQUIRED", join_path(path, "frequencies"),
                       "required field 'frequencies' is missing", node)
        frequencies = self.numbers(node, "frequencies", path)
        bin_edges = self.numbers(node, "bin_edges", path)
        categories = (self.strings(node, "categories", path)
                      if node.get("categories") is not None else None)
        if self.errors > start:
            return None
        return DistributionData(frequencies, bin_edges, categories, span=node.span)

    def model_spec(self, node: Node, path: str) -> Optional[ModelSpec]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, frozenset({"distribution_name", "parameters"}))
        name = self.scalar(node, "distribution_name", path, "str", required=True)
        params = self.plain_mapping(node, "parameters", path) or {}
        for key, value in params.items():
            if not _is_number(value):
                self.error("E-TYPE-MISMATCH", join_path(path, "parameters", key),
                           f"model parameters must be numbers, got {value!r}",
                           node.get("parameters"))
        if self.errors > start:
            return None
        return ModelSpec(name, params, span=node.span)

    def distribution_set(self, node: Optional[Node], path: str) -> DistributionSet:
        if node is None or node.value is None or self.mapping(node, path) is None:
            return DistributionSet()
        out = {}
        for name in node.value:
            priors = [self.prior(item, join_path(path, name, i))
                      for i, item in enumerate(self.sequence(node, name, path))]
            out[name] = tuple(p for p in priors if p is not None)
        return DistributionSet(out, span=node.span)

    def categories(self, node: Optional[Node], path: str) -> Categories:
        if node is None or node.value is None or self.mapping(node, path) is None:
            return Categories()
        self.unknown(node, path, frozenset({"traditional", "size", "electrical",
                                            "google_shopping"}))
        traditional = self.scalar(node, "traditional", path, "str")
        size = self.scalar(node, "size", path, "str")
        return Categories(
            None if traditional is _MISSING else traditional,
            None if size is _MISSING else size,
            self.strings(node, "electrical", path),
            self.strings(node, "google_shopping", path),
            span=node.span,
        )

    def appliance(self, node: Node, path: str) -> Optional[Appliance]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        components = [self.appliance(item, join_path(path, "components", i))
                      for i, item in enumerate(self.sequence(node, "components", path))]
        dates = [self.date_range(item, join_path(path, "dates_active", i))
                 for i, item in enumerate(self.sequence(node, "dates_active", path))]
        room = self._reference(node.get("room"), join_path(path, "room"), "name")
        values = dict(
            type=self.scalar(node, "type", path, "str", required=True),
            instance=self.scalar(node, "instance", path, "int"),
            subtype=self.scalar(node, "subtype", path, "str"),
            count=self.scalar(node, "count", path, "int"),
            multiple=self.scalar(node, "multiple", path, "bool"),
            on_power_threshold=self.scalar(node, "on_power_threshold", path, "number"),
            nominal_consumption=self.plain_mapping(node, "nominal_consumption", path),
            manufacturer=self.scalar(node, "manufacturer", path, "str"),
            year_of_manufacture=self.scalar(node, "year_of_manufacture", path, "int"),
            main_room_light=self.scalar(node, "main_room_light", path, "bool"),
        )
        distributions = self.distribution_set(node.get("distributions"),
                                              join_path(path, "distributions"))
        extras = {k: _plain(v) for k, v in node.value.items()
                  if k not in APPLIANCE_FIELDS}
        if self.errors > start:
            return None
        if values["instance"] is None:
            values["instance"] = 1
        return Appliance(
            **values,
            components=tuple(components),
            room=RoomRef(*room) if room else None,
            dates_active=tuple(dates),
            distributions=distributions,
            extras=extras,
            span=node.span,
        )

    def meter(self, node: Node, path: str) -> Optional[ElecMeter]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, METER_FIELDS)
        sensors = [self.sensor(item, join_path(path, "sensors", i))
                   for i, item in enumerate(self.sequence(node, "sensors", path))]
        appliances = [self.appliance(item, join_path(path, "appliances", i))
                      for i, item in enumerate(self.sequence(node, "appliances", path))]
        steps = [self.preprocessing_step(item, join_path(path, "preprocessing", i))
                 for i, item in enumerate(self.sequence(node, "preprocessing", path))]
        dominant = self._reference(node.get("dominant_appliance"),
                                   join_path(path, "dominant_appliance"), "type")
        values = dict(
            instance=self.scalar(node, "instance", path, "int", required=True),
            device_model=self.scalar(node, "device_model", path, "str", required=True),
            site_meter=self.scalar(node, "site_meter", path, "bool"),
            submeter_of=self.scalar(node, "submeter_of", path, "int"),
            upstream_meter_in_building=self.scalar(node, "upstream_meter_in_building",
                                                   path, "int"),
        )
        if self.errors > start:
            return None
        values["site_meter"] = bool(values["site_meter"])
        return ElecMeter(
            **values,
            sensors=tuple(sensors),
            appliances=tuple(appliances),
            dominant_appliance=ApplianceRef(*dominant) if dominant else None,
            preprocessing=tuple(steps),
            span=node.span,
        )

    def meters(self, m: Node, path: str) -> tuple[ElecMeter, ...]:
        out = []
        for i, item in enumerate(self.sequence(m, "elec_meters", path)):
            seg = self.instance_segment(item, i + 1)
            meter = self.meter(item, join_path(path, "elec_meters", seg))
            if meter is not None:
                out.append(meter)
        return tuple(out)

    def building(self, node: Node, path: str, index: Optional[int],
                 dataset: dict) -> Optional[Building]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        if node.get("meter_devices") is not None:
            self.error("E-BUILDING-METER-DEVICES", join_path(path, "meter_devices"),
                       "meter devices belong in the dataset document", node.get("meter_devices"))
        self.unknown(node, path, BUILDING_FIELDS | {"meter_devices"})
        inst = self.scalar(node, "instance", path, "int", required=index is None)
        if index is not None and inst is not None and inst is not _MISSING and inst != index:
            self.error("E-BUILDING-INDEX-MISMATCH", join_path(path, "instance"),
                       f"document for building {index} declares instance {inst}",
                       node.get("instance"))
        rooms = [self.room(item, join_path(path, "rooms", i))
                 for i, item in enumerate(self.sequence(node, "rooms", path))]
        timezone = self.scalar(node, "timezone", path, "str")
        geo = self.geo_location(node.get("geo_location"), join_path(path, "geo_location"))
        coverage = self.date_range(node.get("temporal_coverage"),
                                   join_path(path, "temporal_coverage"))
        meters = self.meters(node, path)
        if self.errors > start:
            return None
        return Building(
            instance=index if index is not None else inst,
            rooms=tuple(rooms),
            timezone=timezone if timezone is not None else dataset["timezone"],
            geo_location=geo if geo is not None else dataset["geo_location"],
            temporal_coverage=coverage if coverage is not None else dataset["temporal_coverage"],
            elec_meters=meters,
            span=node.span,
        )

    def dataset(self, raw: RawDatasetFolder) -> Optional[Dataset]:
        node = raw.dataset_doc
        if self.mapping(node, "") is None:
            return None
        start = self.errors
        self.unknown(node, "", DATASET_FIELDS)
        values = dict(
            name=self.scalar(node, "name", "", "str", required=True),
            long_name=self.scalar(node, "long_name", "", "str"),
            publication_date=self.scalar(node, "publication_date", "", "date"),
            geospatial_coverage=self.scalar(node, "geospatial_coverage", "", "str"),
            timezone=self.scalar(node, "timezone", "", "str"),
            rights_list=self.strings(node, "rights_list", ""),
            funding=self.strings(node, "funding", ""),
            creators=self.strings(node, "creators", ""),
            related_documents=self.strings(node, "related_documents", ""),
        )
        values["temporal_coverage"] = self.date_range(node.get("temporal_coverage"),
                                                      "temporal_coverage")
        values["geo_location"] = self.geo_location(node.get("geo_location"), "geo_location")
        values["meter_devices"] = self.meter_devices(node, "")

        buildings = []
        for i, item in enumerate(self.sequence(node, "buildings", "")):
            seg = self.instance_segment(item, i + 1)
            if seg in raw.building_docs:
                self.error("E-BUILDING-DUP", join_path("buildings", seg),
                           f"building {seg} is both embedded and in its own document", item)
            buildings.append(self.building(item, join_path("buildings", seg), None, values))
        for index in sorted(raw.building_docs):
            buildings.append(self.building(raw.building_docs[index],
                                           join_path("buildings", index), index, values))
        meters = self.meters(node, "")
        if self.errors > start:
            return None
        return Dataset(
            **values,
            buildings=tuple(sorted((b for b in buildings if b is not None),
                                   key=lambda b: b.instance)),
            dataset_level_meters=meters,
            span=node.span,
        )

    def appliance_type(self, node: Node, path: str) -> Optional[ApplianceType]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        name = self.scalar(node, "name", path, "str", required=True)
        parent = self.scalar(node, "parent", path, "str")
        subtypes = self.strings(node, "subtypes", path)
        dni = self.strings(node, "do_not_inherit", path)
        allowed = self.strings(node, "allowed_components", path)
        description = self.scalar(node, "description", path, "str")
        categories = self.categories(node.get("categories"), join_path(path, "categories"))
        components = [self.appliance(item, join_path(path, "components", i))
                      for i, item in enumerate(self.sequence(node, "components", path))]
        distributions = self.distribution_set(node.get("distributions"),
                                              join_path(path, "distributions"))
        extra_schema = self.plain_mapping(node, "additional_properties", path) or {}
        if self.errors > start:
            return None
        return ApplianceType(
            name=name, parent=parent, subtypes=subtypes, categories=categories,
            components=tuple(components), allowed_components=allowed,
            distributions=distributions, additional_properties=extra_schema, do_not_inherit=dni,
            description=description, span=node.span,
        )

    def learnt_model(self, node: Node, path: str) -> Optional[LearntModel]:
        if self.mapping(node, path) is None:
            return None
        start = self.errors
        self.unknown(node, path, LEARNT_MODEL_FIELDS)
        values = dict(
            model_type=self.scalar(node, "model_type", path, "str", required=True),
            appliance_type=self.scalar(node, "appliance_type", path, "str", required=True),
            training_data=self.scalar(node, "training_data", path, "str"),
            date_prepared=self.scalar(node, "date_prepared", path, "date"),
            parameters=self.plain_mapping(node, "parameters", path),
        )
        if self.errors > start:
            return None
        return LearntModel(**values, span=node.span)


def bind(raw: RawDatasetFolder) -> tuple[Optional[Dataset], list[Diagnostic]]:
    """Bind a parsed folder to a Dataset.

    All findings are accumulated.  The Dataset is returned when only warnings
    occurred, otherwise None.  Buildings without their own timezone,
    geo_location or temporal_coverage take the dataset's values.
    """
    binder = _Binder()
    binder.diagnostics.extend(raw.diagnostics)
    dataset = binder.dataset(raw)
    return (dataset if binder.errors == 0 else None), binder.diagnostics


def _bind_one(method: str, node, path: str):
    binder = _Binder()
    obj = getattr(binder, method)(Node.from_python(node), path)
    return (obj if binder.errors == 0 else None), binder.diagnostics


def bind_appliance(node, path: str = "") -> tuple[Optional[Appliance], list[Diagnostic]]:
    """Bind one appliance node (a Node or plain mapping); unknown fields become extras."""
    return _bind_one("appliance", node, path)


def bind_appliance_type(node, path: str = "") -> tuple[Optional[ApplianceType], list[Diagnostic]]:
    return _bind_one("appliance_type", node, path)


def bind_prior(node, path: str = "") -> tuple[Optional[Prior], list[Diagnostic]]:
    return _bind_one("prior", node, path)


def bind_learnt_model(node, path: str = "") -> tuple[Optional[LearntModel], list[Diagnostic]]:
    return _bind_one("learnt_model", node, path)
