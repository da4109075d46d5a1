"""Whole-dataset validation and report assembly."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterator, Optional

from .diagnostics import Diagnostic, MetadataError, ValidationReport, error, join_path
from .loader import APPLIANCE_FIELDS, bind, load_dataset
from .model import (
    Appliance, Building, Dataset, DistributionSet, ElecMeter, LearntModel, MeterDevice, Prior,
    check_local_invariants,
)
from .schema import validate_against_fragment
from .typedb import (
    TypeLibrary, appliance_diagnostics, expand_components, merged_additional_schema,
    seed_library,
)
from .wiring import validate_wiring


def _iter_appliance(a: Appliance, path: str) -> Iterator[tuple[str, Any]]:
    yield path, a
    for i, c in enumerate(a.components):
        yield from _iter_appliance(c, join_path(path, "components", i))
    for i, r in enumerate(a.dates_active):
        yield join_path(path, "dates_active", i), r
    if a.distributions:
        yield from _iter_distributions(a.distributions, join_path(path, "distributions"))


def _iter_distributions(s: DistributionSet, path: str) -> Iterator[tuple[str, Any]]:
    yield path, s
    for name, priors in s.distributions.items():
        for i, p in enumerate(priors):
            yield from _iter_prior(p, join_path(path, name, i))


def _iter_prior(p: Prior, path: str) -> Iterator[tuple[str, Any]]:
    yield path, p
    if p.distribution_of_data is not None:
        yield join_path(path, "distribution_of_data"), p.distribution_of_data
    if p.model is not None:
        yield join_path(path, "model"), p.model


def _iter_meter(m: ElecMeter, path: str) -> Iterator[tuple[str, Any]]:
    yield path, m
    for i, s in enumerate(m.sensors):
        yield join_path(path, "sensors", i), s
    for i, p in enumerate(m.preprocessing):
        yield join_path(path, "preprocessing", i), p
    for i, a in enumerate(m.appliances):
        yield from _iter_appliance(a, join_path(path, "appliances", i))


def _iter_device(d: MeterDevice, path: str) -> Iterator[tuple[str, Any]]:
    yield path, d
    for i, m in enumerate(d.measurements):
        yield join_path(path, "measurements", i), m


def _iter_building(b: Building, path: str) -> Iterator[tuple[str, Any]]:
    yield path, b
    if b.temporal_coverage is not None:
        yield join_path(path, "temporal_coverage"), b.temporal_coverage
    if b.geo_location is not None:
        yield join_path(path, "geo_location"), b.geo_location
    for i, r in enumerate(b.rooms):
        yield join_path(path, "rooms", i), r
    for m in b.elec_meters:
        yield from _iter_meter(m, join_path(path, "elec_meters", m.instance))


def iter_objects(dataset: Dataset) -> Iterator[tuple[str, Any]]:
    """Every model object in the dataset with its document path, in document order."""
    yield "", dataset
    if dataset.temporal_coverage is not None:
        yield "temporal_coverage", dataset.temporal_coverage
    if dataset.geo_location is not None:
        yield "geo_location", dataset.geo_location
    for key, d in dataset.meter_devices.items():
        yield from _iter_device(d, join_path("meter_devices", key))
    for m in dataset.dataset_level_meters:
        yield from _iter_meter(m, join_path("elec_meters", m.instance))
    for b in dataset.buildings:
        yield from _iter_building(b, join_path("buildings", b.instance))


def iter_appliances(dataset: Dataset) -> Iterator[tuple[str, Appliance, Optional[Building]]]:
    """Every appliance, components included, with its path and owning building."""
    for path, obj in iter_objects(dataset):
        if isinstance(obj, Appliance):
            yield path, obj, _owner(dataset, path)


def _owner(dataset: Dataset, path: str) -> Optional[Building]:
    parts = path.split("/")
    if parts[0] != "buildings":
        return None
    return dataset.building(int(parts[1]))


def validate_appliance_extras(library: TypeLibrary, appliance: Appliance,
                              path: str = "") -> list[Diagnostic]:
    """Check an appliance's extra fields against its type's additional properties.

    Fields that neither the core appliance schema nor the merged fragment
    mention are reported as E-UNKNOWN-APPLIANCE-FIELD.
    """
    if not appliance.extras:
        return []
    fragment = merged_additional_schema(library, appliance.type)
    out = []
    for key in appliance.extras:
        if key not in fragment and key not in APPLIANCE_FIELDS:
            out.append(error("E-UNKNOWN-APPLIANCE-FIELD", join_path(path, key),
                             f"{key!r} is not a property of {appliance.type!r} "
                             "or its ancestors", appliance.span))
    known = {k: v for k, v in appliance.extras.items() if k in fragment}
    out.extend(validate_against_fragment(known, fragment, path))
    return out


def _appliance_checks(library: TypeLibrary, dataset: Dataset) -> list[Diagnostic]:
    out = []
    for path, a, building in iter_appliances(dataset):
        diags = appliance_diagnostics(library, a, path)
        out.extend(diags)
        if not any(d.is_error for d in diags):
            try:
                expand_components(library, a)
            except MetadataError as exc:
                out.extend(exc.diagnostics)
            out.extend(validate_appliance_extras(library, a, path))
        if a.room is not None:
            rooms = {(r.name, r.instance) for r in building.rooms} if building else set()
            if (a.room.name, a.room.instance) not in rooms:
                out.append(error("E-UNKNOWN-ROOM", join_path(path, "room"),
                                 f"room {a.room.name},{a.room.instance} is not declared "
                                 "in the building", a.span))
    return out


def _device_checks(dataset: Dataset) -> list[Diagnostic]:
    out = []
    for path, obj in iter_objects(dataset):
        if isinstance(obj, ElecMeter) and obj.device_model not in dataset.meter_devices:
            out.append(error("E-UNKNOWN-DEVICE", join_path(path, "device_model"),
                             f"device_model {obj.device_model!r} is not in meter_devices",
                             obj.span))
    return out


def _order(dataset: Dataset, groups: list[list[Diagnostic]]) -> tuple[Diagnostic, ...]:
    """Document order of the owning object, then check order; drops repeated (code, path)."""
    position = {path: i for i, (path, _) in enumerate(iter_objects(dataset))}

    def owner(path: str) -> int:
        parts = path.split("/")
        while parts:
            p = "/".join(parts)
            if p in position:
                return position[p]
            parts.pop()
        return 0

    keyed = []
    seen = set()
    for step, diags in enumerate(groups):
        for d in diags:
            if (d.code, d.path) in seen:
                continue
            seen.add((d.code, d.path))
            keyed.append((owner(d.path), step, len(keyed), d))
    keyed.sort(key=lambda t: t[:3])
    return tuple(t[3] for t in keyed)


def validate_dataset(dataset: Dataset, library: Optional[TypeLibrary] = None) -> ValidationReport:
    """Run every check on a bound dataset.

    Order of checks: local invariants, device references, wiring, appliance
    resolution with extras and room references.  Prior normalisation and
    dominant-appliance membership are local invariants.  The report lists
    findings in document order and is deterministic for equal inputs.
    """
    library = library if library is not None else seed_library()
    rooms = library.room_vocabulary or None
    local = []
    for path, obj in iter_objects(dataset):
        local.extend(check_local_invariants(obj, path, rooms=rooms))
    groups = [local, _device_checks(dataset), validate_wiring(dataset),
              _appliance_checks(library, dataset)]
    return ValidationReport(_order(dataset, groups))


def validate_learnt_model(model: LearntModel,
                          library: Optional[TypeLibrary] = None) -> list[Diagnostic]:
    library = library if library is not None else seed_library()
    out = list(check_local_invariants(model))
    if model.appliance_type not in library:
        out.append(error("E-UNKNOWN-APPLIANCE-TYPE", "appliance_type",
                         f"{model.appliance_type!r} is not a known appliance type",
                         model.span))
    return out


def validate_path(path, library: Optional[TypeLibrary] = None
                  ) -> tuple[Optional[Dataset], ValidationReport]:
    """Load, bind and validate a metadata folder or single document.

    IO and parse failures raise MetadataError; binding errors end up in the
    report, and the dataset is then None.
    """
    raw = load_dataset(Path(path))
    dataset, diags = bind(raw)
    if dataset is None:
        return None, ValidationReport(tuple(diags))
    report = validate_dataset(dataset, library)
    return dataset, ValidationReport(tuple(diags) + report.diagnostics)
