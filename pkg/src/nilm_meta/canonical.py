"""Canonical single-document JSON form of a dataset.

UTF-8, sorted keys, two-space indent, LF line endings and a trailing newline.
Building-level defaults (timezone, geo_location, temporal_coverage) are written
out explicitly, as are ``instance`` and ``site_meter``, so that re-importing
an export and exporting again reproduces the same bytes.
"""

from __future__ import annotations

import datetime as dt
import json
from typing import Any, Optional

from .model import (
    Appliance, Building, Categories, Dataset, DateRange, DistributionData, DistributionSet,
    ElecMeter, GeoLocation, Measurement, MeterDevice, ModelSpec, PreprocessingStep, Prior,
    Room, Sensor,
)


def _date(value):
    return value.isoformat() if isinstance(value, dt.date) else value


def _put(doc: dict, key: str, value) -> None:
    if value is not None:
        doc[key] = value


def date_range_to_doc(r: Optional[DateRange]) -> Optional[dict]:
    if r is None:
        return None
    doc = {"start": _date(r.start)}
    _put(doc, "end", _date(r.end))
    return doc


def geo_location_to_doc(g: Optional[GeoLocation]) -> Optional[dict]:
    if g is None:
        return None
    doc = {"latitude": g.latitude, "longitude": g.longitude}
    _put(doc, "locality", g.locality)
    _put(doc, "country", g.country)
    return doc


def measurement_to_doc(m: Measurement) -> dict:
    doc = {"physical_quantity": m.physical_quantity}
    for key in ("ac_type", "lower_limit", "upper_limit"):
        _put(doc, key, getattr(m, key))
    return doc


def meter_device_to_doc(d: MeterDevice) -> dict:
    doc = {"model": d.model, "measurements": [measurement_to_doc(m) for m in d.measurements]}
    for key in ("manufacturer", "sample_period", "description"):
        _put(doc, key, getattr(d, key))
    return doc


def distribution_data_to_doc(d: DistributionData) -> dict:
    doc = {"frequencies": list(d.frequencies)}
    if d.bin_edges is not None:
        doc["bin_edges"] = list(d.bin_edges)
    if d.categories is not None:
        doc["categories"] = list(d.categories)
    return doc


def model_spec_to_doc(m: ModelSpec) -> dict:
    return {"distribution_name": m.distribution_name, "parameters": dict(m.parameters)}


def prior_to_doc(p: Prior) -> dict:
    doc: dict[str, Any] = {}
    if p.distribution_of_data is not None:
        doc["distribution_of_data"] = distribution_data_to_doc(p.distribution_of_data)
    if p.model is not None:
        doc["model"] = model_spec_to_doc(p.model)
    for key in ("source", "citation", "specific_to", "training_data", "distance"):
        _put(doc, key, getattr(p, key))
    return doc


def distribution_set_to_doc(s: DistributionSet) -> dict:
    return {name: [prior_to_doc(p) for p in priors]
            for name, priors in s.distributions.items()}


def categories_to_doc(c: Categories) -> dict:
    doc: dict[str, Any] = {}
    _put(doc, "traditional", c.traditional)
    _put(doc, "size", c.size)
    doc["electrical"] = sorted(c.electrical)
    doc["google_shopping"] = sorted(c.google_shopping)
    return doc


def appliance_to_doc(a: Appliance) -> dict:
    doc: dict[str, Any] = dict(a.extras)
    doc["type"] = a.type
    doc["instance"] = a.instance
    for key in ("subtype", "count", "multiple", "on_power_threshold", "manufacturer",
                "year_of_manufacture", "main_room_light"):
        _put(doc, key, getattr(a, key))
    if a.nominal_consumption is not None:
        doc["nominal_consumption"] = dict(a.nominal_consumption)
    if a.room is not None:
        doc["room"] = {"name": a.room.name, "instance": a.room.instance}
    if a.components:
        doc["components"] = [appliance_to_doc(c) for c in a.components]
    if a.dates_active:
        doc["dates_active"] = [date_range_to_doc(r) for r in a.dates_active]
    if a.distributions:
        doc["distributions"] = distribution_set_to_doc(a.distributions)
    return doc


def sensor_to_doc(s: Sensor) -> dict:
    doc: dict[str, Any] = {"data_location": s.data_location}
    if s.annotations:
        doc["annotations"] = dict(s.annotations)
    return doc


def preprocessing_to_doc(p: PreprocessingStep) -> dict:
    return {**p.parameters, "filter": p.filter}


def meter_to_doc(m: ElecMeter) -> dict:
    doc: dict[str, Any] = {
        "instance": m.instance,
        "device_model": m.device_model,
        "site_meter": m.site_meter,
        "sensors": [sensor_to_doc(s) for s in m.sensors],
        "appliances": [appliance_to_doc(a) for a in m.appliances],
    }
    _put(doc, "submeter_of", m.submeter_of)
    _put(doc, "upstream_meter_in_building", m.upstream_meter_in_building)
    if m.dominant_appliance is not None:
        doc["dominant_appliance"] = {"type": m.dominant_appliance.type,
                                     "instance": m.dominant_appliance.instance}
    if m.preprocessing:
        doc["preprocessing"] = [preprocessing_to_doc(p) for p in m.preprocessing]
    return doc


def room_to_doc(r: Room) -> dict:
    return {"name": r.name, "instance": r.instance}


def building_to_doc(b: Building, dataset: Optional[Dataset] = None) -> dict:
    doc: dict[str, Any] = {
        "instance": b.instance,
        "rooms": [room_to_doc(r) for r in b.rooms],
        "elec_meters": [meter_to_doc(m) for m in b.elec_meters],
    }
    timezone, geo, coverage = b.timezone, b.geo_location, b.temporal_coverage
    if dataset is not None:
        timezone = timezone if timezone is not None else dataset.timezone
        geo = geo if geo is not None else dataset.geo_location
        coverage = coverage if coverage is not None else dataset.temporal_coverage
    _put(doc, "timezone", timezone)
    _put(doc, "geo_location", geo_location_to_doc(geo))
    _put(doc, "temporal_coverage", date_range_to_doc(coverage))
    return doc


def dataset_to_doc(ds: Dataset) -> dict:
    doc: dict[str, Any] = {
        "name": ds.name,
        "meter_devices": {k: meter_device_to_doc(d) for k, d in ds.meter_devices.items()},
        "buildings": [building_to_doc(b, ds) for b in sorted(ds.buildings,
                                                              key=lambda b: b.instance)],
    }
    for key in ("long_name", "geospatial_coverage", "timezone"):
        _put(doc, key, getattr(ds, key))
    _put(doc, "publication_date", _date(ds.publication_date))
    for key in ("rights_list", "funding", "creators", "related_documents"):
        if getattr(ds, key):
            doc[key] = list(getattr(ds, key))
    _put(doc, "temporal_coverage", date_range_to_doc(ds.temporal_coverage))
    _put(doc, "geo_location", geo_location_to_doc(ds.geo_location))
    if ds.dataset_level_meters:
        doc["elec_meters"] = [meter_to_doc(m) for m in ds.dataset_level_meters]
    return doc


def _default(value):
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError(f"cannot serialise {type(value).__name__} to canonical JSON")


def canonical_dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False,
                      allow_nan=False, default=_default) + "\n"


def export_dataset(ds: Dataset, library=None, resolved: bool = False) -> str:
    """Canonical JSON text for ``ds``.

    With ``resolved=True`` every appliance entry is replaced by its resolved
    record (merged type properties, effective categories, expanded components,
    collected priors); ``library`` is then required.
    """
    doc = dataset_to_doc(ds)
    if resolved:
        if library is None:
            raise ValueError("a type library is needed for a resolved export")
        from .typedb import resolve_appliance

        def inline(meters: list, source: tuple[ElecMeter, ...]):
            for meter_doc, meter in zip(meters, source):
                meter_doc["appliances"] = [
                    resolved_appliance_to_doc(resolve_appliance(library, a))
                    for a in meter.appliances
                ]

        for b_doc, b in zip(doc["buildings"], sorted(ds.buildings, key=lambda b: b.instance)):
            inline(b_doc["elec_meters"], b.elec_meters)
        inline(doc.get("elec_meters", []), ds.dataset_level_meters)
    return canonical_dumps(doc)


def resolved_appliance_to_doc(r) -> dict:
    """JSON record of a typedb.ResolvedAppliance."""
    doc = appliance_to_doc(r.appliance)
    doc["components"] = [resolved_appliance_to_doc(c) for c in r.components]
    doc["categories"] = categories_to_doc(r.categories)
    doc["ancestry"] = list(r.type.ancestry)
    doc["type_properties"] = r.type.properties
    doc["priors"] = {name: [prior_to_doc(p) for p in priors]
                     for name, priors in r.priors.items()}
    return doc
