"""Domain types for dataset, building, meter and appliance metadata.

Every type is a frozen dataclass.  ``span`` fields record where an object came
from and are excluded from equality, so two objects bound from differently
formatted documents still compare equal.

:func:`check_local_invariants` checks one object in isolation; it never looks
at children or at the type library (except for an optional room vocabulary).
"""

from __future__ import annotations

import datetime as dt
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Any, Collection, Mapping, Optional, Union

from .diagnostics import Diagnostic, Span, error, join_path

PHYSICAL_QUANTITIES = ("power", "energy", "cumulative_energy", "voltage", "current")
AC_TYPES = ("active", "apparent", "reactive")
# quantities that have an AC decomposition and therefore need ac_type
AC_QUANTITIES = ("power", "energy", "cumulative_energy")

TRADITIONAL_CATEGORIES = (
    "wet", "cold", "consumer electronics", "ICT", "cooking", "lighting", "heating",
)
SIZE_CATEGORIES = ("large", "small")

DISTRIBUTION_NAMES = (
    "on_power", "on_duration", "off_duration",
    "usage_hour_per_day", "usage_day_per_week", "usage_month_per_year",
    "rooms", "subtypes", "appliance_correlations",
    "ownership", "ownership_per_country", "ownership_per_continent",
)
PRIOR_SOURCES = ("subjective", "analysis", "publication")
LEARNT_MODEL_TYPES = ("HMM", "FHMM", "CO")

NORMALIZATION_TOLERANCE = 1e-6

# A date is either a bare year or a calendar date.
DateValue = Union[int, dt.date]

_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")


def as_date(value: DateValue) -> dt.date:
    """Bare years compare as January 1 of that year."""
    if isinstance(value, int):
        return dt.date(value, 1, 1)
    return value


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class DateRange:
    start: DateValue
    end: Optional[DateValue] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class GeoLocation:
    latitude: float
    longitude: float
    locality: Optional[str] = None
    country: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Measurement:
    physical_quantity: str
    ac_type: Optional[str] = None
    lower_limit: Optional[float] = None
    upper_limit: Optional[float] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class MeterDevice:
    model: str
    manufacturer: Optional[str] = None
    sample_period: Optional[float] = None
    measurements: tuple[Measurement, ...] = ()
    description: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Room:
    name: str
    instance: int = 1
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RoomRef:
    """Reference from an appliance to one of its building's rooms."""
    name: str
    instance: int = 1


@dataclass(frozen=True)
class ApplianceRef:
    type: str
    instance: int = 1


@dataclass(frozen=True)
class Sensor:
    data_location: str
    annotations: Mapping[str, Any] = field(default_factory=dict)
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PreprocessingStep:
    filter: str
    parameters: Mapping[str, Any] = field(default_factory=dict)
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class DistributionData:
    frequencies: tuple[float, ...]
    bin_edges: Optional[tuple[float, ...]] = None
    categories: Optional[tuple[str, ...]] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ModelSpec:
    distribution_name: str
    parameters: Mapping[str, float] = field(default_factory=dict)
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Prior:
    distribution_of_data: Optional[DistributionData] = None
    model: Optional[ModelSpec] = None
    source: Optional[str] = None
    citation: Optional[str] = None
    specific_to: Optional[str] = None
    training_data: Optional[str] = None
    # set by collect_priors; never authored
    distance: Optional[int] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class DistributionSet:
    distributions: Mapping[str, tuple[Prior, ...]] = field(default_factory=dict)
    span: Optional[Span] = _span()

    def get(self, name: str) -> tuple[Prior, ...]:
        return tuple(self.distributions.get(name, ()))

    def __bool__(self) -> bool:
        return bool(self.distributions)


@dataclass(frozen=True)
class Categories:
    traditional: Optional[str] = None
    size: Optional[str] = None
    electrical: tuple[str, ...] = ()
    google_shopping: tuple[str, ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Appliance:
    type: str
    instance: int = 1
    subtype: Optional[str] = None
    components: tuple["Appliance", ...] = ()
    count: Optional[int] = None
    multiple: Optional[bool] = None
    on_power_threshold: Optional[float] = None
    nominal_consumption: Optional[Mapping[str, Any]] = None
    manufacturer: Optional[str] = None
    year_of_manufacture: Optional[int] = None
    room: Optional[RoomRef] = None
    main_room_light: Optional[bool] = None
    dates_active: tuple[DateRange, ...] = ()
    distributions: DistributionSet = field(default_factory=DistributionSet)
    extras: Mapping[str, Any] = field(default_factory=dict)
    span: Optional[Span] = _span()

    @property
    def ref(self) -> ApplianceRef:
        return ApplianceRef(self.type, self.instance)


@dataclass(frozen=True)
class ElecMeter:
    instance: int
    device_model: str
    site_meter: bool = False
    submeter_of: Optional[int] = None
    upstream_meter_in_building: Optional[int] = None
    sensors: tuple[Sensor, ...] = ()
    appliances: tuple[Appliance, ...] = ()
    dominant_appliance: Optional[ApplianceRef] = None
    preprocessing: tuple[PreprocessingStep, ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Building:
    instance: int
    rooms: tuple[Room, ...] = ()
    timezone: Optional[str] = None
    geo_location: Optional[GeoLocation] = None
    temporal_coverage: Optional[DateRange] = None
    elec_meters: tuple[ElecMeter, ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Dataset:
    name: str
    long_name: Optional[str] = None
    publication_date: Optional[DateValue] = None
    rights_list: tuple[str, ...] = ()
    geospatial_coverage: Optional[str] = None
    temporal_coverage: Optional[DateRange] = None
    funding: tuple[str, ...] = ()
    creators: tuple[str, ...] = ()
    related_documents: tuple[str, ...] = ()
    timezone: Optional[str] = None
    geo_location: Optional[GeoLocation] = None
    meter_devices: Mapping[str, MeterDevice] = field(default_factory=dict)
    buildings: tuple[Building, ...] = ()
    dataset_level_meters: tuple[ElecMeter, ...] = ()
    span: Optional[Span] = _span()

    def building(self, instance: int) -> Optional[Building]:
        for b in self.buildings:
            if b.instance == instance:
                return b
        return None


@dataclass(frozen=True)
class ApplianceType:
    name: str
    parent: Optional[str] = None
    subtypes: tuple[str, ...] = ()
    categories: Categories = field(default_factory=Categories)
    components: tuple[Appliance, ...] = ()
    # component types an instance may add beyond the default components
    allowed_components: tuple[str, ...] = ()
    distributions: DistributionSet = field(default_factory=DistributionSet)
    # raw property-rule mapping; see schema.fragment_from_doc
    additional_properties: Mapping[str, Any] = field(default_factory=dict)
    do_not_inherit: tuple[str, ...] = ()
    description: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LearntModel:
    model_type: str
    appliance_type: str
    training_data: Optional[str] = None
    date_prepared: Optional[DateValue] = None
    parameters: Optional[Mapping[str, Any]] = None
    span: Optional[Span] = _span()


# --------------------------------------------------------------------------
# local invariants


@singledispatch
def check_local_invariants(obj: Any, path: str = "", *,
                           rooms: Optional[Collection[str]] = None) -> list[Diagnostic]:
    """Return one diagnostic per violated single-object invariant of ``obj``.

    ``path`` prefixes every diagnostic path.  ``rooms`` is the room-name
    vocabulary; room names are not checked when it is omitted.
    """
    raise TypeError(f"no local invariants defined for {type(obj).__name__}")


def _dups(values) -> list:
    return [v for v, n in Counter(values).items() if n > 1]


@check_local_invariants.register
def _(obj: Dataset, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if not obj.name:
        out.append(error("E-DATASET-NAME", join_path(path, "name"),
                         "dataset name must be non-empty", obj.span))
    for key, device in obj.meter_devices.items():
        if not key or key != device.model:
            out.append(error("E-DEVICE-KEY", join_path(path, "meter_devices", key),
                             f"meter_devices key {key!r} must be non-empty and equal "
                             f"the device model {device.model!r}", device.span))
    for inst in _dups(b.instance for b in obj.buildings):
        out.append(error("E-BUILDING-DUP", join_path(path, "buildings", inst),
                         f"building instance {inst} appears more than once", obj.span))
    for inst in _dups(m.instance for m in obj.dataset_level_meters):
        out.append(error("E-METER-DUP", join_path(path, "elec_meters", inst),
                         f"dataset-level meter instance {inst} appears more than once",
                         obj.span))
    return out


@check_local_invariants.register
def _(obj: DateRange, path: str = "", *, rooms=None) -> list[Diagnostic]:
    if obj.end is not None and as_date(obj.start) > as_date(obj.end):
        return [error("E-DATE-RANGE", path, f"start {obj.start} is after end {obj.end}",
                      obj.span)]
    return []


@check_local_invariants.register
def _(obj: GeoLocation, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if not -90 <= obj.latitude <= 90:
        out.append(error("E-GEO-LATITUDE", join_path(path, "latitude"),
                         f"latitude {obj.latitude} outside [-90, 90]", obj.span))
    if not -180 <= obj.longitude <= 180:
        out.append(error("E-GEO-LONGITUDE", join_path(path, "longitude"),
                         f"longitude {obj.longitude} outside [-180, 180]", obj.span))
    if obj.country is not None and not _COUNTRY_RE.match(obj.country):
        out.append(error("E-GEO-COUNTRY", join_path(path, "country"),
                         f"country {obj.country!r} is not an ISO-3166 alpha-2 code",
                         obj.span))
    return out


@check_local_invariants.register
def _(obj: MeterDevice, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if obj.sample_period is not None and not obj.sample_period > 0:
        out.append(error("E-DEVICE-SAMPLE-PERIOD", join_path(path, "sample_period"),
                         f"sample_period must be positive, got {obj.sample_period}",
                         obj.span))
    if not obj.measurements:
        out.append(error("E-DEVICE-NO-MEASUREMENTS", join_path(path, "measurements"),
                         "a meter device needs at least one measurement", obj.span))
    for q, ac in _dups((m.physical_quantity, m.ac_type) for m in obj.measurements):
        label = q if ac is None else f"{ac} {q}"
        out.append(error("E-DEVICE-DUP-MEASUREMENT", join_path(path, "measurements"),
                         f"measurement {label!r} listed more than once", obj.span))
    return out


@check_local_invariants.register
def _(obj: Measurement, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if obj.physical_quantity not in PHYSICAL_QUANTITIES:
        out.append(error("E-MEASUREMENT-QUANTITY", join_path(path, "physical_quantity"),
                         f"unknown physical_quantity {obj.physical_quantity!r}", obj.span))
    elif obj.physical_quantity in AC_QUANTITIES:
        if obj.ac_type not in AC_TYPES:
            out.append(error("E-MEASUREMENT-AC-TYPE", join_path(path, "ac_type"),
                             f"{obj.physical_quantity} needs ac_type in {AC_TYPES}, "
                             f"got {obj.ac_type!r}", obj.span))
    elif obj.ac_type is not None:
        out.append(error("E-MEASUREMENT-AC-TYPE", join_path(path, "ac_type"),
                         f"{obj.physical_quantity} has no ac_type", obj.span))
    if (obj.lower_limit is not None and obj.upper_limit is not None
            and obj.lower_limit > obj.upper_limit):
        out.append(error("E-MEASUREMENT-LIMITS", join_path(path, "lower_limit"),
                         f"lower_limit {obj.lower_limit} exceeds upper_limit "
                         f"{obj.upper_limit}", obj.span))
    return out


@check_local_invariants.register
def _(obj: Building, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if obj.instance < 1:
        out.append(error("E-BUILDING-INSTANCE", join_path(path, "instance"),
                         f"building instance must be >= 1, got {obj.instance}", obj.span))
    for inst in _dups(m.instance for m in obj.elec_meters):
        out.append(error("E-METER-DUP", join_path(path, "elec_meters", inst),
                         f"meter instance {inst} appears more than once", obj.span))
    for name, inst in _dups((r.name, r.instance) for r in obj.rooms):
        out.append(error("E-ROOM-DUP", join_path(path, "rooms"),
                         f"room {name},{inst} appears more than once", obj.span))
    return out


@check_local_invariants.register
def _(obj: Room, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if rooms is not None and obj.name not in rooms:
        out.append(error("E-ROOM-UNKNOWN-NAME", join_path(path, "name"),
                         f"room name {obj.name!r} is not in the room vocabulary", obj.span))
    if obj.instance < 1:
        out.append(error("E-ROOM-INSTANCE", join_path(path, "instance"),
                         f"room instance must be >= 1, got {obj.instance}", obj.span))
    return out


@check_local_invariants.register
def _(obj: ElecMeter, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if obj.instance < 1:
        out.append(error("E-METER-INSTANCE", join_path(path, "instance"),
                         f"meter instance must be >= 1, got {obj.instance}", obj.span))
    is_sub = obj.submeter_of is not None
    if obj.site_meter and is_sub:
        out.append(error("E-METER-ROOT-AND-SUB", path,
                         "a meter cannot be both a site meter and a submeter", obj.span))
    elif not obj.site_meter and not is_sub:
        out.append(error("E-WIRING-NO-PARENT-OR-ROOT", path,
                         "a meter must set either site_meter: true or submeter_of",
                         obj.span))
    if not 1 <= len(obj.sensors) <= 3:
        out.append(error("E-METER-SENSOR-COUNT", join_path(path, "sensors"),
                         f"a meter needs between 1 and 3 sensors, got {len(obj.sensors)}",
                         obj.span))
    if obj.upstream_meter_in_building is not None and not is_sub:
        out.append(error("E-METER-UPSTREAM-WITHOUT-SUB",
                         join_path(path, "upstream_meter_in_building"),
                         "upstream_meter_in_building requires submeter_of", obj.span))
    refs = [a.ref for a in obj.appliances]
    if obj.dominant_appliance is not None and obj.dominant_appliance not in refs:
        d = obj.dominant_appliance
        out.append(error("E-DOMINANT-NOT-MEMBER", join_path(path, "dominant_appliance"),
                         f"dominant appliance {d.type},{d.instance} is not on this meter",
                         obj.span))
    for ref in _dups(refs):
        out.append(error("E-APPLIANCE-DUP", join_path(path, "appliances"),
                         f"appliance {ref.type},{ref.instance} listed more than once",
                         obj.span))
    return out


@check_local_invariants.register
def _(obj: Sensor, path: str = "", *, rooms=None) -> list[Diagnostic]:
    if not obj.data_location:
        return [error("E-SENSOR-LOCATION", join_path(path, "data_location"),
                      "data_location must be non-empty", obj.span)]
    return []


@check_local_invariants.register
def _(obj: PreprocessingStep, path: str = "", *, rooms=None) -> list[Diagnostic]:
    if not obj.filter:
        return [error("E-PREPROCESSING-FILTER", join_path(path, "filter"),
                      "preprocessing filter name must be non-empty", obj.span)]
    return []


@check_local_invariants.register
def _(obj: Appliance, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if obj.instance < 1:
        out.append(error("E-APPLIANCE-INSTANCE", join_path(path, "instance"),
                         f"appliance instance must be >= 1, got {obj.instance}", obj.span))
    if obj.count is not None and obj.multiple is not None:
        out.append(error("E-COUNT-AND-MULTIPLE", path,
                         "count and multiple are mutually exclusive", obj.span))
    if obj.count is not None and obj.count < 1:
        out.append(error("E-APPLIANCE-COUNT", join_path(path, "count"),
                         f"count must be >= 1, got {obj.count}", obj.span))
    if obj.on_power_threshold is not None and obj.on_power_threshold < 0:
        out.append(error("E-APPLIANCE-THRESHOLD", join_path(path, "on_power_threshold"),
                         f"on_power_threshold must be >= 0, got {obj.on_power_threshold}",
                         obj.span))
    return out


@check_local_invariants.register
def _(obj: ApplianceType, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if not obj.name:
        out.append(error("E-TYPE-NAME", join_path(path, "name"),
                         "appliance type name must be non-empty", obj.span))
    if obj.parent is not None and obj.parent == obj.name:
        out.append(error("E-TYPE-CYCLE", join_path(path, "parent"),
                         f"{obj.name!r} names itself as parent", obj.span))
    for s in _dups(obj.subtypes):
        out.append(error("E-TYPE-DUP-SUBTYPE", join_path(path, "subtypes"),
                         f"subtype {s!r} listed more than once", obj.span))
    return out


@check_local_invariants.register
def _(obj: Categories, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if obj.traditional is not None and obj.traditional not in TRADITIONAL_CATEGORIES:
        out.append(error("E-CATEGORY-TRADITIONAL", join_path(path, "traditional"),
                         f"unknown traditional category {obj.traditional!r}", obj.span))
    if obj.size is not None and obj.size not in SIZE_CATEGORIES:
        out.append(error("E-CATEGORY-SIZE", join_path(path, "size"),
                         f"size must be one of {SIZE_CATEGORIES}, got {obj.size!r}",
                         obj.span))
    for name in ("electrical", "google_shopping"):
        for term in _dups(getattr(obj, name)):
            out.append(error("E-CATEGORY-DUP", join_path(path, name),
                             f"category {term!r} listed more than once", obj.span))
    return out


@check_local_invariants.register
def _(obj: DistributionSet, path: str = "", *, rooms=None) -> list[Diagnostic]:
    return [error("E-BAD-DISTRIBUTION-NAME", join_path(path, name),
                  f"{name!r} is not a known distribution name", obj.span)
            for name in obj.distributions if name not in DISTRIBUTION_NAMES]


@check_local_invariants.register
def _(obj: Prior, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if obj.distribution_of_data is None and obj.model is None:
        out.append(error("E-PRIOR-EMPTY", path,
                         "a prior needs distribution_of_data or model", obj.span))
    if obj.distance is not None and obj.distance < 0:
        out.append(error("E-PRIOR-DISTANCE", join_path(path, "distance"),
                         f"distance must be >= 0, got {obj.distance}", obj.span))
    if obj.source is not None and obj.source not in PRIOR_SOURCES:
        out.append(error("E-PRIOR-SOURCE", join_path(path, "source"),
                         f"source must be one of {PRIOR_SOURCES}, got {obj.source!r}",
                         obj.span))
    return out


@check_local_invariants.register
def _(obj: DistributionData, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    freq_path = join_path(path, "frequencies")
    if (obj.bin_edges is None) == (obj.categories is None):
        out.append(error("E-PRIOR-SHAPE", path,
                         "distribution data needs exactly one of bin_edges or categories",
                         obj.span))
    elif obj.bin_edges is not None:
        if len(obj.frequencies) != len(obj.bin_edges) - 1:
            out.append(error("E-PRIOR-SHAPE", freq_path,
                             f"{len(obj.bin_edges)} bin edges need "
                             f"{len(obj.bin_edges) - 1} frequencies, got "
                             f"{len(obj.frequencies)}", obj.span))
        if any(b <= a for a, b in zip(obj.bin_edges, obj.bin_edges[1:])):
            out.append(error("E-PRIOR-BIN-EDGES", join_path(path, "bin_edges"),
                             "bin_edges must be strictly increasing", obj.span))
    elif len(obj.frequencies) != len(obj.categories):
        out.append(error("E-PRIOR-SHAPE", freq_path,
                         f"{len(obj.categories)} categories need as many frequencies, "
                         f"got {len(obj.frequencies)}", obj.span))
    if any(f < 0 for f in obj.frequencies):
        out.append(error("E-PRIOR-NEGATIVE-FREQUENCY", freq_path,
                         "frequencies must be non-negative", obj.span))
    total = math.fsum(obj.frequencies)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        out.append(error("E-PRIOR-NOT-NORMALIZED", freq_path,
                         f"frequencies sum to {total:.9g}, not 1", obj.span))
    return out


@check_local_invariants.register
def _(obj: ModelSpec, path: str = "", *, rooms=None) -> list[Diagnostic]:
    if not obj.distribution_name:
        return [error("E-PRIOR-MODEL-NAME", join_path(path, "distribution_name"),
                      "model distribution_name must be non-empty", obj.span)]
    return []


@check_local_invariants.register
def _(obj: LearntModel, path: str = "", *, rooms=None) -> list[Diagnostic]:
    out = []
    if obj.model_type not in LEARNT_MODEL_TYPES:
        out.append(error("E-BAD-MODEL-TYPE", join_path(path, "model_type"),
                         f"model_type {obj.model_type!r} not in {LEARNT_MODEL_TYPES}",
                         obj.span))
    if obj.parameters is None:
        out.append(error("E-MODEL-PARAMETERS", join_path(path, "parameters"),
                         "a learnt model needs a parameters mapping", obj.span))
    return out
