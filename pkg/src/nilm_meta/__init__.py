"""Metadata schema tooling for energy disaggregation datasets.

Load a dataset folder, bind it to typed objects, resolve appliance types
through the prototype-inheritance type library, check wiring and write a
canonical JSON form.
"""

from .canonical import export_dataset
from .diagnostics import Diagnostic, MetadataError, ValidationReport
from .loader import bind, load_dataset
from .model import Appliance, ApplianceType, Dataset, ElecMeter
from .typedb import (
    TypeLibrary, collect_priors, load_type_library, resolve_appliance, resolve_type,
    seed_library,
)
from .validate import validate_dataset, validate_path
from .wiring import MeterRef, WiringForest, build_wiring_forest

__all__ = [
    "Appliance", "ApplianceType", "Dataset", "Diagnostic", "ElecMeter", "MetadataError",
    "MeterRef", "TypeLibrary", "ValidationReport", "WiringForest", "bind",
    "build_wiring_forest", "collect_priors", "export_dataset", "load_dataset",
    "load_type_library", "resolve_appliance", "resolve_type", "seed_library",
    "validate_dataset", "validate_path",
]
