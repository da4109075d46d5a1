"""Validate, resolve and draw the bundled UK-DALE example folder."""

import json
from pathlib import Path

from nilm_meta.canonical import resolved_appliance_to_doc
from nilm_meta.typedb import resolve_appliance, seed_library
from nilm_meta.validate import validate_path
from nilm_meta.wiring import build_wiring_forest, render_forest

FOLDER = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "uk_dale"


def main():
    library = seed_library()
    dataset, report = validate_path(FOLDER, library)
    print(report.to_text())
    forest, _ = build_wiring_forest(dataset)
    print(render_forest(forest))
    for meter in dataset.building(1).elec_meters:
        for appliance in meter.appliances:
            record = resolved_appliance_to_doc(resolve_appliance(library, appliance))
            print(f"meter {meter.instance}: {appliance.type}")
            print(json.dumps({k: record[k] for k in ("categories", "ancestry")}, indent=2))
            for c in record["components"]:
                print(f"  component {c['type']} count={c.get('count')} "
                      f"electrical={c['categories']['electrical']}")


if __name__ == "__main__":
    main()
