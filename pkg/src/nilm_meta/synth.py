"""Random, valid metadata folders for property tests and benchmarks.

Everything is driven by a ``random.Random`` so a seed reproduces a dataset.
Documents are plain Python structures shaped like hand-written YAML.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from .loader import RawDatasetFolder, bind
from .model import Dataset
from .nodes import Node

DEVICES = {
    "EnviR": {
        "model": "EnviR",
        "manufacturer": "Current Cost",
        "sample_period": 6,
        "measurements": [{"physical_quantity": "power", "ac_type": "apparent",
                          "lower_limit": 0, "upper_limit": 30000}],
    },
    "Plug": {
        "model": "Plug",
        "manufacturer": "Acme",
        "sample_period": 1,
        "measurements": [{"physical_quantity": "power", "ac_type": "active",
                          "lower_limit": 0, "upper_limit": 4000},
                         {"physical_quantity": "voltage"}],
    },
}

ROOMS = ("kitchen", "lounge", "bedroom", "bathroom", "hall", "utility", "study")


@dataclass
class SynthConfig:
    buildings: int = 3
    meters_per_building: tuple[int, int] = (1, 16)
    cross_building_rate: float = 0.1
    site_meters: tuple[int, int] = (1, 2)
    appliances_per_meter: tuple[int, int] = (0, 3)
    dataset_level_meters: int = 0


def _appliance(rng: random.Random, instance: int, rooms: list[dict]) -> dict[str, Any]:
    kind = rng.choice(["fridge", "television", "light", "washing machine", "radio",
                       "heating element", "wine cooler"])
    doc: dict[str, Any] = {"type": kind, "instance": instance}
    if kind == "television":
        doc["subtype"] = rng.choice(["CRT", "LCD", "plasma"])
        doc["screen_size"] = rng.randint(14, 60)
    elif kind == "radio":
        doc["subtype"] = rng.choice(["analogue", "digital"])
    elif kind == "light":
        doc["components"] = [{"type": "LED lamp", "count": rng.randint(1, 12),
                              "nominal_consumption": {"on_power": rng.choice([5, 7, 10])}}]
        if rng.random() < 0.5:
            doc["components"].append({"type": "dimmer"})
    if rng.random() < 0.5:
        doc["on_power_threshold"] = rng.choice([5, 10, 20.5])
    if rooms and rng.random() < 0.7:
        room = rng.choice(rooms)
        doc["room"] = {"name": room["name"], "instance": room["instance"]}
    if rng.random() < 0.3:
        doc["manufacturer"] = rng.choice(["Philips", "Bosch", "Sony"])
        doc["year_of_manufacture"] = rng.randint(1995, 2014)
    if rng.random() < 0.2:
        start = rng.randint(2005, 2012)
        doc["dates_active"] = [{"start": start, "end": start + rng.randint(0, 3)}]
    return doc


def _meter(rng: random.Random, cfg: SynthConfig, building: int, instance: int,
           rooms: list[dict], counters: dict) -> dict[str, Any]:
    n_sensors = rng.choice([1, 1, 1, 2, 3])
    doc: dict[str, Any] = {
        "instance": instance,
        "device_model": rng.choice(sorted(DEVICES)),
        "sensors": [{"data_location": f"house{building}/channel_{instance}_{k}.dat"}
                    for k in range(n_sensors)],
    }
    appliances = []
    for _ in range(rng.randint(*cfg.appliances_per_meter)):
        a = _appliance(rng, 0, rooms)
        counters[a["type"]] = counters.get(a["type"], 0) + 1
        a["instance"] = counters[a["type"]]
        appliances.append(a)
    if appliances:
        doc["appliances"] = appliances
        if rng.random() < 0.5:
            d = rng.choice(appliances)
            doc["dominant_appliance"] = {"type": d["type"], "instance": d["instance"]}
    if rng.random() < 0.1:
        doc["preprocessing"] = [{"filter": "clip", "maximum": 4000}]
    return doc


def generate_folder(rng: random.Random, cfg: Optional[SynthConfig] = None
                    ) -> tuple[dict, dict[int, dict]]:
    """A valid (dataset document, {building index: building document}) pair.

    Parents are always drawn from meters created earlier, so the wiring is
    acyclic; a ``cross_building_rate`` share of submeters hang off a meter in
    an earlier building via ``upstream_meter_in_building``.
    """
    cfg = cfg or SynthConfig()
    dataset = {
        "name": f"SYNTH-{rng.randint(0, 9999):04d}",
        "long_name": "Synthetic dataset",
        "timezone": "Europe/London",
        "publication_date": f"{rng.randint(2010, 2014)}-0{rng.randint(1, 9)}-1{rng.randint(0, 9)}",
        "geo_location": {"locality": "London", "country": "GB",
                         "latitude": round(rng.uniform(50, 55), 4),
                         "longitude": round(rng.uniform(-3, 1), 4)},
        "temporal_coverage": {"start": "2012-11-09", "end": "2015-01-05"},
        "meter_devices": {k: dict(v) for k, v in DEVICES.items()},
    }
    created: list[tuple[int, int]] = []
    buildings: dict[int, dict] = {}
    for b in range(1, cfg.buildings + 1):
        rooms = [{"name": name, "instance": 1} for name in rng.sample(ROOMS, rng.randint(0, 4))]
        n = rng.randint(*cfg.meters_per_building)
        n_sites = min(n, rng.randint(*cfg.site_meters))
        counters: dict[str, int] = {}
        meters = []
        for m in range(1, n + 1):
            doc = _meter(rng, cfg, b, m, rooms, counters)
            if m <= n_sites:
                doc["site_meter"] = True
            else:
                others = [ref for ref in created if ref[0] != b]
                if others and rng.random() < cfg.cross_building_rate:
                    ub, um = rng.choice(others)
                    doc["submeter_of"] = um
                    doc["upstream_meter_in_building"] = ub
                else:
                    doc["submeter_of"] = rng.randint(1, m - 1)
            meters.append(doc)
            created.append((b, m))
        buildings[b] = {"instance": b, "rooms": rooms, "elec_meters": meters}
    if cfg.dataset_level_meters:
        no_appliances = SynthConfig(appliances_per_meter=(0, 0))
        dataset["elec_meters"] = [dict(_meter(rng, no_appliances, 0, m, [], {}), site_meter=True)
                                  for m in range(1, cfg.dataset_level_meters + 1)]
    return dataset, buildings


def bind_folder(dataset_doc: dict, building_docs: dict[int, dict]) -> Dataset:
    raw = RawDatasetFolder(Node.from_python(dataset_doc),
                           {i: Node.from_python(d) for i, d in building_docs.items()})
    dataset, diags = bind(raw)
    if dataset is None:
        raise ValueError("generated documents failed to bind: "
                         + "; ".join(d.to_text() for d in diags))
    return dataset


def generate_dataset(rng: random.Random, cfg: Optional[SynthConfig] = None) -> Dataset:
    return bind_folder(*generate_folder(rng, cfg))


def write_folder(path, dataset_doc: dict, building_docs: dict[int, dict]) -> Path:
    """Write ``dataset.yaml`` and ``building<i>.yaml`` files under ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    (path / "dataset.yaml").write_text(yaml.safe_dump(dataset_doc, sort_keys=False))
    for i, doc in building_docs.items():
        (path / f"building{i}.yaml").write_text(yaml.safe_dump(doc, sort_keys=False))
    return path


def benchmark_config() -> SynthConfig:
    """20 buildings with 15 meters each."""
    return SynthConfig(buildings=20, meters_per_building=(15, 15), appliances_per_meter=(1, 3))
