"""Acceptance criteria 1 to 8.  The terminal summary prints one PASS/FAIL line each."""

import math
import random
import time

import pytest

from nilm_meta.canonical import export_dataset
from nilm_meta.diagnostics import MetadataError
from nilm_meta.inheritance import merge_node
from nilm_meta.loader import bind, load_dataset
from nilm_meta.model import DistributionData, check_local_invariants
from nilm_meta.nodes import Node
from nilm_meta.synth import SynthConfig, benchmark_config, generate_dataset, generate_folder
from nilm_meta.synth import bind_folder, write_folder
from nilm_meta.typedb import (
    build_type_library, collect_priors, load_type_library, merged_additional_schema,
    resolve_type,
)
from nilm_meta.validate import validate_dataset, validate_path
from nilm_meta.wiring import MeterRef, build_wiring_forest, submeters_of, upstream_of

from conftest import UK_DALE
from oracles import KindConflict, brute_merge, fold_resolve, forest_facts, same_ordered

SEED = 20141105


# -- 1 ---------------------------------------------------------------------

def test_criterion_1_uk_dale_example_validates():
    start = time.perf_counter()
    library = load_type_library()
    dataset, report = validate_path(UK_DALE, library)
    elapsed = time.perf_counter() - start
    assert report.errors == 0, report.to_text()
    assert elapsed < 1.0

    assert dataset.name == "UK-DALE"
    device = dataset.meter_devices["EnviR"]
    assert device.manufacturer == "Current Cost"
    (m,) = device.measurements
    assert (m.physical_quantity, m.ac_type, m.lower_limit, m.upper_limit) == \
        ("power", "apparent", 0, 30000)
    b = dataset.building(1)
    assert [(r.name, r.instance) for r in b.rooms] == [("kitchen", 1), ("lounge", 1)]
    m1, m2 = b.elec_meters
    assert m1.site_meter and m1.submeter_of is None
    assert m2.submeter_of == 1 and not m2.site_meter
    (clip,) = m2.preprocessing
    assert clip.filter == "clip" and clip.parameters == {"maximum": 4000}
    (light,) = m2.appliances
    assert light.type == "light" and light.on_power_threshold == 10
    lamps, dimmer = light.components
    assert (lamps.type, lamps.count, lamps.manufacturer, lamps.year_of_manufacture) == \
        ("LED lamp", 10, "Philips", 2011)
    assert dimmer.type == "dimmer"
    (active,) = light.dates_active
    assert (active.start, active.end) == (2012, 2013)


# -- 2 ---------------------------------------------------------------------

M2 = "buildings/1/elec_meters/2"
LIGHT = M2 + "/appliances/0"


def _meter2(docs):
    return docs[1][1]["elec_meters"][1]


def _light(docs):
    return _meter2(docs)["appliances"][0]


def _mut_missing_device(d):
    del _meter2(d)["device_model"]


def _mut_unknown_device(d):
    _meter2(d)["device_model"] = "NoSuchDevice"


def _mut_dangling(d):
    _meter2(d)["submeter_of"] = 3


def _mut_root_and_sub(d):
    _meter2(d)["site_meter"] = True


def _mut_four_sensors(d):
    _meter2(d)["sensors"] = [{"data_location": f"house1/channel_{i}.dat"} for i in range(2, 6)]


def _mut_count_and_multiple(d):
    _light(d)["components"][0]["multiple"] = True


def _mut_bad_subtype(d):
    _light(d)["subtype"] = "lava lamp"


def _mut_unnormalized_prior(d):
    _light(d)["distributions"] = {"on_power": [{"distribution_of_data": {
        "bin_edges": [0, 10, 20, 40], "frequencies": [0.5, 0.4, 0.2]}}]}


MUTATIONS = [
    (_mut_missing_device, "E-MISSING-REQUIRED", M2 + "/device_model"),
    (_mut_unknown_device, "E-UNKNOWN-DEVICE", M2 + "/device_model"),
    (_mut_dangling, "E-WIRING-DANGLING", M2 + "/submeter_of"),
    (_mut_root_and_sub, "E-METER-ROOT-AND-SUB", M2),
    (_mut_four_sensors, "E-METER-SENSOR-COUNT", M2 + "/sensors"),
    (_mut_count_and_multiple, "E-COUNT-AND-MULTIPLE", LIGHT + "/components/0"),
    (_mut_bad_subtype, "E-BAD-SUBTYPE", LIGHT + "/subtype"),
    (_mut_unnormalized_prior, "E-PRIOR-NOT-NORMALIZED",
     LIGHT + "/distributions/on_power/0/distribution_of_data/frequencies"),
]


def test_criterion_2_mutation_suite(example_docs, write_docs, library):
    import copy
    assert len(MUTATIONS) >= 8
    for mutate, code, path in MUTATIONS:
        docs = copy.deepcopy(example_docs)
        mutate(docs)
        _, report = validate_path(write_docs(*docs), library)
        found = [(d.code, d.path) for d in report.diagnostics if d.is_error]
        assert found == [(code, path)], (mutate.__name__, report.to_text())


# -- 3 ---------------------------------------------------------------------

_KEYS = "abcdefg"
_SCALARS = [0, 1, 2, 1.0, 2.5, True, False, None, "x", "y", "fridge"]


def _random_value(rng, depth):
    roll = rng.random()
    if depth <= 0 or roll < 0.45:
        return rng.choice(_SCALARS)
    if roll < 0.7:
        return [_random_value(rng, depth - 1) for _ in range(rng.randint(0, 5))]
    return _random_mapping(rng, depth - 1)


def _random_mapping(rng, depth):
    keys = rng.sample(_KEYS, rng.randint(0, 5))
    return {k: _random_value(rng, depth) for k in keys}


def _related_child(rng, parent, depth):
    """A child sharing many keys with ``parent`` so every merge rule gets exercised."""
    child = {}
    for k, v in parent.items():
        roll = rng.random()
        if roll < 0.3:
            continue
        if isinstance(v, dict) and roll < 0.85:
            child[k] = _related_child(rng, v, depth - 1)
        elif isinstance(v, list) and roll < 0.85:
            child[k] = rng.sample(v, rng.randint(0, len(v))) + \
                [_random_value(rng, depth - 2) for _ in range(rng.randint(0, 2))]
        else:
            child[k] = _random_value(rng, depth - 1)
    for k in rng.sample(_KEYS, rng.randint(0, 2)):
        if k not in child:
            child[k] = _random_value(rng, depth - 1)
    if len(child) > 5:
        child = dict(list(child.items())[:5])
    return child


def _depth(value):
    if isinstance(value, dict):
        return 1 + max((_depth(v) for v in value.values()), default=0)
    if isinstance(value, list):
        return 1 + max((_depth(v) for v in value), default=0)
    return 0


def _engine(parent, child, blocked=()):
    try:
        return merge_node(Node.from_python(parent), Node.from_python(child), blocked).to_python()
    except MetadataError as exc:
        assert exc.code == "E-MERGE-KIND-CONFLICT"
        return KindConflict


def _oracle(parent, child, blocked=()):
    try:
        return brute_merge(parent, child, blocked)
    except KindConflict:
        return KindConflict


def test_criterion_3_merge_engine_matches_oracle():
    rng = random.Random(SEED)
    cases = conflicts = 0
    for _ in range(1500):
        parent = _random_mapping(rng, 3)
        child = _related_child(rng, parent, 4) if rng.random() < 0.8 else _random_mapping(rng, 3)
        blocked = tuple(rng.sample(_KEYS, rng.randint(0, 2)))
        assert _depth(parent) <= 4 and _depth(child) <= 4
        got, want = _engine(parent, child, blocked), _oracle(parent, child, blocked)
        if want is KindConflict:
            assert got is KindConflict, (parent, child, blocked)
            conflicts += 1
        else:
            assert got is not KindConflict and same_ordered(got, want), (parent, child, blocked)
        cases += 1
    assert cases >= 1000
    assert 0 < conflicts < cases // 2

    # unit laws
    assert _engine({"l": [1, 2]}, {"l": [2, 3]}) == {"l": [1, 2, 3]}
    assert _engine({"s": 1, "t": "a"}, {"s": 2}) == {"s": 2, "t": "a"}
    assert _engine({"m": {"x": 1, "y": [1]}}, {"m": {"y": [2], "z": 3}}) == \
        {"m": {"x": 1, "y": [1, 2], "z": 3}}
    assert _engine({"d": 1, "e": 2}, {"e": 3}, ("d",)) == {"e": 3}
    assert _engine({"d": [1]}, {"d": [2]}, ("d",)) == {"d": [2]}
    # not propagated below the top level
    assert _engine({"m": {"d": 1}}, {"m": {}}, ("d",)) == {"m": {"d": 1}}


# -- 4 ---------------------------------------------------------------------

CHAIN_DOCS = [
    {"name": "A", "description": "root of the chain", "subtypes": ["a1"],
     "categories": {"traditional": "cold", "size": "large", "electrical": ["compressor"]},
     "additional_properties": {"p_a": {"type": "integer"}},
     "distributions": {"on_power": [{"distribution_of_data": {
         "bin_edges": [0, 100, 200], "frequencies": [0.5, 0.5]}, "source": "subjective"}]}},
    {"name": "B", "parent": "A", "description": "second", "subtypes": ["b1"],
     "additional_properties": {"p_b": {"type": "string"}},
     "distributions": {"on_power": [{"distribution_of_data": {
         "bin_edges": [0, 100, 200], "frequencies": [0.25, 0.75]}, "source": "analysis"}]}},
    {"name": "C", "parent": "B", "subtypes": ["a1", "c1"],
     "categories": {"size": "small", "electrical": ["motor"]},
     "additional_properties": {"p_a": {"type": "number", "minimum": 0}},
     "distributions": {"on_power": [{"distribution_of_data": {
         "bin_edges": [0, 50, 200], "frequencies": [0.9, 0.1]}, "source": "subjective"}]}},
    {"name": "D", "parent": "C", "description": "leaf"},
]


def test_criterion_4_inheritance_chain(library):
    chain = build_type_library(CHAIN_DOCS)
    d = resolve_type(chain, "D")
    assert d.ancestry == ("C", "B", "A")
    assert d.properties["description"] == "leaf"
    assert resolve_type(chain, "C").properties["description"] == "second"
    assert d.properties["categories"]["size"] == "small"
    assert d.properties["categories"]["traditional"] == "cold"
    assert d.subtypes == ("a1", "b1", "c1")
    assert set(d.properties["additional_properties"]) == {"p_a", "p_b"}
    schema = merged_additional_schema(chain, "D")
    assert set(schema.properties) == {"p_a", "p_b"}
    assert schema.properties["p_a"].minimum == 0
    priors = collect_priors(chain, "D", "on_power")
    assert [p.distance for p in priors] == [1, 2, 3]
    assert [p.distribution_of_data.frequencies for p in priors] == \
        [(0.9, 0.1), (0.25, 0.75), (0.5, 0.5)]

    docs = {doc["name"]: doc for doc in CHAIN_DOCS}
    for name in docs:
        assert same_ordered(resolve_type(chain, name).properties, fold_resolve(docs, name))
    seed_docs = {n: library.nodes[n].to_python() for n in library.types}
    for name in seed_docs:
        assert same_ordered(resolve_type(library, name).properties, fold_resolve(seed_docs, name))


# -- 5 ---------------------------------------------------------------------

def _forest_shape(forest):
    return forest.nodes, dict(forest.parents), forest.roots


def _make_cycle(rng, building_docs, forest):
    """Turn a root into a submeter of one of its descendants (or of itself)."""
    root = rng.choice(sorted(forest.roots, key=MeterRef.sort_key))
    below = [n for n in forest.nodes
             if n != root and root in forest.path_to_root(n)]
    target = rng.choice(sorted(below, key=MeterRef.sort_key)) if below else root
    meter = next(m for m in building_docs[root.building]["elec_meters"]
                 if m["instance"] == root.meter)
    meter.pop("site_meter")
    meter["submeter_of"] = target.meter
    meter.pop("upstream_meter_in_building", None)
    if target.building != root.building:
        meter["upstream_meter_in_building"] = target.building


def test_criterion_5_wiring_properties():
    import copy
    rng = random.Random(SEED)
    cross = 0
    for _ in range(100):
        dataset_doc, building_docs = generate_folder(rng, SynthConfig(cross_building_rate=0.25))
        dataset = bind_folder(dataset_doc, building_docs)
        forest, diags = build_wiring_forest(dataset)
        assert diags == []
        assert len(forest.nodes) <= 50 and len(dataset.buildings) <= 3
        cross += sum(1 for c, p in forest.parents.items() if c.building != p.building)

        edges, reach = forest_facts(forest.parents, forest.roots, forest.nodes)
        assert edges == len(forest.nodes) - len(forest.roots)
        assert set(reach.values()) <= forest.roots
        for x in forest.nodes:
            for y in submeters_of(forest, x):
                assert upstream_of(forest, y) == x

        shuffled = copy.deepcopy(building_docs)
        for doc in shuffled.values():
            rng.shuffle(doc["elec_meters"])
        shuffled = dict(rng.sample(list(shuffled.items()), len(shuffled)))
        again, _ = build_wiring_forest(bind_folder(dataset_doc, shuffled))
        assert _forest_shape(again) == _forest_shape(forest)

        cyclic = copy.deepcopy(building_docs)
        _make_cycle(rng, cyclic, forest)
        report = validate_dataset(bind_folder(dataset_doc, cyclic))
        assert "E-WIRING-CYCLE" in report.codes()
    assert cross > 0


# -- 6 ---------------------------------------------------------------------

def _round_trip(dataset, tmp_path, name):
    first = export_dataset(dataset)
    path = tmp_path / f"{name}.json"
    path.write_bytes(first.encode("utf-8"))
    reloaded, diags = bind(load_dataset(path))
    assert reloaded is not None, diags
    return first, export_dataset(reloaded), reloaded


def test_criterion_6_round_trip(tmp_path):
    example, _ = validate_path(UK_DALE)
    first, second, reloaded = _round_trip(example, tmp_path, "example")
    assert first == second
    assert reloaded == example
    rng = random.Random(SEED)
    for i in range(20):
        ds = generate_dataset(rng, SynthConfig(dataset_level_meters=i % 3))
        first, second, reloaded = _round_trip(ds, tmp_path, f"synth{i}")
        assert first == second
        assert reloaded == ds


# -- 7 ---------------------------------------------------------------------

def _frequency_lists(doc):
    if isinstance(doc, dict):
        if "frequencies" in doc:
            yield doc["frequencies"]
        for v in doc.values():
            yield from _frequency_lists(v)
    elif isinstance(doc, list):
        for v in doc:
            yield from _frequency_lists(v)


def test_criterion_7_prior_normalization(library):
    sums = [math.fsum(f) for n in library.types
            for f in _frequency_lists(library.nodes[n].to_python())]
    assert len(sums) >= 5
    assert all(abs(s - 1.0) <= 1e-6 for s in sums)

    broken = DistributionData(frequencies=(0.5, 0.4), bin_edges=(0, 1, 2))
    assert [d.code for d in check_local_invariants(broken)] == ["E-PRIOR-NOT-NORMALIZED"]
    just_inside = DistributionData(frequencies=(0.5, 0.5 + 9e-7), bin_edges=(0, 1, 2))
    assert check_local_invariants(just_inside) == []

    doc = {"name": "broken", "distributions": {"on_power": [{"distribution_of_data": {
        "bin_edges": [0, 1, 2], "frequencies": [0.5, 0.4]}}]}}
    with pytest.raises(MetadataError) as info:
        build_type_library([doc])
    assert "E-PRIOR-NOT-NORMALIZED" in {d.code for d in info.value.diagnostics}


# -- 8 ---------------------------------------------------------------------

def test_criterion_8_runtime(tmp_path, library):
    folder = write_folder(tmp_path / "bench", *generate_folder(random.Random(SEED),
                                                               benchmark_config()))
    start = time.perf_counter()
    dataset, report = validate_path(folder, library)
    text = export_dataset(dataset, library)
    elapsed = time.perf_counter() - start
    assert len(dataset.buildings) == 20
    assert sum(len(b.elec_meters) for b in dataset.buildings) == 300
    assert report.valid and text
    assert elapsed < 5.0
