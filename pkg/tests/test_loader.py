import json

import pytest
from hypothesis import given, strategies as st

from nilm_meta.diagnostics import MetadataError
from nilm_meta.loader import bind, bind_appliance, load_dataset, load_dataset_dir
from nilm_meta.nodes import Node, parse_document

from conftest import UK_DALE


# -- parsing ---------------------------------------------------------------

def test_yaml_scalar_mapping():
    node = parse_document(b"instance: 1", "yaml")
    assert node.to_python() == {"instance": 1}


def test_empty_document_is_empty_mapping():
    assert parse_document(b"", "yaml").to_python() == {}
    assert parse_document(b"", "json").to_python() == {}


@pytest.mark.parametrize("text, fmt", [("{a: 1, a: 2}", "yaml"), ('{"a": 1, "a": 2}', "json")])
def test_duplicate_keys(text, fmt):
    with pytest.raises(MetadataError) as info:
        parse_document(text.encode(), fmt)
    assert info.value.code == "E-DUP-KEY"


def test_parse_error_has_a_line():
    with pytest.raises(MetadataError) as info:
        parse_document(b"a: 1\nb: [1, 2\n", "yaml", "x.yaml")
    assert info.value.code == "E-PARSE"
    assert info.value.span.file == "x.yaml"


def test_json_spans_track_lines():
    node = parse_document(b'{\n  "a": 1,\n  "b": {"c": [1, 2]}\n}', "json", "d.json")
    assert node.get("a").span.line == 2
    assert node.get("b").get("c").span.line == 3


def test_yaml_spans_track_lines():
    node = parse_document(b"a: 1\nb:\n  c: 2\n", "yaml")
    assert node.get("b").get("c").span.line == 3


def test_yaml_dates_become_dates():
    import datetime as dt
    node = parse_document(b"d: 2013-04-01\ny: 2012", "yaml")
    assert node.get("d").value == dt.date(2013, 4, 1)
    assert node.get("y").value == 2012


_json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6) | st.text(max_size=8),
    lambda inner: st.lists(inner, max_size=4)
    | st.dictionaries(st.text(max_size=5), inner, max_size=4),
    max_leaves=20,
)


@given(st.dictionaries(st.text(max_size=5), _json_values, max_size=5))
def test_json_parse_matches_stdlib(doc):
    text = json.dumps(doc, indent=1).encode()
    assert parse_document(text, "json").to_python() == json.loads(text)


# -- folders ---------------------------------------------------------------

def test_example_folder(tmp_path):
    raw = load_dataset_dir(UK_DALE)
    assert set(raw.building_docs) == {1}
    assert raw.diagnostics == ()


def test_dataset_only_folder(tmp_path):
    (tmp_path / "dataset.yaml").write_text("name: X\n")
    assert load_dataset_dir(tmp_path).building_docs == {}


def test_folder_without_dataset_doc(tmp_path):
    (tmp_path / "building1.yaml").write_text("instance: 1\n")
    with pytest.raises(MetadataError) as info:
        load_dataset_dir(tmp_path)
    assert info.value.code == "E-NO-DATASET-DOC"


def test_duplicate_building_files(tmp_path):
    (tmp_path / "dataset.yaml").write_text("name: X\n")
    (tmp_path / "building1.yaml").write_text("instance: 1\n")
    (tmp_path / "building1.json").write_text('{"instance": 1}')
    with pytest.raises(MetadataError) as info:
        load_dataset_dir(tmp_path)
    assert info.value.code == "E-DUP-BUILDING-FILE"


def test_stray_files_are_reported(tmp_path):
    (tmp_path / "dataset.yaml").write_text("name: X\n")
    (tmp_path / "notes.txt").write_text("hi")
    raw = load_dataset_dir(tmp_path)
    assert [d.code for d in raw.diagnostics] == ["W-IGNORED-FILE"]


def test_missing_folder():
    with pytest.raises(MetadataError) as info:
        load_dataset("/nonexistent/folder")
    assert info.value.code == "E-IO"


# -- binding ---------------------------------------------------------------

def test_bind_uk_dale_example():
    dataset, diags = bind(load_dataset(UK_DALE))
    assert diags == []
    assert dataset.name == "UK-DALE"
    assert list(dataset.meter_devices) == ["EnviR"]
    assert len(dataset.buildings) == 1
    assert len(dataset.building(1).elec_meters) == 2


def test_building_inherits_dataset_defaults(example_docs, write_docs):
    ds_doc, buildings = example_docs
    ds_doc["timezone"] = "Europe/London"
    dataset, _ = bind(load_dataset(write_docs(ds_doc, buildings)))
    assert dataset.building(1).timezone == "Europe/London"
    buildings[1]["timezone"] = "Europe/Paris"
    dataset, _ = bind(load_dataset(write_docs(ds_doc, buildings)))
    assert dataset.building(1).timezone == "Europe/Paris"


def test_missing_device_model(example_docs, write_docs):
    ds_doc, buildings = example_docs
    del buildings[1]["elec_meters"][1]["device_model"]
    dataset, diags = bind(load_dataset(write_docs(ds_doc, buildings)))
    assert dataset is None
    assert [(d.code, d.path) for d in diags] == \
        [("E-MISSING-REQUIRED", "buildings/1/elec_meters/2/device_model")]
    assert diags[0].span.file.endswith("building1.yaml")


def test_type_mismatch_and_bools(example_docs, write_docs):
    ds_doc, buildings = example_docs
    buildings[1]["elec_meters"][1]["submeter_of"] = True
    _, diags = bind(load_dataset(write_docs(ds_doc, buildings)))
    assert [(d.code, d.path) for d in diags] == \
        [("E-TYPE-MISMATCH", "buildings/1/elec_meters/2/submeter_of")]


def test_unknown_meter_field_warns(example_docs, write_docs):
    ds_doc, buildings = example_docs
    buildings[1]["elec_meters"][0]["colour"] = "red"
    dataset, diags = bind(load_dataset(write_docs(ds_doc, buildings)))
    assert dataset is not None
    assert [d.code for d in diags] == ["W-UNKNOWN-FIELD"]


def test_building_index_must_match_file(example_docs, write_docs):
    ds_doc, buildings = example_docs
    buildings[1]["instance"] = 2
    _, diags = bind(load_dataset(write_docs(ds_doc, buildings)))
    assert [d.code for d in diags] == ["E-BUILDING-INDEX-MISMATCH"]


def test_meter_devices_list_or_mapping(example_docs, write_docs):
    ds_doc, buildings = example_docs
    as_list, _ = bind(load_dataset(write_docs(ds_doc, buildings)))
    device = ds_doc["meter_devices"][0]
    ds_doc["meter_devices"] = {device.pop("model"): device}
    as_map, _ = bind(load_dataset(write_docs(ds_doc, buildings)))
    assert as_list == as_map


def test_appliance_extras_are_kept():
    appliance, diags = bind_appliance({"type": "television", "screen_size": 40})
    assert diags == []
    assert appliance.extras == {"screen_size": 40}


def test_authored_prior_distance_is_rejected():
    _, diags = bind_appliance({"type": "fridge", "distributions": {"on_power": [
        {"distribution_of_data": {"bin_edges": [0, 1], "frequencies": [1.0]}, "distance": 1}]}})
    assert [d.code for d in diags] == ["E-PRIOR-DISTANCE-AUTHORED"]


def test_node_round_trip():
    doc = {"a": [1, {"b": None}], "c": "x"}
    assert Node.from_python(doc).to_python() == doc
