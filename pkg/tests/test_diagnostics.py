import json

from nilm_meta.diagnostics import Span, ValidationReport, error, join_path, warning


def test_text_line():
    d = error("E-UNKNOWN-DEVICE", "buildings/1/elec_meters/2/device_model", "no such device",
              Span("building1.yaml", 12, 3))
    assert d.to_text() == ("ERROR E-UNKNOWN-DEVICE buildings/1/elec_meters/2/device_model — "
                           "no such device (building1.yaml:12)")


def test_report_counts_and_json():
    report = ValidationReport((error("E-A", "x", "m"), warning("W-B", "y", "n")))
    assert (report.errors, report.warnings, report.valid) == (1, 1, False)
    doc = json.loads(report.to_json())
    assert doc["errors"] == 1 and doc["warnings"] == 1
    assert [d["code"] for d in doc["diagnostics"]] == ["E-A", "W-B"]
    assert report.to_text().endswith("1 errors, 1 warnings\n")


def test_strict_promotes():
    report = ValidationReport((warning("W-B", "y", "n"),))
    assert report.valid and not report.strict().valid


def test_join_path_skips_empty():
    assert join_path("", "buildings", 1, None, "x") == "buildings/1/x"
