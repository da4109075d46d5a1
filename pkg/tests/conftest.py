import copy
import re
from pathlib import Path

import pytest
import yaml

from nilm_meta.synth import write_folder
from nilm_meta.typedb import seed_library

FIXTURES = Path(__file__).parent / "fixtures"
UK_DALE = FIXTURES / "uk_dale"


@pytest.fixture(scope="session")
def library():
    return seed_library()


@pytest.fixture(scope="session")
def _example_docs():
    dataset = yaml.safe_load((UK_DALE / "dataset.yaml").read_text())
    building = yaml.safe_load((UK_DALE / "building1.yaml").read_text())
    return dataset, {1: building}


@pytest.fixture
def example_docs(_example_docs):
    """Fresh, mutable copies of the example documents."""
    return copy.deepcopy(_example_docs)


@pytest.fixture
def write_docs(tmp_path):
    counter = iter(range(10**6))

    def write(dataset_doc, building_docs):
        return write_folder(tmp_path / f"ds{next(counter)}", dataset_doc, building_docs)
    return write


_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            m = _CRITERION.search(nodeid)
            if "test_acceptance.py" not in nodeid or m is None:
                continue
            n = int(m.group(1))
            ok = outcome == "passed" and rows.get(n, (True,))[0]
            rows[n] = (ok, m.group(2).replace("_", " "))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(rows):
        ok, title = rows[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
