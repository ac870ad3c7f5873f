import pytest

from bulkcast import load_bundled, load_topology

TWO_BRANCH_TEXT = """{
  "name": "twobranch",
  "capacity_unit": "units",
  "nodes": ["S", "A", "B", "C", "t1", "t2", "t3", "t4"],
  "links": [
    {"a": "S", "b": "A", "capacity": 10},
    {"a": "A", "b": "B", "capacity": 1},
    {"a": "B", "b": "t1", "capacity": 1},
    {"a": "B", "b": "t2", "capacity": 1},
    {"a": "A", "b": "C", "capacity": 10},
    {"a": "C", "b": "t3", "capacity": 10},
    {"a": "C", "b": "t4", "capacity": 10}
  ]
}"""


@pytest.fixture(scope="session")
def two_branch_topo():
    """Two-branch motivating topology: slow pair behind a thin link."""
    return load_topology(TWO_BRANCH_TEXT)


@pytest.fixture(scope="session")
def ans_topo():
    return load_bundled("ans")


@pytest.fixture(scope="session")
def geant_topo():
    return load_bundled("geant")


@pytest.fixture(scope="session")
def uninett_topo():
    return load_bundled("uninett")
