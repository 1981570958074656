import pathlib

import pytest

from plansat.pddl import parse_files

DOMAINS_DIR = pathlib.Path(__file__).parent / "domains"

# (instance name, domain file, problem file); the backbone of the test suite.
INSTANCES = [
    ("transport-p01", "transport-domain.pddl", "transport-p01.pddl"),
    ("transport-p02", "transport-domain.pddl", "transport-p02.pddl"),
    ("transport-road-p01", "transport-road-domain.pddl", "transport-road-p01.pddl"),
    ("transport-road-p02", "transport-road-domain.pddl", "transport-road-p02.pddl"),
    ("blocks-p01", "blocks-domain.pddl", "blocks-p01.pddl"),
    ("blocks-p02", "blocks-domain.pddl", "blocks-p02.pddl"),
    ("gripper-p01", "gripper-domain.pddl", "gripper-p01.pddl"),
    ("gripper-p02", "gripper-domain.pddl", "gripper-p02.pddl"),
    ("grid-visit-p01", "grid-visit-domain.pddl", "grid-visit-p01.pddl"),
    ("grid-visit-p02", "grid-visit-domain.pddl", "grid-visit-p02.pddl"),
    ("consume-p01", "consume-domain.pddl", "consume-p01.pddl"),
]


def load_instance(name: str):
    for n, dom, prob in INSTANCES:
        if n == name:
            return parse_files(str(DOMAINS_DIR / dom), str(DOMAINS_DIR / prob))
    raise KeyError(name)


@pytest.fixture(scope="session")
def transport():
    return load_instance("transport-p01")


@pytest.fixture(scope="session")
def transport2():
    return load_instance("transport-p02")


@pytest.fixture(scope="session")
def blocks():
    return load_instance("blocks-p01")


@pytest.fixture(scope="session")
def gripper():
    return load_instance("gripper-p01")


@pytest.fixture(scope="session")
def grid_visit():
    return load_instance("grid-visit-p01")


@pytest.fixture(scope="session")
def consume():
    return load_instance("consume-p01")


@pytest.fixture(scope="session")
def transport_road():
    return load_instance("transport-road-p01")


@pytest.fixture(scope="session")
def all_instances():
    return [(name, load_instance(name)) for name, _, _ in INSTANCES]
