import pytest

from src import config
from tests.helpers import complete_topology, diamond_topology, path_topology, pentagon_topology


@pytest.fixture
def path_topo():
    return path_topology()


@pytest.fixture
def diamond_topo():
    return diamond_topology()


@pytest.fixture
def pentagon_topo():
    return pentagon_topology()


@pytest.fixture
def k4_topo():
    return complete_topology({1: 3.0, 2: 9.0, 3: 5.0, 4: 7.0})


@pytest.fixture
def fixtures_dir():
    return config.FIXTURES_DIR
