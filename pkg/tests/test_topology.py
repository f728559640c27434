import math

import pytest

from src.topology import Topology, TopologyGenerationError, generate_topology
from tests.helpers import make_topology


def test_same_seed_same_topology():
    first = generate_topology(20, seed=42)
    second = generate_topology(20, seed=42)
    assert first == second
    assert first.to_dict() == second.to_dict()
    assert generate_topology(20, seed=43) != first


def test_ids_and_energies():
    topology = generate_topology(15, energy_range=(1.0, 10.0), seed=5, transmission_range=60.0)
    assert topology.node_ids() == list(range(1, 16))
    for node in topology.nodes:
        assert 1_000 <= node.initial_energy <= 10_000
        assert 0.0 <= node.x <= 100.0 and 0.0 <= node.y <= 100.0


def test_single_node_deployment():
    topology = generate_topology(1, seed=0)
    assert topology.node_ids() == [1]
    assert topology.neighbors(1) == ()
    assert topology.is_source_connected()


def test_range_beyond_the_diagonal_gives_a_complete_graph():
    topology = generate_topology(20, transmission_range=150.0, seed=7)
    for node_id in topology.node_ids():
        assert len(topology.neighbors(node_id)) == 19


def test_adjacency_is_symmetric_and_sorted():
    topology = generate_topology(30, transmission_range=45.0, seed=11)
    for node_id in topology.node_ids():
        neighbors = topology.neighbors(node_id)
        assert list(neighbors) == sorted(neighbors)
        assert node_id not in neighbors
        for other in neighbors:
            assert node_id in topology.neighbors(other)


def test_range_is_inclusive():
    topology = make_topology({1: (0, 0), 2: (40, 0), 3: (80.5, 0)}, {1: 1.0, 2: 1.0, 3: 1.0})
    assert topology.neighbors(1) == (2,)
    assert topology.neighbors(2) == (1,)
    assert topology.neighbors(3) == ()


def test_source_graph_only_keeps_sources(path_topo):
    relay_only = make_topology({1: (0, 0), 2: (30, 0), 3: (60, 0)}, {1: 3.0, 2: 7.0, 3: 5.0}, sources=[1, 3])
    graph = relay_only.source_graph()
    assert set(graph.energies) == {1, 3}
    assert graph.neighbors(1) == ()
    assert not relay_only.is_source_connected()
    assert path_topo.is_source_connected()


def test_event_region_selects_the_sources():
    topology = generate_topology(50, transmission_range=150.0, event_radius=40.0, seed=3)
    event = topology.event
    assert event is not None and event.radius == 40.0
    for node in topology.nodes:
        inside = math.hypot(node.x - event.x, node.y - event.y) <= 40.0
        assert node.is_source == inside
    assert topology.source_ids()
    assert topology.is_source_connected()


def test_generation_failure_keeps_the_last_attempt():
    with pytest.raises(TopologyGenerationError) as info:
        generate_topology(30, transmission_range=1.0, seed=1, max_attempts=3)
    last = info.value.last_attempt
    assert last is not None
    assert len(last.nodes) == 30
    assert not last.is_source_connected()


@pytest.mark.parametrize("kwargs", [
    {"node_count": 0},
    {"node_count": 5, "energy_range": (5.0, 1.0)},
    {"node_count": 5, "transmission_range": 0.0},
    {"node_count": 5, "event_radius": -1.0},
])
def test_invalid_generation_arguments(kwargs):
    with pytest.raises(ValueError):
        generate_topology(**kwargs)


def test_document_form(diamond_topo):
    data = diamond_topo.to_dict()
    assert data["adjacency"] == {"1": [2, 3], "2": [1, 4], "3": [1, 4], "4": [2, 3]}
    assert data["source_connected"] is True
    assert [n["energy"] for n in data["nodes"]] == [2.0, 9.0, 3.0, 5.0]
    assert Topology.from_dict(data) == diamond_topo


def test_networkx_view(diamond_topo):
    graph = diamond_topo.to_networkx()
    assert graph.number_of_nodes() == 4
    assert graph.number_of_edges() == 4
    assert graph.nodes[2]["energy"] == 9_000
