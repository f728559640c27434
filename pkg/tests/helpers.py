import math
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from src.model import joules_to_mj
from src.scenario import Scenario
from src.topology import SensorNode, Topology, generate_topology
from strategies.base import SourceGraph

RANGE = 40.0


def make_topology(positions: Dict[int, Tuple[float, float]], energies_j: Dict[int, float],
                  transmission_range: float = RANGE,
                  sources: Optional[Iterable[int]] = None) -> Topology:
    sources = set(positions if sources is None else sources)
    nodes = [
        SensorNode(node_id=n, x=float(x), y=float(y), initial_energy=joules_to_mj(energies_j[n]),
                   is_source=n in sources)
        for n, (x, y) in positions.items()
    ]
    return Topology(nodes, transmission_range)


def path_topology() -> Topology:
    """a=1 (3 J) - b=2 (7 J) - c=3 (5 J), 30 m apart."""
    return make_topology({1: (0, 0), 2: (30, 0), 3: (60, 0)}, {1: 3.0, 2: 7.0, 3: 5.0})


def diamond_topology() -> Topology:
    """Square a=1 (2 J), b=2 (9 J), d=4 (5 J), c=3 (3 J); the diagonals are out of range."""
    return make_topology(
        {1: (0, 0), 2: (30, 0), 4: (30, 30), 3: (0, 30)},
        {1: 2.0, 2: 9.0, 3: 3.0, 4: 5.0},
    )


def pentagon_topology() -> Topology:
    """
    5-cycle h=1 - x=2 - y=5 - w=4 - z=3 - h=1 with 30 m sides.
    The highest-energy root h reaches y cheaply only through the weak x.
    """
    order = [1, 2, 5, 4, 3]
    radius = 30.0 / (2 * math.sin(math.pi / 5))
    positions = {
        node: (radius * math.cos(2 * math.pi * k / 5), radius * math.sin(2 * math.pi * k / 5))
        for k, node in enumerate(order)
    }
    return make_topology(positions, {1: 10.0, 2: 2.0, 3: 9.0, 4: 8.0, 5: 7.0})


def complete_topology(energies_j: Dict[int, float]) -> Topology:
    """Everyone within 15 m of everyone."""
    positions = {n: (5.0 * (k % 3), 5.0 * (k // 3)) for k, n in enumerate(sorted(energies_j))}
    return make_topology(positions, energies_j)


def make_scenario(topology: Topology, **overrides) -> Scenario:
    return Scenario(topology=topology, **overrides)


def random_connected_topology(seed: int, low: int = 2, high: int = 8) -> Topology:
    """2..8 sources in a 100 m square with a 60 m range, energies 1..10 J."""
    node_count = int(np.random.default_rng(seed).integers(low, high, endpoint=True))
    return generate_topology(node_count, area_side=100.0, transmission_range=60.0,
                             energy_range=(1.0, 10.0), seed=seed)


def random_source_graph(seed: int, low: int = 2, high: int = 6) -> SourceGraph:
    """A random spanning tree plus random extra edges; always connected."""
    rng = np.random.default_rng(seed)
    count = int(rng.integers(low, high, endpoint=True))
    nodes = list(range(1, count + 1))
    energies = {n: int(rng.integers(1_000, 10_000, endpoint=True)) for n in nodes}
    edges = set()
    for i in range(1, count):
        parent = nodes[int(rng.integers(0, i))]
        edges.add((parent, nodes[i]))
    for a in nodes:
        for b in nodes:
            if a < b and rng.random() < 0.3:
                edges.add((a, b))
    return SourceGraph.from_edges(energies, edges)
