"""
Random sensor deployments.
Responsibilities:
1. Place nodes uniformly in a square area and sample their residual energy.
2. Derive the symmetric unit-disk adjacency (identical range for every node).
3. Mark the event sources and extract the source graph the protocol runs on.
4. Regenerate, within a bounded budget, until the sources are connected.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist, squareform
from tenacity import Retrying, after_log, retry_if_exception_type, stop_after_attempt

from src import config
from src.model import joules_to_mj, mj_to_joules
from strategies.base import SourceGraph

logger = logging.getLogger()


@dataclass(frozen=True)
class SensorNode:
    node_id: int
    x: float
    y: float
    initial_energy: int  # mJ
    is_source: bool = True


@dataclass(frozen=True)
class EventRegion:
    x: float
    y: float
    radius: float


class TopologyGenerationError(ValueError):
    """Connectivity of the sources was not reached within the attempt budget."""

    def __init__(self, message: str, last_attempt: Optional["Topology"] = None):
        super().__init__(message)
        self.last_attempt = last_attempt


class _DisconnectedSources(Exception):
    def __init__(self, topology: "Topology"):
        super().__init__("source subgraph is disconnected")
        self.topology = topology


class Topology:
    """Immutable node placement plus the neighbor table it implies."""

    def __init__(self, nodes: Sequence[SensorNode], transmission_range: float,
                 area_side: float = config.AREA_SIDE, event: Optional[EventRegion] = None):
        if transmission_range <= 0:
            raise ValueError(f"Transmission range must be positive, got {transmission_range}")
        ids = [n.node_id for n in nodes]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Duplicate node ids in {ids}")

        self.nodes: Tuple[SensorNode, ...] = tuple(sorted(nodes, key=lambda n: n.node_id))
        self.transmission_range = float(transmission_range)
        self.area_side = float(area_side)
        self.event = event
        self._by_id = {n.node_id: n for n in self.nodes}
        self._neighbors = self._build_neighbors()

    def _build_neighbors(self) -> Dict[int, Tuple[int, ...]]:
        if len(self.nodes) < 2:
            return {n.node_id: () for n in self.nodes}
        positions = np.array([[n.x, n.y] for n in self.nodes])
        distances = squareform(pdist(positions))
        linked = distances <= self.transmission_range
        np.fill_diagonal(linked, False)
        ids = [n.node_id for n in self.nodes]
        return {
            ids[i]: tuple(ids[j] for j in np.flatnonzero(linked[i]))
            for i in range(len(ids))
        }

    def node(self, node_id: int) -> SensorNode:
        return self._by_id[node_id]

    def node_ids(self) -> List[int]:
        return [n.node_id for n in self.nodes]

    def neighbors(self, node_id: int) -> Tuple[int, ...]:
        """In-range nodes in ascending id order."""
        return self._neighbors[node_id]

    def source_ids(self) -> List[int]:
        return [n.node_id for n in self.nodes if n.is_source]

    def source_graph(self) -> SourceGraph:
        sources = set(self.source_ids())
        return SourceGraph(
            {n: self._by_id[n].initial_energy for n in sources},
            {n: frozenset(m for m in self._neighbors[n] if m in sources) for n in sources},
        )

    def is_source_connected(self) -> bool:
        graph = self.source_graph()
        return bool(graph.energies) and graph.is_connected()

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for n in self.nodes:
            graph.add_node(n.node_id, pos=(n.x, n.y), energy=n.initial_energy, source=n.is_source)
        graph.add_edges_from((a, b) for a in self._neighbors for b in self._neighbors[a] if a < b)
        return graph

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "area_side": self.area_side,
            "transmission_range": self.transmission_range,
            "source_connected": self.is_source_connected(),
            "nodes": [
                {
                    "id": n.node_id,
                    "x": n.x,
                    "y": n.y,
                    "energy": mj_to_joules(n.initial_energy),
                    "is_source": n.is_source,
                }
                for n in self.nodes
            ],
            "adjacency": {str(k): list(v) for k, v in self._neighbors.items()},
        }
        if self.event is not None:
            data["event"] = {"x": self.event.x, "y": self.event.y, "radius": self.event.radius}
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Topology":
        # adjacency in files is informational; it is always rebuilt from positions
        nodes = [
            SensorNode(
                node_id=int(n["id"]),
                x=float(n["x"]),
                y=float(n["y"]),
                initial_energy=joules_to_mj(n["energy"]),
                is_source=bool(n.get("is_source", True)),
            )
            for n in data["nodes"]
        ]
        event = data.get("event")
        return cls(
            nodes,
            transmission_range=data["transmission_range"],
            area_side=data.get("area_side", config.AREA_SIDE),
            event=EventRegion(**event) if event else None,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Topology) and self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return (f"Topology({len(self.nodes)} nodes, {len(self.source_ids())} sources, "
                f"range={self.transmission_range})")


def _sample(rng: np.random.Generator, node_count: int, area_side: float,
            transmission_range: float, energy_range: Tuple[float, float],
            event_radius: Optional[float]) -> Topology:
    # 1. POSITIONS & ENERGY
    positions = rng.uniform(0.0, area_side, size=(node_count, 2))
    low, high = (joules_to_mj(j) for j in energy_range)
    energies = rng.integers(low, high, endpoint=True, size=node_count)

    # 2. EVENT REGION (every node is a source without one)
    event = None
    sources = np.ones(node_count, dtype=bool)
    if event_radius is not None:
        center = rng.uniform(0.0, area_side, size=2)
        event = EventRegion(float(center[0]), float(center[1]), float(event_radius))
        sources = np.linalg.norm(positions - center, axis=1) <= event_radius

    nodes = [
        SensorNode(
            node_id=i + 1,
            x=float(positions[i, 0]),
            y=float(positions[i, 1]),
            initial_energy=int(energies[i]),
            is_source=bool(sources[i]),
        )
        for i in range(node_count)
    ]
    return Topology(nodes, transmission_range, area_side, event)


def generate_topology(node_count: int,
                      area_side: float = config.AREA_SIDE,
                      transmission_range: float = config.TRANSMISSION_RANGE,
                      energy_range: Tuple[float, float] = config.ENERGY_RANGE,
                      seed: int = config.DEFAULT_SEED,
                      event_radius: Optional[float] = None,
                      max_attempts: int = config.MAX_TOPOLOGY_ATTEMPTS) -> Topology:
    """
    Node ids are 1..node_count. Attempts draw from one seeded generator in
    sequence, so the same arguments always return the same topology.
    """
    if node_count < 1:
        raise ValueError(f"node_count must be at least 1, got {node_count}")
    if area_side <= 0 or transmission_range <= 0:
        raise ValueError("Area side and transmission range must be positive")
    if not 0 < energy_range[0] <= energy_range[1]:
        raise ValueError(f"Energy range {energy_range} must satisfy 0 < min <= max")
    if event_radius is not None and event_radius <= 0:
        raise ValueError(f"Event radius must be positive, got {event_radius}")
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")

    rng = np.random.default_rng(seed)

    def attempt() -> Topology:
        topology = _sample(rng, node_count, area_side, transmission_range, energy_range, event_radius)
        if not topology.is_source_connected():
            raise _DisconnectedSources(topology)
        return topology

    retrying = Retrying(
        stop=stop_after_attempt(max_attempts),
        retry=retry_if_exception_type(_DisconnectedSources),
        after=after_log(logger, logging.DEBUG),
        reraise=True,
    )
    try:
        topology = retrying(attempt)
    except _DisconnectedSources as exc:
        raise TopologyGenerationError(
            f"Sources still disconnected after {max_attempts} attempts "
            f"({node_count} nodes, range {transmission_range} m, area {area_side} m)",
            last_attempt=exc.topology,
        ) from exc

    logger.info(f"🗺️ Generated {topology!r} (seed {seed})")
    return topology
