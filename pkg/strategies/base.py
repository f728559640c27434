from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx

from src.model import INFINITE_ENERGY, Energy, mj_to_joules, tree_rank


class UnreachableSourceError(ValueError):
    """Some sources cannot reach the requested root."""

    def __init__(self, root: int, unreachable: List[int]):
        self.root = root
        self.unreachable = sorted(unreachable)
        super().__init__(f"Sources {self.unreachable} cannot reach root {root}")


class GraphTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class SourceGraph:
    """
    The event sources and the radio links between them.
    energies are integer millijoules; adjacency is symmetric with no self-loops.
    """
    energies: Mapping[int, int]
    adjacency: Mapping[int, FrozenSet[int]]

    def __post_init__(self):
        energies = dict(self.energies)
        adjacency = {node: frozenset(self.adjacency.get(node, ())) for node in energies}
        for node, neighbors in adjacency.items():
            if node in neighbors:
                raise ValueError(f"Self-loop on source {node}")
            for other in neighbors:
                if other not in adjacency:
                    raise ValueError(f"Source {node} links to unknown node {other}")
                if node not in adjacency[other]:
                    raise ValueError(f"Link {node}-{other} is not symmetric")
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "adjacency", adjacency)

    @classmethod
    def from_edges(cls, energies: Mapping[int, int],
                   edges: Iterable[Tuple[int, int]]) -> "SourceGraph":
        adjacency: Dict[int, set] = {node: set() for node in energies}
        for a, b in edges:
            adjacency[a].add(b)
            adjacency[b].add(a)
        return cls(energies, adjacency)

    def nodes(self) -> Tuple[int, ...]:
        return tuple(sorted(self.energies))

    def neighbors(self, node: int) -> Tuple[int, ...]:
        return tuple(sorted(self.adjacency[node]))

    def edges(self) -> List[Tuple[int, int]]:
        return sorted((a, b) for a in self.adjacency for b in self.adjacency[a] if a < b)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for node in self.nodes():
            graph.add_node(node, energy=self.energies[node])
        graph.add_edges_from(self.edges())
        return graph

    def unreachable_from(self, root: int) -> List[int]:
        reached = nx.node_connected_component(self.to_networkx(), root)
        return sorted(set(self.energies) - reached)

    def is_connected(self) -> bool:
        return len(self.energies) <= 1 or not self.unreachable_from(self.nodes()[0])

    def require_connected(self, root: Optional[int] = None):
        if not self.energies:
            raise ValueError("Source graph is empty")
        root = self.nodes()[0] if root is None else root
        if root not in self.energies:
            raise ValueError(f"Root {root} is not a source")
        unreachable = self.unreachable_from(root)
        if unreachable:
            raise UnreachableSourceError(root, unreachable)


@dataclass(frozen=True)
class OracleResult:
    method: str
    root: int
    tree_energy: Energy
    parent_map: Mapping[int, int]
    depth: int
    root_energy: int = 0
    bottlenecks: Mapping[int, Energy] = field(default_factory=dict)

    def rank(self) -> tuple:
        """Same chain as the protocol's best_tree; coverage is always the full source set."""
        return tree_rank(len(self.parent_map) + 1, self.tree_energy, self.depth,
                         self.root_energy, self.root)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "root": self.root,
            "tree_energy": mj_to_joules(self.tree_energy),
            "depth": self.depth,
            "parent_map": {str(child): parent for child, parent in sorted(self.parent_map.items())},
        }


def branch_path(parent_map: Mapping[int, int], source: int, root: int) -> List[int]:
    """source -> ... -> root following parent links; raises on a cycle or a dead end."""
    path = [source]
    while path[-1] != root:
        parent = parent_map.get(path[-1])
        if parent is None:
            raise ValueError(f"Source {source} never reaches root {root}")
        if parent in path:
            raise ValueError(f"Parent cycle through {parent}")
        path.append(parent)
    return path


def score_tree(graph: SourceGraph, root: int,
               parent_map: Mapping[int, int]) -> Tuple[Energy, int, Dict[int, Energy]]:
    """
    Validate a spanning arborescence and return (tree energy, depth, per-source
    branch energy). Branch energy is the minimum over every node of the branch
    except its leaf; the root's own branch is infinite.
    """
    if set(parent_map) != set(graph.energies) - {root}:
        raise ValueError(f"Parent map does not cover exactly the non-root sources of {root}")
    for child, parent in parent_map.items():
        if parent not in graph.adjacency[child]:
            raise ValueError(f"Parent link {child}->{parent} is not an edge")

    bottlenecks: Dict[int, Energy] = {root: INFINITE_ENERGY}
    depth = 1
    for source in parent_map:
        path = branch_path(parent_map, source, root)
        bottlenecks[source] = min(graph.energies[node] for node in path[1:])
        depth = max(depth, len(path))
    return min(bottlenecks.values()), depth, bottlenecks


def result_from_parents(method: str, graph: SourceGraph, root: int,
                        parent_map: Mapping[int, int]) -> OracleResult:
    energy, depth, bottlenecks = score_tree(graph, root, parent_map)
    return OracleResult(
        method=method,
        root=root,
        tree_energy=energy,
        parent_map=dict(parent_map),
        depth=depth,
        root_energy=graph.energies[root],
        bottlenecks=bottlenecks,
    )


class BaseTreeStrategy(ABC):
    """A way of building one aggregation tree over the source graph."""
    name = "base"

    def __init__(self, params: Optional[Dict[str, Any]] = None):
        self.params = params or {}

    @abstractmethod
    def build(self, graph: SourceGraph) -> OracleResult:
        """
        Input: a SourceGraph.
        Output: the tree this method would use, scored with score_tree.
        Raises UnreachableSourceError when the graph is disconnected.
        """
        pass
