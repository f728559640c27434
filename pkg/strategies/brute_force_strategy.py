import logging
from typing import Dict, Iterator, Tuple

import networkx as nx
from networkx.algorithms.tree.mst import SpanningTreeIterator

from src import config
from src.model import INFINITE_ENERGY, Energy
from .base import (BaseTreeStrategy, GraphTooLargeError, OracleResult, SourceGraph,
                   result_from_parents)

logger = logging.getLogger()


def simple_path_bottlenecks(graph: SourceGraph) -> Dict[Tuple[int, int], Energy]:
    """(source, root) -> widest bottleneck over every simple path, by enumeration."""
    nx_graph = graph.to_networkx()
    widest: Dict[Tuple[int, int], Energy] = {}
    for root in graph.nodes():
        widest[(root, root)] = INFINITE_ENERGY
        for source in graph.nodes():
            if source == root:
                continue
            best = None
            for path in nx.all_simple_paths(nx_graph, source, root):
                energy = min(graph.energies[node] for node in path[1:])
                best = energy if best is None else max(best, energy)
            widest[(source, root)] = best
    return widest


def spanning_trees(graph: SourceGraph) -> Iterator[nx.Graph]:
    """Every spanning tree of the source graph, each exactly once."""
    return iter(SpanningTreeIterator(graph.to_networkx()))


def orient(tree: nx.Graph, root: int) -> Dict[int, int]:
    """Turn an undirected spanning tree into child -> parent links toward root."""
    return dict(nx.bfs_predecessors(tree, root))


def brute_force_dlmt(graph: SourceGraph,
                     max_sources: int = config.BRUTE_FORCE_MAX_SOURCES) -> OracleResult:
    """
    Exhaustive search over spanning trees x roots.
    Only trees in which every source uses one of its widest branches toward the
    root are admissible; the best admissible pair under the best_tree chain wins.
    """
    if len(graph.energies) > max_sources:
        raise GraphTooLargeError(
            f"Brute force is limited to {max_sources} sources, got {len(graph.energies)}")
    graph.require_connected()

    nodes = graph.nodes()
    if len(nodes) == 1:
        return result_from_parents("brute_force", graph, nodes[0], {})

    widest = simple_path_bottlenecks(graph)
    best = None
    trees = 0
    for tree in spanning_trees(graph):
        trees += 1
        for root in nodes:
            candidate = result_from_parents("brute_force", graph, root, orient(tree, root))
            if any(candidate.bottlenecks[s] != widest[(s, root)] for s in nodes):
                continue
            if best is None or candidate.rank() > best.rank():
                best = candidate

    logger.debug(f"🧮 Brute force scored {trees} spanning trees x {len(nodes)} roots")
    return best


class BruteForceStrategy(BaseTreeStrategy):
    name = "brute_force"

    def build(self, graph: SourceGraph) -> OracleResult:
        return brute_force_dlmt(graph, self.params.get("max_sources", config.BRUTE_FORCE_MAX_SOURCES))
