import heapq
import logging
from typing import Dict, Tuple

from src.model import INFINITE_ENERGY, Energy
from .base import BaseTreeStrategy, OracleResult, SourceGraph, result_from_parents

logger = logging.getLogger()


def widest_branches(graph: SourceGraph, root: int) -> Tuple[Dict[int, Energy], Dict[int, int]]:
    """
    Best-first expansion from the root maximizing the running minimum of
    visited-node energies (root included, leaf excluded).

    Labels are compared lexicographically: wider bottleneck, then fewer hops,
    then lower parent id. Extending a branch never improves its label, so the
    first time a node is popped its label is final and one parent_map realizes
    every source's widest branch at once.
    """
    graph.require_connected(root)

    # label = (-bottleneck, hops, parent)
    labels: Dict[int, Tuple[Energy, int, int]] = {root: (-INFINITE_ENERGY, 0, -1)}
    heap = [(labels[root], root)]
    settled = set()

    while heap:
        label, node = heapq.heappop(heap)
        if node in settled or label != labels[node]:
            continue
        settled.add(node)

        bottleneck, hops = -label[0], label[1]
        # Anything attaching here passes through this node
        through = min(bottleneck, graph.energies[node])
        for neighbor in graph.neighbors(node):
            if neighbor in settled:
                continue
            candidate = (-through, hops + 1, node)
            if neighbor not in labels or candidate < labels[neighbor]:
                labels[neighbor] = candidate
                heapq.heappush(heap, (candidate, neighbor))

    bottlenecks = {node: -label[0] for node, label in labels.items()}
    parent_map = {node: label[2] for node, label in labels.items() if node != root}
    return bottlenecks, parent_map


def oracle_dlmt(graph: SourceGraph) -> OracleResult:
    """Try every root; keep the best under the best_tree chain."""
    graph.require_connected()

    best = None
    for root in graph.nodes():
        _, parent_map = widest_branches(graph, root)
        candidate = result_from_parents("oracle", graph, root, parent_map)
        if best is None or candidate.rank() > best.rank():
            best = candidate

    logger.debug(f"🔮 Oracle root {best.root}, tree energy {best.tree_energy}, depth {best.depth}")
    return best


class OracleStrategy(BaseTreeStrategy):
    name = "oracle"

    def build(self, graph: SourceGraph) -> OracleResult:
        return oracle_dlmt(graph)
