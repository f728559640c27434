from typing import Optional

import networkx as nx

from .base import BaseTreeStrategy, OracleResult, SourceGraph, result_from_parents


def bfs_baseline(graph: SourceGraph, root: int) -> OracleResult:
    """Conventional spanning tree: breadth-first from root, neighbors by ascending id."""
    graph.require_connected(root)
    edges = nx.bfs_edges(graph.to_networkx(), root, sort_neighbors=sorted)
    parent_map = {child: parent for parent, child in edges}
    return result_from_parents("bfs", graph, root, parent_map)


class BfsStrategy(BaseTreeStrategy):
    """Energy-blind baseline. Without a 'root' param the lowest source id is used."""
    name = "bfs"

    def build(self, graph: SourceGraph) -> OracleResult:
        root: Optional[int] = self.params.get("root")
        return bfs_baseline(graph, graph.nodes()[0] if root is None else root)
