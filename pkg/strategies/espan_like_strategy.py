"""
A minimal energy-aware baseline in the spirit of E-Span.
It is not E-Span: the root is the highest-energy source and every other source
parents to its highest-energy neighbor that is strictly closer (in hops) to the
root. Results are labelled "espan_like".
"""
import networkx as nx

from .base import BaseTreeStrategy, OracleResult, SourceGraph, result_from_parents


def espan_like_baseline(graph: SourceGraph) -> OracleResult:
    graph.require_connected()
    root = min(graph.nodes(), key=lambda node: (-graph.energies[node], node))
    distances = nx.single_source_shortest_path_length(graph.to_networkx(), root)

    parent_map = {}
    for node in graph.nodes():
        if node == root:
            continue
        closer = [n for n in graph.neighbors(node) if distances[n] < distances[node]]
        parent_map[node] = min(closer, key=lambda n: (-graph.energies[n], n))
    return result_from_parents("espan_like", graph, root, parent_map)


class EspanLikeStrategy(BaseTreeStrategy):
    name = "espan_like"

    def build(self, graph: SourceGraph) -> OracleResult:
        return espan_like_baseline(graph)
