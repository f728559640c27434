import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import networkx as nx

from src.node import InconsistentSelectionError, NodeState, parent_of

logger = logging.getLogger()


@dataclass
class ConvergenceReport:
    converged: bool
    root: Optional[int] = None
    disagreeing: List[int] = field(default_factory=list)
    reason: str = ""

    def __bool__(self) -> bool:
        return self.converged


def selection_signature(state: NodeState) -> Tuple[int, Tuple[Tuple[int, Tuple[int, ...]], ...]]:
    """Root plus every (initiator, branch nodes) of the endorsed tree."""
    entries = state.dlmt.tree.entries
    return state.dlmt.root, tuple((i, entries[i].nodes()) for i in sorted(entries))


def check_convergence(states: Mapping[int, NodeState]) -> ConvergenceReport:
    """
    All alive sources must endorse the same root with the same entries.
    The majority signature is taken as the reference; everyone else is named.
    """
    alive = {node: s for node, s in states.items() if s.alive}
    if not alive:
        return ConvergenceReport(converged=True, reason="no alive sources")

    signatures = {node: selection_signature(s) for node, s in alive.items()}
    counts = Counter(signatures.values())
    # most common, ties broken by the lowest-id holder
    reference = max(counts, key=lambda sig: (counts[sig], -min(n for n, s in signatures.items() if s == sig)))
    disagreeing = sorted(node for node, sig in signatures.items() if sig != reference)
    if disagreeing:
        return ConvergenceReport(
            converged=False,
            root=reference[0],
            disagreeing=disagreeing,
            reason=f"nodes {disagreeing} disagree with the selection rooted at {reference[0]}",
        )

    # the agreed tree must span exactly the alive sources
    covered = {node for _, path in reference[1] for node in path}
    dead = sorted(covered - set(alive))
    if dead:
        return ConvergenceReport(
            converged=False,
            root=reference[0],
            disagreeing=dead,
            reason=f"the agreed tree still routes through dead nodes {dead}",
        )
    missing = sorted(set(alive) - covered)
    if missing:
        return ConvergenceReport(
            converged=False,
            root=reference[0],
            disagreeing=missing,
            reason=f"nodes {missing} are not in the agreed tree",
        )
    return ConvergenceReport(converged=True, root=reference[0])


def parent_links(states: Mapping[int, NodeState]) -> Dict[int, int]:
    """Each alive node's current parent under its own endorsed tree."""
    links = {}
    for node, state in states.items():
        if not state.alive:
            continue
        try:
            parent = parent_of(state)
        except InconsistentSelectionError:
            continue
        if parent is not None:
            links[node] = parent
    return links


def find_parent_cycle(links: Mapping[int, int]) -> Optional[List[int]]:
    """Returns the nodes of one cycle in the parent graph, lowest id first, or None."""
    try:
        edges = nx.find_cycle(nx.DiGraph(sorted(links.items())))
    except nx.NetworkXNoCycle:
        return None
    cycle = [child for child, _ in edges]
    start = cycle.index(min(cycle))
    return cycle[start:] + cycle[:start]


def table_cycle(state: NodeState) -> Optional[List[int]]:
    """A cycle among the parent links stored in one node's own tree table."""
    return find_parent_cycle(state.tree.parent_links())


def selection_cycle(state: NodeState) -> Optional[List[int]]:
    return find_parent_cycle(state.dlmt.tree.parent_links())


def is_loop_free(states: Mapping[int, NodeState]) -> bool:
    """
    Every tree a node holds, its own table and the selection it endorses, must
    be acyclic. Nodes endorsing different snapshots are not compared with each
    other; once converged they all endorse one tree.
    """
    return all(
        table_cycle(s) is None and selection_cycle(s) is None
        for s in states.values() if s.alive
    )
