"""
The shared vocabulary of the DLMT engine.
Every other module speaks in these types: an Eid is the atom of control state,
a BrList is one branch, a TreeTable is the tree a node has built around itself,
and a DlmtSelection is the tree a node currently endorses for the whole region.

Energies are integer millijoules. The only non-integer value is INFINITE_ENERGY,
the branch energy of a single-node branch (it has no non-leaf node).
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

INFINITE_ENERGY = math.inf
MILLIJOULES_PER_JOULE = 1000

# int millijoules, or INFINITE_ENERGY
Energy = Union[int, float]


class MalformedBranchError(ValueError):
    """A branch or tree table violates its structural invariants."""


def joules_to_mj(joules: float) -> int:
    return int(round(joules * MILLIJOULES_PER_JOULE))


def mj_to_joules(millijoules: Energy) -> Optional[float]:
    """Files carry joules; the infinity sentinel becomes None (JSON null)."""
    if millijoules == INFINITE_ENERGY:
        return None
    return millijoules / MILLIJOULES_PER_JOULE


@dataclass(frozen=True, order=True)
class Eid:
    """(energy level, node ID) pair as carried on every branch."""
    energy: int
    node: int

    def __post_init__(self):
        if self.energy < 0:
            raise MalformedBranchError(f"Negative energy {self.energy} mJ for node {self.node}")
        if self.node < 0:
            raise MalformedBranchError(f"Negative node id {self.node}")


def branch_energy(path: Sequence[Eid]) -> Energy:
    """
    Minimum energy over the non-leaf nodes of a branch.
    Index 0 is the leaf (the initiator) and never counts.
    """
    if not path:
        raise MalformedBranchError("Branch is empty")
    nodes = [eid.node for eid in path]
    if len(set(nodes)) != len(nodes):
        raise MalformedBranchError(f"Branch repeats a node: {nodes}")
    if len(path) == 1:
        return INFINITE_ENERGY
    return min(eid.energy for eid in path[1:])


@dataclass(frozen=True)
class BrList:
    """
    One branch, stored initiator-first: path[0] is the leaf that started the
    flood, path[-1] is the node currently holding the list.
    """
    path: Tuple[Eid, ...]
    cached_energy: Energy = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))
        object.__setattr__(self, "cached_energy", branch_energy(self.path))

    @classmethod
    def singleton(cls, eid: Eid) -> "BrList":
        return cls((eid,))

    @property
    def initiator(self) -> int:
        return self.path[0].node

    @property
    def holder(self) -> int:
        return self.path[-1].node

    def contains(self, node: int) -> bool:
        return any(eid.node == node for eid in self.path)

    def extend(self, eid: Eid) -> "BrList":
        """Append at the holder end; the new holder becomes a non-leaf energy."""
        if self.contains(eid.node):
            raise MalformedBranchError(f"Node {eid.node} is already on branch {self.nodes()}")
        return BrList(self.path + (eid,))

    def nodes(self) -> Tuple[int, ...]:
        return tuple(eid.node for eid in self.path)

    @property
    def next_hop(self) -> Optional[int]:
        """The node right after the initiator; None on a lone initiator."""
        return self.path[1].node if len(self.path) > 1 else None

    def preference(self) -> tuple:
        """Wider first, then fewer Eids, then the lower next hop."""
        next_hop = self.next_hop
        return (self.cached_energy, -len(self.path), -(next_hop if next_hop is not None else -1))

    def __len__(self) -> int:
        return len(self.path)


@dataclass(frozen=True)
class TreeTable:
    """
    One node's view of a tree rooted at itself.
    entries maps every known initiator to the best branch from it to the owner.
    """
    owner: int
    entries: Mapping[int, BrList]
    tree_energy: Energy = field(init=False)

    def __post_init__(self):
        entries = dict(self.entries)
        own = entries.get(self.owner)
        if own is None or len(own) != 1:
            raise MalformedBranchError(f"Tree of node {self.owner} lacks its singleton entry")
        for initiator, branch in entries.items():
            if branch.initiator != initiator:
                raise MalformedBranchError(
                    f"Entry keyed {initiator} starts at node {branch.initiator}")
            if branch.holder != self.owner:
                raise MalformedBranchError(
                    f"Entry for {initiator} ends at {branch.holder}, not at owner {self.owner}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "tree_energy", tree_energy(self))

    @classmethod
    def singleton(cls, me: Eid) -> "TreeTable":
        return cls(me.node, {me.node: BrList.singleton(me)})

    @property
    def owner_eid(self) -> Eid:
        return self.entries[self.owner].path[0]

    @property
    def depth(self) -> int:
        return tree_depth(self)

    def initiators(self) -> Tuple[int, ...]:
        return tuple(sorted(self.entries))

    def parent_links(self) -> Dict[int, int]:
        """initiator -> next hop on its own branch (the owner has none)."""
        return {
            initiator: branch.next_hop
            for initiator, branch in self.entries.items()
            if len(branch) > 1
        }


def tree_energy(table: TreeTable) -> Energy:
    return min(branch.cached_energy for branch in table.entries.values())


def tree_depth(table: TreeTable) -> int:
    """Maximum number of Eids over all stored branches."""
    return max(len(branch) for branch in table.entries.values())


def tree_rank(coverage: int, energy: Energy, depth: int, root_energy: int, root: int,
              freshness: tuple = ()) -> tuple:
    """
    Sort key of the best_tree chain: more coverage, higher tree energy, lower
    depth, higher root energy, lower root id. The trailing freshness keys only
    ever separate snapshots of the same root's tree, newest first.
    """
    return (coverage, energy, -depth, root_energy, -root, *freshness)


@dataclass(frozen=True)
class DlmtSelection:
    """The lifetime-minimizing tree a node currently endorses."""
    tree: TreeTable
    energy: Energy = field(init=False)
    depth: int = field(init=False)
    root: int = field(init=False)
    root_energy: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "energy", self.tree.tree_energy)
        object.__setattr__(self, "depth", self.tree.depth)
        object.__setattr__(self, "root", self.tree.owner)
        object.__setattr__(self, "root_energy", self.tree.owner_eid.energy)

    @classmethod
    def from_tree(cls, tree: TreeTable) -> "DlmtSelection":
        return cls(tree)

    @property
    def coverage(self) -> int:
        return len(self.tree.entries)

    @property
    def energy_sum(self) -> int:
        return sum(
            branch.cached_energy
            for branch in self.tree.entries.values()
            if branch.cached_energy != INFINITE_ENERGY
        )

    @property
    def freshness(self) -> Tuple[int, int, int]:
        """
        Grows with every entry replacement of one epoch: a wider branch raises
        energy_sum; an equally wide one is shorter or has a lower next hop.
        """
        branches = [b for b in self.tree.entries.values() if len(b) > 1]
        return (
            self.energy_sum,
            -sum(len(b) for b in branches),
            -sum(b.next_hop for b in branches),
        )

    def rank(self) -> tuple:
        return tree_rank(self.coverage, self.energy, self.depth, self.root_energy,
                         self.root, self.freshness)


def path_of(*pairs: Tuple[int, int]) -> Tuple[Eid, ...]:
    """Shorthand used by tools and tests: path_of((node, mJ), ...)."""
    return tuple(Eid(energy=energy, node=node) for node, energy in pairs)
