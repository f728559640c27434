"""
The per-node DLMT state machine.
Each handler is a pure transition (state, input) -> (state, output): the node
never touches the radio or the clock, it only returns what to broadcast and
when its maintenance timer should fire next. The simulator owns both.

Responsibilities:
1. Explore the highest-energy branch from every initiator (flooding of brlists).
2. Keep the owned tree loop-free while attaching branches (no_loop).
3. Endorse the best tree seen so far (best_tree).
4. Maintain the endorsed tree with root hellos and restart on a lost parent.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple, Union

from src import config
from src.model import BrList, DlmtSelection, Eid, TreeTable

logger = logging.getLogger()


class DeadNodeError(ValueError):
    """A node cannot be initialized without residual energy."""


class ProtocolError(ValueError):
    """An input violates the protocol's preconditions."""


class InconsistentSelectionError(ValueError):
    """The endorsed tree has no branch for the node asking for its parent."""


@dataclass(frozen=True)
class MaintenanceConfig:
    hello_period_T: float = config.HELLO_PERIOD_T
    parent_timeout_Tf: float = config.PARENT_TIMEOUT_TF

    def __post_init__(self):
        if self.hello_period_T <= 0 or self.parent_timeout_Tf <= 0:
            raise ValueError("Maintenance periods must be strictly positive")
        if self.parent_timeout_Tf < self.hello_period_T:
            raise ValueError(
                f"Parent timeout {self.parent_timeout_Tf}s is shorter than the hello period "
                f"{self.hello_period_T}s")


@dataclass(frozen=True)
class ControlMessage:
    """Restart flag, own tree and endorsed selection, as broadcast by sender."""
    sender: Eid
    restart: bool
    tree: TreeTable
    dlmt: DlmtSelection

    def __post_init__(self):
        if self.tree.owner != self.sender.node:
            raise ProtocolError(
                f"Control message from {self.sender.node} carries the tree of {self.tree.owner}")


@dataclass(frozen=True)
class HelloMessage:
    sender: int
    root: int


Broadcast = Union[ControlMessage, HelloMessage]


@dataclass
class NodeOutput:
    """
    What a transition asks the outside world to do.
    rearm_timer_at is None when the maintenance timer is left alone.
    brlist_scans / table_lookups count the work done by handle_control_message.
    """
    broadcasts: List[Broadcast] = field(default_factory=list)
    state_changed: bool = False
    rearm_timer_at: Optional[float] = None
    reinitialized: bool = False
    brlist_scans: int = 0
    table_lookups: int = 0


@dataclass(frozen=True)
class NodeState:
    me: Eid
    tree: TreeTable
    dlmt: DlmtSelection
    restart_flag: bool
    last_parent_hello: float
    maintenance_config: MaintenanceConfig
    alive: bool = True

    @property
    def node_id(self) -> int:
        return self.me.node

    def control_message(self) -> ControlMessage:
        return ControlMessage(self.me, self.restart_flag, self.tree, self.dlmt)


def _fresh_state(me: Eid, cfg: MaintenanceConfig, now: float) -> NodeState:
    tree = TreeTable.singleton(me)
    return NodeState(
        me=me,
        tree=tree,
        dlmt=DlmtSelection.from_tree(tree),
        restart_flag=True,
        last_parent_hello=now,
        maintenance_config=cfg,
    )


def _reinitialize(state: NodeState, now: float) -> NodeState:
    # New epoch: singleton tree and selection, same sampled energy
    return _fresh_state(state.me, state.maintenance_config, now)


def init_node(node_id: int, energy: int, cfg: Optional[MaintenanceConfig] = None,
              now: float = 0.0) -> Tuple[NodeState, NodeOutput]:
    """Singleton branch, tree and selection; announce them and arm the maintenance timer."""
    if energy <= 0:
        raise DeadNodeError(f"Node {node_id} has no residual energy")
    cfg = cfg or MaintenanceConfig()
    state = _fresh_state(Eid(energy=energy, node=node_id), cfg, now)
    output = NodeOutput(
        broadcasts=[state.control_message()],
        state_changed=True,
        rearm_timer_at=now + cfg.hello_period_T,
    )
    return state, output


def kill(state: NodeState) -> NodeState:
    return replace(state, alive=False)


def _consistent(entries: Dict[int, BrList], me: Eid, candidate: BrList) -> bool:
    remainder = candidate.path[1:]
    if not remainder:
        return True
    stored = entries.get(remainder[0].node)
    if stored is None:
        return False
    return stored.path == remainder + (me,)


def no_loop(state: NodeState, candidate: BrList) -> bool:
    """
    Strip the initiator; what is left must be exactly the branch this node
    already stores for the first remaining node, extended by itself.
    A lone initiator is always accepted. An unknown first node is rejected.
    """
    if candidate.contains(state.me.node):
        raise ProtocolError(
            f"Candidate {candidate.nodes()} already passes through node {state.me.node}")
    return _consistent(state.tree.entries, state.me, candidate)


def best_tree(candidate: DlmtSelection, incumbent: DlmtSelection) -> bool:
    """
    True iff candidate strictly beats incumbent in the best_tree chain:
    coverage, tree energy, lower depth, root energy, lower root id.
    One more key follows the five: DlmtSelection.freshness, which is only ever
    decisive between two snapshots of the same root's tree (the newer wins).
    Identical selections compare false.
    """
    return candidate.rank() > incumbent.rank()


def handle_control_message(state: NodeState, msg: ControlMessage,
                           now: float) -> Tuple[NodeState, NodeOutput]:
    if not state.alive:
        return state, NodeOutput()
    if msg.sender.node == state.me.node:
        raise ProtocolError(f"Node {state.me.node} received its own control message")

    output = NodeOutput(rearm_timer_at=now + state.maintenance_config.hello_period_T)
    changed = False

    # 1. RESTART (only the first restart flag of an epoch is honoured)
    if msg.restart and not state.restart_flag:
        logger.debug(f"🔁 Node {state.me.node} restarts on flag from {msg.sender.node}")
        state = _reinitialize(state, now)
        changed = True

    # 2. HIGHEST ENERGY BRANCH
    # Shorter branches first, so a sub-branch lands before the branches extending it
    me = state.me
    entries = dict(state.tree.entries)
    tree_changed = False
    for received in sorted(msg.tree.entries.values(), key=lambda b: (len(b), b.initiator)):
        output.brlist_scans += 1
        if received.contains(me.node):
            continue
        output.table_lookups += len(received)
        if not _consistent(entries, me, received):
            continue
        output.table_lookups += 1
        stored = entries.get(received.initiator)
        extended = received.extend(me)
        # Equal energy: shorter branch, then lower next hop
        if stored is None or extended.preference() > stored.preference():
            entries[received.initiator] = extended
            tree_changed = True

    if tree_changed:
        output.table_lookups += len(entries)
        state = replace(state, tree=TreeTable(me.node, entries))
        changed = True

    # 3. SELECTION: own tree first, then the sender's selection
    output.table_lookups += len(state.tree.entries)
    dlmt = state.dlmt
    own = DlmtSelection.from_tree(state.tree)
    if best_tree(own, dlmt):
        dlmt = own
    if best_tree(msg.dlmt, dlmt):
        dlmt = msg.dlmt
    if dlmt is not state.dlmt:
        state = replace(state, dlmt=dlmt)
        changed = True

    # 4. ANNOUNCE
    if changed:
        state = replace(state, last_parent_hello=now)
        output.state_changed = True
        output.broadcasts.append(state.control_message())
    return state, output


def on_timer_expiry(state: NodeState, now: float) -> Tuple[NodeState, NodeOutput]:
    if not state.alive:
        return state, NodeOutput()
    cfg = state.maintenance_config
    state = replace(state, restart_flag=False)
    output = NodeOutput(rearm_timer_at=now + cfg.hello_period_T)

    if state.dlmt.root == state.me.node:
        output.broadcasts.append(HelloMessage(sender=state.me.node, root=state.me.node))
    elif now > state.last_parent_hello + cfg.parent_timeout_Tf:
        logger.info(
            f"⚠️ Node {state.me.node} lost its parent "
            f"(last hello {state.last_parent_hello:.3f}s, now {now:.3f}s), restarting")
        state = _reinitialize(state, now)
        output.broadcasts.append(state.control_message())
        output.state_changed = True
        output.reinitialized = True
    return state, output


def parent_of(state: NodeState) -> Optional[int]:
    dlmt = state.dlmt
    if dlmt.root == state.me.node:
        return None
    branch = dlmt.tree.entries.get(state.me.node)
    if branch is None:
        raise InconsistentSelectionError(
            f"Node {state.me.node} endorses the tree of {dlmt.root} which has no branch for it")
    return branch.path[1].node


def handle_hello(state: NodeState, hello: HelloMessage,
                 now: float) -> Tuple[NodeState, NodeOutput]:
    if not state.alive:
        return state, NodeOutput()
    try:
        parent = parent_of(state)
    except InconsistentSelectionError:
        return state, NodeOutput()
    if parent is None or hello.sender != parent:
        return state, NodeOutput()
    state = replace(state, last_parent_hello=now)
    return state, NodeOutput(broadcasts=[HelloMessage(sender=state.me.node, root=hello.root)])
