import pytest

from src.model import BrList, DlmtSelection, Eid, TreeTable, path_of
from src.node import (ControlMessage, DeadNodeError, HelloMessage, InconsistentSelectionError,
                      MaintenanceConfig, NodeState, ProtocolError, best_tree, handle_control_message,
                      handle_hello, init_node, kill, no_loop, on_timer_expiry, parent_of)

CFG = MaintenanceConfig(hello_period_T=25.0, parent_timeout_Tf=50.0)


def tree_of(owner, *paths):
    return TreeTable(owner, {p[0].node: BrList(p) for p in paths})


def state_of(me, tree, dlmt_tree=None, restart_flag=False, last=0.0):
    return NodeState(
        me=me,
        tree=tree,
        dlmt=DlmtSelection.from_tree(dlmt_tree or tree),
        restart_flag=restart_flag,
        last_parent_hello=last,
        maintenance_config=CFG,
    )


def message(sender, tree, restart=False, dlmt_tree=None):
    return ControlMessage(sender, restart, tree, DlmtSelection.from_tree(dlmt_tree or tree))


# --- init ---

def test_init_node_starts_a_singleton_epoch():
    state, output = init_node(4, 10_000, CFG, now=0.0)
    assert list(state.tree.entries) == [4]
    assert state.tree.entries[4].path == (Eid(10_000, 4),)
    assert state.dlmt.root == 4
    assert state.dlmt.depth == 1
    assert state.restart_flag is True
    assert output.rearm_timer_at == 25.0
    assert len(output.broadcasts) == 1
    assert output.broadcasts[0].restart is True


def test_init_node_refuses_a_dead_node():
    with pytest.raises(DeadNodeError):
        init_node(4, 0, CFG)


def test_maintenance_periods_are_validated():
    with pytest.raises(ValueError):
        MaintenanceConfig(hello_period_T=25.0, parent_timeout_Tf=10.0)
    with pytest.raises(ValueError):
        MaintenanceConfig(hello_period_T=0.0, parent_timeout_Tf=10.0)


def test_control_message_must_carry_the_senders_tree():
    tree = TreeTable.singleton(Eid(1_000, 1))
    with pytest.raises(ProtocolError):
        ControlMessage(Eid(2_000, 2), False, tree, DlmtSelection.from_tree(tree))


# --- no_loop ---

@pytest.fixture
def node_a():
    me = Eid(5_000, 1)
    tree = tree_of(1, (me,), path_of((3, 4_000), (1, 5_000)))
    return state_of(me, tree)


def test_lone_initiator_is_accepted(node_a):
    assert no_loop(node_a, BrList(path_of((7, 2_000)))) is True


def test_short_branch_through_a_direct_child_is_accepted(node_a):
    assert no_loop(node_a, BrList(path_of((7, 2_000), (3, 4_000)))) is True


def test_branch_disagreeing_with_the_stored_one_is_rejected(node_a):
    # g -> b -> c arriving at a, which has never stored a branch for b
    assert no_loop(node_a, BrList(path_of((7, 2_000), (2, 6_000), (3, 4_000)))) is False


def test_branch_matching_the_stored_one_is_accepted():
    me = Eid(5_000, 1)
    tree = tree_of(1, (me,), path_of((3, 4_000), (1, 5_000)), path_of((2, 6_000), (3, 4_000), (1, 5_000)))
    state = state_of(me, tree)
    assert no_loop(state, BrList(path_of((7, 2_000), (2, 6_000), (3, 4_000)))) is True


def test_candidate_through_self_is_a_precondition_violation(node_a):
    with pytest.raises(ProtocolError):
        no_loop(node_a, BrList(path_of((7, 2_000), (1, 5_000))))


# --- best_tree ---

def star(root, root_mj, *leaves):
    """root with every leaf attached directly."""
    paths = [path_of((root, root_mj))] + [path_of((n, mj), (root, root_mj)) for n, mj in leaves]
    return DlmtSelection.from_tree(tree_of(root, *paths))


def test_higher_energy_wins_at_equal_coverage():
    assert best_tree(star(1, 7_000, (2, 1_000)), star(3, 6_000, (4, 1_000))) is True


def test_identical_selections_do_not_beat_each_other():
    selection = star(1, 7_000, (2, 1_000))
    assert best_tree(selection, selection) is False
    assert best_tree(selection, star(1, 7_000, (2, 1_000))) is False


def test_lower_root_id_breaks_the_last_tie():
    assert best_tree(star(3, 7_000, (1, 1_000)), star(5, 7_000, (1, 1_000))) is True
    assert best_tree(star(5, 7_000, (1, 1_000)), star(3, 7_000, (1, 1_000))) is False


def test_coverage_beats_energy():
    assert best_tree(star(1, 2_000, (2, 1_000), (3, 1_000)), star(4, 9_000, (5, 1_000))) is True


def test_lower_depth_beats_root_id():
    shallow = star(5, 7_000, (1, 1_000), (2, 8_000))
    deep = DlmtSelection.from_tree(tree_of(
        3, path_of((3, 7_000)), path_of((2, 8_000), (3, 7_000)), path_of((1, 1_000), (2, 8_000), (3, 7_000))))
    assert shallow.energy == deep.energy == 7_000
    assert best_tree(shallow, deep) is True
    assert best_tree(deep, shallow) is False


def test_newer_snapshot_of_one_root_wins_after_the_five_keys():
    root, five, four = path_of((9, 7_000)), path_of((5, 6_000), (9, 7_000)), path_of((4, 6_000), (9, 7_000))
    older = DlmtSelection.from_tree(tree_of(9, root, five, four, path_of((1, 1_000), (5, 6_000), (9, 7_000))))
    newer = DlmtSelection.from_tree(tree_of(9, root, five, four, path_of((1, 1_000), (4, 6_000), (9, 7_000))))
    for key in ("coverage", "energy", "depth", "root_energy", "root"):
        assert getattr(older, key) == getattr(newer, key)
    assert best_tree(newer, older) is True
    assert best_tree(older, newer) is False


def test_higher_root_energy_beats_root_id():
    rich = DlmtSelection.from_tree(tree_of(
        5, path_of((5, 9_000)), path_of((2, 7_000), (5, 9_000)), path_of((1, 1_000), (2, 7_000), (5, 9_000))))
    poor = DlmtSelection.from_tree(tree_of(
        3, path_of((3, 8_000)), path_of((2, 7_000), (3, 8_000)), path_of((1, 1_000), (2, 7_000), (3, 8_000))))
    assert (rich.energy, rich.depth) == (poor.energy, poor.depth) == (7_000, 3)
    assert best_tree(rich, poor) is True


# --- handle_control_message ---

def test_first_branch_from_a_neighbor_is_stored_and_announced():
    state, _ = init_node(2, 6_000, CFG)
    sender = Eid(9_000, 1)
    state, output = handle_control_message(state, message(sender, TreeTable.singleton(sender)), now=1.0)

    branch = state.tree.entries[1]
    assert branch.path == path_of((1, 9_000), (2, 6_000))
    assert branch.cached_energy == 6_000
    assert output.state_changed is True
    assert len(output.broadcasts) == 1
    assert output.broadcasts[0].tree == state.tree
    assert output.rearm_timer_at == 26.0
    assert state.last_parent_hello == 1.0


def test_longer_branch_of_equal_energy_is_discarded():
    me = Eid(6_000, 10)
    own = tree_of(
        10,
        (me,),
        path_of((1, 9_000), (10, 6_000)),
        path_of((4, 9_000), (10, 6_000)),
        path_of((3, 8_000), (4, 9_000), (10, 6_000)),
    )
    state = state_of(me, own)
    neighbor = Eid(9_000, 4)
    theirs = tree_of(4, (neighbor,), path_of((3, 8_000), (4, 9_000)),
                     path_of((1, 9_000), (3, 8_000), (4, 9_000)))
    assert theirs.entries[1].cached_energy == 8_000

    after, output = handle_control_message(state, message(neighbor, theirs), now=5.0)
    assert after.tree == state.tree
    assert output.broadcasts == []
    assert output.state_changed is False
    assert output.rearm_timer_at == 30.0


def test_equal_energy_branch_replaces_a_longer_one():
    me = Eid(6_000, 10)
    own = tree_of(
        10,
        (me,),
        path_of((4, 9_000), (10, 6_000)),
        path_of((3, 8_000), (4, 9_000), (10, 6_000)),
        path_of((1, 9_000), (3, 8_000), (4, 9_000), (10, 6_000)),
    )
    sender = Eid(9_000, 1)
    after, output = handle_control_message(state_of(me, own), message(sender, TreeTable.singleton(sender)), now=5.0)
    assert after.tree.entries[1].nodes() == (1, 10)
    assert after.tree.entries[1].cached_energy == own.entries[1].cached_energy == 6_000
    assert after.tree.depth == 3
    assert output.state_changed is True


def test_equal_branches_prefer_the_lower_next_hop():
    me = Eid(6_000, 10)
    five, four = path_of((5, 9_000), (10, 6_000)), path_of((4, 9_000), (10, 6_000))
    via_five = tree_of(10, (me,), five, four, path_of((7, 2_000), (5, 9_000), (10, 6_000)))
    via_four = tree_of(10, (me,), five, four, path_of((7, 2_000), (4, 9_000), (10, 6_000)))

    neighbor = Eid(9_000, 4)
    offer = tree_of(4, (neighbor,), path_of((7, 2_000), (4, 9_000)))
    after, _ = handle_control_message(state_of(me, via_five), message(neighbor, offer), now=5.0)
    assert after.tree.entries[7].nodes() == (7, 4, 10)

    neighbor = Eid(9_000, 5)
    offer = tree_of(5, (neighbor,), path_of((7, 2_000), (5, 9_000)))
    after, output = handle_control_message(state_of(me, via_four), message(neighbor, offer), now=5.0)
    assert after.tree == via_four
    assert output.broadcasts == []


def test_selection_keeps_a_shallower_snapshot_of_equal_energy():
    # A wider but longer branch for 4 arrives after the tree energy is fixed by 5:
    # the table deepens, the endorsed snapshot does not follow it.
    state, _ = init_node(1, 9_000, CFG)
    weak, far = Eid(2_000, 2), Eid(8_000, 3)
    state, _ = handle_control_message(state, message(weak, tree_of(
        2, (weak,), path_of((5, 6_000), (2, 2_000)), path_of((4, 5_000), (2, 2_000)))), now=1.0)
    state, _ = handle_control_message(state, message(far, tree_of(
        3, (far,), path_of((6, 7_000), (3, 8_000)))), now=2.0)
    assert state.dlmt.tree == state.tree
    assert (state.dlmt.energy, state.dlmt.depth) == (2_000, 3)

    state, output = handle_control_message(state, message(far, tree_of(
        3, (far,), path_of((6, 7_000), (3, 8_000)), path_of((4, 5_000), (6, 7_000), (3, 8_000)))), now=3.0)
    assert state.tree.entries[4].nodes() == (4, 6, 3, 1)
    assert (state.tree.tree_energy, state.tree.depth) == (2_000, 4)
    assert state.dlmt.tree.entries[4].nodes() == (4, 2, 1)
    assert state.dlmt.depth == 3
    assert output.state_changed is True


def test_received_dlmt_is_adopted_when_better():
    me = Eid(6_000, 2)
    state = state_of(me, tree_of(2, (me,), path_of((1, 9_000), (2, 6_000))))
    sender = Eid(9_000, 1)
    theirs = tree_of(1, (sender,), path_of((2, 6_000), (1, 9_000)), path_of((3, 5_000), (1, 9_000)))

    after, output = handle_control_message(state, message(sender, theirs), now=2.0)
    assert output.brlist_scans == 3
    assert set(after.tree.entries) == {1, 2, 3}
    assert after.tree.entries[3].nodes() == (3, 1, 2)
    assert after.dlmt.root == 1
    assert after.dlmt.energy == 9_000
    assert parent_of(after) == 1
    # the selection is maximal over what was seen
    assert not best_tree(DlmtSelection.from_tree(after.tree), after.dlmt)
    assert not best_tree(message(sender, theirs).dlmt, after.dlmt)


def test_restart_flag_reinitializes_once_per_epoch():
    me = Eid(6_000, 2)
    stale = tree_of(2, (me,), path_of((5, 4_000), (2, 6_000)))
    sender = Eid(9_000, 1)
    msg = message(sender, TreeTable.singleton(sender), restart=True)

    fresh, output = handle_control_message(state_of(me, stale, restart_flag=False), msg, now=3.0)
    assert set(fresh.tree.entries) == {1, 2}
    assert fresh.restart_flag is True
    assert output.state_changed is True

    kept, _ = handle_control_message(state_of(me, stale, restart_flag=True), msg, now=3.0)
    assert set(kept.tree.entries) == {1, 2, 5}


def test_message_from_self_is_rejected():
    state, _ = init_node(2, 6_000, CFG)
    with pytest.raises(ProtocolError):
        handle_control_message(state, state.control_message(), now=1.0)


def test_dead_node_is_silent():
    state, _ = init_node(2, 6_000, CFG)
    state = kill(state)
    sender = Eid(9_000, 1)
    after, output = handle_control_message(state, message(sender, TreeTable.singleton(sender)), now=1.0)
    assert after is state
    assert output.broadcasts == [] and output.rearm_timer_at is None
    assert on_timer_expiry(state, 30.0)[1].broadcasts == []


# --- maintenance ---

@pytest.fixture
def child():
    """Node 1 endorsing the tree rooted at 2, last parent hello at t=10."""
    me = Eid(3_000, 1)
    root_tree = tree_of(2, path_of((2, 9_000)), path_of((1, 3_000), (2, 9_000)))
    return state_of(me, tree_of(1, (me,), path_of((2, 9_000), (1, 3_000))), root_tree, last=10.0)


def test_root_sends_hello_on_expiry():
    state, _ = init_node(4, 10_000, CFG)
    state, output = on_timer_expiry(state, 25.0)
    assert output.broadcasts == [HelloMessage(sender=4, root=4)]
    assert state.restart_flag is False
    assert output.rearm_timer_at == 50.0


def test_child_with_fresh_parent_stays_quiet(child):
    state, output = on_timer_expiry(child, 60.0)
    assert output.broadcasts == []
    assert output.reinitialized is False
    assert output.rearm_timer_at == 85.0


def test_child_past_the_timeout_restarts(child):
    state, output = on_timer_expiry(child, 61.0)
    assert output.reinitialized is True
    assert state.restart_flag is True
    assert list(state.tree.entries) == [1]
    assert state.dlmt.root == 1
    assert state.me == child.me
    assert len(output.broadcasts) == 1 and output.broadcasts[0].restart is True


def test_parent_of(child):
    assert parent_of(child) == 2
    root_state, _ = init_node(4, 10_000, CFG)
    assert parent_of(root_state) is None

    me = Eid(1_000, 1)
    deep = tree_of(3, path_of((3, 5_000)), path_of((2, 4_000), (3, 5_000)),
                   path_of((1, 1_000), (2, 4_000), (3, 5_000)))
    assert parent_of(state_of(me, TreeTable.singleton(me), deep)) == 2

    elsewhere = tree_of(3, path_of((3, 5_000)), path_of((2, 4_000), (3, 5_000)))
    with pytest.raises(InconsistentSelectionError):
        parent_of(state_of(me, TreeTable.singleton(me), elsewhere))


def test_hello_from_parent_is_forwarded(child):
    state, output = handle_hello(child, HelloMessage(sender=2, root=2), now=40.0)
    assert state.last_parent_hello == 40.0
    assert output.broadcasts == [HelloMessage(sender=1, root=2)]


def test_hello_from_anyone_else_is_ignored(child):
    state, output = handle_hello(child, HelloMessage(sender=7, root=2), now=40.0)
    assert state is child
    assert output.broadcasts == []

    root_state, _ = init_node(4, 10_000, CFG)
    after, output = handle_hello(root_state, HelloMessage(sender=1, root=4), now=40.0)
    assert after is root_state and output.broadcasts == []
