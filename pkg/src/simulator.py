"""
The Simulation Engine.
It drives one NodeState per event source through a single global clock: every
broadcast becomes one delivery event per in-range alive source, every rearm
becomes a timer event, and kills/drains from the scenario become death and
energy events. Nothing here decides protocol behavior; node.py does.

Responsibilities:
1. Keep the (time, sequence) ordered event queue.
2. Account energy per transmitted/received byte and kill exhausted nodes.
3. Write one trace record per send, timer expiry, death and drain.
4. Stop on quiescence (see _quiescent) or when the duration elapses.
"""
import heapq
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

from src.convergence import ConvergenceReport, check_convergence
from src.medium import BroadcastMedium
from src.model import INFINITE_ENERGY, Energy, joules_to_mj, mj_to_joules
from src.node import (ControlMessage, DeadNodeError, NodeOutput, NodeState,
                      handle_control_message, handle_hello, init_node, kill, on_timer_expiry)
from src.scenario import Scenario
from src.wire import encode_control, encode_hello

logger = logging.getLogger()


class EventKind(str, Enum):
    DELIVER_CONTROL = "deliver-control"
    DELIVER_HELLO = "deliver-hello"
    TIMER_EXPIRY = "timer-expiry"
    NODE_DEATH = "node-death"
    ENERGY_DRAIN = "energy-drain"


@dataclass(order=True)
class SimEvent:
    time: float
    sequence: int
    kind: EventKind = field(compare=False)
    target: int = field(compare=False)
    payload: Any = field(default=None, compare=False)


@dataclass
class RunMetrics:
    converged: bool = False
    convergence_time: float = 0.0
    control_messages_sent: int = 0
    hello_messages_sent: int = 0
    final_root: Optional[int] = None
    final_tree_energy: Energy = INFINITE_ENERGY
    final_depth: int = 0
    restarts_triggered: int = 0
    per_node_residual_energy: Dict[int, int] = field(default_factory=dict)  # mJ
    bottleneck_parent: Optional[int] = None
    final_parent_map: Dict[int, int] = field(default_factory=dict)
    deaths: List[int] = field(default_factory=list)
    end_time: float = 0.0
    events_processed: int = 0
    max_brlist_scans: int = 0
    max_table_lookups: int = 0
    source_count: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "converged": self.converged,
            "convergence_time": self.convergence_time,
            "control_messages_sent": self.control_messages_sent,
            "hello_messages_sent": self.hello_messages_sent,
            "final_root": self.final_root,
            "final_tree_energy": mj_to_joules(self.final_tree_energy),
            "final_depth": self.final_depth,
            "restarts_triggered": self.restarts_triggered,
            "per_node_residual_energy": {
                str(node): mj_to_joules(mj) for node, mj in sorted(self.per_node_residual_energy.items())
            },
            "bottleneck_parent": self.bottleneck_parent,
            "final_parent_map": {str(c): p for c, p in sorted(self.final_parent_map.items())},
            "deaths": list(self.deaths),
            "end_time": self.end_time,
            "events_processed": self.events_processed,
            "max_brlist_scans": self.max_brlist_scans,
            "max_table_lookups": self.max_table_lookups,
            "source_count": self.source_count,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunMetrics":
        energy = data.get("final_tree_energy")
        return cls(
            converged=data["converged"],
            convergence_time=data["convergence_time"],
            control_messages_sent=data["control_messages_sent"],
            hello_messages_sent=data["hello_messages_sent"],
            final_root=data.get("final_root"),
            final_tree_energy=INFINITE_ENERGY if energy is None else joules_to_mj(energy),
            final_depth=data["final_depth"],
            restarts_triggered=data["restarts_triggered"],
            per_node_residual_energy={
                int(k): joules_to_mj(v) for k, v in data.get("per_node_residual_energy", {}).items()
            },
            bottleneck_parent=data.get("bottleneck_parent"),
            final_parent_map={int(k): v for k, v in data.get("final_parent_map", {}).items()},
            deaths=list(data.get("deaths", [])),
            end_time=data.get("end_time", 0.0),
            events_processed=data.get("events_processed", 0),
            max_brlist_scans=data.get("max_brlist_scans", 0),
            max_table_lookups=data.get("max_table_lookups", 0),
            source_count=data.get("source_count", 0),
        )


Observer = Callable[[SimEvent, "SimulationEngine"], None]


def bottleneck_of(state: NodeState) -> Optional[int]:
    """The non-leaf node holding the tree energy of the endorsed tree (lowest id on ties)."""
    dlmt = state.dlmt
    if dlmt.energy == INFINITE_ENERGY:
        return None
    holders = {
        eid.node
        for branch in dlmt.tree.entries.values()
        for eid in branch.path[1:]
        if eid.energy == dlmt.energy
    }
    return min(holders)


class SimulationEngine:
    def __init__(self, scenario: Scenario, observer: Optional[Observer] = None):
        self.scenario = scenario
        self.observer = observer
        self.medium = BroadcastMedium(scenario)
        self.hello_period = scenario.maintenance.hello_period_T

        self.states: Dict[int, NodeState] = {}
        self.trace: List[Dict[str, Any]] = []
        self.metrics = RunMetrics(source_count=len(scenario.topology.source_ids()))

        self._queue: List[SimEvent] = []
        self._sequence = itertools.count()
        self._timer_tokens: Dict[int, int] = {}
        self._packet_numbers: Dict[int, int] = {}
        self._pending_control = 0
        self._pending_scheduled = 0
        self.now = 0.0
        self.last_change_time = 0.0
        self.last_control_time = 0.0

    # --- QUEUE ---

    def _push(self, time: float, kind: EventKind, target: int, payload: Any = None) -> int:
        sequence = next(self._sequence)
        heapq.heappush(self._queue, SimEvent(time, sequence, kind, target, payload))
        return sequence

    def _record(self, kind: str, node: int, **detail):
        self.trace.append({"time": self.now, "kind": kind, "node": node, "detail": detail})

    # --- NODE OUTPUT ---

    def _apply(self, node: int, state: NodeState, output: NodeOutput):
        self.states[node] = state
        if output.state_changed:
            self.last_change_time = self.now
        if output.reinitialized:
            self.metrics.restarts_triggered += 1
        self.metrics.max_brlist_scans = max(self.metrics.max_brlist_scans, output.brlist_scans)
        self.metrics.max_table_lookups = max(self.metrics.max_table_lookups, output.table_lookups)

        if output.rearm_timer_at is not None and state.alive:
            self._timer_tokens[node] = self._push(output.rearm_timer_at, EventKind.TIMER_EXPIRY, node)
        for message in output.broadcasts:
            self._broadcast(node, message)

    def _broadcast(self, node: int, message):
        packet_number = self._packet_numbers.get(node, 0) + 1
        self._packet_numbers[node] = packet_number

        if isinstance(message, ControlMessage):
            data = encode_control(message, packet_number)
            kind = EventKind.DELIVER_CONTROL
            self.metrics.control_messages_sent += 1
            self.last_control_time = self.now
            self._record("control", node, packet_number=packet_number, bytes=len(data),
                         restart=message.restart, root=message.dlmt.root,
                         tree_entries=len(message.tree.entries))
        else:
            data = encode_hello(message, packet_number)
            kind = EventKind.DELIVER_HELLO
            self.metrics.hello_messages_sent += 1
            self._record("hello", node, packet_number=packet_number, bytes=len(data),
                         root=message.root)

        exhausted = self.medium.charge_tx(node, len(data))
        for delivery in self.medium.fan_out(node, self.now):
            self._push(delivery.arrival_time, kind, delivery.receiver, (message, len(data)))
            if kind == EventKind.DELIVER_CONTROL:
                self._pending_control += 1
        # the transmission completes before the sender dies
        if exhausted:
            self._die(node, "energy exhausted while sending")

    def _die(self, node: int, reason: str):
        if not self.medium.is_alive(node):
            return
        self.medium.mark_dead(node)
        self._timer_tokens.pop(node, None)
        if node in self.states:
            self.states[node] = kill(self.states[node])
        self.metrics.deaths.append(node)
        self.last_change_time = self.now
        self._record("death", node, reason=reason)
        logger.info(f"💀 Node {node} died at {self.now:.3f}s ({reason})")

    # --- EVENTS ---

    def _on_delivery(self, event: SimEvent):
        if event.kind == EventKind.DELIVER_CONTROL:
            self._pending_control -= 1
            self.last_control_time = self.now
        node = event.target
        if not self.medium.is_alive(node) or node not in self.states:
            return
        message, size = event.payload
        if self.medium.charge_rx(node, size):
            self._die(node, "energy exhausted while receiving")
            return
        if isinstance(message, ControlMessage):
            state, output = handle_control_message(self.states[node], message, self.now)
        else:
            state, output = handle_hello(self.states[node], message, self.now)
        self._apply(node, state, output)

    def _on_timer(self, event: SimEvent):
        node = event.target
        if self._timer_tokens.get(node) != event.sequence:
            return  # superseded by a later rearm
        self._record("timer", node)
        state, output = on_timer_expiry(self.states[node], self.now)
        self._apply(node, state, output)

    def _on_drain(self, event: SimEvent):
        self._pending_scheduled -= 1
        node, joules = event.target, event.payload
        if not self.medium.is_alive(node):
            return
        self._record("drain", node, joules=joules)
        if self.medium.charge(node, joules_to_mj(joules)):
            self._die(node, "energy drained")

    def _on_death(self, event: SimEvent):
        self._pending_scheduled -= 1
        self._die(event.target, "scheduled kill")

    def _dispatch(self, event: SimEvent):
        if event.kind in (EventKind.DELIVER_CONTROL, EventKind.DELIVER_HELLO):
            self._on_delivery(event)
        elif event.kind == EventKind.TIMER_EXPIRY:
            self._on_timer(event)
        elif event.kind == EventKind.ENERGY_DRAIN:
            self._on_drain(event)
        elif event.kind == EventKind.NODE_DEATH:
            self._on_death(event)

    # --- RUN ---

    def _initialize(self):
        cfg = self.scenario.maintenance
        for node in self.scenario.topology.source_ids():
            energy = self.scenario.topology.node(node).initial_energy
            try:
                state, output = init_node(node, energy, cfg, now=0.0)
            except DeadNodeError:
                self._die(node, "no initial energy")
                continue
            self._apply(node, state, output)

        for kill_event in self.scenario.kill_schedule:
            self._push(kill_event.time, EventKind.NODE_DEATH, kill_event.node)
            self._pending_scheduled += 1
        for drain in self.scenario.drain_schedule:
            self._push(drain.time, EventKind.ENERGY_DRAIN, drain.node, drain.joules)
            self._pending_scheduled += 1

    def _quiescent(self) -> bool:
        """No control traffic in flight or due, none for a hello period, and agreement."""
        if self._pending_control or self._pending_scheduled:
            return False
        if self.now - self.last_control_time < self.hello_period:
            return False
        return check_convergence(self.states).converged

    def convergence(self) -> ConvergenceReport:
        return check_convergence(self.states)

    def run(self) -> RunMetrics:
        duration = self.scenario.duration
        logger.info(f"▶️ Running {self.metrics.source_count} sources for up to {duration:.0f}s "
                    f"(seed {self.scenario.seed})")

        # 1. INIT
        self._initialize()

        # 2. EVENT LOOP
        stopped_quiet = False
        while self._queue:
            event = heapq.heappop(self._queue)
            if event.time > duration:
                self.now = duration
                break
            self.now = event.time
            self._dispatch(event)
            self.metrics.events_processed += 1
            if self.observer is not None:
                self.observer(event, self)
            if self._quiescent():
                stopped_quiet = True
                break

        # 3. RESULTS
        self._finalize()
        if self.metrics.converged:
            logger.info(f"✅ Converged on root {self.metrics.final_root} at "
                        f"{self.metrics.convergence_time:.3f}s"
                        f"{'' if stopped_quiet else ' (duration elapsed)'}")
        else:
            logger.info(f"❌ No convergence within {duration:.0f}s: {self.convergence().reason}")
        return self.metrics

    def _finalize(self):
        metrics = self.metrics
        report = self.convergence()
        metrics.converged = report.converged
        metrics.convergence_time = self.last_change_time
        metrics.end_time = self.now
        metrics.per_node_residual_energy = dict(self.medium.residual)

        alive = sorted(n for n, s in self.states.items() if s.alive)
        agreeing = [n for n in alive if n not in report.disagreeing]
        if not agreeing:
            return
        reference = self.states[agreeing[0]]
        metrics.final_root = reference.dlmt.root
        metrics.final_tree_energy = reference.dlmt.energy
        metrics.final_depth = reference.dlmt.depth
        metrics.bottleneck_parent = bottleneck_of(reference)
        metrics.final_parent_map = reference.dlmt.tree.parent_links()

    def replay_check(self) -> List[Tuple[int, int]]:
        """
        Re-deliver every alive neighbor's current control message (restart bit
        cleared) to every alive source. Returns the (receiver, sender) pairs
        whose replay would still change state; empty at a true fixpoint.
        """
        changed = []
        for node in sorted(self.states):
            state = self.states[node]
            if not state.alive:
                continue
            for neighbor in self.scenario.topology.neighbors(node):
                other = self.states.get(neighbor)
                if other is None or not other.alive:
                    continue
                message = ControlMessage(other.me, False, other.tree, other.dlmt)
                _, output = handle_control_message(state, message, self.now)
                if output.state_changed:
                    changed.append((node, neighbor))
        return changed


def run(scenario: Scenario, observer: Optional[Observer] = None) -> Tuple[RunMetrics, List[Dict[str, Any]]]:
    engine = SimulationEngine(scenario, observer)
    metrics = engine.run()
    return metrics, engine.trace
