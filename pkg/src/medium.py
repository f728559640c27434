import logging
from dataclasses import dataclass
from typing import Dict, List, Set

import numpy as np

from src.model import joules_to_mj
from src.scenario import Scenario

logger = logging.getLogger()


@dataclass(frozen=True)
class Delivery:
    receiver: int
    arrival_time: float


class BroadcastMedium:
    """
    Single-hop radio shared by all nodes.
    Responsibilities:
    1. Fan every broadcast out to the alive in-range sources.
    2. Drop each copy independently with the loss probability.
    3. Delay each surviving copy by a uniform latency.
    4. Keep the residual energy ledger (integer mJ, clamped at zero).
    """
    def __init__(self, scenario: Scenario):
        self.topology = scenario.topology
        self.latency = scenario.latency
        self.loss_probability = scenario.loss_probability
        self.energy_model = scenario.energy_model
        self.rng = np.random.default_rng(scenario.seed)

        self.sources: Set[int] = set(self.topology.source_ids())
        self.alive: Set[int] = set(self.topology.node_ids())
        self.residual: Dict[int, int] = {
            n.node_id: n.initial_energy for n in self.topology.nodes
        }

    def is_alive(self, node: int) -> bool:
        return node in self.alive

    def mark_dead(self, node: int):
        self.alive.discard(node)

    def charge(self, node: int, millijoules: int) -> bool:
        """Debit a node; True when this debit exhausted it."""
        if node not in self.alive or millijoules <= 0:
            return False
        remaining = max(0, self.residual[node] - millijoules)
        self.residual[node] = remaining
        return remaining == 0

    def charge_tx(self, node: int, size_bytes: int) -> bool:
        return self.charge(node, joules_to_mj(size_bytes * self.energy_model.tx_cost_per_byte))

    def charge_rx(self, node: int, size_bytes: int) -> bool:
        return self.charge(node, joules_to_mj(size_bytes * self.energy_model.rx_cost_per_byte))

    def fan_out(self, sender: int, now: float) -> List[Delivery]:
        """
        One delivery per alive in-range source, in ascending receiver id.
        Loss and latency are drawn for every candidate receiver, lost or not,
        so the random stream only depends on who was in range.
        """
        deliveries = []
        low, high = self.latency
        for receiver in self.topology.neighbors(sender):
            if receiver not in self.sources or receiver not in self.alive:
                continue
            lost = self.rng.random() < self.loss_probability
            delay = float(self.rng.uniform(low, high))
            if lost:
                logger.debug(f"📉 Copy {sender}->{receiver} lost at {now:.3f}s")
                continue
            deliveries.append(Delivery(receiver, now + delay))
        return deliveries
