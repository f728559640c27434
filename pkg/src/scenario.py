from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

from src import config
from src.node import MaintenanceConfig
from src.topology import Topology


class ScenarioError(ValueError):
    """A scenario document is malformed; line/column point into the file when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


@dataclass(frozen=True)
class EnergyModel:
    tx_cost_per_byte: float = config.TX_COST_PER_BYTE  # joules
    rx_cost_per_byte: float = config.RX_COST_PER_BYTE  # joules

    def __post_init__(self):
        if self.tx_cost_per_byte < 0 or self.rx_cost_per_byte < 0:
            raise ScenarioError("Per-byte energy costs cannot be negative")


@dataclass(frozen=True)
class KillEvent:
    time: float
    node: int


@dataclass(frozen=True)
class DrainEvent:
    """Sensing/aggregation load taken from a node at a given time."""
    time: float
    node: int
    joules: float


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    seed: int = config.DEFAULT_SEED
    latency: Tuple[float, float] = config.LATENCY
    loss_probability: float = config.LOSS_PROBABILITY
    energy_model: EnergyModel = field(default_factory=EnergyModel)
    maintenance: MaintenanceConfig = field(default_factory=MaintenanceConfig)
    duration: float = config.DURATION
    kill_schedule: Tuple[KillEvent, ...] = ()
    drain_schedule: Tuple[DrainEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "latency", tuple(self.latency))
        object.__setattr__(self, "kill_schedule", tuple(self.kill_schedule))
        object.__setattr__(self, "drain_schedule", tuple(self.drain_schedule))

        if not 0 <= self.seed < 2 ** 64:
            raise ScenarioError(f"Seed {self.seed} is not a 64-bit unsigned integer")
        low, high = self.latency
        if not 0 < low <= high:
            raise ScenarioError(f"Latency range {self.latency} must satisfy 0 < min <= max")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ScenarioError(f"Loss probability {self.loss_probability} is outside [0, 1]")
        if self.duration <= 0:
            raise ScenarioError(f"Duration must be positive, got {self.duration}")

        known = set(self.topology.node_ids())
        for event in self.kill_schedule + self.drain_schedule:
            if event.node not in known:
                raise ScenarioError(f"Scheduled event targets unknown node {event.node}")
            if event.time < 0:
                raise ScenarioError(f"Scheduled event at negative time {event.time}")
        for drain in self.drain_schedule:
            if drain.joules < 0:
                raise ScenarioError(f"Drain of node {drain.node} is negative")

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "topology": self.topology.to_dict(),
            "seed": self.seed,
            "latency": list(self.latency),
            "loss_probability": self.loss_probability,
            "energy_model": {
                "tx_cost_per_byte": self.energy_model.tx_cost_per_byte,
                "rx_cost_per_byte": self.energy_model.rx_cost_per_byte,
            },
            "maintenance": {
                "hello_period_T": self.maintenance.hello_period_T,
                "parent_timeout_Tf": self.maintenance.parent_timeout_Tf,
            },
            "duration": self.duration,
            "kill_schedule": [{"time": k.time, "node": k.node} for k in self.kill_schedule],
            "drain_schedule": [
                {"time": d.time, "node": d.node, "joules": d.joules} for d in self.drain_schedule
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scenario":
        """Absent fields take the harness defaults."""
        energy = data.get("energy_model", {})
        maintenance = data.get("maintenance", {})
        try:
            return cls(
                topology=Topology.from_dict(data["topology"]),
                seed=int(data.get("seed", config.DEFAULT_SEED)),
                latency=tuple(data.get("latency", config.LATENCY)),
                loss_probability=float(data.get("loss_probability", config.LOSS_PROBABILITY)),
                energy_model=EnergyModel(
                    tx_cost_per_byte=energy.get("tx_cost_per_byte", config.TX_COST_PER_BYTE),
                    rx_cost_per_byte=energy.get("rx_cost_per_byte", config.RX_COST_PER_BYTE),
                ),
                maintenance=MaintenanceConfig(
                    hello_period_T=maintenance.get("hello_period_T", config.HELLO_PERIOD_T),
                    parent_timeout_Tf=maintenance.get("parent_timeout_Tf", config.PARENT_TIMEOUT_TF),
                ),
                duration=float(data.get("duration", config.DURATION)),
                kill_schedule=tuple(
                    KillEvent(float(k["time"]), int(k["node"])) for k in data.get("kill_schedule", [])
                ),
                drain_schedule=tuple(
                    DrainEvent(float(d["time"]), int(d["node"]), float(d["joules"]))
                    for d in data.get("drain_schedule", [])
                ),
            )
        except ScenarioError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"Invalid scenario: {exc}") from exc
