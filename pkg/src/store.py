"""
Reads and writes every file the harness produces or consumes.
Scenario/topology/metrics are JSON documents, the trace is newline-delimited
JSON, and batch summaries are CSV. Everything is written with sorted keys so
identical runs give byte-identical files.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

import pandas as pd
from jsonschema import Draft7Validator

from src.scenario import Scenario, ScenarioError
from src.simulator import RunMetrics
from src.topology import Topology

logger = logging.getLogger()

PathLike = Union[str, Path]

_NUMBER = {"type": "number"}
_NODE_SCHEMA = {
    "type": "object",
    "required": ["id", "x", "y", "energy"],
    "properties": {
        "id": {"type": "integer", "minimum": 0, "maximum": 65535},
        "x": _NUMBER,
        "y": _NUMBER,
        "energy": {"type": "number", "minimum": 0},
        "is_source": {"type": "boolean"},
    },
}

TOPOLOGY_SCHEMA = {
    "type": "object",
    "required": ["nodes", "transmission_range"],
    "properties": {
        "nodes": {"type": "array", "minItems": 1, "items": _NODE_SCHEMA},
        "transmission_range": {"type": "number", "exclusiveMinimum": 0},
        "area_side": {"type": "number", "exclusiveMinimum": 0},
        "event": {
            "type": "object",
            "required": ["x", "y", "radius"],
            "properties": {"x": _NUMBER, "y": _NUMBER, "radius": {"type": "number", "exclusiveMinimum": 0}},
        },
    },
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["topology"],
    "properties": {
        "topology": TOPOLOGY_SCHEMA,
        "seed": {"type": "integer", "minimum": 0},
        "latency": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
        "loss_probability": {"type": "number", "minimum": 0, "maximum": 1},
        "energy_model": {
            "type": "object",
            "properties": {
                "tx_cost_per_byte": {"type": "number", "minimum": 0},
                "rx_cost_per_byte": {"type": "number", "minimum": 0},
            },
        },
        "maintenance": {
            "type": "object",
            "properties": {
                "hello_period_T": {"type": "number", "exclusiveMinimum": 0},
                "parent_timeout_Tf": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "kill_schedule": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["time", "node"],
                "properties": {"time": {"type": "number", "minimum": 0}, "node": {"type": "integer"}},
            },
        },
        "drain_schedule": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["time", "node", "joules"],
                "properties": {
                    "time": {"type": "number", "minimum": 0},
                    "node": {"type": "integer"},
                    "joules": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}


def _dumps(document: Any) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


class ScenarioStore:
    """
    The Librarian.
    Every path handed in is resolved against base_dir when relative.
    """
    def __init__(self, base_dir: PathLike = "."):
        self.base_dir = Path(base_dir)

    def _path(self, path: PathLike) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    def _write(self, path: PathLike, text: str) -> Path:
        target = self._path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        return target

    # --- JSON IN ---

    def read_json(self, path: PathLike) -> Any:
        source = self._path(path)
        try:
            text = source.read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError(f"Cannot read {source}: {exc}") from exc
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{source}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
        if not isinstance(document, dict):
            raise ScenarioError(f"{source}: top level must be a JSON object")
        return document

    def load_scenario(self, path: PathLike) -> Scenario:
        """A scenario file, or a bare topology file run with every default."""
        document = self.read_json(path)
        if "topology" not in document and "nodes" in document:
            document = {"topology": document}
        self._validate(document, SCENARIO_SCHEMA, path)
        scenario = Scenario.from_dict(document)
        logger.debug(f"📂 Loaded scenario {path} ({len(scenario.topology.nodes)} nodes)")
        return scenario

    def load_topology(self, path: PathLike) -> Topology:
        document = self.read_json(path)
        if "topology" in document:
            document = document["topology"]
        self._validate(document, TOPOLOGY_SCHEMA, path)
        try:
            return Topology.from_dict(document)
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"{path}: {exc}") from exc

    def _validate(self, document: Dict[str, Any], schema: Dict[str, Any], path: PathLike):
        errors = sorted(Draft7Validator(schema).iter_errors(document), key=lambda e: list(e.path))
        if errors:
            first = errors[0]
            where = "/".join(str(p) for p in first.path) or "<root>"
            raise ScenarioError(f"{path}: {where}: {first.message}")

    def load_metrics(self, path: PathLike) -> RunMetrics:
        return RunMetrics.from_dict(json.loads(self._path(path).read_text(encoding="utf-8")))

    def load_trace(self, path: PathLike) -> List[Dict[str, Any]]:
        lines = self._path(path).read_text(encoding="utf-8").splitlines()
        return [json.loads(line) for line in lines if line.strip()]

    # --- JSON OUT ---

    def save_document(self, path: PathLike, document: Dict[str, Any]) -> Path:
        target = self._write(path, _dumps(document))
        logger.info(f"💾 Saved {target}")
        return target

    def save_topology(self, path: PathLike, topology: Topology) -> Path:
        return self.save_document(path, topology.to_dict())

    def save_scenario(self, path: PathLike, scenario: Scenario) -> Path:
        return self.save_document(path, scenario.to_dict())

    def save_metrics(self, path: PathLike, metrics: RunMetrics) -> Path:
        return self.save_document(path, metrics.to_dict())

    def save_trace(self, path: PathLike, records: Iterable[Dict[str, Any]]) -> Path:
        text = "".join(json.dumps(record, sort_keys=True) + "\n" for record in records)
        target = self._write(path, text)
        logger.info(f"💾 Saved trace {target}")
        return target

    # --- CSV ---

    def save_table(self, path: PathLike, table: pd.DataFrame) -> Path:
        target = self._path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(target, index=False)
        logger.info(f"💾 Saved {len(table)} rows to {target}")
        return target

    def load_table(self, path: PathLike) -> pd.DataFrame:
        return pd.read_csv(self._path(path))
