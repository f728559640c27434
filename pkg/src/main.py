"""
Command-line entry point: generate | run | oracle | compare | batch.
Exit codes: 0 ok/converged, 1 usage or parse error, 2 topology generation
failed, 3 run did not converge.
"""
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

import click
import pandas as pd
from joblib import Parallel, delayed

from src import config
from src.model import mj_to_joules
from src.scenario import Scenario, ScenarioError
from src.simulator import SimulationEngine
from src.store import ScenarioStore
from src.topology import TopologyGenerationError, generate_topology
from strategies import COMPARISON_STRATEGIES, OracleStrategy
from strategies.base import UnreachableSourceError

logger = logging.getLogger()

_LEVELS = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}


def configure_logging(level_name: str = config.LOG_LEVEL):
    level = _LEVELS.get(level_name, logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s - %(message)s", force=True)


def compare_table(scenario: Scenario) -> pd.DataFrame:
    """Protocol row first, then every centralized method that applies to this graph."""
    # 1. PROTOCOL
    engine = SimulationEngine(scenario)
    metrics = engine.run()
    rows: List[Dict[str, Any]] = [{
        "method": "protocol",
        "root": metrics.final_root,
        "tree_energy": mj_to_joules(metrics.final_tree_energy),
        "depth": metrics.final_depth,
        "messages": metrics.control_messages_sent + metrics.hello_messages_sent,
        "converged": metrics.converged,
    }]

    # 2. ORACLE & BASELINES
    graph = scenario.topology.source_graph()
    for strategy in COMPARISON_STRATEGIES:
        if strategy.name == "brute_force" and len(graph.energies) > config.BRUTE_FORCE_MAX_SOURCES:
            continue
        result = strategy.build(graph)
        rows.append({
            "method": result.method,
            "root": result.root,
            "tree_energy": mj_to_joules(result.tree_energy),
            "depth": result.depth,
            "messages": None,
            "converged": None,
        })

    oracle = next(row for row in rows if row["method"] == "oracle")
    for row in rows:
        row["matches_oracle"] = (row["root"] == oracle["root"]
                                 and row["tree_energy"] == oracle["tree_energy"])
    if not rows[0]["matches_oracle"]:
        logger.warning(
            f"🚨 PROTOCOL/ORACLE MISMATCH: protocol root {metrics.final_root} "
            f"({rows[0]['tree_energy']} J) vs oracle root {oracle['root']} ({oracle['tree_energy']} J)")
    return pd.DataFrame(rows)


def batch_row(scenario_template: Dict[str, Any], generation: Dict[str, Any], seed: int) -> Dict[str, Any]:
    """One seeded topology + run + oracle. Module level so joblib can pickle it."""
    row: Dict[str, Any] = {"seed": seed}
    try:
        topology = generate_topology(seed=seed, **generation)
    except TopologyGenerationError:
        row.update({"generated": False, "converged": False})
        return row

    scenario = Scenario.from_dict(dict(scenario_template, topology=topology.to_dict())).with_seed(seed)
    metrics = SimulationEngine(scenario).run()
    oracle = OracleStrategy().build(topology.source_graph())
    row.update({
        "generated": True,
        "sources": len(topology.source_ids()),
        "converged": metrics.converged,
        "convergence_time": metrics.convergence_time,
        "control_messages": metrics.control_messages_sent,
        "hello_messages": metrics.hello_messages_sent,
        "restarts": metrics.restarts_triggered,
        "root": metrics.final_root,
        "tree_energy": mj_to_joules(metrics.final_tree_energy),
        "depth": metrics.final_depth,
        "oracle_root": oracle.root,
        "oracle_tree_energy": mj_to_joules(oracle.tree_energy),
        "oracle_depth": oracle.depth,
        "matches_oracle": metrics.final_root == oracle.root and metrics.final_tree_energy == oracle.tree_energy,
    })
    return row


@click.group()
def cli():
    """DLMT protocol simulator."""


@cli.command()
@click.option("--nodes", type=click.IntRange(min=1), required=True)
@click.option("--area", type=click.FloatRange(min=0, min_open=True), default=config.AREA_SIDE, show_default=True)
@click.option("--range", "transmission_range", type=click.FloatRange(min=0, min_open=True),
              default=config.TRANSMISSION_RANGE, show_default=True)
@click.option("--energy-min", type=click.FloatRange(min=0, min_open=True), default=config.ENERGY_RANGE[0])
@click.option("--energy-max", type=click.FloatRange(min=0, min_open=True), default=config.ENERGY_RANGE[1])
@click.option("--seed", type=click.IntRange(min=0), default=config.DEFAULT_SEED)
@click.option("--event-radius", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Only nodes this close to a random event point are sources.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def generate(nodes, area, transmission_range, energy_min, energy_max, seed, event_radius, out):
    """Write a random topology JSON."""
    if energy_min > energy_max:
        raise click.BadParameter("--energy-min exceeds --energy-max")
    store = ScenarioStore()
    try:
        topology = generate_topology(nodes, area, transmission_range, (energy_min, energy_max),
                                     seed, event_radius)
    except TopologyGenerationError as exc:
        logger.error(f"❌ {exc}")
        if exc.last_attempt is not None:
            store.save_topology(out, exc.last_attempt)
        return config.EXIT_GENERATION_FAILED
    store.save_topology(out, topology)
    return config.EXIT_OK


@cli.command()
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), required=True)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
@click.option("--metrics", "metrics_path", type=click.Path(dir_okay=False), required=True)
def run(scenario_path, trace_path, metrics_path):
    """Simulate one scenario and write its metrics (and trace)."""
    store = ScenarioStore()
    scenario = store.load_scenario(scenario_path)
    engine = SimulationEngine(scenario)
    metrics = engine.run()
    store.save_metrics(metrics_path, metrics)
    if trace_path:
        store.save_trace(trace_path, engine.trace)
    return config.EXIT_OK if metrics.converged else config.EXIT_NOT_CONVERGED


@cli.command()
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), required=True,
              help="Scenario or topology file; only the sources are used.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def oracle(scenario_path, out):
    """Print the centralized optimum for the sources of a topology."""
    store = ScenarioStore()
    topology = store.load_topology(scenario_path)
    result = OracleStrategy().build(topology.source_graph())
    if out:
        store.save_document(out, result.to_dict())
    else:
        click.echo(json.dumps(result.to_dict(), sort_keys=True, indent=2))
    return config.EXIT_OK


@cli.command()
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def compare(scenario_path, out):
    """Protocol vs oracle, brute force and the baselines."""
    store = ScenarioStore()
    table = compare_table(store.load_scenario(scenario_path))
    if out:
        store.save_table(out, table)
    else:
        click.echo(table.to_string(index=False))
    return config.EXIT_OK


@cli.command()
@click.option("--nodes", type=click.IntRange(min=1), required=True)
@click.option("--seeds", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--seed-start", type=click.IntRange(min=0), default=0)
@click.option("--area", type=click.FloatRange(min=0, min_open=True), default=config.AREA_SIDE)
@click.option("--range", "transmission_range", type=click.FloatRange(min=0, min_open=True),
              default=config.TRANSMISSION_RANGE)
@click.option("--energy-min", type=click.FloatRange(min=0, min_open=True), default=config.ENERGY_RANGE[0])
@click.option("--energy-max", type=click.FloatRange(min=0, min_open=True), default=config.ENERGY_RANGE[1])
@click.option("--event-radius", type=click.FloatRange(min=0, min_open=True), default=None)
@click.option("--loss", type=click.FloatRange(0, 1), default=config.LOSS_PROBABILITY)
@click.option("--duration", type=click.FloatRange(min=0, min_open=True), default=config.DURATION)
@click.option("--jobs", type=int, default=1, show_default=True, help="joblib n_jobs.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def batch(nodes, seeds, seed_start, area, transmission_range, energy_min, energy_max,
          event_radius, loss, duration, jobs, out):
    """Sweep seeds; one CSV row per run."""
    if energy_min > energy_max:
        raise click.BadParameter("--energy-min exceeds --energy-max")
    generation = {
        "node_count": nodes,
        "area_side": area,
        "transmission_range": transmission_range,
        "energy_range": (energy_min, energy_max),
        "event_radius": event_radius,
    }
    template = {"loss_probability": loss, "duration": duration}
    seed_list = range(seed_start, seed_start + seeds)

    logger.info(f"🚀 Batch of {seeds} runs on {nodes} nodes (n_jobs={jobs})")
    rows = Parallel(n_jobs=jobs)(delayed(batch_row)(template, generation, seed) for seed in seed_list)
    table = pd.DataFrame(rows)
    ScenarioStore().save_table(out, table)

    converged = int(table["converged"].sum())
    logger.info(f"📊 {converged}/{len(table)} runs converged")
    return config.EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    try:
        code = cli.main(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return config.EXIT_USAGE
    except click.Abort:
        return config.EXIT_USAGE
    except (ScenarioError, UnreachableSourceError, ValueError) as exc:
        logger.error(f"❌ {exc}")
        click.echo(f"Error: {exc}", err=True)
        return config.EXIT_USAGE
    return code if isinstance(code, int) else config.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
