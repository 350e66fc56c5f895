"""
Experiment orchestration: single runs written to disk, antenna
comparisons and seed sweeps.

Independent runs share no mutable state, so comparisons and sweeps may
run them on a thread pool; results are always returned in input order.
"""

import time
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from tqdm import tqdm

from app.core import engine, storage
from app.core.antenna import AntennaSystem
from app.core.errors import ScenarioError, SimulationError
from app.core.reporting import emit_csv, emit_summary, emit_trace_csv
from app.core.scenario_io import save_scenario
from app.models.records import AntennaComparison, NodeRole, StatsSeries, VariantResult
from app.models.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[str, int], None]


@dataclass
class RunOutputs:
    series: StatsSeries
    results_dir: str
    csv_paths: Dict[str, str] = field(default_factory=dict)
    summary_path: Optional[str] = None
    trace_path: Optional[str] = None
    scenario_path: Optional[str] = None
    summary: str = ""


def with_window(scenario: ScenarioConfig, window_s: float) -> ScenarioConfig:
    """The same scenario with a different throughput window."""
    if window_s <= 0:
        raise ValueError(f"window must be positive, got {window_s}")
    stats = scenario.stats.model_copy(update={"window_s": window_s})
    return scenario.model_copy(update={"stats": stats})


def default_compare_node(scenario: ScenarioConfig) -> str:
    """The node whose antenna a comparison swaps when none is named: the first receiver."""
    receivers = scenario.nodes_with_role(NodeRole.RECEIVER)
    if not receivers:
        raise ScenarioError("scenario has no receiver to compare antennas on", key="nodes")
    return receivers[0].id


def write_run(series: StatsSeries, results_dir: str, scenario: Optional[ScenarioConfig] = None) -> RunOutputs:
    """Per-receiver CSVs, the summary and (if recorded) the trace.

    With ``scenario`` given, the effective scenario is saved next to them
    with the run's seed, so loading it back reproduces the run.
    """
    outputs = RunOutputs(series=series, results_dir=results_dir)
    for rx_id in series.receivers():
        path = storage.get_csv_path(results_dir, series.scenario_name, rx_id)
        rows = emit_csv(series, path, node_id=rx_id)
        outputs.csv_paths[rx_id] = path
        logger.info(f"Wrote {rows} rows for receiver '{rx_id}' to {path}")
    if series.trace:
        outputs.trace_path = storage.get_trace_path(results_dir, series.scenario_name)
        emit_trace_csv(series.trace, outputs.trace_path)
        logger.info(f"Wrote {len(series.trace)} trace rows to {outputs.trace_path}")
    outputs.summary = emit_summary(series)
    outputs.summary_path = storage.write_text(
        storage.get_summary_path(results_dir, series.scenario_name), outputs.summary
    )
    if scenario is not None:
        effective = scenario.model_copy(update={"seed": series.seed})
        path = storage.get_scenario_path(results_dir, series.scenario_name)
        outputs.scenario_path = str(save_scenario(effective, path))
    return outputs


def run_scenario(
    scenario: ScenarioConfig,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
    trace: bool = False,
    no_jammer: bool = False,
    window_s: Optional[float] = None,
    progress_callback: Optional[ProgressCallback] = None,
) -> RunOutputs:
    """Run one scenario and write its outputs."""

    def update_progress(stage: str, percentage: int):
        if progress_callback:
            progress_callback(stage, percentage)
        logger.debug(f"Run {scenario.name}: {stage} - {percentage}%")

    started = time.time()
    try:
        update_progress("Preparing scenario", 0)
        if no_jammer:
            scenario = engine.without_jammers(scenario)
        if window_s is not None:
            scenario = with_window(scenario, window_s)

        series = engine.run(
            scenario,
            seed=seed,
            trace=trace,
            progress_callback=lambda stage, pct: update_progress(stage, int(pct * 0.9)),
        )

        update_progress("Writing results", 90)
        outputs = write_run(series, storage.get_results_dir(out_dir), scenario=scenario)
        update_progress("Finished", 100)
        logger.info(f"Run {scenario.name}: finished in {time.time() - started:.2f}s")
        return outputs

    except ScenarioError as e:
        logger.error(f"Run {scenario.name}: invalid scenario: {e}", exc_info=True)
        raise
    except SimulationError as e:
        logger.error(f"Run {scenario.name}: simulation failed: {e}", exc_info=True)
        raise
    except OSError as e:
        logger.error(f"Run {scenario.name}: could not write results: {e}", exc_info=True)
        raise


def _map_runs(tasks: Sequence[Callable[[], StatsSeries]], jobs: int, desc: str,
              progress_callback: Optional[ProgressCallback]) -> List[StatsSeries]:
    results: List[Optional[StatsSeries]] = [None] * len(tasks)
    done = 0

    def finished_one():
        nonlocal done
        done += 1
        if progress_callback:
            progress_callback(desc, int(100 * done / len(tasks)))

    with tqdm(total=len(tasks), desc=desc) as bar:
        if jobs <= 1:
            for index, task in enumerate(tasks):
                results[index] = task()
                bar.update(1)
                finished_one()
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(task) for task in tasks]
                for index, future in enumerate(futures):
                    results[index] = future.result()
                    bar.update(1)
                    finished_one()
    return results


def compare_antennas(
    scenario: ScenarioConfig,
    variants: Dict[str, AntennaSystem],
    seed: Optional[int] = None,
    node_id: Optional[str] = None,
    jobs: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> AntennaComparison:
    """
    Run ``scenario`` once per antenna variant on ``node_id`` (default: the
    first receiver), all with the same seed and trajectories.
    """
    if not variants:
        raise ValueError("at least one antenna variant is required")
    node_id = node_id or default_compare_node(scenario)
    scenario.node(node_id)
    seed = scenario.seed if seed is None else seed

    scenarios = {
        name: engine.with_antenna(scenario, node_id, antenna, name=f"{scenario.name}-{name}")
        for name, antenna in variants.items()
    }
    for name, variant in scenarios.items():
        violations = engine.validate(variant)
        if violations:
            raise ScenarioError(f"variant '{name}' is invalid: {'; '.join(violations)}", key="antennas")

    logger.info(f"Comparing {len(variants)} antenna(s) on '{node_id}' in '{scenario.name}' (seed {seed})")
    tasks = [lambda s=s: engine.run(s, seed=seed) for s in scenarios.values()]
    series = _map_runs(tasks, jobs, "Comparing antennas", progress_callback)

    comparison = AntennaComparison(
        scenario_name=scenario.name,
        node_id=node_id,
        seed=seed,
        variants=[VariantResult(name, s) for name, s in zip(scenarios, series)],
    )
    logger.info(f"Antenna ranking for '{scenario.name}': {', '.join(comparison.ranking())}")
    return comparison


def write_comparison(comparison: AntennaComparison, out_dir: Optional[str] = None) -> Dict[str, str]:
    """Per-variant CSVs plus one comparison summary; returns the paths by variant name."""
    results_dir = storage.get_results_dir(out_dir)
    paths = {}
    for variant in comparison.variants:
        path = storage.get_csv_path(results_dir, variant.series.scenario_name, comparison.node_id)
        emit_csv(variant.series, path, node_id=comparison.node_id)
        paths[variant.name] = path
    paths["summary"] = storage.write_text(
        storage.get_summary_path(results_dir, f"{comparison.scenario_name}_compare"),
        emit_summary(comparison),
    )
    return paths


def seed_sweep(
    scenario: ScenarioConfig,
    seeds: Sequence[int],
    jobs: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> Dict[int, StatsSeries]:
    """The same scenario under each seed, keyed by seed in input order."""
    tasks = [lambda s=s: engine.run(scenario, seed=s) for s in seeds]
    series = _map_runs(tasks, jobs, "Seed sweep", progress_callback)
    return dict(zip(seeds, series))


def compare_across_seeds(
    scenario: ScenarioConfig,
    variants: Dict[str, AntennaSystem],
    seeds: Sequence[int],
    node_id: Optional[str] = None,
    jobs: int = 1,
) -> List[AntennaComparison]:
    """One antenna comparison per seed, for checking that the ranking is stable."""
    return [compare_antennas(scenario, variants, seed=s, node_id=node_id, jobs=jobs) for s in seeds]
