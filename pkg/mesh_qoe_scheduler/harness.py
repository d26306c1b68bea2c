"""Experiment sweeps: replicated scheduler runs, result CSVs and summaries."""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple, Union

import pandas as pd
from scipy.stats import norm

from mesh_qoe_scheduler.baselines import get_scheduler
from mesh_qoe_scheduler.config import ExperimentConfig
from mesh_qoe_scheduler.engine import MetricsRecord, evaluate
from mesh_qoe_scheduler.errors import EmptyInput, MeshSchedulerError
from mesh_qoe_scheduler.instance import build_instance
from mesh_qoe_scheduler.logging import LoggingMixin, RunLog

KEY_COLUMNS = ["sweep_value", "scheduler", "seed"]
RESULT_COLUMNS = KEY_COLUMNS + MetricsRecord.columns()
TIMING_COLUMNS = KEY_COLUMNS + ["wall_ms", "candidate_evaluations", "work", "rounds", "error"]
Z_95 = float(norm.ppf(0.975))


@dataclass(frozen=True)
class ResultRow:  # pylint: disable=too-many-instance-attributes
    """Outcome of one scheduler on one replication at one sweep value."""

    sweep_value: float
    scheduler: str
    seed: int
    metrics: MetricsRecord
    wall_ms: float = 0.0
    candidate_evaluations: int = 0
    work: int = 0
    rounds: int = 0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        """Whether the run produced no schedule."""
        return self.error is not None

    @property
    def sort_key(self) -> Tuple:
        """Output order."""
        return (self.sweep_value, self.scheduler, self.seed)

    def result_record(self) -> Dict:
        """Columns of the results CSV."""
        return {
            "sweep_value": self.sweep_value,
            "scheduler": self.scheduler,
            "seed": self.seed,
            **self.metrics.to_dict(),
        }

    def timing_record(self) -> Dict:
        """Columns of the timings CSV."""
        return {
            "sweep_value": self.sweep_value,
            "scheduler": self.scheduler,
            "seed": self.seed,
            "wall_ms": self.wall_ms,
            "candidate_evaluations": self.candidate_evaluations,
            "work": self.work,
            "rounds": self.rounds,
            "error": self.error or "",
        }


def run_cell(cfg: ExperimentConfig, value_index: int, seed: int) -> List[ResultRow]:
    """Run every configured scheduler on one replication of one sweep value.

    Failures are recorded on the returned rows instead of being raised.
    """
    value = cfg.sweep.values[value_index]
    point = cfg.at(value)
    try:
        instance = build_instance(point, seed)
    except MeshSchedulerError as ex:
        return [ResultRow(value, name, seed, MetricsRecord.missing(), error=str(ex)) for name in cfg.schedulers]

    rows = []
    for name in cfg.schedulers:
        started = time.perf_counter()
        scheduler = None
        try:
            scheduler = get_scheduler(name)(point.scheduler)
            assignment = scheduler.schedule(instance.apps, instance.network)
            _, record = evaluate(assignment, instance.network, instance.apps, point.cost)
            error = None
        except MeshSchedulerError as ex:
            record = MetricsRecord.missing()
            error = str(ex)
        rows.append(
            ResultRow(
                sweep_value=value,
                scheduler=name,
                seed=seed,
                metrics=record,
                wall_ms=(time.perf_counter() - started) * 1000.0,
                candidate_evaluations=scheduler.candidate_evaluations if scheduler else 0,
                work=scheduler.work if scheduler else 0,
                rounds=scheduler.rounds if scheduler else 0,
                error=error,
            )
        )
    return rows


def _run_cell_args(args):
    return run_cell(*args)


class ExperimentRunner(LoggingMixin):
    """Runs a sweep: every sweep value times every seed times every scheduler."""

    def __init__(self, cfg: ExperimentConfig, run_log: Optional[RunLog] = None):
        """Create a runner for `cfg`."""
        self.cfg = cfg
        self.run_log = run_log

    def cells(self) -> List[Tuple[ExperimentConfig, int, int]]:
        """Work items: (config, sweep value index, seed)."""
        return [(self.cfg, index, seed) for index in range(len(self.cfg.sweep.values)) for seed in self.cfg.seeds]

    def run(self, workers: Optional[int] = None) -> List[ResultRow]:
        """Run every cell and return the rows sorted by (sweep value, scheduler, seed)."""
        workers = workers or self.cfg.workers
        cells = self.cells()
        self.log_info(
            message=f"Sweeping {self.cfg.sweep.axis} over {len(self.cfg.sweep.values)} value(s), "
            f"{len(self.cfg.seeds)} seed(s), {len(self.cfg.schedulers)} scheduler(s)"
        )
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                batches = list(executor.map(_run_cell_args, cells))
        else:
            batches = [run_cell(*cell) for cell in cells]

        rows = sorted((row for batch in batches for row in batch), key=lambda row: row.sort_key)
        axis = self.cfg.sweep.axis
        for row in rows:
            if row.failed:
                self.log_failure(row, f"{row.scheduler} at {axis}={row.sweep_value} seed {row.seed}: {row.error}")
        return rows


def results_frame(rows: Iterable[ResultRow]) -> pd.DataFrame:
    """Results table in output order."""
    return pd.DataFrame([row.result_record() for row in rows], columns=RESULT_COLUMNS)


def timings_frame(rows: Iterable[ResultRow]) -> pd.DataFrame:
    """Timings table in output order."""
    return pd.DataFrame([row.timing_record() for row in rows], columns=TIMING_COLUMNS)


def write_results(rows: Iterable[ResultRow], path: str):
    """Write the results CSV; identical rows give a byte-identical file."""
    results_frame(rows).to_csv(path, index=False)


def write_timings(rows: Iterable[ResultRow], path: str):
    """Write the wall-clock and work-count side file."""
    timings_frame(rows).to_csv(path, index=False)


def read_results(path: str) -> pd.DataFrame:
    """Read a results CSV."""
    return pd.read_csv(path)


def run_experiment(
    cfg: ExperimentConfig,
    out: Optional[str] = None,
    timings: Optional[str] = None,
    workers: Optional[int] = None,
    run_log: Optional[RunLog] = None,
) -> List[ResultRow]:
    """Run a sweep and optionally write the results and timings CSVs."""
    rows = ExperimentRunner(cfg, run_log=run_log).run(workers)
    if out:
        write_results(rows, out)
    if timings:
        write_timings(rows, timings)
    return rows


def summarize(rows: Union[pd.DataFrame, Iterable[ResultRow]]) -> pd.DataFrame:
    """Mean and 95% normal-approximation half-width per (sweep value, scheduler).

    Rows without metrics are ignored. A group with a single row has a
    zero-width interval.

    Raises:
        EmptyInput: if there is no row with metrics.
    """
    frame = rows if isinstance(rows, pd.DataFrame) else results_frame(rows)
    metrics = MetricsRecord.columns()
    frame = frame.dropna(subset=metrics)
    if frame.empty:
        raise EmptyInput("No result rows to summarize")

    grouped = frame.groupby(["sweep_value", "scheduler"], sort=True)[metrics]
    means = grouped.mean()
    spread = grouped.std(ddof=1).fillna(0.0)
    counts = grouped.size()

    summary = pd.DataFrame(index=means.index)
    summary["n"] = counts
    for metric in metrics:
        summary[f"{metric}_mean"] = means[metric]
        summary[f"{metric}_ci95"] = Z_95 * spread[metric] / counts.map(math.sqrt)
    return summary.reset_index()
