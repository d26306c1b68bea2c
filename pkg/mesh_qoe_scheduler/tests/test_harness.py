"""Test experiment sweeps and summaries."""

import math
import os
import tempfile
import unittest

import pandas as pd

from mesh_qoe_scheduler.config import SweepSpec
from mesh_qoe_scheduler.engine import MetricsRecord
from mesh_qoe_scheduler.errors import EmptyInput
from mesh_qoe_scheduler.harness import (
    RESULT_COLUMNS,
    TIMING_COLUMNS,
    ExperimentRunner,
    ResultRow,
    read_results,
    results_frame,
    run_cell,
    run_experiment,
    summarize,
    timings_frame,
)
from mesh_qoe_scheduler.logging import LOG_FAILURE, RunLog
from mesh_qoe_scheduler.tests import tiny_config


class TestRunCell(unittest.TestCase):
    """Test run_cell."""

    def test_one_row_per_scheduler(self):
        cfg = tiny_config()
        rows = run_cell(cfg, 0, 0)
        self.assertEqual(list(cfg.schedulers), [row.scheduler for row in rows])
        for row in rows:
            self.assertFalse(row.failed)
            self.assertEqual(2, row.sweep_value)
            self.assertEqual(0, row.seed)
            self.assertTrue(all(math.isfinite(value) for value in row.metrics.to_dict().values()))
            self.assertGreater(row.candidate_evaluations, 0)
            self.assertGreaterEqual(row.rounds, 1)

    def test_reproducible(self):
        cfg = tiny_config()
        first = [row.result_record() for row in run_cell(cfg, 1, 1)]
        second = [row.result_record() for row in run_cell(cfg, 1, 1)]
        self.assertEqual(first, second)

    def test_instance_failure_is_recorded(self):
        cfg = tiny_config(sweep=SweepSpec(axis="app_count", values=(7,)))
        rows = run_cell(cfg, 0, 0)
        self.assertEqual(len(cfg.schedulers), len(rows))
        for row in rows:
            self.assertTrue(row.failed)
            self.assertIn("App Nodes", row.error)
            self.assertTrue(math.isnan(row.metrics.avg_qoe_cost))

    def test_queue_ratio_sweep_keeps_instances(self):
        cfg = tiny_config(schedulers=("whole", "hmtsa"), sweep=SweepSpec(axis="k", values=(0.25, 1.0)))
        low = {row.scheduler: row.metrics for row in run_cell(cfg, 0, 0)}
        high = {row.scheduler: row.metrics for row in run_cell(cfg, 1, 0)}
        self.assertEqual(low["whole"], high["whole"])


class TestExperimentRunner(unittest.TestCase):
    """Test ExperimentRunner and the CSV writers."""

    def test_rows_sorted(self):
        cfg = tiny_config()
        rows = ExperimentRunner(cfg).run()
        self.assertEqual(2 * 2 * 5, len(rows))
        keys = [row.sort_key for row in rows]
        self.assertEqual(sorted(keys), keys)
        self.assertEqual(["cofe", "cofe", "daas"], [row.scheduler for row in rows[:3]])

    def test_parallel_matches_sequential(self):
        cfg = tiny_config()
        sequential = results_frame(ExperimentRunner(cfg).run(workers=1))
        parallel = results_frame(ExperimentRunner(cfg).run(workers=2))
        pd.testing.assert_frame_equal(sequential, parallel)

    def test_failures_are_logged(self):
        run_log = RunLog()
        runner = ExperimentRunner(tiny_config(sweep=SweepSpec(axis="app_count", values=(3, 7))), run_log=run_log)
        rows = runner.run()
        self.assertTrue(runner.failed)
        failures = [entry for entry in run_log.entries if entry["level"] == LOG_FAILURE]
        self.assertEqual(sum(1 for row in rows if row.failed), len(failures))
        self.assertEqual(2 * 5, len(failures))

    def test_byte_identical_rerun(self):
        cfg = tiny_config()
        with tempfile.TemporaryDirectory() as directory:
            first = os.path.join(directory, "first.csv")
            second = os.path.join(directory, "second.csv")
            run_experiment(cfg, out=first)
            run_experiment(cfg, out=second, workers=2)
            with open(first, "rb") as file:
                want = file.read()
            with open(second, "rb") as file:
                got = file.read()
        self.assertEqual(want, got)

    def test_csv_columns(self):
        cfg = tiny_config(seeds=(0,))
        with tempfile.TemporaryDirectory() as directory:
            out = os.path.join(directory, "results.csv")
            timings = os.path.join(directory, "timings.csv")
            run_experiment(cfg, out=out, timings=timings)
            self.assertEqual(RESULT_COLUMNS, list(read_results(out).columns))
            self.assertEqual(TIMING_COLUMNS, list(pd.read_csv(timings).columns))

    def test_timings_frame(self):
        rows = run_cell(tiny_config(), 0, 0)
        frame = timings_frame(rows)
        self.assertEqual(len(rows), len(frame))
        self.assertTrue((frame["wall_ms"] >= 0).all())
        self.assertEqual([""] * len(rows), list(frame["error"]))


def _row(value, scheduler, seed, qoe):
    metrics = MetricsRecord(10.0, 1.0, 1.0, qoe / 2, qoe / 2, qoe)
    return ResultRow(sweep_value=value, scheduler=scheduler, seed=seed, metrics=metrics)


class TestSummarize(unittest.TestCase):
    """Test summarize."""

    def test_mean_and_interval(self):
        rows = [_row(2, "hmtsa", 0, 1.0), _row(2, "hmtsa", 1, 3.0), _row(2, "whole", 0, 5.0)]
        summary = summarize(rows)
        self.assertEqual([2, 2], list(summary["sweep_value"]))
        self.assertEqual(["hmtsa", "whole"], list(summary["scheduler"]))
        self.assertEqual([2, 1], list(summary["n"]))
        self.assertEqual([2.0, 5.0], list(summary["avg_qoe_cost_mean"]))
        # sample std of (1, 3) is sqrt(2)
        # two-sided 95% normal quantile
        self.assertAlmostEqual(1.959964, summary["avg_qoe_cost_ci95"][0], places=6)
        self.assertEqual(0.0, summary["avg_qoe_cost_ci95"][1])

    def test_columns(self):
        summary = summarize([_row(1, "cofe", 0, 1.0)])
        want = ["sweep_value", "scheduler", "n"]
        for metric in MetricsRecord.columns():
            want += [f"{metric}_mean", f"{metric}_ci95"]
        self.assertEqual(want, list(summary.columns))

    def test_failed_rows_ignored(self):
        rows = [_row(1, "cofe", 0, 1.0), ResultRow(1, "cofe", 1, MetricsRecord.missing(), error="boom")]
        self.assertEqual([1], list(summarize(rows)["n"]))

    def test_from_frame(self):
        rows = [_row(1, "cofe", 0, 1.0), _row(1, "cofe", 1, 2.0)]
        pd.testing.assert_frame_equal(summarize(rows), summarize(results_frame(rows)))

    def test_empty(self):
        with self.assertRaises(EmptyInput):
            summarize([])
        with self.assertRaises(EmptyInput):
            summarize([ResultRow(1, "cofe", 0, MetricsRecord.missing(), error="boom")])
