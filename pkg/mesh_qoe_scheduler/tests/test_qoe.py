"""Test QoS degradation costs, priority estimators and quotas."""

import itertools
import math
import unittest

import networkx as nx
import numpy as np

from mesh_qoe_scheduler.apps import ResourceType, generate_app
from mesh_qoe_scheduler.config import AppConfig, CostParams
from mesh_qoe_scheduler.qoe import (
    PriorityState,
    accuracy_cost,
    accuracy_priority,
    bottom_level_time,
    downstream_error,
    estimated_error,
    latency_cost,
    latency_priority,
    qoe_cost,
    task_quota,
)
from mesh_qoe_scheduler.tests import SchedulerTestCase, chain, diamond, make_app, make_network

MEAN_CAPACITY = (8.0, 8.0, 8.0)


class TestCosts(unittest.TestCase):
    """Test the latency, accuracy and QoE costs."""

    def test_on_time_is_midpoint(self):
        params = CostParams()
        self.assertEqual(0.5, latency_cost(17.0, 17.0, False, params))
        self.assertEqual(0.5, latency_cost(17.0, 17.0, True, params))

    def test_hard_and_late(self):
        got = latency_cost(21.0, 20.0, True, CostParams(beta_d=1.0, penalty_d=10.0))
        self.assertAlmostEqual(10.731058578630005, got, places=12)

    def test_penalty_jump(self):
        params = CostParams(penalty_d=5.0, penalty_e=5.0)
        self.assertAlmostEqual(5.5, latency_cost(20.0 + 1e-9, 20.0, True, params), places=6)
        self.assertAlmostEqual(5.5, accuracy_cost(1e-3 + 1e-12, 1e-3, True, params), places=6)

    def test_accuracy_midpoint(self):
        self.assertEqual(0.5, accuracy_cost(1e-3, 1e-3, True, CostParams()))

    def test_accuracy_below_limit(self):
        got = accuracy_cost(0.0, 1e-2, False, CostParams(beta_e_abs=2e-3))
        self.assertAlmostEqual(0.0066928509242848554, got, places=12)

    def test_relative_accuracy_scale(self):
        # default scale is 0.2 times the limit
        self.assertAlmostEqual(
            accuracy_cost(0.0, 1e-2, False, CostParams(beta_e_abs=2e-3)),
            accuracy_cost(0.0, 1e-2, False, CostParams()),
            places=12,
        )

    def test_qoe_cost(self):
        self.assertEqual(0.5, qoe_cost((0.5, 0.5), 0.5, 0.5))
        self.assertEqual(0.3, qoe_cost((1.0, 0.0), 0.3, 99.0))
        self.assertAlmostEqual(7.51301, qoe_cost((0.7, 0.3), 10.73, 0.0067), places=12)

    def test_cost_ranges(self):
        rng = np.random.default_rng(0)
        params = CostParams()
        for _ in range(1000):
            deadline = rng.uniform(15.0, 20.0)
            completion = rng.uniform(0.0, 40.0)
            limit = float(rng.choice([1e-2, 1e-3, 1e-4]))
            error = rng.uniform(0.0, 2 * limit)
            for cost in (latency_cost(completion, deadline, False, params), accuracy_cost(error, limit, False, params)):
                self.assertTrue(0.0 < cost < 1.0)
            hard = latency_cost(completion, deadline, True, params)
            if completion > deadline:
                self.assertTrue(params.penalty_d < hard < params.penalty_d + 1.0)
            else:
                self.assertTrue(0.0 < hard <= 0.5)

    def test_monotone(self):
        params = CostParams()
        for hard in (False, True):
            times = [latency_cost(t, 20.0, hard, params) for t in np.linspace(10.0, 30.0, 201)]
            self.assertTrue(all(a < b for a, b in zip(times, times[1:])))
            errors = [accuracy_cost(r, 1e-3, hard, params) for r in np.linspace(0.0, 2e-3, 201)]
            self.assertTrue(all(a < b for a, b in zip(errors, errors[1:])))


class TestBottomLevel(unittest.TestCase):
    """Test bottom_level_time."""

    def test_sink_is_zero(self):
        self.assertEqual(0.0, bottom_level_time(chain(1), 10.0, MEAN_CAPACITY)[0])

    def test_chain(self):
        levels = bottom_level_time(chain(3, work=8.0, mb=0.2), 10.0, MEAN_CAPACITY)
        self.assertEqual(0.0, levels[2])
        self.assertAlmostEqual(1.02, levels[1], places=12)
        self.assertAlmostEqual(2.04, levels[0], places=12)

    def test_diamond_takes_longest_branch(self):
        levels = bottom_level_time(diamond(), 10.0, MEAN_CAPACITY)
        # GPU branch: 0.02 + 2 + 0.02 + 1; IO branch: 0.04 + 1 + 0.02 + 1
        self.assertAlmostEqual(3.04, levels[0], places=12)

    def test_matches_longest_path_enumeration(self):
        cfg = AppConfig(task_counts=(4, 5, 6, 7, 8))
        rate, capacity = 7.5, (6.0, 9.0, 7.0)
        for seed in range(40):
            dag = generate_app(cfg, seed, owner=0)
            graph = dag.to_digraph()
            levels = bottom_level_time(dag, rate, capacity)
            for task in dag.order:
                longest = 0.0
                if task != dag.sink:
                    for path in nx.all_simple_paths(graph, task, dag.sink):
                        hops = zip(path, path[1:])
                        length = sum(dag.edge_mb[(a, b)] / rate + dag.tasks[b].exec_time(capacity) for a, b in hops)
                        longest = max(longest, length)
                self.assertAlmostEqual(longest, levels[task], places=9)

    def test_decreasing_along_edges(self):
        for seed in range(100):
            dag = generate_app(AppConfig(), seed, owner=0)
            levels = bottom_level_time(dag, 10.0, MEAN_CAPACITY)
            errors = downstream_error(dag, 1e-5)
            for edge in dag.edges:
                if dag.tasks[edge.dst].work > 0:
                    self.assertGreater(levels[edge.src], levels[edge.dst])
                self.assertGreaterEqual(levels[edge.src], levels[edge.dst])
                self.assertGreaterEqual(errors[edge.src], errors[edge.dst])

    def test_prefix_closure(self):
        for seed in range(100):
            dag = generate_app(AppConfig(), seed, owner=0)
            levels = bottom_level_time(dag, 10.0, MEAN_CAPACITY)
            ranked = sorted(dag.order, key=lambda task: (-levels[task], dag.position[task]))
            for size in range(1, len(ranked) + 1):
                prefix = set(ranked[:size])
                for task in prefix:
                    self.assertTrue(set(dag.predecessors[task]) <= prefix)


class TestDownstreamError(unittest.TestCase):
    """Test downstream_error."""

    def test_sink_is_zero(self):
        self.assertEqual(0.0, downstream_error(chain(2), 1e-4)[1])

    def test_single_successor(self):
        self.assertAlmostEqual(1e-4, downstream_error(chain(2), 1e-4)[0], places=15)

    def test_two_successors(self):
        dag = make_app([(ResourceType.CPU, 1.0)] * 3, [(0, 1, 0.1), (0, 2, 0.1)])
        self.assertAlmostEqual(1.9999e-4, downstream_error(dag, 1e-4)[0], places=15)

    def test_bounded(self):
        for seed in range(50):
            errors = downstream_error(generate_app(AppConfig(), seed, owner=0), 1e-4)
            self.assertTrue(all(0.0 <= value < 1.0 for value in errors.values()))


class TestPriorities(unittest.TestCase):
    """Test latency and accuracy priorities."""

    def test_latency_midpoint(self):
        self.assertEqual(0.3, latency_priority(18.0, 0.0, 18.0, 0.6, False, CostParams()))

    def test_latency_hard_late(self):
        got = latency_priority(4.0, 17.0, 20.0, 0.5, True, CostParams(beta_d=1.0, penalty_d=10.0))
        self.assertAlmostEqual(5.365529289315003, got, places=12)

    def test_zero_weight(self):
        self.assertEqual(0.0, latency_priority(100.0, 50.0, 15.0, 0.0, True, CostParams()))

    def test_accuracy_below_limit(self):
        got = accuracy_priority(0.0, 0.0, 1e-3, 0.4, False, CostParams())
        self.assertLess(got, 0.2)
        self.assertAlmostEqual(0.4 / (1.0 + math.exp(5.0)), got, places=12)

    def test_estimated_error(self):
        self.assertAlmostEqual(1.9999e-4, estimated_error(1e-4, 1e-4), places=15)

    def test_accuracy_penalty(self):
        params = CostParams()
        soft = accuracy_priority(1e-3, 1e-3, 1e-3, 0.4, False, params)
        hard = accuracy_priority(1e-3, 1e-3, 1e-3, 0.4, True, params)
        self.assertAlmostEqual(0.4 * params.penalty_e, hard - soft, places=12)


class TestTaskQuota(unittest.TestCase):
    """Test task_quota."""

    def test_proportional_share(self):
        self.assertEqual(15, task_quota(1.0, 20, 3.0, 4.0))

    def test_equal_shares(self):
        self.assertEqual(8, task_quota(1.0, 16, 1.0, 2.0))

    def test_clamped_to_one(self):
        self.assertEqual(1, task_quota(0.25, 3, 1.0, 10.0))

    def test_clamped_to_remaining(self):
        self.assertEqual(5, task_quota(1.0, 5, 10.0, 1.0))

    def test_always_in_range(self):
        for o, remaining, priority, extra in itertools.product((0.25, 0.5, 1.0), (1, 2, 7, 20), (0.01, 1.0), (0, 3)):
            quota = task_quota(o, remaining, priority, priority + extra)
            self.assertTrue(1 <= quota <= remaining)


class TestPriorityState(SchedulerTestCase):
    """Test PriorityState bookkeeping."""

    def test_initial(self):
        dag = chain(3)
        state = PriorityState.initial([dag], self.network, self.params)
        app = state[0]
        self.assertEqual(0.0, app.progress_time)
        self.assertEqual(set(dag.order), set(app.latency))
        self.assertEqual(
            bottom_level_time(dag, self.network.mean_rate, self.network.mean_capacity),
            app.bottom_level,
        )
        self.assertEqual(app.latency[1] + app.accuracy[1], app.combined(1))

    def test_progress_raises_priority(self):
        dag = chain(3, deadline=5.0)
        state = PriorityState.initial([dag], self.network, self.params)
        before = state[0].latency[2]
        state.update_progress(0, {0: 1.0, 1: 4.0}, {0: 0.0, 1: 1e-4})
        state[0].refresh([2])
        self.assertEqual(4.0, state[0].progress_time)
        self.assertEqual(1e-4, state[0].progress_error)
        self.assertGreater(state[0].latency[2], before)

    def test_placement_score(self):
        dag = diamond()
        app = PriorityState.initial([dag], self.network, self.params)[0]
        qos = dag.qos
        want = latency_priority(
            app.bottom_level[1], 2.5, qos.deadline, qos.w_d, qos.h_d, self.params
        ) + accuracy_priority(1e-5, app.downstream[1], qos.error_limit, qos.w_e, qos.h_e, self.params)
        self.assertEqual(want, app.placement_score(1, 2.5, 1e-5))

    def test_network_without_links(self):
        network = make_network([(8.0, 8.0, 8.0)], [])
        app = PriorityState.initial([diamond()], network, self.params)[0]
        self.assertEqual({0: 3.0, 1: 1.0, 2: 1.0, 3: 0.0}, app.bottom_level)
        self.assertEqual({0: 0.0, 1: 0.0, 2: 0.0, 3: 0.0}, app.downstream)
