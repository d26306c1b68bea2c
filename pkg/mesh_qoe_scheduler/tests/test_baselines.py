"""Test the comparison schedulers and the registry."""

import warnings

from mesh_qoe_scheduler.baselines import (
    BaselineKind,
    CofeScheduler,
    DaasScheduler,
    Ours1Scheduler,
    WholeScheduler,
    cofe_schedule,
    daas_schedule,
    get_scheduler,
    ours1_schedule,
    run_scheduler,
    scheduler_names,
    whole_schedule,
)
from mesh_qoe_scheduler.config import NetworkConfig, SchedulerParams
from mesh_qoe_scheduler.engine import ScheduleState, evaluate
from mesh_qoe_scheduler.errors import UnknownScheduler
from mesh_qoe_scheduler.hmtsa import HmtsaScheduler
from mesh_qoe_scheduler.network import build_random_network
from mesh_qoe_scheduler.qoe import PriorityState
from mesh_qoe_scheduler.tests import SchedulerTestCase, chain, diamond, make_network
from mesh_qoe_scheduler.tests.test_hmtsa import random_apps


class TestRegistry(SchedulerTestCase):
    """Test scheduler lookup."""

    def test_names(self):
        self.assertEqual(["cofe", "daas", "hmtsa", "ours1", "whole"], scheduler_names())

    def test_lookup(self):
        self.assertIs(HmtsaScheduler, get_scheduler("hmtsa"))
        self.assertIs(WholeScheduler, get_scheduler(BaselineKind.WHOLE.value))

    def test_unknown(self):
        with self.assertRaises(UnknownScheduler):
            get_scheduler("heft")

    def test_run_scheduler(self):
        apps = [diamond(), chain(3, app_id=1, owner=2)]
        self.assertEqual(DaasScheduler().schedule(apps, self.network), run_scheduler("daas", apps, self.network))

    def test_wrappers(self):
        apps = [diamond(), chain(3, app_id=1, owner=2)]
        params = SchedulerParams()
        self.assertEqual(CofeScheduler(params).schedule(apps, self.network), cofe_schedule(apps, self.network, params))
        self.assertEqual(DaasScheduler(params).schedule(apps, self.network), daas_schedule(apps, self.network, params))
        self.assertEqual(WholeScheduler(params).schedule(apps, self.network), whole_schedule(apps, self.network))
        self.assertEqual(Ours1Scheduler(params).schedule(apps, self.network), ours1_schedule(apps, self.network))


class TestFeasibility(SchedulerTestCase):
    """Every scheduler produces a complete, feasible assignment."""

    def test_random_instances(self):
        network = build_random_network(NetworkConfig(node_count=6, area_m=300.0, comm_range_m=250.0), seed=3)
        for seed in range(30):
            apps = random_apps(seed, 1 + seed % 4, network.node_count)
            for name in scheduler_names():
                with self.subTest(scheduler=name, seed=seed):
                    scheduler = get_scheduler(name)()
                    assignment = scheduler.schedule(apps, network)
                    self.assertFeasible(assignment, apps)
                    _, record = evaluate(assignment, network, apps, self.params)
                    self.assertGreater(record.avg_qoe_cost, 0.0)
                    self.assertLessEqual(scheduler.rounds, sum(dag.task_count for dag in apps))


class TestCofe(SchedulerTestCase):
    """Test CofeScheduler."""

    def test_one_event_per_chain_task(self):
        scheduler = CofeScheduler()
        scheduler.schedule([chain(3)], self.network)
        self.assertEqual(3, scheduler.rounds)

    def test_deadline_first(self):
        apps = [chain(2, deadline=19.0), chain(2, app_id=1, owner=2, deadline=16.0)]
        assignment = CofeScheduler().schedule(apps, self.network)
        self.assertEqual([(1, 0), (0, 0)], [(p.app_id, p.task) for p in list(assignment)[:2]])

    def test_tasks_wait_for_finished_predecessors(self):
        apps = [diamond(), chain(3, app_id=1, owner=2)]
        scheduler = CofeScheduler()
        scheduler.schedule(apps, self.network)
        state = scheduler.state
        placed_after = {}
        for position, placement in enumerate(state.sequence):
            placed_after[(placement.app_id, placement.task)] = position
        for dag in apps:
            for edge in dag.edges:
                self.assertLess(placed_after[(dag.app_id, edge.src)], placed_after[(dag.app_id, edge.dst)])


class TestDaas(SchedulerTestCase):
    """Test DaasScheduler."""

    def test_single_pass_in_priority_order(self):
        apps = [diamond(), chain(3, app_id=1, owner=2, deadline=2.0)]
        scheduler = DaasScheduler()
        assignment = scheduler.schedule(apps, self.network)
        self.assertEqual(1, scheduler.rounds)
        priorities = PriorityState.initial(apps, self.network, self.params)
        combined = [priorities[p.app_id].combined(p.task) for p in assignment]
        self.assertEqual(sorted(combined, reverse=True), combined)


class TestWhole(SchedulerTestCase):
    """Test WholeScheduler."""

    def test_one_node_per_app(self):
        apps = [chain(3), chain(3, app_id=1, owner=2)]
        scheduler = WholeScheduler()
        assignment = scheduler.schedule(apps, self.network)
        nodes = assignment.nodes()
        # node 1 has the fastest CPU
        self.assertEqual([0, 1, 1], [nodes[(0, task)] for task in range(3)])
        self.assertEqual(2, nodes[(1, 0)])
        self.assertEqual(nodes[(1, 1)], nodes[(1, 2)])
        self.assertEqual(2, scheduler.rounds)
        self.assertEqual(2 * 3, scheduler.candidate_evaluations)

    def test_backlog_counts(self):
        state = ScheduleState(self.network, [chain(3), chain(3, app_id=1, owner=2)])
        state.lanes.push(1, state.apps[0].tasks[1].resource_type, (9, 9), 10.0)
        self.assertEqual(0, WholeScheduler.shortest_duration_node(state, state.apps[0]))


class TestOurs1(SchedulerTestCase):
    """Test Ours1Scheduler."""

    def test_app_priority_uses_qoe_priority(self):
        apps = [diamond(), chain(3, app_id=1, owner=2)]
        priorities = PriorityState.initial(apps, self.network, self.params)
        got = Ours1Scheduler().app_priority(priorities, 0, [1, 2, 3])
        self.assertEqual(max(priorities[0].combined(task) for task in (1, 2, 3)), got)

    def test_is_round_based(self):
        self.assertTrue(issubclass(Ours1Scheduler, HmtsaScheduler))


class TestSingleNode(SchedulerTestCase):
    """A network without links."""

    def test_all_schedulers_agree(self):
        network = make_network([(8.0, 8.0, 8.0)], [])
        apps = [diamond()]
        records = {}
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for name in scheduler_names():
                _, records[name] = evaluate(run_scheduler(name, apps, network), network, apps, self.params)
        self.assertEqual(1, len(set(records.values())))
        self.assertEqual(4.0, records["hmtsa"].avg_completion_s)
