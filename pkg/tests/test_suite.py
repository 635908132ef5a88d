import random

import pytest

import main
from harness import lin_check
from harness.sim_scheduler import RunConfig, explore

TWO_DEQUEUER_CONFIGS = [
    RunConfig.build("semd", 1, 2, 2, 1),
    RunConfig.build("semd", 1, 2, 1, 2),
]


@pytest.mark.parametrize("run_config", TWO_DEQUEUER_CONFIGS, ids=["two-enqs", "two-deqs-each"])
def test_two_dequeuer_configurations_bounded(run_config):
    report = main.run_verification_suite(run_config, "exhaustive", max_schedules=1500)
    assert report.passed
    assert report.schedules == report.histories_checked == 1500
    assert report.order_checks == 1500
    assert 0 < report.mutants_rejected <= report.mutants_checked == report.oracle_checks


def test_many_schedules_share_one_operation_projection():
    run_config = RunConfig("semd", (("a", "b"),), (1,))
    histories = [history for _, history in explore(run_config)]
    keys = {main.operation_key(history) for history in histories}
    assert 1 < len(keys) < len(histories)


def test_cached_verdicts_match_fresh_ones():
    run_config = RunConfig("semd", (("a",),), (2,))
    cache = {}
    report = main.SuiteReport(run_config.to_json(), "exhaustive", {})
    for schedule, history in explore(run_config):
        assert main.check_history(run_config, schedule, history, report, random.Random(0), cache=cache)
        cached = cache[main.operation_key(history)].verdict
        assert cached.linearizable == lin_check.check(history).linearizable
    assert len(cache) < report.schedules


def test_worker_processes_give_the_same_totals():
    run_config = RunConfig("semd", (("a", "b"),), (1,))
    alone = main.run_verification_suite(run_config, "exhaustive")
    split = main.run_verification_suite(run_config, "exhaustive", workers=2)
    assert split.passed and alone.passed
    assert split.schedules == alone.schedules
    assert split.order_checks == alone.order_checks
    assert split.statistics == alone.statistics
    assert main.split_prefixes(run_config, 2) and all(len(p) <= main.MAX_SPLIT_DEPTH
                                                     for p in main.split_prefixes(run_config, 2))
