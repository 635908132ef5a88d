import pytest

from queue_algorithms.base_objects import BOTTOM, OK
from harness.history import INVOKE, RESPOND, Event, History
from harness.native_stress import StressConfig, StressReport, check_windows, conservation_findings, stress
from harness.sim_scheduler import ConfigError


def window(ops, start_oid=0):
    """ops: (pid, op, arg, ret), run one after another."""
    events = []
    for n, (pid, op, arg, ret) in enumerate(ops):
        role = "enqueuer" if op == "enq" else "dequeuer"
        args = (arg,) if op == "enq" else ()
        events.append(Event(len(events), pid, role, INVOKE, start_oid + n, op, args=args))
        events.append(Event(len(events), pid, role, RESPOND, start_oid + n, op, ret=ret))
    return History(events)


def test_semd_threads():
    report = stress(StressConfig("semd", dequeuers=3, ops_per_thread=40, window_size=8, duration_secs=30))
    assert report.panics == []
    assert report.passed, report.to_json()
    assert report.threads == 4
    assert report.operations == 160
    assert report.windows == 20


def test_temd_threads():
    report = stress(StressConfig("temd", dequeuers=2, ops_per_thread=30, window_size=8, duration_secs=30, seed=3))
    assert report.passed, report.to_json()
    assert report.operations == 120


def test_only_multi_dequeuer_queues_run_natively():
    with pytest.raises(ConfigError):
        StressConfig("sesd")
    with pytest.raises(ConfigError):
        StressConfig("semd", window_size=0)


def test_windows_carry_queue_states():
    first = window([(0, "enq", "a", OK)])
    report = StressReport("semd", 2)
    assert check_windows([first, window([(1, "deq", None, "a")], 1)], report) == {()}
    assert report.passed

    report = StressReport("semd", 2)
    check_windows([first, window([(1, "deq", None, BOTTOM)], 1)], report)
    assert [v["window"] for v in report.violations] == [1]
    assert report.violations[0]["queue_states"] == [["a"]]


def test_conservation():
    windows = [window([(0, "enq", "a", OK), (1, "deq", None, "a"), (2, "deq", None, "a")])]
    assert conservation_findings(windows) == ["'a' dequeued 2 time(s), enqueued 1"]
    assert conservation_findings([window([(1, "deq", None, BOTTOM)])]) == []
