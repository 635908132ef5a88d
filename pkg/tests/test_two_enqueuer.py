import pytest

from queue_algorithms.base_objects import BOTTOM, CONSENSUS_MODES, OK, ContractViolation, Memory, drive, execute
from queue_algorithms.two_enqueuer import (AgendaSeq, AgendaWaitFree, TemdQueue, agenda_append, agenda_get)
from harness import invariants, lin_check
from harness.sim_scheduler import Executor, RunConfig, Schedule, explore, random_run, run, step_count


def test_sequential_agenda():
    agenda = AgendaSeq()
    assert agenda_append(agenda, "a") == 1
    assert agenda_append(agenda, "a") == 2
    assert agenda_get(agenda, 1) == "a"
    with pytest.raises(ContractViolation):
        agenda_get(agenda, 3)


def test_wait_free_agenda_solo():
    agenda = AgendaWaitFree(Memory())
    assert drive(agenda_append(agenda, "a", pid=0)) == 1
    assert drive(agenda_append(agenda, "b", pid=0)) == 2
    assert drive(agenda_get(agenda, 2, pid=1)) == "b"
    with pytest.raises(ContractViolation):
        drive(agenda.get(0, 3))


@pytest.mark.parametrize("mode", CONSENSUS_MODES)
def test_wait_free_agenda_concurrent_appends(mode, interleavings):
    def factory():
        agenda = AgendaWaitFree(Memory(mode))
        return [agenda.append(0, "x"), agenda.append(1, "x")], agenda

    for (k0, k1), agenda in interleavings(factory):
        assert sorted([k0, k1]) == [1, 2]
        assert agenda.entries[k0].value == (0, 1, "x")
        assert agenda.entries[k1].value == (1, 1, "x")
        assert drive(agenda.get(0, k1)) == "x"
        assert len(agenda.attempts) == 2
        assert max(agenda.attempts) <= 2


def test_lagging_appender_skips_published_slots():
    agenda = AgendaWaitFree(Memory())
    for x in "abcde":
        drive(agenda.append(0, x))
    machine = agenda.append(1, "f")
    steps = []
    try:
        step = machine.send(None)
        while True:
            steps.append(step)
            step = machine.send(execute(step))
    except StopIteration as done:
        assert done.value == 6
    assert agenda.attempts == [1, 1, 1, 1, 1, 1]
    reads = [s.obj.name for s in steps if s.method == "read" and s.obj.name.startswith("agendaItem")]
    assert reads == [f"agendaItem[{k}]" for k in range(1, 7)]
    assert drive(agenda.get(0, 6)) == "f"


def test_temd_rejects_third_enqueuer():
    queue = TemdQueue(Memory())
    queue.enqueuer(1)
    with pytest.raises(ContractViolation):
        queue.enqueuer(2)
    with pytest.raises(ContractViolation):
        drive(queue.enqueuer(0).enq(BOTTOM))


def test_temd_solo_enq_matches_semd_writes():
    executor = Executor(RunConfig("temd", (("a",),), ())).replay([0] * 20)
    state = executor.queue.state
    assert executor.finished
    assert state.item[1].value == "a"
    assert state.item_index[0, 0].value == 1
    assert state.row[0].value == 0
    assert state.head[0] == 1


def test_temd_lagging_enqueuer_replays_the_same_writes():
    config = RunConfig("temd", (("a",), ("b",)), ())
    executor = Executor(config).replay([0] * 20 + [1] * 60)
    state = executor.queue.state
    history = executor.history
    assert executor.finished
    assert state.item[1].value == "a"
    assert state.item[2].value == "b"
    assert state.item_index[0, 0].value == 1
    assert state.item_index[0, 1].value == 2
    assert state.agenda.attempts == [1, 1]
    enq_b = history.operation(1)
    assert enq_b.ret == OK
    assert sum(1 for e in enq_b.steps if e.base == "item") == 2
    assert not invariants.failures(invariants.check_invariants(history, config))


def test_temd_deq_costs():
    empty = run(RunConfig("temd", (), (1,)), Schedule([0] * 5))
    assert empty.operation(0).ret is BOTTOM
    assert step_count(empty, 0) == 5

    history = run(RunConfig("temd", (("a",),), (1,)), Schedule([0] * 20 + [1] * 7))
    assert history.operation(1).ret == "a"
    assert step_count(history, 1) == 7


@pytest.mark.parametrize("mode", CONSENSUS_MODES)
def test_temd_random_histories(mode):
    config = RunConfig.build("temd", 2, 1, 1, 2, consensus_mode=mode)
    for seed in range(15):
        _, history = random_run(config, seed)
        assert history.is_complete()
        verdict = lin_check.check(history)
        assert verdict.linearizable
        assert lin_check.validate_witness(history, verdict.witness)
        assert not invariants.failures(invariants.check_invariants(history, config))
        order = lin_check.row_order(history, "temd")
        assert lin_check.validate_witness(history, order)


def test_temd_every_schedule_one_enq_one_deq():
    config = RunConfig("temd", (("a",),), (1,), consensus_mode="primitive")
    count = 0
    for _, history in explore(config):
        count += 1
        assert lin_check.check(history).linearizable
        assert not invariants.failures(invariants.check_invariants(history, config))
    assert count > 1


def test_temd_duplicate_items_stay_distinct():
    config = RunConfig.build("temd", 2, 1, 1, 2, duplicate_items=True)
    for seed in range(10):
        _, history = random_run(config, seed)
        rets = [op.ret for op in history.operations().values() if op.op == "deq"]
        assert rets.count("x") + rets.count(BOTTOM) == 2
        assert lin_check.check(history).linearizable
        assert not invariants.failures(invariants.check_invariants(history, config))
