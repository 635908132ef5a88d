import pytest

from queue_algorithms import queue_core, two_enqueuer
from queue_algorithms.base_objects import BOTTOM, OK, ContractViolation, Memory, drive
from queue_algorithms.queue_core import (Location, SemdQueue, SemdState, SesdQueue, SesdState, semd_deq,
                                         semd_enq, sesd_deq, sesd_enq)
from harness import invariants, lin_check
from harness.sim_scheduler import Executor, RunConfig, Schedule, explore, run, step_count

# pid 0 is the enqueuer, pid 1 the dequeuer. The dequeuer reads row 0, takes
# column 0 and marks it active; the enqueuer then runs its whole enq(a) and
# sees the mark; the dequeuer finishes and returns a. A second deq starts in
# row 1, loses item 1 and retries once before returning ⊥.
OVERTAKE_CONFIG = RunConfig("semd", (("a",),), (2,))
OVERTAKE_SCHEDULE = Schedule([1, 1, 1] + [0] * 5 + [1] * 3 + [1] * 8)


def overtake_executor():
    return Executor(OVERTAKE_CONFIG).replay(OVERTAKE_SCHEDULE.steps)


def test_sesd_is_fifo():
    state = SesdState(Memory())
    assert drive(sesd_enq(state, "a")) == OK
    assert drive(sesd_enq(state, "b")) == OK
    assert drive(sesd_deq(state)) == "a"
    assert drive(sesd_deq(state)) == "b"
    assert drive(sesd_deq(state)) is BOTTOM
    assert drive(sesd_enq(state, "c")) == OK
    assert drive(sesd_deq(state)) == "c"


def test_sesd_operations_take_one_step():
    history = run(RunConfig("sesd", (("a",),), (1,)), Schedule([0, 1]))
    assert [step_count(history, oid) for oid in (0, 1)] == [1, 1]
    assert history.operation(1).ret == "a"


def test_semd_quiescent_enq_writes_row_zero():
    state = SemdState(Memory())
    assert drive(semd_enq(state, "a")) == OK
    assert state.item[1].value == "a"
    assert state.item_index[0, 0].value == 1
    assert state.row.value == 0
    assert state.head == 1
    assert drive(semd_enq(state, "b")) == OK
    assert state.item_index[0, 1].value == 2
    assert drive(semd_deq(state)) == "a"
    assert drive(semd_deq(state)) == "b"
    assert drive(semd_deq(state)) is BOTTOM


def test_semd_enq_after_empty_deq_moves_to_next_row():
    state = SemdState(Memory())
    assert drive(semd_deq(state)) is BOTTOM
    drive(semd_enq(state, "a"))
    assert state.item_index[0, 0].value == 1
    assert state.item_index[1, 0].value == 1
    assert state.row.value == 1
    assert drive(semd_deq(state)) == "a"


def test_semd_rejects_bottom():
    state = SemdState(Memory())
    with pytest.raises(ContractViolation):
        drive(semd_enq(state, BOTTOM))


def test_semd_step_counts():
    """Empty deq: row, tail, deqActive, itemIndex. Successful deq adds itemTaken and item."""
    empty = run(RunConfig("semd", (), (1,)), Schedule([0] * 4))
    assert empty.operation(0).ret is BOTTOM
    assert step_count(empty, 0) == 4

    history = run(RunConfig("semd", (("a",),), (1,)), Schedule([0] * 3 + [1] * 6))
    assert step_count(history, 0) == 3
    assert step_count(history, 1) == 6
    assert history.operation(1).ret == "a"


def test_overtaken_enq_also_publishes_in_next_row():
    executor = overtake_executor()
    state = executor.queue.state
    history = executor.history
    assert executor.finished
    assert [op.ret for op in history.operations().values()] == ["a", OK, BOTTOM]
    assert state.item_index[0, 0].value == 1
    assert state.item_index[1, 0].value == 1
    assert state.row.value == 1
    assert step_count(history, 1) == 5
    assert step_count(history, 2) == 8
    assert invariants.loop_iterations(history)[2] == 2


def test_overtake_trace_locations_and_order():
    history = overtake_executor().history
    meta = lin_check.instrument(history, "semd")
    assert lin_check.match_ops(history, meta=meta) == {(1, 0)}
    assert meta.ops[1].loc == meta.ops[0].loc == Location(0, 0)
    assert meta.ops[2].loc == Location(1, 1)
    assert meta.ops[1].lstart == 3
    assert meta.ops[0].lalloc == 1
    assert meta.orderpt(0) == (3, 1)
    assert meta.orderpt(2) == (16, 0)
    order = lin_check.row_order(history, meta=meta)
    assert order == [1, 0, 2]
    assert lin_check.validate_witness(history, order)


def test_handles_follow_role_limits():
    memory = Memory()
    assert SesdQueue(memory).max_enqueuers == 1
    assert SemdQueue(memory).max_dequeuers is None
    assert Location(0, 5) < Location(1, 0)
    assert str(Location(1, 0)) == "(1,0)"


def test_semd_every_schedule_one_enq_one_deq():
    config = RunConfig("semd", (("a",),), (1,))
    seen = set()
    for schedule, history in explore(config):
        assert lin_check.check(history).linearizable
        assert not invariants.failures(invariants.check_invariants(history, config))
        assert lin_check.validate_witness(history, lin_check.row_order(history))
        deq = next(op for op in history.operations().values() if op.op == "deq")
        seen.add(deq.ret)
    assert seen == {"a", BOTTOM}


def test_semd_every_schedule_two_enqs_one_deq():
    config = RunConfig("semd", (("a", "b"),), (1,))
    for _, history in explore(config):
        assert lin_check.check(history).linearizable
        assert not invariants.failures(invariants.check_invariants(history, config))
        assert lin_check.validate_witness(history, lin_check.row_order(history))


def test_public_step_machines_are_documented():
    machines = [queue_core.sesd_enq, queue_core.sesd_deq, queue_core.semd_enq, queue_core.semd_deq,
                queue_core.claim_in_row, two_enqueuer.temd_enq, two_enqueuer.temd_deq,
                two_enqueuer.AgendaWaitFree.append, two_enqueuer.AgendaWaitFree.get]
    assert [m.__name__ for m in machines if not (m.__doc__ or "").strip()] == []
