import threading

import pytest

from queue_algorithms.base_objects import (BOTTOM, CONSENSUS_MODES, OK, ContractViolation, Memory,
                                           NativeMemory, TwoProcessConsensus, consensus_steps, decide,
                                           drive, fetch_add, make_memory, register_read, register_write,
                                           swap)


def test_register_starts_at_bottom_and_keeps_last_write():
    memory = Memory()
    r = memory.register("r")
    assert register_read(r) is BOTTOM
    assert register_write(r, "a") == OK
    assert register_write(r, "b") == OK
    assert register_read(r) == "b"


def test_fetch_add_returns_previous_value():
    """state 5, f&a(3) returns 5 and leaves 8."""
    f = Memory().fetch_add("f", 5)
    assert fetch_add(f, 3) == 5
    assert f.value == 8


def test_swap_returns_previous_value():
    s = Memory().swap_object("s")
    assert swap(s, "a") is BOTTOM
    assert swap(s, "b") == "a"
    assert s.value == "b"


def test_consensus_object_keeps_first_proposal():
    c = Memory().consensus("c")
    assert decide(c, "a") == "a"
    assert decide(c, "b") == "a"


def test_consensus_object_rejects_bottom():
    c = Memory().consensus("c")
    with pytest.raises(ContractViolation):
        decide(c, BOTTOM)


def test_unknown_method_is_an_error():
    r = Memory().register("r")
    with pytest.raises(AttributeError):
        r.apply("fetch_add", (1,))


def test_growable_array_names_cells_and_reuses_them():
    memory = Memory()
    index = memory.register_array("itemIndex", 0)
    cell = index[1, 0]
    assert cell.name == "itemIndex[1,0]"
    assert index[1, 0] is cell
    assert register_read(cell) == 0
    assert memory.register_array("item")[3].name == "item[3]"
    assert list(index.materialized()) == [(1, 0)]


@pytest.mark.parametrize("mode", CONSENSUS_MODES)
def test_two_process_consensus_agrees_under_every_interleaving(mode, interleavings):
    def factory():
        cell = Memory().consensus_cell("c", mode)
        return [cell.propose("a", 0), cell.propose("b", 1)], cell

    runs = 0
    for (d0, d1), _ in interleavings(factory):
        runs += 1
        assert d0 == d1
        assert d0 in ("a", "b")
    assert runs > 1


@pytest.mark.parametrize("mode", CONSENSUS_MODES)
def test_solo_proposer_decides_its_own_value(mode):
    cell = Memory().consensus_cell("c", mode)
    assert drive(cell.propose("a", 1)) == "a"
    assert drive(cell.propose("b", 0)) == "a"


@pytest.mark.parametrize("mode", CONSENSUS_MODES)
def test_two_process_consensus_step_count(mode):
    cell = Memory().consensus_cell("c", mode)
    machine = cell.propose("a", 0)
    steps = 0
    try:
        step = machine.send(None)
        while True:
            steps += 1
            step = machine.send(step.obj.apply(step.method, step.args))
    except StopIteration:
        pass
    # an uncontended proposer wins without reading the other proposal
    assert steps == (1 if mode == "primitive" else 2)
    assert consensus_steps(mode) >= steps


def test_two_process_consensus_contract():
    cell = Memory().consensus_cell("c")
    with pytest.raises(ContractViolation):
        drive(cell.propose(BOTTOM, 0))
    with pytest.raises(ContractViolation):
        drive(cell.propose("a", 2))
    drive(cell.propose("a", 0))
    with pytest.raises(ContractViolation):
        drive(cell.propose("b", 0))


def test_derived_consensus_part_names():
    cell = TwoProcessConsensus(Memory(), "deqActiveRead[0,1]", "derived")
    assert [p.name for p in cell.proposals] == ["deqActiveRead[0,1].proposal[0]", "deqActiveRead[0,1].proposal[1]"]
    assert cell.winner.name == "deqActiveRead[0,1].winner"


def test_unknown_backend_and_mode():
    with pytest.raises(ValueError):
        make_memory("remote")
    with pytest.raises(ValueError):
        Memory("three-process")


def test_native_fetch_add_is_atomic_across_threads():
    f = NativeMemory().fetch_add("tail")
    results = [[] for _ in range(4)]

    def worker(n):
        for _ in range(500):
            results[n].append(fetch_add(f, 1))

    threads = [threading.Thread(target=worker, args=(n,)) for n in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(x for r in results for x in r) == list(range(2000))
    assert f.value == 2000
