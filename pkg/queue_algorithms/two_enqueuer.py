# ===============================
# TWO-ENQUEUER QUEUE
# ===============================
"""
The agenda object (sequential and two-process wait-free) and the
two-enqueuer multiple-dequeuer queue (temd).

Both real enqueuers replay one virtual single-enqueuer trajectory: every
agenda entry is enqueued by whichever enqueuer gets there first, the other
repeats the same writes with the same values, and the one shared read per
virtual enqueue (deqActive) is agreed on through a consensus cell.
"""
from typing import Any, Dict, List

from queue_algorithms.base_objects import BOTTOM, OK, ContractViolation, Memory, StepMachine
from queue_algorithms.queue_core import DequeuerHandle, EnqueuerHandle, claim_in_row, require_item


class AgendaSeq:
    """Sequential agenda: append returns 1, 2, 3, ...; entries never change."""

    def __init__(self):
        self.item: Dict[int, Any] = {}
        self.tail = 0

    def append(self, x: Any) -> int:
        self.tail += 1
        self.item[self.tail] = x
        return self.tail

    def get(self, k: int) -> Any:
        if k not in self.item:
            raise ContractViolation(f"agenda slot {k} has not been appended")
        return self.item[k]


class AgendaWaitFree:
    """
    Two-process agenda built from one consensus cell per slot.

    An appender reads agendaItem for successive slots, skipping the ones
    already published, and proposes its entry on the first unpublished slot,
    moving on until a slot decides its own entry. A lost slot always went to
    the other process's pending append, so one append makes at most two
    proposals while the other process has at most one append pending. After
    each decision it publishes the decided entry in agendaItem[slot] so that
    get is a single register read. Entries are tagged (pid, n, x) where n
    counts pid's appends, so equal items stay distinguishable.
    """

    def __init__(self, memory: Memory):
        self.slots = memory.consensus_array("agenda")
        self.entries = memory.register_array("agendaItem", BOTTOM)
        self.cursor = [1, 1]      # per-process: next slot to try
        self.appends = [0, 0]     # per-process append counter
        self.attempts: List[int] = []

    def append(self, pid: int, x: Any) -> StepMachine:
        """Place x in the first slot this process wins; returns the slot number."""
        self.appends[pid] += 1
        mine = (pid, self.appends[pid], x)
        attempts = 0
        while True:
            k = self.cursor[pid]
            self.cursor[pid] = k + 1
            published = yield self.entries[k].read()
            if published is not BOTTOM:
                continue
            attempts += 1
            decided = yield from self.slots[k].propose(mine, pid)
            yield self.entries[k].write(decided)
            if decided == mine:
                self.attempts.append(attempts)
                return k

    def get(self, pid: int, k: int) -> StepMachine:
        """The item published in slot k; the slot must already be decided."""
        entry = yield self.entries[k].read()
        if entry is BOTTOM:
            raise ContractViolation(f"agenda slot {k} read by process {pid} before it was decided")
        return entry[2]


def agenda_append(agenda, x: Any, pid: int = 0):
    """append on either agenda form; the wait-free form returns a step machine."""
    if isinstance(agenda, AgendaSeq):
        return agenda.append(x)
    return agenda.append(pid, x)


def agenda_get(agenda, k: int, pid: int = 0):
    """get on either agenda form."""
    if isinstance(agenda, AgendaSeq):
        return agenda.get(k)
    return agenda.get(pid, k)


class TemdState:
    def __init__(self, memory: Memory):
        self.agenda = AgendaWaitFree(memory)
        self.deq_active = memory.register_array("deqActive", False)
        self.deq_active_read = memory.consensus_array("deqActiveRead")
        self.item = memory.register_array("item", BOTTOM)
        self.item_index = memory.register_array("itemIndex", 0)
        self.item_taken = memory.fetch_add_array("itemTaken", 0)
        self.row = memory.register_array("row", 0)
        self.tail = memory.fetch_add_array("tail", 0)
        # per-enqueuer private
        self.enq_count = [0, 0]
        self.head = [0, 0]
        self.enq_row = [0, 0]    # copy of row[id]; enqueuer id is its only writer


def temd_enq(state: TemdState, x: Any, id: int) -> StepMachine:
    """
    Enqueue x from real enqueuer id (0 or 1).

    Args:
        state: the shared queue state
        x: the item, never ⊥
        id: which of the two enqueuers is calling

    Returns:
        OK, once every agenda entry up to x's own slot has been replayed
    """
    require_item(x)
    k = yield from state.agenda.append(id, x)
    while state.enq_count[id] < k:
        state.enq_count[id] += 1
        n = state.enq_count[id]
        entry = yield from state.agenda.get(id, n)
        yield state.item[n].write(entry)
        i, j = state.enq_row[id], state.head[id]
        yield state.item_index[i, j].write(n)
        b = yield state.deq_active[i, j].read()
        overtaken = yield from state.deq_active_read[i, j].propose(b, id)
        if overtaken:
            yield state.item_index[i + 1, 0].write(n)
            state.head[id] = 1
            state.enq_row[id] = i + 1
            yield state.row[id].write(i + 1)
        else:
            state.head[id] = j + 1
    return OK


def temd_deq(state: TemdState) -> StepMachine:
    """Claim an item in the larger of the two enqueuers' rows; returns the item or ⊥."""
    r0 = yield state.row[0].read()
    r1 = yield state.row[1].read()
    return (yield from claim_in_row(state, max(r0, r1)))


class TemdQueue:
    name = "temd"
    max_enqueuers = 2
    max_dequeuers = None

    def __init__(self, memory: Memory):
        self.state = TemdState(memory)

    def enqueuer(self, index: int = 0) -> EnqueuerHandle:
        if index not in (0, 1):
            raise ContractViolation(f"enqueuer id must be 0 or 1, got {index}")
        return EnqueuerHandle(lambda x: temd_enq(self.state, x, index))

    def dequeuer(self, index: int = 0) -> DequeuerHandle:
        return DequeuerHandle(lambda: temd_deq(self.state))
