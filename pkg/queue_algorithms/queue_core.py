# ===============================
# SINGLE-ENQUEUER QUEUES
# ===============================
"""
Step machines for the folklore single-enqueuer single-dequeuer queue (sesd)
and the single-enqueuer multiple-dequeuer queue (semd).

Enqueuer-local and dequeuer-local variables are plain attributes of the state
object and cost no steps; only the shared arrays and the shared row register do.
"""
from dataclasses import dataclass
from typing import Any

from queue_algorithms.base_objects import BOTTOM, OK, ContractViolation, Memory, StepMachine


@dataclass(frozen=True, order=True)
class Location:
    """A (row, column) coordinate into itemIndex, ordered lexicographically."""
    row: int
    col: int

    def __str__(self):
        return f"({self.row},{self.col})"


def require_item(x: Any):
    if x is BOTTOM:
        raise ContractViolation("⊥ cannot be enqueued")


class SesdState:
    def __init__(self, memory: Memory):
        self.item = memory.register_array("item", BOTTOM)
        self.head = 0   # enqueuer-local
        self.tail = 0   # dequeuer-local


def sesd_enq(state: SesdState, x: Any) -> StepMachine:
    """Write x to item[head]; one shared step."""
    require_item(x)
    yield state.item[state.head].write(x)
    state.head += 1
    return OK


def sesd_deq(state: SesdState) -> StepMachine:
    """Read item[tail]; returns the item, or ⊥ if the queue is empty."""
    x = yield state.item[state.tail].read()
    if x is not BOTTOM:
        state.tail += 1
    return x


class SemdState:
    def __init__(self, memory: Memory):
        self.deq_active = memory.register_array("deqActive", False)
        self.item = memory.register_array("item", BOTTOM)
        self.item_index = memory.register_array("itemIndex", 0)
        self.item_taken = memory.fetch_add_array("itemTaken", 0)
        self.row = memory.register("row", 0)
        self.tail = memory.fetch_add_array("tail", 0)
        # enqueuer-local
        self.enq_count = 0
        self.head = 0
        self.enq_row = 0    # the enqueuer's copy of row; it is the only writer


def semd_enq(state: SemdState, x: Any) -> StepMachine:
    """
    Publish x as item k at (row, head), then move to the next row if a
    dequeuer already claimed that cell. At most five shared steps.
    """
    require_item(x)
    state.enq_count += 1
    k = state.enq_count
    yield state.item[k].write(x)
    i, j = state.enq_row, state.head
    yield state.item_index[i, j].write(k)
    overtaken = yield state.deq_active[i, j].read()
    if overtaken:
        yield state.item_index[i + 1, 0].write(k)
        state.head = 1
        state.enq_row = i + 1
        yield state.row.write(i + 1)
    else:
        state.head = j + 1
    return OK


def claim_in_row(state, i: int) -> StepMachine:
    """The dequeue loop shared by semd and temd; all retries stay in row i."""
    while True:
        j = yield state.tail[i].fetch_add(1)
        yield state.deq_active[i, j].write(True)
        k = yield state.item_index[i, j].read()
        if k == 0:
            return BOTTOM
        ticket = yield state.item_taken[k].fetch_add(1)
        if ticket == 0:
            x = yield state.item[k].read()
            return x


def semd_deq(state: SemdState) -> StepMachine:
    """Read the current row and claim an item in it; returns the item or ⊥."""
    i = yield state.row.read()
    return (yield from claim_in_row(state, i))


# ---- queue front ends used by the scheduler and the native stress runner ----

class EnqueuerHandle:
    def __init__(self, enq):
        self._enq = enq

    def enq(self, x: Any) -> StepMachine:
        return self._enq(x)


class DequeuerHandle:
    def __init__(self, deq):
        self._deq = deq

    def deq(self) -> StepMachine:
        return self._deq()


class SesdQueue:
    name = "sesd"
    max_enqueuers = 1
    max_dequeuers = 1

    def __init__(self, memory: Memory):
        self.state = SesdState(memory)

    def enqueuer(self, index: int = 0) -> EnqueuerHandle:
        return EnqueuerHandle(lambda x: sesd_enq(self.state, x))

    def dequeuer(self, index: int = 0) -> DequeuerHandle:
        return DequeuerHandle(lambda: sesd_deq(self.state))


class SemdQueue:
    name = "semd"
    max_enqueuers = 1
    max_dequeuers = None

    def __init__(self, memory: Memory):
        self.state = SemdState(memory)

    def enqueuer(self, index: int = 0) -> EnqueuerHandle:
        return EnqueuerHandle(lambda x: semd_enq(self.state, x))

    def dequeuer(self, index: int = 0) -> DequeuerHandle:
        return DequeuerHandle(lambda: semd_deq(self.state))
