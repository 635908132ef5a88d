# ===============================
# BASE OBJECTS
# ===============================
"""
Atomic base objects (Register, Fetch&Add, Swap, Consensus) and the growable
arrays that hold them.

Every operation of the queue algorithms is written as a generator that yields
one Step per base-object method call and receives the method's return value.
The scheduler decides when each Step runs; `drive` runs a generator straight
through. The same objects back both the simulated memory (no locking, the
scheduler serializes everything) and the native memory (one lock per object,
safe for concurrent threads).
"""
import threading
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Any, Callable, Dict, Generator, Hashable, Optional, Sequence, Tuple


class _Bottom:
    """The distinguished unset / failure marker."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "⊥"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()
OK = "Ok"

CONSENSUS_MODES = ("derived", "swap", "primitive")


class ContractViolation(Exception):
    """A caller broke the usage contract of a base object."""


@dataclass(frozen=True)
class Step:
    """One pending method call on one base object."""
    obj: "BaseObject"
    method: str
    args: Tuple[Any, ...] = ()

    def describe(self) -> str:
        rendered = ", ".join(repr(a) for a in self.args)
        return f"{self.obj.name}.{self.method}({rendered})"


StepMachine = Generator[Step, Any, Any]


class BaseObject:
    kind = "object"

    def __init__(self, name: str, initial: Any, lock=None):
        self.name = name
        self._value = initial
        self._lock = lock if lock is not None else nullcontext()

    def apply(self, method: str, args: Sequence[Any] = ()) -> Any:
        """Perform one method atomically and return its result."""
        handler = getattr(self, "_" + method, None)
        if handler is None:
            raise AttributeError(f"{self.kind} {self.name} has no method '{method}'")
        with self._lock:
            return handler(*args)

    @property
    def value(self) -> Any:
        """Current state, for inspection only (not a step)."""
        return self._value

    def __repr__(self):
        return f"<{self.kind} {self.name}={self._value!r}>"


class Register(BaseObject):
    kind = "register"

    def read(self) -> Step:
        return Step(self, "read")

    def write(self, x: Any) -> Step:
        return Step(self, "write", (x,))

    def _read(self):
        return self._value

    def _write(self, x):
        self._value = x
        return OK


class FetchAdd(BaseObject):
    kind = "fetch_add"

    def fetch_add(self, x: int) -> Step:
        return Step(self, "fetch_add", (x,))

    def _fetch_add(self, x):
        previous = self._value
        self._value = previous + x
        return previous


class SwapObject(BaseObject):
    kind = "swap"

    def swap(self, x: Any) -> Step:
        return Step(self, "swap", (x,))

    def _swap(self, x):
        previous = self._value
        self._value = x
        return previous


class ConsensusObject(BaseObject):
    kind = "consensus"

    def decide(self, x: Any) -> Step:
        return Step(self, "decide", (x,))

    def _decide(self, x):
        if x is BOTTOM:
            raise ContractViolation(f"{self.name}: ⊥ cannot be proposed")
        if self._value is BOTTOM:
            self._value = x
        return self._value


class GrowableArray:
    """
    Unbounded array of base objects, materialized on first access.
    Indexes are integers or (row, col) tuples.
    """

    def __init__(self, name: str, make_cell: Callable[[str], Any], lock=None):
        self.name = name
        self._make_cell = make_cell
        self._cells: Dict[Hashable, Any] = {}
        self._lock = lock if lock is not None else nullcontext()

    def cell_name(self, index: Hashable) -> str:
        if isinstance(index, tuple):
            return f"{self.name}[{','.join(str(i) for i in index)}]"
        return f"{self.name}[{index}]"

    def __getitem__(self, index: Hashable):
        cell = self._cells.get(index)
        if cell is None:
            with self._lock:
                cell = self._cells.get(index)
                if cell is None:
                    cell = self._make_cell(self.cell_name(index))
                    self._cells[index] = cell
        return cell

    def materialized(self) -> Dict[Hashable, Any]:
        """Cells touched so far, keyed by index."""
        return dict(self._cells)


# ---- immediate (non-scheduled) forms of the object methods ----

def execute(step: Step) -> Any:
    return step.obj.apply(step.method, step.args)


def drive(machine: StepMachine) -> Any:
    """Run a step machine to completion, executing each step immediately."""
    try:
        step = machine.send(None)
        while True:
            step = machine.send(execute(step))
    except StopIteration as done:
        return done.value


def register_read(obj: Register) -> Any:
    return execute(obj.read())


def register_write(obj: Register, x: Any) -> str:
    return execute(obj.write(x))


def fetch_add(obj: FetchAdd, x: int) -> int:
    return execute(obj.fetch_add(x))


def swap(obj: SwapObject, x: Any) -> Any:
    return execute(obj.swap(x))


def decide(obj: ConsensusObject, x: Any) -> Any:
    return execute(obj.decide(x))


# ---- two-process consensus built from consensus-number-2 objects ----

def two_process_consensus_from_fa(proposals: Tuple[Register, Register], winner: FetchAdd,
                                  x: Any, pid: int) -> StepMachine:
    yield proposals[pid].write(x)
    ticket = yield winner.fetch_add(1)
    if ticket == 0:
        return x
    other = yield proposals[1 - pid].read()
    return other


def two_process_consensus_from_swap(proposals: Tuple[Register, Register], swap_obj: SwapObject,
                                    x: Any, pid: int) -> StepMachine:
    yield proposals[pid].write(x)
    previous = yield swap_obj.swap(pid)
    if previous is BOTTOM:
        return x
    other = yield proposals[1 - pid].read()
    return other


class TwoProcessConsensus:
    """
    Consensus for processes 0 and 1, each proposing at most once.

    mode "primitive" uses one ConsensusObject (a single decide step).
    mode "derived" uses two proposal registers and a Fetch&Add; mode "swap"
    uses two proposal registers and a Swap object. In the last two, the
    arbitration object is named "<name>.winner".
    """

    def __init__(self, memory: "Memory", name: str, mode: str):
        if mode not in CONSENSUS_MODES:
            raise ValueError(f"Unknown consensus mode '{mode}'")
        self.name = name
        self.mode = mode
        self._callers = set()
        self._admit_lock = memory.new_lock()
        if mode == "primitive":
            self.cell = memory.consensus(name)
        else:
            self.proposals = (memory.register(f"{name}.proposal[0]"),
                              memory.register(f"{name}.proposal[1]"))
            if mode == "derived":
                self.winner = memory.fetch_add(f"{name}.winner")
            else:
                self.winner = memory.swap_object(f"{name}.winner")

    def _admit(self, pid: int, x: Any):
        if x is BOTTOM:
            raise ContractViolation(f"{self.name}: ⊥ cannot be proposed")
        if pid not in (0, 1):
            raise ContractViolation(f"{self.name}: process {pid} is not one of the two proposers")
        with self._admit_lock:
            if pid in self._callers:
                raise ContractViolation(f"{self.name}: process {pid} proposed twice")
            self._callers.add(pid)

    def propose(self, x: Any, pid: int) -> StepMachine:
        self._admit(pid, x)
        if self.mode == "primitive":
            decided = yield self.cell.decide(x)
            return decided
        if self.mode == "derived":
            return (yield from two_process_consensus_from_fa(self.proposals, self.winner, x, pid))
        return (yield from two_process_consensus_from_swap(self.proposals, self.winner, x, pid))


def consensus_steps(mode: str) -> int:
    """Worst-case shared steps of one propose call."""
    return 1 if mode == "primitive" else 3


# ---- memory backends ----

class Memory:
    """
    Factory for the base objects of one execution.
    The simulated backend does no locking: the scheduler runs one step at a time.
    """
    backend = "simulated"

    def __init__(self, consensus_mode: str = "derived"):
        if consensus_mode not in CONSENSUS_MODES:
            raise ValueError(f"Unknown consensus mode '{consensus_mode}'")
        self.consensus_mode = consensus_mode

    def new_lock(self):
        return nullcontext()

    def register(self, name: str, initial: Any = BOTTOM) -> Register:
        return Register(name, initial, self.new_lock())

    def fetch_add(self, name: str, initial: int = 0) -> FetchAdd:
        return FetchAdd(name, initial, self.new_lock())

    def swap_object(self, name: str, initial: Any = BOTTOM) -> SwapObject:
        return SwapObject(name, initial, self.new_lock())

    def consensus(self, name: str) -> ConsensusObject:
        return ConsensusObject(name, BOTTOM, self.new_lock())

    def consensus_cell(self, name: str, mode: Optional[str] = None) -> TwoProcessConsensus:
        return TwoProcessConsensus(self, name, mode or self.consensus_mode)

    def array(self, name: str, make_cell: Callable[[str], Any]) -> GrowableArray:
        return GrowableArray(name, make_cell, self.new_lock())

    def register_array(self, name: str, initial: Any = BOTTOM) -> GrowableArray:
        return self.array(name, lambda cell: self.register(cell, initial))

    def fetch_add_array(self, name: str, initial: int = 0) -> GrowableArray:
        return self.array(name, lambda cell: self.fetch_add(cell, initial))

    def consensus_array(self, name: str) -> GrowableArray:
        return self.array(name, self.consensus_cell)


class NativeMemory(Memory):
    """Objects safe for concurrent threads: every method runs under the object's own lock."""
    backend = "native"

    def new_lock(self):
        return threading.Lock()


def make_memory(backend: str = "simulated", consensus_mode: str = "derived") -> Memory:
    if backend == "simulated":
        return Memory(consensus_mode)
    if backend == "native":
        return NativeMemory(consensus_mode)
    raise ValueError(f"Unknown backend '{backend}'")
