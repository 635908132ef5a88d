# ===============================
# DETERMINISTIC SCHEDULER
# ===============================
"""
Runs queue step machines under explicit schedules.

A schedule is a sequence of process ids; each slot lets that process take one
shared-object step. An idle process with operations left invokes its next one
in the slot of its first step, and an operation responds in the slot of its
last step. Slots given to finished processes are no-ops.
"""
import random
from dataclasses import dataclass, field
from math import comb
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from queue_algorithms.base_objects import BOTTOM, Memory, consensus_steps, execute, make_memory
from queue_algorithms.queue_core import SemdQueue, SesdQueue
from queue_algorithms.two_enqueuer import TemdQueue
from harness.history import INVOKE, RESPOND, STEP, Event, History, HistoryError

ENQUEUER = "enqueuer"
DEQUEUER = "dequeuer"

ALGORITHMS = {
    "sesd": SesdQueue,
    "semd": SemdQueue,
    "temd": TemdQueue,
}


class ConfigError(Exception):
    """A run configuration does not fit the algorithm's role limits."""


class ScheduleError(Exception):
    """A schedule names a process the configuration does not have."""


class StepBoundExceeded(Exception):
    """Schedule enumeration ran past its step bound."""


@dataclass(frozen=True)
class ProcessId:
    id: int
    role: str


@dataclass(frozen=True)
class RunConfig:
    algorithm: str
    enqueue_items: Tuple[Tuple[Any, ...], ...] = ()
    dequeue_counts: Tuple[int, ...] = ()
    consensus_mode: str = "derived"
    source: str = "exhaustive"
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "enqueue_items", tuple(tuple(ops) for ops in self.enqueue_items))
        object.__setattr__(self, "dequeue_counts", tuple(self.dequeue_counts))
        queue_class = ALGORITHMS.get(self.algorithm)
        if queue_class is None:
            raise ConfigError(f"Unknown algorithm '{self.algorithm}' (choose from {', '.join(ALGORITHMS)})")
        if len(self.enqueue_items) > queue_class.max_enqueuers:
            raise ConfigError(f"{self.algorithm} allows at most {queue_class.max_enqueuers} enqueuer(s), "
                              f"got {len(self.enqueue_items)}")
        if queue_class.max_dequeuers is not None and len(self.dequeue_counts) > queue_class.max_dequeuers:
            raise ConfigError(f"{self.algorithm} allows at most {queue_class.max_dequeuers} dequeuer(s), "
                              f"got {len(self.dequeue_counts)}")
        if any(count < 0 for count in self.dequeue_counts):
            raise ConfigError("dequeue counts must be non-negative")
        if any(x is BOTTOM or x is None for ops in self.enqueue_items for x in ops):
            raise ConfigError("⊥ cannot be enqueued")

    @classmethod
    def build(cls, algorithm: str, enqueuers: int, dequeuers: int, enq_ops: int, deq_ops: int,
              consensus_mode: str = "derived", duplicate_items: bool = False, **extra) -> "RunConfig":
        """Uniform configuration with generated items: 'a', 'b', ... (all 'x' with duplicates)."""
        if min(enqueuers, dequeuers, enq_ops, deq_ops) < 0:
            raise ConfigError("process and operation counts must be non-negative")
        total = enqueuers * enq_ops
        if duplicate_items:
            names = ["x"] * total
        elif total <= 26:
            names = [chr(ord("a") + i) for i in range(total)]
        else:
            names = [f"x{i}" for i in range(total)]
        items = tuple(tuple(names[e * enq_ops:(e + 1) * enq_ops]) for e in range(enqueuers))
        return cls(algorithm, items, (deq_ops,) * dequeuers, consensus_mode, **extra)

    @property
    def enqueuers(self) -> int:
        return len(self.enqueue_items)

    @property
    def dequeuers(self) -> int:
        return len(self.dequeue_counts)

    def processes(self) -> List[ProcessId]:
        return ([ProcessId(i, ENQUEUER) for i in range(self.enqueuers)] +
                [ProcessId(self.enqueuers + i, DEQUEUER) for i in range(self.dequeuers)])

    def role_of(self, pid: int) -> str:
        return ENQUEUER if pid < self.enqueuers else DEQUEUER

    def total_operations(self) -> int:
        return sum(len(ops) for ops in self.enqueue_items) + sum(self.dequeue_counts)

    def to_json(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "enqueue_items": [list(ops) for ops in self.enqueue_items],
            "dequeue_counts": list(self.dequeue_counts),
            "consensus_mode": self.consensus_mode,
            "source": self.source,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "RunConfig":
        try:
            return cls(data["algorithm"], data.get("enqueue_items", ()), data.get("dequeue_counts", ()),
                       data.get("consensus_mode", "derived"), data.get("source", "exhaustive"),
                       data.get("seed"))
        except KeyError as e:
            raise ConfigError(f"run configuration is missing {e}") from e


@dataclass(frozen=True)
class Schedule:
    steps: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def validate(self, config: RunConfig) -> "Schedule":
        n = config.enqueuers + config.dequeuers
        for slot, pid in enumerate(self.steps):
            if not isinstance(pid, int) or not 0 <= pid < n:
                raise ScheduleError(f"slot {slot} names process {pid!r}; configuration has processes 0..{n - 1}")
        return self

    def __len__(self):
        return len(self.steps)


class _Process:
    def __init__(self, pid: int, role: str, pending_ops: List[Tuple[str, Tuple[Any, ...]]], handle):
        self.pid = pid
        self.role = role
        self.pending_ops = pending_ops
        self.handle = handle
        self.machine = None
        self.next_step = None
        self.oid: Optional[int] = None
        self.op: Optional[str] = None

    @property
    def runnable(self) -> bool:
        return self.machine is not None or bool(self.pending_ops)


class Executor:
    """One execution of a configuration, advanced one slot at a time."""

    def __init__(self, config: RunConfig, memory: Optional[Memory] = None):
        self.config = config
        self.memory = memory if memory is not None else make_memory("simulated", config.consensus_mode)
        self.queue = ALGORITHMS[config.algorithm](self.memory)
        self.events: List[Event] = []
        self.schedule: List[int] = []
        self._next_oid = 0
        self._processes: List[_Process] = []
        for e, items in enumerate(config.enqueue_items):
            ops = [("enq", (x,)) for x in items]
            self._processes.append(_Process(e, ENQUEUER, ops, self.queue.enqueuer(e)))
        for d, count in enumerate(config.dequeue_counts):
            ops = [("deq", ())] * count
            self._processes.append(_Process(config.enqueuers + d, DEQUEUER, ops, self.queue.dequeuer(d)))

    def runnable(self) -> List[int]:
        return [p.pid for p in self._processes if p.runnable]

    @property
    def finished(self) -> bool:
        return not any(p.runnable for p in self._processes)

    def _record(self, process: _Process, kind: str, **detail):
        self.events.append(Event(t=len(self.events), pid=process.pid, role=process.role, kind=kind,
                                 oid=process.oid, op=process.op, **detail))

    def _invoke(self, process: _Process):
        op, args = process.pending_ops.pop(0)
        process.oid = self._next_oid
        process.op = op
        self._next_oid += 1
        process.machine = process.handle.enq(*args) if op == "enq" else process.handle.deq()
        self._record(process, INVOKE, args=args)
        self._advance(process, None)

    def _advance(self, process: _Process, value: Any):
        try:
            process.next_step = process.machine.send(value)
        except StopIteration as done:
            self._record(process, RESPOND, ret=done.value)
            process.machine = None
            process.next_step = None
            process.oid = None
            process.op = None

    def step(self, pid: int) -> bool:
        """Give one slot to pid; False if the slot was a no-op."""
        if not 0 <= pid < len(self._processes):
            raise ScheduleError(f"unknown process {pid}")
        self.schedule.append(pid)
        process = self._processes[pid]
        if not process.runnable:
            return False
        if process.machine is None:
            self._invoke(process)
            if process.machine is None:
                return True
        step = process.next_step
        ret = execute(step)
        self._record(process, STEP, obj=step.obj.name, method=step.method, args=step.args, ret=ret)
        self._advance(process, ret)
        return True

    def replay(self, steps: Sequence[int]) -> "Executor":
        for pid in steps:
            self.step(pid)
        return self

    @property
    def history(self) -> History:
        return History(self.events)


def run(config: RunConfig, schedule: Schedule, backend: str = "simulated") -> History:
    """Execute schedule on a fresh memory; identical inputs give identical histories."""
    schedule.validate(config)
    executor = Executor(config, make_memory(backend, config.consensus_mode))
    return executor.replay(schedule.steps).history


def run_to_completion(config: RunConfig, schedule: Schedule, backend: str = "simulated") -> Tuple[Schedule, History]:
    """Run schedule, then finish any leftover operations round-robin."""
    schedule.validate(config)
    executor = Executor(config, make_memory(backend, config.consensus_mode)).replay(schedule.steps)
    while not executor.finished:
        for pid in executor.runnable():
            executor.step(pid)
    return Schedule(executor.schedule), executor.history


def explore(config: RunConfig, max_total_steps: Optional[int] = None,
            prefix: Sequence[int] = ()) -> Iterator[Tuple[Schedule, History]]:
    """
    Depth-first over every complete schedule without no-op slots, limited to
    the schedules that start with prefix. The first child of each node
    continues the live executor; siblings are replayed from their prefix.
    """
    bound = max_total_steps if max_total_steps is not None else max_total_steps_for(config)
    pending: List[Tuple[int, ...]] = [tuple(prefix)]
    while pending:
        start = pending.pop()
        executor = Executor(config)
        for pid in start:
            if not executor.step(pid):
                raise ScheduleError(f"prefix {list(start)} gives a slot to finished process {pid}")
        while True:
            choices = executor.runnable()
            if not choices:
                yield Schedule(executor.schedule), executor.history
                break
            if len(executor.schedule) >= bound:
                raise StepBoundExceeded(f"schedule prefix reached {bound} steps with processes {choices} still running")
            here = tuple(executor.schedule)
            for pid in reversed(choices[1:]):
                pending.append(here + (pid,))
            executor.step(choices[0])


def split_schedules(config: RunConfig, depth: int) -> List[Tuple[int, ...]]:
    """
    Prefixes of length depth (or whole shorter schedules) whose subtrees
    together cover every schedule explore visits, in the order it visits them.
    """
    prefixes: List[Tuple[int, ...]] = []
    pending: List[Tuple[int, ...]] = [()]
    while pending:
        start = pending.pop()
        choices = Executor(config).replay(start).runnable()
        if len(start) >= depth or not choices:
            prefixes.append(start)
            continue
        for pid in reversed(choices):
            pending.append(start + (pid,))
    return prefixes


def enumerate_schedules(config: RunConfig, max_total_steps: Optional[int] = None) -> Iterator[Schedule]:
    for schedule, _ in explore(config, max_total_steps):
        yield schedule


def random_schedule(config: RunConfig, seed: int) -> Schedule:
    return random_run(config, seed)[0]


def random_run(config: RunConfig, seed: int) -> Tuple[Schedule, History]:
    """Pick uniformly among runnable processes at each slot until everything completes."""
    rng = random.Random(seed)
    executor = Executor(config)
    while True:
        choices = executor.runnable()
        if not choices:
            return Schedule(executor.schedule), executor.history
        executor.step(rng.choice(choices))


def step_count(history: History, oid: int) -> int:
    """Shared steps taken by a completed operation."""
    op = history.operation(oid)
    if not op.complete:
        raise HistoryError(f"operation {oid} has not responded")
    return len(op.steps)


# ---- step bounds ----

def derive_step_bounds(config: RunConfig) -> Dict[str, int]:
    """
    Worst-case shared steps per operation kind.

    A deq reads the row, then runs at most two non-returning loop bodies
    (4 steps each) and one returning body (at most 5 steps).
    """
    loop_bound = 2 * 4 + 5
    if config.algorithm == "sesd":
        return {"enq": 1, "deq": 1}
    if config.algorithm == "semd":
        return {"enq": 5, "deq": 1 + loop_bound}
    c = consensus_steps(config.consensus_mode)
    appends = max(1, sum(len(ops) for ops in config.enqueue_items))
    # each agenda slot is skipped (one read) or proposed on (read, propose, publish);
    # each replayed entry costs one get plus the virtual enq
    enq = appends * (1 + c + 1) + appends * (1 + 3 + c + 2)
    return {"enq": enq, "deq": 2 + loop_bound}


def max_total_steps_for(config: RunConfig) -> int:
    bounds = derive_step_bounds(config)
    enqs = sum(len(ops) for ops in config.enqueue_items)
    return enqs * bounds["enq"] + sum(config.dequeue_counts) * bounds["deq"]


def interleavings(step_counts: Sequence[int]) -> int:
    """Multinomial count of interleavings of fixed-length step sequences."""
    total, result = 0, 1
    for n in step_counts:
        total += n
        result *= comb(total, n)
    return result
