# ===============================
# NATIVE THREAD STRESS
# ===============================
"""
Runs the queues on real threads over lock-backed base objects.

Threads work in windows separated by a barrier, so every operation of one
window precedes every operation of the next. Each window's invoke/respond
history is checked on its own, starting from every queue state the earlier
windows could have left behind.
"""
import random
import sys
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set, Tuple

from queue_algorithms.base_objects import BOTTOM, drive, make_memory
from harness.history import INVOKE, RESPOND, Event, History
from harness.lin_check import QUEUE, CheckerTimeout, final_states
from harness.sim_scheduler import ALGORITHMS, DEQUEUER, ENQUEUER, ConfigError

NATIVE_ALGORITHMS = ("semd", "temd")


@dataclass(frozen=True)
class StressConfig:
    algorithm: str = "semd"
    dequeuers: int = 4
    ops_per_thread: int = 200
    duration_secs: float = 60.0
    window_size: int = 12
    seed: int = 0
    consensus_mode: str = "derived"
    node_budget: Optional[int] = 200_000

    def __post_init__(self):
        if self.algorithm not in NATIVE_ALGORITHMS:
            raise ConfigError(f"native stress supports {', '.join(NATIVE_ALGORITHMS)}, not '{self.algorithm}'")
        if self.dequeuers < 0 or self.ops_per_thread < 1 or self.window_size < 1:
            raise ConfigError("dequeuers must be >= 0, ops per thread and window size >= 1")

    @property
    def enqueuers(self) -> int:
        return ALGORITHMS[self.algorithm].max_enqueuers


@dataclass
class StressReport:
    algorithm: str
    threads: int
    operations: int = 0
    windows: int = 0
    violations: List[Dict[str, Any]] = field(default_factory=list)
    panics: List[str] = field(default_factory=list)
    timeouts: List[int] = field(default_factory=list)
    conservation: List[str] = field(default_factory=list)
    max_states: int = 1

    @property
    def passed(self) -> bool:
        return not (self.violations or self.panics or self.timeouts or self.conservation)

    def to_json(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "threads": self.threads,
            "operations": self.operations,
            "windows": self.windows,
            "violations": self.violations,
            "panics": self.panics,
            "timeouts": self.timeouts,
            "conservation": self.conservation,
            "max_states": self.max_states,
            "passed": self.passed,
        }


class _Recorder:
    """Totally ordered invoke/respond log shared by all threads."""

    def __init__(self):
        self._lock = threading.Lock()
        self._t = 0
        self._oid = 0
        self.events: List[Event] = []

    def invoke(self, pid: int, role: str, op: str, args: Tuple[Any, ...]) -> int:
        with self._lock:
            oid = self._oid
            self._oid += 1
            self.events.append(Event(self._t, pid, role, INVOKE, oid, op, args=args))
            self._t += 1
            return oid

    def respond(self, pid: int, role: str, op: str, oid: int, ret: Any):
        with self._lock:
            self.events.append(Event(self._t, pid, role, RESPOND, oid, op, ret=ret))
            self._t += 1

    def take(self) -> List[Event]:
        with self._lock:
            events, self.events = self.events, []
            return events


class StressRun:
    def __init__(self, config: StressConfig):
        self.config = config
        self.memory = make_memory("native", config.consensus_mode)
        self.queue = ALGORITHMS[config.algorithm](self.memory)
        self.recorder = _Recorder()
        self.threads = config.enqueuers + config.dequeuers
        self.per_window = max(1, config.window_size // self.threads)
        self.windows: List[History] = []
        self.panics: List[str] = []
        self.done = 0
        self.stop = False
        self.deadline = time.monotonic() + config.duration_secs
        self.barrier = threading.Barrier(self.threads, action=self._close_window)

    def _close_window(self):
        self.windows.append(History(self.recorder.take()))
        self.done += self.per_window
        self.stop = self.done >= self.config.ops_per_thread or time.monotonic() > self.deadline

    def _worker(self, pid: int, role: str, index: int):
        rng = random.Random(self.config.seed * 1009 + pid)
        handle = self.queue.enqueuer(index) if role == ENQUEUER else self.queue.dequeuer(index)
        n = 0
        try:
            while not self.stop:
                for _ in range(min(self.per_window, self.config.ops_per_thread - self.done)):
                    if role == ENQUEUER:
                        n += 1
                        x = f"e{pid}-{n}"
                        oid = self.recorder.invoke(pid, role, "enq", (x,))
                        ret = drive(handle.enq(x))
                        self.recorder.respond(pid, role, "enq", oid, ret)
                    else:
                        oid = self.recorder.invoke(pid, role, "deq", ())
                        ret = drive(handle.deq())
                        self.recorder.respond(pid, role, "deq", oid, ret)
                    if rng.random() < 0.3:
                        time.sleep(0)
                self.barrier.wait()
        except threading.BrokenBarrierError:
            pass
        except Exception as e:
            self.panics.append(f"process {pid} ({role}): {type(e).__name__}: {e}")
            self.barrier.abort()

    def execute(self):
        roles = [ENQUEUER] * self.config.enqueuers + [DEQUEUER] * self.config.dequeuers
        workers = []
        for pid, role in enumerate(roles):
            index = pid if role == ENQUEUER else pid - self.config.enqueuers
            workers.append(threading.Thread(target=self._worker, args=(pid, role, index), daemon=True))
        interval = sys.getswitchinterval()
        sys.setswitchinterval(1e-5)
        try:
            for w in workers:
                w.start()
            for w in workers:
                w.join()
        finally:
            sys.setswitchinterval(interval)
        return self


def conservation_findings(windows: List[History]) -> List[str]:
    """Every dequeued item was enqueued, and no item came out twice."""
    enqueued: Counter = Counter()
    dequeued: Counter = Counter()
    for window in windows:
        for op in window.operations().values():
            if op.op == "enq":
                enqueued[op.arg] += 1
            elif op.complete and op.ret is not BOTTOM:
                dequeued[op.ret] += 1
    findings = []
    for x, n in sorted(dequeued.items()):
        if n > enqueued[x]:
            findings.append(f"{x!r} dequeued {n} time(s), enqueued {enqueued[x]}")
    return findings


def check_windows(windows: List[History], report: StressReport, node_budget: Optional[int] = None) -> Set[Any]:
    states: Set[Any] = {()}
    for n, window in enumerate(windows):
        try:
            reachable = final_states(window, QUEUE, states, node_budget)
        except CheckerTimeout:
            report.timeouts.append(n)
            return states
        if not reachable:
            report.violations.append({"window": n, "events": [e.to_dict() for e in window.events],
                                      "queue_states": [list(s) for s in sorted(states, key=repr)]})
            return states
        states = reachable
        report.max_states = max(report.max_states, len(states))
    return states


def stress(config: StressConfig) -> StressReport:
    """Run one native stress session and check every window."""
    run = StressRun(config).execute()
    report = StressReport(config.algorithm, run.threads, windows=len(run.windows), panics=list(run.panics))
    report.operations = sum(len(w.operations()) for w in run.windows)
    if report.panics:
        return report
    check_windows(run.windows, report, config.node_budget)
    report.conservation = conservation_findings(run.windows)
    return report
