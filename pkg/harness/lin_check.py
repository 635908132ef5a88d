# ===============================
# LINEARIZABILITY CHECKING
# ===============================
"""
Linearizability of queue histories against the sequential Queue (and Stack)
types, plus the loc / orderpt / match instrumentation that builds the
explicit linearization order of the single-enqueuer queue.
"""
import itertools
import random
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from queue_algorithms.base_objects import BOTTOM, OK
from queue_algorithms.queue_core import Location
from harness.history import RESPOND, STEP, Event, History, HistoryError


class IncompleteHistoryError(HistoryError):
    """The history has an operation that never responded."""


class CheckerTimeout(Exception):
    """The search visited more nodes than its budget allows."""


class MetadataError(Exception):
    """Step events do not carry the instrumentation the ordering needs."""


class OrderError(Exception):
    """Two operations received the same order key."""


# ---- sequential types ----

class SequentialQueueSpec:
    """FIFO queue over tuples; deq on an empty queue returns ⊥."""
    name = "queue"
    inserts = ("enq", "push")
    removes = ("deq", "pop")

    def apply(self, state: Tuple[Any, ...], op: str, arg: Any) -> Tuple[Any, Tuple[Any, ...]]:
        if op in self.inserts:
            return OK, state + (arg,)
        if op in self.removes:
            if not state:
                return BOTTOM, state
            return state[0], state[1:]
        raise ValueError(f"{self.name} has no operation '{op}'")


class SequentialStackSpec(SequentialQueueSpec):
    """LIFO stack; pop on an empty stack returns ⊥."""
    name = "stack"

    def apply(self, state, op, arg):
        if op in self.removes and state:
            return state[-1], state[:-1]
        return super().apply(state, op, arg)


QUEUE = SequentialQueueSpec()
STACK = SequentialStackSpec()


@dataclass(frozen=True)
class OperationInterval:
    oid: int
    op: str
    arg: Any
    invoke_t: int
    respond_t: int
    ret: Any
    pid: int = -1

    def precedes(self, other: "OperationInterval") -> bool:
        return self.respond_t < other.invoke_t


@dataclass
class Verdict:
    linearizable: bool
    witness: Tuple[int, ...] = ()
    violation: Tuple[Event, ...] = ()
    nodes: int = 0

    def to_json(self) -> Dict[str, Any]:
        return {
            "linearizable": self.linearizable,
            "witness": list(self.witness),
            "violation": [e.to_dict() for e in self.violation],
        }


HistoryLike = Union[History, Sequence[OperationInterval]]


def intervals_of(history: HistoryLike) -> List[OperationInterval]:
    if not isinstance(history, History):
        return sorted(history, key=lambda o: o.invoke_t)
    intervals = []
    for op in history.operations().values():
        if not op.complete:
            raise IncompleteHistoryError(f"operation {op.oid} ({op.op} by process {op.pid}) has not responded; "
                                         "extend the run until every operation finishes")
        intervals.append(OperationInterval(op.oid, op.op, op.arg, op.invoke_t, op.respond_t, op.ret, op.pid))
    return sorted(intervals, key=lambda o: o.invoke_t)


class _Search:
    """Depth-first search over linearization prefixes, memoized on (prefix set, state)."""

    def __init__(self, ops: Sequence[OperationInterval], spec, node_budget: Optional[int]):
        self.ops = list(ops)
        self.spec = spec
        self.node_budget = node_budget
        self.nodes = 0
        self.full = (1 << len(self.ops)) - 1

    def _tick(self):
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise CheckerTimeout(f"linearizability search exceeded {self.node_budget} nodes "
                                 f"on {len(self.ops)} operations")

    def candidates(self, mask: int) -> List[int]:
        remaining = [i for i in range(len(self.ops)) if not mask >> i & 1]
        earliest = min(self.ops[i].respond_t for i in remaining)
        return [i for i in remaining if self.ops[i].invoke_t < earliest or self.ops[i].respond_t == earliest]

    def successors(self, mask: int, state):
        for i in self.candidates(mask):
            op = self.ops[i]
            ret, nxt = self.spec.apply(state, op.op, op.arg)
            if ret == op.ret:
                yield i, nxt

    def find(self, initial) -> Optional[List[int]]:
        failed: Set[Tuple[int, Any]] = set()
        path: List[int] = []

        def visit(mask, state) -> bool:
            if mask == self.full:
                return True
            if (mask, state) in failed:
                return False
            self._tick()
            for i, nxt in self.successors(mask, state):
                path.append(i)
                if visit(mask | 1 << i, nxt):
                    return True
                path.pop()
            failed.add((mask, state))
            return False

        return path if visit(0, initial) else None

    def final_states(self, initial_states: Iterable[Any]) -> Set[Any]:
        seen: Set[Tuple[int, Any]] = set()
        finals: Set[Any] = set()
        stack = [(0, s) for s in initial_states]
        while stack:
            mask, state = stack.pop()
            if (mask, state) in seen:
                continue
            seen.add((mask, state))
            if mask == self.full:
                finals.add(state)
                continue
            self._tick()
            for i, nxt in self.successors(mask, state):
                stack.append((mask | 1 << i, nxt))
        return finals


def check(history: HistoryLike, spec=QUEUE, initial: Tuple[Any, ...] = (),
          node_budget: Optional[int] = None, minimize: bool = True) -> Verdict:
    """Search for a linearization; on failure, shrink to a minimal failing set of operations."""
    ops = intervals_of(history)
    search = _Search(ops, spec, node_budget)
    path = search.find(initial)
    if path is not None:
        return Verdict(True, witness=tuple(ops[i].oid for i in path), nodes=search.nodes)
    kept = list(ops)
    if minimize:
        for op in list(ops):
            trial = [o for o in kept if o is not op]
            if trial and _Search(trial, spec, node_budget).find(initial) is None:
                kept = trial
    violation: Tuple[Event, ...] = ()
    if isinstance(history, History):
        violation = history.restricted_to(o.oid for o in kept).events
    return Verdict(False, violation=violation, nodes=search.nodes)


def final_states(history: HistoryLike, spec=QUEUE, initial_states: Iterable[Any] = ((),),
                 node_budget: Optional[int] = None) -> Set[Any]:
    """Every abstract state some linearization can end in; empty when none exists."""
    ops = intervals_of(history)
    if not ops:
        return set(initial_states)
    return _Search(ops, spec, node_budget).final_states(initial_states)


def validate_witness(history: HistoryLike, witness: Sequence[int], spec=QUEUE,
                     initial: Tuple[Any, ...] = ()) -> bool:
    """True if witness orders every operation once, respects precedence and replays correctly."""
    ops = {o.oid: o for o in intervals_of(history)}
    if sorted(witness) != sorted(ops):
        return False
    ordered = [ops[oid] for oid in witness]
    for a, b in itertools.combinations(ordered, 2):
        if b.precedes(a):
            return False
    state = initial
    for op in ordered:
        ret, state = spec.apply(state, op.op, op.arg)
        if ret != op.ret:
            return False
    return True


def brute_force_check(history: HistoryLike, spec=QUEUE, initial: Tuple[Any, ...] = ()) -> Verdict:
    """Try every permutation; only usable on a handful of operations."""
    ops = intervals_of(history)
    oids = [o.oid for o in ops]
    for perm in itertools.permutations(oids):
        if validate_witness(ops, perm, spec, initial):
            return Verdict(True, witness=tuple(perm))
    return Verdict(False)


MUTATIONS = ("swap", "empty", "repeat", "foreign")


def _with_returns(history: History, rets: Dict[int, Any]) -> History:
    return History([replace(e, ret=rets[e.oid]) if e.kind == RESPOND and e.oid in rets else e
                    for e in history.events])


def history_mutants(history: History, kinds: Sequence[str] = MUTATIONS) -> List[Tuple[str, History]]:
    """
    Every return-value corruption of the history's deqs, tagged by kind:
    swap exchanges two different deq results, empty turns an item into ⊥,
    repeat returns an item another deq already returned, and foreign returns
    a value nothing enqueued. Foreign mutants, and repeat mutants over
    distinct items, are never linearizable; the others can be when the deqs
    overlap.
    """
    deqs = [op for op in history.operations().values() if op.op in SequentialQueueSpec.removes and op.complete]
    mutants: List[Tuple[str, History]] = []
    if "swap" in kinds:
        for a, b in itertools.combinations(deqs, 2):
            if a.ret != b.ret:
                mutants.append(("swap", _with_returns(history, {a.oid: b.ret, b.oid: a.ret})))
    if "empty" in kinds:
        mutants += [("empty", _with_returns(history, {d.oid: BOTTOM})) for d in deqs if d.ret is not BOTTOM]
    if "repeat" in kinds:
        for a, b in itertools.permutations(deqs, 2):
            if a.ret is not BOTTOM and b.ret != a.ret:
                mutants.append(("repeat", _with_returns(history, {b.oid: a.ret})))
    if "foreign" in kinds:
        mutants += [("foreign", _with_returns(history, {d.oid: f"mutant-{d.oid}"})) for d in deqs]
    return mutants


def mutate_history(history: History, rng: random.Random, kinds: Sequence[str] = MUTATIONS) -> History:
    """One corrupted copy of the history, picked at random from history_mutants."""
    mutants = history_mutants(history, kinds)
    if not mutants:
        raise HistoryError("history has no deq results to corrupt")
    return rng.choice(mutants)[1]


# ---- instrumentation and the explicit order ----

@dataclass
class OpMeta:
    oid: int
    op: str
    pid: int
    loc: Optional[Location] = None
    lstart: Optional[int] = None
    lalloc: Optional[int] = None
    index: Optional[int] = None           # enq: item index it owns; deq: item index it claimed
    writes: List[Location] = field(default_factory=list)
    iterations: int = 0


@dataclass
class Instrumentation:
    algorithm: str
    ops: Dict[int, OpMeta]
    owners: Dict[int, int]                       # item index -> enq oid
    deq_active_writer: Dict[Location, int]       # deqActive cell -> deq oid
    matches: Dict[int, int]                      # enq oid -> deq oid

    def row(self, oid: int) -> int:
        return self.ops[oid].loc.row

    def orderpt(self, oid: int) -> Tuple[int, int]:
        meta = self.ops[oid]
        if meta.op == "enq":
            return meta.lstart, 0
        enq = next((e for e, d in self.matches.items() if d == oid), None)
        if enq is None:
            return meta.lalloc, 0
        return max((meta.lalloc, 0), (self.ops[enq].lstart, 1))

    def key(self, oid: int) -> Tuple[int, Tuple[int, int]]:
        return self.row(oid), self.orderpt(oid)


def _location(event: Event) -> Location:
    index = event.index
    if index is None or len(index) != 2:
        raise MetadataError(f"{event.obj} is not a two-dimensional location")
    return Location(*index)


def _enq_oids_by_process(history: History) -> Dict[Tuple[int, int], int]:
    """(pid, n) -> oid of the n-th enq of pid, counting from 1."""
    counts: Dict[int, int] = {}
    mapping = {}
    for op in history.operations().values():
        if op.op == "enq":
            counts[op.pid] = counts.get(op.pid, 0) + 1
            mapping[(op.pid, counts[op.pid])] = op.oid
    return mapping


def instrument(history: History, algorithm: str) -> Instrumentation:
    """
    Derive loc, lstart, lalloc and matches from step events.

    For the two-enqueuer queue the enq side is the virtual single enqueuer:
    item index k belongs to the enq whose entry was decided in agenda slot k,
    and every time is the first write of the location by either enqueuer.
    """
    if algorithm not in ("semd", "temd"):
        raise MetadataError(f"no ordering metadata for '{algorithm}' histories")
    if not history.is_complete():
        raise IncompleteHistoryError("instrumentation needs a history where every operation finished")
    operations = history.operations()
    ops = {oid: OpMeta(oid, op.op, op.pid) for oid, op in operations.items()}
    owners: Dict[int, int] = {}
    first_item_write: Dict[int, int] = {}
    index_writes: Dict[int, List[Location]] = {}
    deq_active_writer: Dict[Location, int] = {}
    by_process = _enq_oids_by_process(history) if algorithm == "temd" else {}

    for event in history.events:
        if event.kind != STEP:
            continue
        base, meta = event.base, ops[event.oid]
        if meta.op == "enq":
            if base == "item":
                k = event.index[0]
                first_item_write.setdefault(k, history.step_time(event))
                if algorithm == "semd":
                    owners[k] = event.oid
            elif base == "itemIndex":
                locs = index_writes.setdefault(event.args[0], [])
                if _location(event) not in locs:
                    locs.append(_location(event))
            elif base == "agendaItem" and event.method == "write":
                pid, n, _ = event.args[0]
                owner = by_process.get((pid, n))
                if owner is None:
                    raise MetadataError(f"agenda entry {event.args[0]} names no enq in the history")
                owners.setdefault(event.index[0], owner)
        else:
            if base == "tail":
                meta.lalloc = history.step_time(event)
                meta.iterations += 1
            elif base == "deqActive":
                deq_active_writer[_location(event)] = event.oid
            elif base == "itemIndex":
                meta.loc = _location(event)
                meta.index = event.ret if event.ret != 0 else None

    for k, oid in owners.items():
        if k not in first_item_write:
            raise MetadataError(f"item {k} was never written")
        ops[oid].index = k
        ops[oid].lstart = first_item_write[k]
        ops[oid].writes = list(index_writes.get(k, []))

    matches: Dict[int, int] = {}
    for oid, meta in ops.items():
        if meta.op == "deq":
            if meta.loc is None or meta.lalloc is None:
                raise MetadataError(f"deq {oid} has no itemIndex read")
            ret = operations[oid].ret
            if ret is BOTTOM:
                meta.index = None
            elif meta.index not in owners:
                raise MetadataError(f"deq {oid} returned {ret!r} without claiming an owned item")
            else:
                matches[owners[meta.index]] = oid

    for oid, meta in ops.items():
        if meta.op != "enq":
            continue
        if meta.lstart is None:
            raise MetadataError(f"enq {oid} owns no item index")
        if len(meta.writes) == 1:
            meta.loc = meta.writes[0]
        elif len(meta.writes) == 2:
            first, second = meta.writes
            writer = deq_active_writer.get(first)
            meta.loc = first if writer is not None and matches.get(oid) == writer else second
        else:
            raise MetadataError(f"enq {oid} wrote {len(meta.writes)} itemIndex locations")

    return Instrumentation(algorithm, ops, owners, deq_active_writer, matches)


def match_ops(history: History, algorithm: str = "semd",
              meta: Optional[Instrumentation] = None) -> Set[Tuple[int, int]]:
    meta = meta or instrument(history, algorithm)
    return set(meta.matches.items())


def row_order(history: History, algorithm: str = "semd",
                meta: Optional[Instrumentation] = None) -> List[int]:
    """Operations sorted by (row, orderpt); orderpt ties are an error."""
    meta = meta or instrument(history, algorithm)
    keys = {oid: meta.key(oid) for oid in meta.ops}
    seen: Dict[Any, int] = {}
    for oid, key in keys.items():
        if key in seen:
            raise OrderError(f"operations {seen[key]} and {oid} share order key {key}")
        seen[key] = oid
    return sorted(keys, key=keys.get)
