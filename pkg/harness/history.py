"""
Execution histories: invoke / respond / step events of one run, and their
JSON-lines form.
"""

import json
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from queue_algorithms.base_objects import BOTTOM

INVOKE = "invoke"
RESPOND = "respond"
STEP = "step"

EVENT_FIELDS = ("t", "pid", "role", "kind", "oid", "op", "obj", "method", "args", "ret")

_INDEXED_NAME = re.compile(r"(?P<base>[A-Za-z_]+)\[(?P<index>\d+(?:,\d+)*)\]")


class HistoryError(Exception):
    """An operation is missing or incomplete, or a trace is malformed."""


def encode_value(value: Any) -> Any:
    """⊥ becomes null and tuples become lists."""
    if value is BOTTOM:
        return None
    if isinstance(value, (tuple, list)):
        return [encode_value(v) for v in value]
    return value


def decode_value(value: Any) -> Any:
    if value is None:
        return BOTTOM
    if isinstance(value, list):
        return tuple(decode_value(v) for v in value)
    return value


def parse_object_name(name: str) -> Tuple[str, Optional[Tuple[int, ...]]]:
    """'itemIndex[1,0]' -> ('itemIndex', (1, 0)); names without a plain index keep None."""
    match = _INDEXED_NAME.fullmatch(name)
    if match is None:
        return name, None
    return match.group("base"), tuple(int(i) for i in match.group("index").split(","))


@dataclass(frozen=True)
class Event:
    t: int
    pid: int
    role: str
    kind: str
    oid: int
    op: str
    obj: str = ""
    method: str = ""
    args: Tuple[Any, ...] = ()
    ret: Any = BOTTOM

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t, "pid": self.pid, "role": self.role, "kind": self.kind,
            "oid": self.oid, "op": self.op, "obj": self.obj, "method": self.method,
            "args": encode_value(self.args), "ret": encode_value(self.ret),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Event":
        try:
            return cls(t=data["t"], pid=data["pid"], role=data["role"], kind=data["kind"],
                       oid=data["oid"], op=data["op"], obj=data.get("obj", ""),
                       method=data.get("method", ""), args=decode_value(data.get("args", [])),
                       ret=decode_value(data.get("ret")))
        except KeyError as e:
            raise HistoryError(f"event is missing field {e}") from e

    @property
    def base(self) -> str:
        return parse_object_name(self.obj)[0]

    @property
    def index(self) -> Optional[Tuple[int, ...]]:
        return parse_object_name(self.obj)[1]


@dataclass
class OperationRecord:
    oid: int
    pid: int
    role: str
    op: str
    arg: Any
    invoke_t: int
    respond_t: Optional[int] = None
    ret: Any = BOTTOM
    steps: List[Event] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.respond_t is not None


class History:
    """An immutable, ordered event log of one execution."""

    def __init__(self, events: Sequence[Event]):
        self.events: Tuple[Event, ...] = tuple(events)
        self._operations: Optional[Dict[int, OperationRecord]] = None
        self._step_times: Optional[Dict[int, int]] = None

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def __eq__(self, other):
        return isinstance(other, History) and self.events == other.events

    def __hash__(self):
        return hash(self.events)

    def operations(self) -> Dict[int, OperationRecord]:
        """Operations keyed by oid, in invocation order."""
        if self._operations is None:
            ops: Dict[int, OperationRecord] = {}
            for event in self.events:
                if event.kind == INVOKE:
                    arg = event.args[0] if event.args else BOTTOM
                    ops[event.oid] = OperationRecord(event.oid, event.pid, event.role,
                                                     event.op, arg, event.t)
                elif event.oid not in ops:
                    raise HistoryError(f"event at t={event.t} belongs to uninvoked operation {event.oid}")
                elif event.kind == STEP:
                    ops[event.oid].steps.append(event)
                elif event.kind == RESPOND:
                    ops[event.oid].respond_t = event.t
                    ops[event.oid].ret = event.ret
            self._operations = ops
        return self._operations

    def operation(self, oid: int) -> OperationRecord:
        try:
            return self.operations()[oid]
        except KeyError:
            raise HistoryError(f"operation {oid} not found in history") from None

    def is_complete(self) -> bool:
        return all(op.complete for op in self.operations().values())

    def steps(self) -> List[Event]:
        return [e for e in self.events if e.kind == STEP]

    def step_time(self, event: Event) -> int:
        """The number of steps taken before this step."""
        if self._step_times is None:
            self._step_times = {}
            for e in self.events:
                if e.kind == STEP:
                    self._step_times[e.t] = len(self._step_times)
        try:
            return self._step_times[event.t]
        except KeyError:
            raise HistoryError(f"event at t={event.t} is not a step") from None

    def restricted_to(self, oids) -> "History":
        """Sub-history holding only the events of the given operations."""
        keep = set(oids)
        return History([e for e in self.events if e.oid in keep])

    def to_jsonl(self) -> str:
        return "".join(dump_line(e.to_dict()) for e in self.events)

    @classmethod
    def from_jsonl(cls, text: str) -> "History":
        events = []
        for n, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                events.append(Event.from_dict(json.loads(line)))
            except json.JSONDecodeError as e:
                raise HistoryError(f"line {n} is not valid JSON: {e}") from e
        return cls(events)


def dump_line(record: Dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n"
