"""
Executable history checks for the queue algorithms.

Every check takes a complete history and returns a list of human-readable
findings; an empty list means the property held.
"""
import re
from typing import Any, Dict, List, Optional, Tuple

from queue_algorithms.base_objects import BOTTOM
from harness.history import STEP, Event, History
from harness.lin_check import Instrumentation, MetadataError, instrument
from harness.sim_scheduler import DEQUEUER, ENQUEUER, RunConfig, derive_step_bounds

MAX_LOOP_ITERATIONS = 3

_CELL = re.compile(r"(?P<cell>[A-Za-z_]+\[[\d,]+\])(?:\.(?P<part>proposal\[(?P<slot>[01])\]|winner))?")


def _steps(history: History, role: Optional[str] = None, base: Optional[str] = None) -> List[Event]:
    return [e for e in history.events
            if e.kind == STEP and (role is None or e.role == role) and (base is None or e.base == base)]


def loop_iterations(history: History) -> Dict[int, int]:
    """deq oid -> number of tail allocations it made."""
    counts: Dict[int, int] = {}
    for op in history.operations().values():
        if op.op == "deq":
            counts[op.oid] = sum(1 for e in op.steps if e.base == "tail")
    return counts


def check_step_bounds(history: History, config: RunConfig) -> List[str]:
    bounds = derive_step_bounds(config)
    findings = []
    for op in history.operations().values():
        if op.complete and len(op.steps) > bounds[op.op]:
            findings.append(f"{op.op} {op.oid} took {len(op.steps)} steps, bound is {bounds[op.op]}")
    return findings


def check_loop_bound(history: History) -> List[str]:
    return [f"deq {oid} ran the loop {n} times" for oid, n in loop_iterations(history).items()
            if n > MAX_LOOP_ITERATIONS]


def check_unique_claims(history: History) -> List[str]:
    """At most one winning ticket per item index, and no item returned twice."""
    winners: Dict[int, List[int]] = {}
    for e in _steps(history, DEQUEUER, "itemTaken"):
        if e.ret == 0:
            winners.setdefault(e.index[0], []).append(e.oid)
    findings = [f"item index {k} claimed by deqs {oids}" for k, oids in winners.items() if len(oids) > 1]
    returned: Dict[int, List[int]] = {}
    for e in _steps(history, DEQUEUER, "item"):
        returned.setdefault(e.index[0], []).append(e.oid)
    findings += [f"item index {k} returned by deqs {oids}" for k, oids in returned.items() if len(oids) > 1]
    return findings


def check_prefix_property(history: History) -> List[str]:
    """In every row, the itemIndex columns read by dequeuers form a prefix 0, 1, 2, ..."""
    columns: Dict[int, set] = {}
    for e in _steps(history, DEQUEUER, "itemIndex"):
        i, j = e.index
        columns.setdefault(i, set()).add(j)
    return [f"row {i} read columns {sorted(cols)}" for i, cols in sorted(columns.items())
            if cols != set(range(len(cols)))]


def check_monotone_row(history: History) -> List[str]:
    """Values written to each row register never decrease."""
    findings = []
    last: Dict[str, Tuple[int, int]] = {}
    for e in _steps(history, ENQUEUER, "row"):
        value = e.args[0]
        if e.obj in last and value < last[e.obj][0]:
            findings.append(f"{e.obj} went from {last[e.obj][0]} to {value} at t={e.t}")
        last[e.obj] = (value, e.t)
    return findings


def check_row_per_enqueuer(history: History) -> List[str]:
    """Each enqueuer writes only its own row cell, with strictly increasing values."""
    findings = []
    last: Dict[int, int] = {}
    for e in _steps(history, ENQUEUER, "row"):
        if e.index != (e.pid,):
            findings.append(f"enqueuer {e.pid} wrote {e.obj}")
        value = e.args[0]
        if e.pid in last and value <= last[e.pid]:
            findings.append(f"enqueuer {e.pid} wrote row {value} after {last[e.pid]}")
        last[e.pid] = value
    return findings


def check_no_lost_items(history: History, meta: Instrumentation) -> List[str]:
    """A deq returning ⊥ comes after every earlier-located enq has been matched."""
    findings = []
    operations = history.operations()
    enqs = [m for m in meta.ops.values() if m.op == "enq"]
    for d in meta.ops.values():
        if d.op != "deq" or operations[d.oid].ret is not BOTTOM:
            continue
        for e in enqs:
            if e.loc < d.loc and e.oid not in meta.matches:
                findings.append(f"deq {d.oid} returned ⊥ at {d.loc} but enq {e.oid} at {e.loc} is unmatched")
    return findings


def check_match_locations(history: History, meta: Instrumentation) -> List[str]:
    """A matched pair shares its location and the deq does not precede the enq."""
    findings = []
    operations = history.operations()
    for e, d in meta.matches.items():
        if meta.ops[e].loc != meta.ops[d].loc:
            findings.append(f"enq {e} at {meta.ops[e].loc} matched deq {d} at {meta.ops[d].loc}")
        if operations[d].respond_t < operations[e].invoke_t:
            findings.append(f"deq {d} precedes its matching enq {e}")
    return findings


def consensus_outcomes(history: History) -> Dict[str, Dict[int, Tuple[Any, Any]]]:
    """cell name -> {oid: (proposed, decided)} for every two-process consensus call."""
    calls: Dict[Tuple[str, int], Dict[str, Any]] = {}
    for e in history.steps():
        match = _CELL.fullmatch(e.obj)
        if match is None:
            continue
        cell, part = match.group("cell"), match.group("part")
        if part is None and e.method != "decide":
            continue
        call = calls.setdefault((cell, e.oid), {})
        if part is None:
            call["proposed"], call["decided"] = e.args[0], e.ret
        elif part == "winner":
            call["won"] = e.ret is BOTTOM if e.method == "swap" else e.ret == 0
        elif e.method == "write":
            call["proposed"] = e.args[0]
        else:
            call["other"] = e.ret
    outcomes: Dict[str, Dict[int, Tuple[Any, Any]]] = {}
    for (cell, oid), call in calls.items():
        if "decided" not in call:
            if "won" not in call:
                continue
            call["decided"] = call["proposed"] if call["won"] else call.get("other", BOTTOM)
        outcomes.setdefault(cell, {})[oid] = (call.get("proposed", BOTTOM), call["decided"])
    return outcomes


def check_consensus_agreement(history: History) -> List[str]:
    findings = []
    for cell, calls in sorted(consensus_outcomes(history).items()):
        decided = {d for _, d in calls.values()}
        proposed = {p for p, _ in calls.values()}
        if len(decided) > 1:
            findings.append(f"{cell} decided differently: {sorted(map(repr, decided))}")
        elif not decided <= proposed:
            findings.append(f"{cell} decided {decided.pop()!r}, which nobody in {sorted(map(repr, proposed))} proposed")
    return findings


def check_idempotent_writes(history: History) -> List[str]:
    """Enqueuers writing the same dequeuer-visible location write the same value."""
    findings = []
    written: Dict[str, Event] = {}
    for e in history.steps():
        if e.role != ENQUEUER or e.method != "write" or e.base not in ("item", "itemIndex", "agendaItem"):
            continue
        first = written.setdefault(e.obj, e)
        if first.args != e.args:
            findings.append(f"{e.obj} written {first.args[0]!r} by process {first.pid} "
                            f"and {e.args[0]!r} by process {e.pid}")
    return findings


def check_virtual_enqueuer(history: History) -> List[str]:
    """
    First writes of item and itemIndex replay one single-enqueuer trajectory:
    item[n] before its index, indices in order, positions advancing along the
    row or jumping to (row + 1, 1) after a second write at (row + 1, 0).
    """
    item_first: Dict[int, int] = {}
    index_first: Dict[int, List[Tuple[int, Tuple[int, int]]]] = {}
    seen = set()
    for e in _steps(history, ENQUEUER):
        if e.method != "write" or e.obj in seen:
            continue
        if e.base == "item":
            seen.add(e.obj)
            item_first[e.index[0]] = e.t
        elif e.base == "itemIndex":
            seen.add(e.obj)
            index_first.setdefault(e.args[0], []).append((e.t, e.index))
    findings = []
    position = (0, 0)
    previous_t = -1
    if sorted(item_first) != list(range(1, len(item_first) + 1)):
        findings.append(f"items written at indices {sorted(item_first)}")
    for n in sorted(item_first):
        if item_first[n] < previous_t:
            findings.append(f"item {n} first written before item {n - 1}")
        previous_t = item_first[n]
        writes = sorted(index_first.get(n, []))
        if not writes:
            continue
        if writes[0][0] < item_first[n]:
            findings.append(f"index {n} published before item {n} was written")
        locations = [loc for _, loc in writes]
        if locations[0] != position:
            findings.append(f"index {n} first written at {locations[0]}, expected {position}")
        i, j = locations[0]
        if len(locations) == 1:
            position = (i, j + 1)
        elif locations[1] == (i + 1, 0) and len(locations) == 2:
            position = (i + 1, 1)
        else:
            findings.append(f"index {n} written at {locations}")
    return findings


def check_replay_bound(history: History, meta: Instrumentation) -> List[str]:
    """A two-enqueuer enq replays no more agenda entries than its own slot number."""
    findings = []
    for op in history.operations().values():
        if op.op != "enq":
            continue
        replays = sum(1 for e in op.steps if e.base == "item")
        k = meta.ops[op.oid].index
        if k is not None and replays > k:
            findings.append(f"enq {op.oid} replayed {replays} entries for agenda slot {k}")
    return findings


def check_invariants(history: History, config: RunConfig) -> Dict[str, List[str]]:
    """Run every check that applies to the configuration's algorithm."""
    results: Dict[str, List[str]] = {"step bounds": check_step_bounds(history, config)}
    if config.algorithm == "sesd":
        return results
    results["loop bound"] = check_loop_bound(history)
    results["unique claims"] = check_unique_claims(history)
    results["prefix property"] = check_prefix_property(history)
    results["monotone row"] = check_monotone_row(history)
    try:
        meta = instrument(history, config.algorithm)
    except MetadataError as e:
        results["instrumentation"] = [str(e)]
        return results
    results["no lost items"] = check_no_lost_items(history, meta)
    results["match locations"] = check_match_locations(history, meta)
    if config.algorithm == "temd":
        results["row per enqueuer"] = check_row_per_enqueuer(history)
        results["idempotent writes"] = check_idempotent_writes(history)
        results["consensus agreement"] = check_consensus_agreement(history)
        results["virtual enqueuer"] = check_virtual_enqueuer(history)
        results["replay bound"] = check_replay_bound(history, meta)
    return results


def failures(results: Dict[str, List[str]]) -> List[str]:
    return [f"{name}: {finding}" for name, findings in results.items() for finding in findings]


def operation_rows(history: History, config: RunConfig) -> List[Dict[str, Any]]:
    """One row per completed operation: steps, loop iterations, replayed entries, bound."""
    bounds = derive_step_bounds(config)
    rows = []
    for op in history.operations().values():
        if not op.complete:
            continue
        rows.append({
            "op": f"{config.algorithm} {op.op}",
            "steps": len(op.steps),
            "iterations": sum(1 for e in op.steps if e.base == "tail"),
            "replays": sum(1 for e in op.steps if e.base == "item") if op.op == "enq" else 0,
            "bound": bounds[op.op],
        })
    return rows
