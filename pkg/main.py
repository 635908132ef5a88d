#!/usr/bin/env python3
"""
MAIN ENTRY POINT FOR THE QUEUE VERIFICATION SUITES
Orchestrates schedule exploration, linearizability checking, invariant checks,
trace replay and native-thread stress runs
"""
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

# Add the current directory to the path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from system import config_loader, file_operations, notification, report_export
from system.step_statistics import StepStatistics
from harness import invariants, lin_check
from harness.history import STEP, History
from harness.native_stress import StressConfig, stress
from harness.sim_scheduler import (RunConfig, Schedule, derive_step_bounds, explore, max_total_steps_for,
                                   random_run, run, split_schedules)

ORACLE_MAX_OPERATIONS = 6
MAX_SPLIT_DEPTH = 8


class ReplayDivergence(Exception):
    """Re-executing a stored schedule did not reproduce the stored history."""


@dataclass
class SuiteReport:
    config: Dict[str, Any]
    mode: str
    bounds: Dict[str, int]
    schedules: int = 0
    histories_checked: int = 0
    order_checks: int = 0
    oracle_checks: int = 0
    mutants_checked: int = 0
    mutants_rejected: int = 0
    violations: List[Dict[str, Any]] = field(default_factory=list)
    passing_traces: List[str] = field(default_factory=list)
    statistics: List[Dict[str, Any]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    def records(self) -> List[Dict[str, Any]]:
        """JSON-lines report body; wall time is left out so reruns are byte-identical."""
        head = {
            "record": "summary", "config": self.config, "mode": self.mode, "bounds": self.bounds,
            "schedules": self.schedules, "histories_checked": self.histories_checked,
            "order_checks": self.order_checks, "oracle_checks": self.oracle_checks,
            "mutants_checked": self.mutants_checked, "mutants_rejected": self.mutants_rejected,
            "violations": len(self.violations),
            "passed": self.passed,
        }
        return ([head] + [{"record": "statistics", **row} for row in self.statistics] +
                [{"record": "violation", **v} for v in self.violations])


def _violation(report, kind, detail, trace=None):
    report.violations.append({"kind": kind, "detail": detail, "trace": trace})
    print(f"  ❌ {kind}: {detail}")
    file_operations.log_error(f"{kind} check", detail)


def operation_key(history: History) -> Tuple:
    """The invoke/respond projection of a history; every linearizability check depends on nothing else."""
    return tuple((e.kind, e.oid, e.pid, e.op, e.args, e.ret) for e in history.events if e.kind != STEP)


@dataclass
class OperationVerdicts:
    """Checker, oracle and mutant outcomes for one invoke/respond projection."""
    verdict: lin_check.Verdict
    oracle: Optional[bool] = None
    mutant: Optional[Tuple[bool, bool]] = None     # (search accepts, permutations accept)


def operation_verdicts(history: History, rng: random.Random, node_budget: Optional[int]) -> OperationVerdicts:
    result = OperationVerdicts(lin_check.check(history, node_budget=node_budget))
    if len(history.operations()) <= ORACLE_MAX_OPERATIONS:
        result.oracle = lin_check.brute_force_check(history).linearizable
        mutants = lin_check.history_mutants(history)
        if mutants:
            _, mutant = rng.choice(mutants)
            result.mutant = (lin_check.check(mutant, node_budget=node_budget).linearizable,
                             lin_check.brute_force_check(mutant).linearizable)
    return result


def check_history(run_config: RunConfig, schedule: Schedule, history: History, report: SuiteReport,
                  rng: random.Random, node_budget: Optional[int] = None, out_dir: Optional[str] = None,
                  cache: Optional[Dict[Tuple, OperationVerdicts]] = None):
    """Run every check on one history; returns True if it passed them all."""
    failures = []
    key = operation_key(history) if cache is not None else None
    verdicts = cache.get(key) if cache is not None else None
    if verdicts is None:
        verdicts = operation_verdicts(history, rng, node_budget)
        if cache is not None:
            cache[key] = verdicts
    verdict = verdicts.verdict
    if not verdict.linearizable:
        failures.append(("linearizability", "history has no valid linearization"))

    failures += [("invariant", f) for f in invariants.failures(invariants.check_invariants(history, run_config))]

    if run_config.algorithm in ("semd", "temd"):
        report.order_checks += 1
        try:
            order = lin_check.row_order(history, run_config.algorithm)
            if not lin_check.validate_witness(history, order):
                failures.append(("order", f"(row, orderpt) order {order} is not a valid linearization"))
        except (lin_check.OrderError, lin_check.MetadataError) as e:
            failures.append(("order", str(e)))

    if verdicts.oracle is not None:
        report.oracle_checks += 1
        if verdicts.oracle != verdict.linearizable:
            failures.append(("oracle", f"search says {verdict.linearizable}, permutations say {verdicts.oracle}"))
    if verdicts.mutant is not None:
        report.mutants_checked += 1
        accepted, oracle_accepts = verdicts.mutant
        if accepted != oracle_accepts:
            failures.append(("oracle", f"search says {accepted} on a corrupted history, permutations disagree"))
        elif not accepted:
            report.mutants_rejected += 1

    report.histories_checked += 1
    if not failures:
        return True
    trace = file_operations.save_counterexample(run_config, schedule, history, verdict.to_json(), out_dir)
    for kind, detail in failures:
        _violation(report, kind, detail, trace)
    return False


def generate_runs(run_config: RunConfig, mode: str, seed: int, max_schedules: int,
                  random_schedules: int, max_total_steps: Optional[int], prefix: Sequence[int] = ()):
    if mode == "exhaustive":
        for n, pair in enumerate(explore(run_config, max_total_steps or None, prefix)):
            if max_schedules and n >= max_schedules:
                print(f"  ⚠️  Stopped after {max_schedules} schedules (MAX_SCHEDULES)")
                return
            yield pair
    else:
        for n in range(random_schedules):
            yield random_run(run_config, seed + n)


def check_runs(run_config: RunConfig, runs, report: SuiteReport, stats: StepStatistics, rng: random.Random,
               node_budget: Optional[int], out_dir: str, keep_passing: int, verbose: bool):
    """Check a stream of (schedule, history) pairs into report and stats."""
    cache: Dict[Tuple, OperationVerdicts] = {}
    for schedule, history in runs:
        report.schedules += 1
        passed = check_history(run_config, schedule, history, report, rng, node_budget, out_dir, cache)
        stats.add(history, run_config)
        if passed and len(report.passing_traces) < keep_passing:
            report.passing_traces.append(file_operations.save_passing_trace(run_config, schedule, history, out_dir))
        if verbose and report.schedules % 1000 == 0:
            print(f"  {report.schedules} schedules checked, {len(report.violations)} violation(s)")


def check_subtree(task) -> Tuple[SuiteReport, StepStatistics]:
    """Worker entry point: check every schedule under one prefix."""
    run_config, prefix, seed, node_budget, out_dir, max_total_steps, keep_passing = task
    report = SuiteReport(run_config.to_json(), "exhaustive", derive_step_bounds(run_config))
    stats = StepStatistics()
    runs = explore(run_config, max_total_steps or None, prefix)
    check_runs(run_config, runs, report, stats, random.Random(seed), node_budget, out_dir, keep_passing, False)
    return report, stats


def split_prefixes(run_config: RunConfig, workers: int) -> List[Tuple[int, ...]]:
    """Shallowest prefix split that gives every worker several subtrees."""
    prefixes = [()]
    for depth in range(1, MAX_SPLIT_DEPTH + 1):
        prefixes = split_schedules(run_config, depth)
        if len(prefixes) >= 4 * workers:
            break
    return prefixes


def check_in_workers(run_config: RunConfig, report: SuiteReport, stats: StepStatistics, seed: int,
                     node_budget: Optional[int], out_dir: str, max_total_steps: int, keep_passing: int,
                     workers: int):
    """Fan the schedule tree out to worker processes and merge their results in tree order."""
    prefixes = split_prefixes(run_config, workers)
    print(f"  Split into {len(prefixes)} subtrees over {workers} worker processes")
    tasks = [(run_config, prefix, seed + n, node_budget, out_dir, max_total_steps, keep_passing if n == 0 else 0)
             for n, prefix in enumerate(prefixes)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part, part_stats in pool.map(check_subtree, tasks):
            for name in ("schedules", "histories_checked", "order_checks", "oracle_checks",
                         "mutants_checked", "mutants_rejected"):
                setattr(report, name, getattr(report, name) + getattr(part, name))
            report.violations.extend(part.violations)
            report.passing_traces.extend(part.passing_traces)
            stats.merge(part_stats)


def run_verification_suite(run_config: RunConfig, mode: str = "exhaustive", seed: int = 0,
                           max_schedules: int = 0, random_schedules: int = 1000,
                           max_total_steps: int = 0, node_budget: Optional[int] = None,
                           out_dir: Optional[str] = None, keep_passing: int = 0,
                           verbose: bool = False, workers: int = 1) -> SuiteReport:
    """
    Check every generated history of one configuration.

    Exhaustive runs without MAX_SCHEDULES use worker processes when workers > 1;
    each subtree draws its mutants from its own seed, so reports are reproducible
    for a fixed worker count.
    """
    started = time.time()
    out_dir = out_dir or config_loader.OUT_DIR
    bounds = derive_step_bounds(run_config)
    report = SuiteReport(run_config.to_json(), mode, bounds)
    stats = StepStatistics()

    print("=" * 60)
    print("STARTING QUEUE VERIFICATION SUITE")
    print(f"Algorithm: {run_config.algorithm} ({run_config.enqueuers} enqueuer(s), "
          f"{run_config.dequeuers} dequeuer(s), consensus: {run_config.consensus_mode})")
    print("=" * 60)

    print("\n--- STEP 1: Deriving step bounds ---")
    for op, bound in bounds.items():
        print(f"  {op}: at most {bound} shared steps")
    print(f"  Whole run: at most {max_total_steps or max_total_steps_for(run_config)} steps")

    print(f"\n--- STEP 2: Running {mode} schedules ---")
    if mode == "exhaustive" and workers > 1 and not max_schedules:
        check_in_workers(run_config, report, stats, seed, node_budget, out_dir, max_total_steps,
                         keep_passing, workers)
    else:
        runs = generate_runs(run_config, mode, seed, max_schedules, random_schedules, max_total_steps)
        check_runs(run_config, runs, report, stats, random.Random(seed), node_budget, out_dir,
                   keep_passing, verbose)
    print(f"  Checked {report.histories_checked} histories from {report.schedules} schedules")

    print("\n--- STEP 3: Summarizing ---")
    report.statistics = stats.records()
    stats.print_summary()
    print(f"  Order checks: {report.order_checks}, oracle checks: {report.oracle_checks}, "
          f"mutants rejected: {report.mutants_rejected} of {report.mutants_checked}")
    report.wall_time = round(time.time() - started, 3)
    path = file_operations.write_report(report.records(), out_dir=out_dir)
    print(f"  Report written to {path} ({report.wall_time}s)")

    if config_loader.EXPORT_EXCEL:
        summary = dict(report.records()[0], wall_time=report.wall_time)
        report_export.export_to_excel(summary, stats.summary(), report.violations)

    if report.passed:
        print("\n✅ No violations")
    else:
        print(f"\n❌ {len(report.violations)} violation(s); counterexamples under {out_dir}")
    if config_loader.NOTIFY:
        notification.notify_suite_result(f"{run_config.algorithm} {mode}", report.passed, len(report.violations))
    return report


def replay_trace(path: str, annotate: bool = False) -> History:
    """Re-execute a stored trace, insist on the identical history, and print it."""
    header, run_config, schedule, stored = file_operations.load_trace(path)
    replayed = run(run_config, schedule)
    if replayed.to_jsonl() != stored.to_jsonl():
        raise ReplayDivergence(f"replaying {path} produced a different history")

    print("=" * 60)
    print(f"REPLAY OF {path}")
    print(f"Algorithm: {run_config.algorithm}, {len(schedule)} slots, {len(replayed.operations())} operations")
    print("=" * 60)
    for event in replayed.events:
        if event.kind == "step":
            rendered = ", ".join(repr(a) for a in event.args)
            print(f"  t={event.t:<4} p{event.pid} {event.op}#{event.oid}  {event.obj}.{event.method}({rendered})"
                  f" -> {event.ret!r}")
        else:
            print(f"  t={event.t:<4} p{event.pid} {event.kind} {event.op}#{event.oid}"
                  + (f" {event.args[0]!r}" if event.args else "")
                  + (f" -> {event.ret!r}" if event.kind == "respond" else ""))

    verdict = lin_check.check(replayed)
    stored_verdict = header.get("verdict")
    if stored_verdict is not None and stored_verdict.get("linearizable") != verdict.linearizable:
        raise ReplayDivergence(f"stored verdict {stored_verdict.get('linearizable')} "
                               f"but replay gives {verdict.linearizable}")
    print(f"\n  Linearizable: {verdict.linearizable}" +
          (f", witness {list(verdict.witness)}" if verdict.linearizable else ""))

    if annotate and run_config.algorithm in ("semd", "temd"):
        meta = lin_check.instrument(replayed, run_config.algorithm)
        print("\n--- Annotations ---")
        for oid in lin_check.row_order(replayed, run_config.algorithm, meta):
            m = meta.ops[oid]
            matched = meta.matches.get(oid) if m.op == "enq" else next(
                (e for e, d in meta.matches.items() if d == oid), None)
            print(f"  {m.op}#{oid}: loc {m.loc}, row {m.loc.row}, orderpt {meta.orderpt(oid)}"
                  + (f", matches #{matched}" if matched is not None else ""))
    return replayed


def run_native_stress(stress_config: StressConfig, out_dir: Optional[str] = None):
    out_dir = out_dir or config_loader.OUT_DIR
    print("=" * 60)
    print("STARTING NATIVE STRESS RUN")
    print(f"Algorithm: {stress_config.algorithm}, {stress_config.enqueuers} enqueuer thread(s), "
          f"{stress_config.dequeuers} dequeuer thread(s), window {stress_config.window_size}")
    print("=" * 60)

    print("\n--- STEP 1: Running threads ---")
    started = time.time()
    report = stress(stress_config)
    print(f"  {report.operations} operations in {report.windows} windows ({time.time() - started:.1f}s)")

    print("\n--- STEP 2: Checking windows ---")
    for panic in report.panics:
        print(f"  ❌ thread panic: {panic}")
        file_operations.log_error("native stress", panic)
    for window in report.timeouts:
        print(f"  ⚠️  checker budget exhausted in window {window}")
        file_operations.log_error("native stress", f"checker timeout in window {window}")
    for violation in report.violations:
        print(f"  ❌ window {violation['window']} is not linearizable")
        file_operations.log_error("native stress", f"window {violation['window']} is not linearizable")
    for finding in report.conservation:
        print(f"  ❌ {finding}")
    print(f"  Largest set of possible queue states carried between windows: {report.max_states}")

    path = file_operations.write_report([report.to_json()], filename="native_report.jsonl", out_dir=out_dir)
    print(f"  Report written to {path}")
    print("\n✅ All windows linearizable" if report.passed else "\n❌ Native stress run failed")
    if config_loader.NOTIFY:
        notification.notify_suite_result(f"{stress_config.algorithm} native", report.passed,
                                         len(report.violations) + len(report.panics))
    return report


def run_from_config() -> bool:
    """Run the suite described by config_loader's current settings."""
    run_config = RunConfig.build(config_loader.ALGORITHM, config_loader.ENQUEUERS, config_loader.DEQUEUERS,
                                 config_loader.ENQ_OPS, config_loader.DEQ_OPS, config_loader.CONSENSUS_MODE,
                                 config_loader.DUPLICATE_ITEMS, source=config_loader.MODE,
                                 seed=config_loader.SEED if config_loader.MODE == "random" else None)
    report = run_verification_suite(run_config, config_loader.MODE, config_loader.SEED,
                                    config_loader.MAX_SCHEDULES, config_loader.RANDOM_SCHEDULES,
                                    config_loader.MAX_TOTAL_STEPS, config_loader.CHECKER_NODE_BUDGET,
                                    config_loader.OUT_DIR, config_loader.KEEP_PASSING_TRACES,
                                    config_loader.VERBOSE, config_loader.WORKERS)
    return report.passed


# This allows running the suite directly from command line if needed
if __name__ == "__main__":
    success = run_from_config()

    if success:
        print("\n" + "=" * 60)
        print("QUEUE VERIFICATION COMPLETED SUCCESSFULLY!")
        print("=" * 60)
    else:
        print("\n" + "=" * 60)
        print("QUEUE VERIFICATION HAS FAILED.")
        print("=" * 60)
    sys.exit(0 if success else 1)
