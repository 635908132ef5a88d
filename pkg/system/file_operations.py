# ===============================
# FILE OPERATIONS
# ===============================
"""
Handles trace files, JSON-lines reports and the error log
"""
import hashlib
import json
import os
import time

from system import config_loader
from harness.history import History, HistoryError, dump_line
from harness.sim_scheduler import RunConfig, Schedule

COUNTEREXAMPLE_DIR = "counterexamples"
PASSING_DIR = "traces"
HASH_PREFIX = 16


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def trace_text(config: RunConfig, schedule: Schedule, history: History, verdict=None):
    """Header line (config, schedule, optional verdict), then one event per line."""
    header = {"config": config.to_json(), "schedule": list(schedule.steps)}
    if verdict is not None:
        header["verdict"] = verdict
    return dump_line(header) + history.to_jsonl()


def save_trace(config, schedule, history, folder, verdict=None):
    """Write a trace named by the hash of its body; returns the path."""
    text = trace_text(config, schedule, history, verdict)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:HASH_PREFIX]
    path = os.path.join(ensure_dir(folder), f"{digest}.jsonl")
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)
    return path


def save_counterexample(config, schedule, history, verdict, out_dir=None):
    out_dir = out_dir or config_loader.OUT_DIR
    return save_trace(config, schedule, history, os.path.join(out_dir, COUNTEREXAMPLE_DIR), verdict)


def save_passing_trace(config, schedule, history, out_dir=None):
    out_dir = out_dir or config_loader.OUT_DIR
    return save_trace(config, schedule, history, os.path.join(out_dir, PASSING_DIR))


def load_trace(path):
    """Read a trace file back into (header, config, schedule, history)."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            first, _, rest = f.read().partition("\n")
        header = json.loads(first)
    except (OSError, json.JSONDecodeError) as e:
        raise HistoryError(f"Could not read trace '{path}': {e}") from e
    if "config" not in header or "schedule" not in header:
        raise HistoryError(f"Trace '{path}' has no config/schedule header line")
    config = RunConfig.from_json(header["config"])
    schedule = Schedule(header["schedule"])
    return header, config, schedule, History.from_jsonl(rest)


def write_report(records, filename="report.jsonl", out_dir=None):
    """Write report records as JSON lines; returns the path."""
    out_dir = out_dir or config_loader.OUT_DIR
    path = os.path.join(ensure_dir(out_dir), filename)
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(dump_line(record))
    return path


def log_error(context, error_message, error_log=None):
    """Log error to error log file."""
    if error_log is None:
        error_log = config_loader.ERROR_LOG

    with open(error_log, 'a', encoding='utf-8') as f:
        f.write(f"--- {context} Failed ---\n")
        f.write(f"Timestamp: {time.ctime()}\n")
        f.write(f"Error: {str(error_message)}\n\n")
