import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from queue_algorithms.base_objects import execute  # noqa: E402
from system import config_loader  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path):
    """Point outputs at tmp_path and undo any CLI overrides after each test."""
    saved = config_loader.current_settings()
    config_loader.OUT_DIR = str(tmp_path / "results")
    config_loader.ERROR_LOG = str(tmp_path / "error.txt")
    config_loader.OUTPUT_EXCEL = str(tmp_path / "suite_report.xlsx")
    config_loader.EXPORT_EXCEL = False
    config_loader.NOTIFY = False
    config_loader.KEEP_PASSING_TRACES = 0
    config_loader.WORKERS = 1
    yield
    for key, value in saved.items():
        setattr(config_loader, key, value)


def _interleavings(factory):
    """
    Every interleaving of the step machines returned by factory().
    Yields (results, context) where results[i] is machine i's return value.
    """
    pending = [()]
    while pending:
        prefix = pending.pop()
        machines, context = factory()
        steps = [None] * len(machines)
        results = [None] * len(machines)
        done = [False] * len(machines)

        def advance(i, value):
            try:
                steps[i] = machines[i].send(value)
            except StopIteration as stop:
                done[i] = True
                results[i] = stop.value

        for i in range(len(machines)):
            advance(i, None)
        trail = []

        def take(i):
            trail.append(i)
            advance(i, execute(steps[i]))

        for i in prefix:
            take(i)
        while True:
            live = [i for i in range(len(machines)) if not done[i]]
            if not live:
                yield results, context
                break
            for other in reversed(live[1:]):
                pending.append(tuple(trail) + (other,))
            take(live[0])


@pytest.fixture
def interleavings():
    return _interleavings
