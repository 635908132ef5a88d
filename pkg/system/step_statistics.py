# ===============================
# STEP STATISTICS
# ===============================
"""
Collects per-operation step counts and loop iterations and aggregates them
"""
from collections import Counter

import pandas as pd

from harness.invariants import operation_rows

COLUMNS = ["op", "steps", "iterations", "replays", "bound"]


class StepStatistics:
    """
    Accumulates one row per completed operation across many histories.
    Identical rows are counted rather than stored, so exhaustive suites stay small.
    """

    def __init__(self):
        self._counts = Counter()

    def add(self, history, config):
        self._counts.update(tuple(row[c] for c in COLUMNS) for row in operation_rows(history, config))

    def merge(self, other: "StepStatistics"):
        self._counts.update(other._counts)

    def __len__(self):
        return sum(self._counts.values())

    def frame(self):
        """Distinct rows with a count column."""
        rows = [dict(zip(COLUMNS, key), count=n) for key, n in sorted(self._counts.items())]
        return pd.DataFrame(rows, columns=COLUMNS + ["count"])

    def summary(self):
        """Max and mean per operation kind, as a DataFrame indexed by op."""
        df = self.frame()
        if df.empty:
            return pd.DataFrame(columns=["op", "operations", "max_steps", "mean_steps", "bound",
                                         "max_iterations", "max_replays"])
        df["weighted_steps"] = df["steps"] * df["count"]
        grouped = df.groupby("op")
        summary = pd.DataFrame({
            "operations": grouped["count"].sum(),
            "max_steps": grouped["steps"].max(),
            "mean_steps": (grouped["weighted_steps"].sum() / grouped["count"].sum()).round(2),
            "bound": grouped["bound"].max(),
            "max_iterations": grouped["iterations"].max(),
            "max_replays": grouped["replays"].max(),
        })
        return summary.reset_index()

    def records(self):
        """Summary rows as plain dicts for the JSON-lines report."""
        return [{k: (v.item() if hasattr(v, "item") else v) for k, v in row.items()}
                for row in self.summary().to_dict(orient="records")]

    def print_summary(self):
        print("\n--- Step statistics ---")
        for row in self.records():
            print(f"  {row['op']}: {row['operations']} ops, max steps {row['max_steps']} "
                  f"(bound {row['bound']}), mean {row['mean_steps']}, "
                  f"max loop iterations {row['max_iterations']}, max replays {row['max_replays']}")
