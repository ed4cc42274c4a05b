"""
Thread-safe in-memory progress of running experiments.

Every training scheme of an experiment counts its finished runs separately,
so worker threads finishing runs out of order never overwrite each other.
Overall progress is the mean of the per-scheme percentages.
"""

import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, List


@dataclass
class SchemeProgress:
    scheme: str           # roster name, e.g. "overall" | "sex_race_dis_dis" | "Group1"
    runs_total: int
    runs_done: int = 0
    runs_failed: int = 0  # runs where the scheme could not be trained

    @property
    def percent(self) -> int:
        if self.runs_done >= self.runs_total:
            return 100
        return min(99, self.runs_done * 100 // self.runs_total)

    @property
    def status(self) -> str:
        if self.runs_done < self.runs_total:
            return "running"
        return "failed" if self.runs_failed == self.runs_total else "done"


@dataclass
class _ExperimentProgress:
    schemes: Dict[str, SchemeProgress] = field(default_factory=dict)
    finished: bool = False

    @property
    def percent(self) -> int:
        if self.finished or not self.schemes:
            return 100 if self.finished else 0
        values = [s.percent for s in self.schemes.values()]
        if all(v == 100 for v in values):
            return 100
        return min(99, sum(values) // len(values))


class _ProgressTracker:
    """Registry of experiments in flight, keyed by experiment name."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._experiments: Dict[str, _ExperimentProgress] = {}

    # ------------------------------------------------------------------
    # Lifecycle
    # ------------------------------------------------------------------
    def start(self, experiment: str, schemes: Iterable[str], runs: int) -> None:
        with self._lock:
            tracked = {name: SchemeProgress(scheme=name, runs_total=runs) for name in schemes}
            if runs <= 0:
                tracked = {}
            self._experiments[experiment] = _ExperimentProgress(schemes=tracked)

    def finish(self, experiment: str) -> None:
        with self._lock:
            state = self._experiments.get(experiment)
            if state is not None:
                state.finished = True

    def clear(self, experiment: str) -> None:
        with self._lock:
            self._experiments.pop(experiment, None)

    # ------------------------------------------------------------------
    # Updates from worker threads
    # ------------------------------------------------------------------
    def record_run(self, experiment: str, scheme: str, *, failed: bool = False) -> None:
        """One run of `scheme` is over; a failed run still counts as finished."""
        with self._lock:
            state = self._experiments.get(experiment)
            progress = state.schemes.get(scheme) if state is not None else None
            if progress is None:
                return
            progress.runs_done = min(progress.runs_done + 1, progress.runs_total)
            if failed:
                progress.runs_failed += 1

    # ------------------------------------------------------------------
    # Read
    # ------------------------------------------------------------------
    def snapshot(self, experiment: str) -> dict:
        """
        JSON-ready view:

        {"overall_progress": 47,
         "schemes": [{"scheme": "overall", "progress": 50, "status": "running",
                      "runs_done": 9, "failed_runs": 0}]}
        """
        with self._lock:
            state = self._experiments.get(experiment)
            if state is None:
                return {"overall_progress": 0, "schemes": []}
            schemes: List[dict] = [
                {
                    "scheme": s.scheme,
                    "progress": 100 if state.finished else s.percent,
                    "status": "done" if state.finished and s.status == "running" else s.status,
                    "runs_done": s.runs_done,
                    "failed_runs": s.runs_failed,
                }
                for s in state.schemes.values()
            ]
            return {"overall_progress": state.percent, "schemes": schemes}


# Module-level singleton
progress_tracker = _ProgressTracker()
