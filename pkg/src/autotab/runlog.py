"""Thread-safe append-only run logging (JSON-lines)."""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass


@dataclass(frozen=True)
class LogRecord:
    timestamp: float
    run_id: str
    stage: str
    level: str  # info | warn | error
    message: str

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "run_id": self.run_id,
            "stage": self.stage,
            "level": self.level,
            "message": self.message,
        }


class RunLogger:
    """Append sink for one run: in-memory list plus an optional JSON-lines file.

    Logging must never fail the pipeline; file write errors are swallowed and
    recorded on a fallback list.
    """

    def __init__(self, run_id: str, path: str | None = None):
        self.run_id = run_id
        self.path = path
        self.records: list[LogRecord] = []
        self.fallback: list[str] = []
        self._lock = threading.Lock()
        self._last_ts = 0.0

    def log(self, stage: str, message: str, level: str = "info") -> None:
        with self._lock:
            ts = max(time.time(), self._last_ts)  # monotone within the run
            self._last_ts = ts
            record = LogRecord(ts, self.run_id, stage, level, message)
            self.records.append(record)
            if self.path:
                try:
                    with open(self.path, "a", encoding="utf-8") as fh:
                        fh.write(json.dumps(record.to_dict()) + "\n")
                except OSError as exc:
                    self.fallback.append(f"log sink error: {exc}")

    def stages(self) -> set[str]:
        return {r.stage for r in self.records}
