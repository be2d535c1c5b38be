"""Filesystem-backed job records with a linearizable state machine.

The index is an append-only JSON-lines journal; the latest line per job wins
on replay. Legal transitions: queued -> running -> {succeeded|failed|timed_out};
terminal states are absorbing.
"""

from __future__ import annotations

import json
import os
import threading
import time

STATES = ("queued", "running", "succeeded", "failed", "timed_out")
TERMINAL = ("succeeded", "failed", "timed_out")
_LEGAL = {
    "queued": {"running"},
    "running": {"succeeded", "failed", "timed_out"},
    "succeeded": set(),
    "failed": set(),
    "timed_out": set(),
}


class IllegalTransition(Exception):
    pass


class JobStore:
    def __init__(self, journal_path: str):
        self.journal_path = journal_path
        self._lock = threading.Lock()
        self._jobs: dict[str, dict] = {}
        if os.path.exists(journal_path):
            with open(journal_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    self._jobs[record["job_id"]] = record

    def _append(self, record: dict) -> None:
        os.makedirs(os.path.dirname(self.journal_path) or ".", exist_ok=True)
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def create(self, job_id: str, dataset_id: str, config: dict) -> dict:
        with self._lock:
            if job_id in self._jobs:
                raise ValueError(f"job {job_id} already exists")
            record = {
                "job_id": job_id,
                "dataset_id": dataset_id,
                "config": config,
                "state": "queued",
                "submitted_at": time.time(),
                "started_at": None,
                "finished_at": None,
                "error": None,
                "report_path": None,
                "notified": False,
            }
            self._jobs[job_id] = record
            self._append(record)
            return dict(record)

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            record = self._jobs.get(job_id)
            return dict(record) if record else None

    def list_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._jobs)

    def transition(self, job_id: str, new_state: str, *, error: str | None = None,
                   report_path: str | None = None) -> dict:
        if new_state not in STATES:
            raise IllegalTransition(f"unknown state {new_state!r}")
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                raise KeyError(job_id)
            current = record["state"]
            if new_state not in _LEGAL[current]:
                raise IllegalTransition(f"{current} -> {new_state}")
            record = dict(record)
            record["state"] = new_state
            now = time.time()
            if new_state == "running":
                record["started_at"] = now
            else:
                record["finished_at"] = now
                record["error"] = error
                record["report_path"] = report_path if new_state == "succeeded" else None
            self._jobs[job_id] = record
            self._append(record)
            return dict(record)

    def mark_notified(self, job_id: str) -> bool:
        """Atomically flip the notified flag; returns False if already set."""
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None or record["notified"]:
                return False
            record = dict(record)
            record["notified"] = True
            self._jobs[job_id] = record
            self._append(record)
            return True

    def requeue_interrupted(self) -> list[str]:
        """At startup, queued/running jobs are re-marked queued for a rerun."""
        requeued = []
        with self._lock:
            for job_id, record in self._jobs.items():
                if record["state"] in ("queued", "running"):
                    record = dict(record)
                    record["state"] = "queued"
                    record["started_at"] = None
                    self._jobs[job_id] = record
                    self._append(record)
                    requeued.append(job_id)
        return sorted(requeued)
