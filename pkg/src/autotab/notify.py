"""Pluggable terminal-state notification: file outbox or webhook POST."""

from __future__ import annotations

import json
import os
import time

import requests

WEBHOOK_BACKOFFS = (1.0, 4.0, 9.0)


def notify(job: dict, outbox_dir: str, log=None, sleep=time.sleep) -> bool:
    """Deliver one notification for a terminal job; never raises.

    Returns True when delivered. ``sleep`` is injectable so tests can skip
    real backoff waits.
    """
    mode = (job.get("config") or {}).get("notify", {}).get("mode")
    address = (job.get("config") or {}).get("notify", {}).get("address")
    if not mode:
        return False
    payload = {
        "job_id": job["job_id"],
        "state": job["state"],
        "report_link": f"/api/v1/jobs/{job['job_id']}/report"
        if job["state"] == "succeeded" else None,
    }
    if mode == "file":
        try:
            os.makedirs(outbox_dir, exist_ok=True)
            path = os.path.join(outbox_dir, f"{job['job_id']}.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, sort_keys=True)
            return True
        except OSError as exc:
            if log:
                log("notify", f"file delivery failed: {exc}", "warn")
            return False
    # webhook: 3 retries with 1 s / 4 s / 9 s backoff
    for attempt, backoff in enumerate(WEBHOOK_BACKOFFS, start=1):
        try:
            response = requests.post(address, json=payload, timeout=10)
            if response.status_code < 400:
                return True
            raise RuntimeError(f"status {response.status_code}")
        except Exception as exc:  # noqa: BLE001 - delivery must never fail the job
            if log:
                log("notify", f"webhook attempt {attempt} failed: {exc}", "warn")
            if attempt < len(WEBHOOK_BACKOFFS):
                sleep(backoff)
    return False
