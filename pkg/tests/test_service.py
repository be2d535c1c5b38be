import http.server
import json
import os
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from autotab.jobstore import IllegalTransition, JobStore, STATES, TERMINAL
from autotab.notify import notify
from autotab.service import create_app

DEMO = os.path.join(os.path.dirname(__file__), "..", "src", "autotab", "data", "demo.csv")

SMALL_CONFIG = {
    "task": "classification",
    "target": "outcome",
    "models": ["knn", "naive_bayes"],
    "tuning": {"enabled": False},
    "seed": 5,
}


@pytest.fixture
def client(tmp_path):
    app = create_app(str(tmp_path), workers=0, start_workers=False)
    with TestClient(app) as c:
        yield c


def upload_demo(client):
    payload = open(DEMO, "rb").read()
    r = client.post("/api/v1/datasets", files={"file": ("demo.csv", payload)})
    assert r.status_code == 201
    return r.json()["dataset_id"]


def run_job(client, config):
    r = client.post("/api/v1/jobs", json=config)
    assert r.status_code == 202, r.text
    job_id = r.json()["job_id"]
    client.app.state.service.execute_job(job_id)
    return job_id


class TestJobStore:
    def test_legal_path(self, tmp_path):
        store = JobStore(str(tmp_path / "jobs.jsonl"))
        store.create("j1", "d1", {})
        store.transition("j1", "running")
        store.transition("j1", "succeeded", report_path="/x")
        assert store.get("j1")["state"] == "succeeded"

    def test_cannot_skip_running(self, tmp_path):
        store = JobStore(str(tmp_path / "jobs.jsonl"))
        store.create("j1", "d1", {})
        with pytest.raises(IllegalTransition):
            store.transition("j1", "succeeded")

    def test_terminal_absorbing(self, tmp_path):
        store = JobStore(str(tmp_path / "jobs.jsonl"))
        store.create("j1", "d1", {})
        store.transition("j1", "running")
        store.transition("j1", "failed", error="boom")
        for state in STATES:
            with pytest.raises(IllegalTransition):
                store.transition("j1", state)

    def test_fuzz_1000_operations(self, tmp_path):
        rng = np.random.default_rng(0)
        store = JobStore(str(tmp_path / "jobs.jsonl"))
        observed = {}
        legal = {
            "queued": {"running"},
            "running": {"succeeded", "failed", "timed_out"},
        }
        for op in range(1000):
            action = rng.integers(0, 4)
            if action == 0 or not observed:
                jid = f"job{op}"
                store.create(jid, "d", {})
                observed[jid] = "queued"
            else:
                jid = list(observed)[int(rng.integers(0, len(observed)))]
                target = STATES[int(rng.integers(0, len(STATES)))]
                before = observed[jid]
                try:
                    store.transition(jid, target)
                    assert target in legal.get(before, set()), (before, target)
                    observed[jid] = target
                except IllegalTransition:
                    assert target not in legal.get(before, set())
            assert store.get(jid)["state"] == observed[jid]
        # journaled state replays identically
        replay = JobStore(str(tmp_path / "jobs.jsonl"))
        for jid, state in observed.items():
            assert replay.get(jid)["state"] == state

    def test_requeue_interrupted(self, tmp_path):
        path = str(tmp_path / "jobs.jsonl")
        store = JobStore(path)
        store.create("a", "d", {})
        store.transition("a", "running")
        store.create("b", "d", {})
        store.transition("b", "running")
        store.transition("b", "succeeded", report_path="/x")
        fresh = JobStore(path)
        requeued = fresh.requeue_interrupted()
        assert requeued == ["a"]
        assert fresh.get("a")["state"] == "queued"
        assert fresh.get("b")["state"] == "succeeded"

    def test_mark_notified_exactly_once(self, tmp_path):
        store = JobStore(str(tmp_path / "jobs.jsonl"))
        store.create("j", "d", {})
        store.transition("j", "running")
        store.transition("j", "succeeded", report_path="/x")
        assert store.mark_notified("j") is True
        assert store.mark_notified("j") is False


class TestNotify:
    def job(self, mode, address=None):
        return {"job_id": "jx", "state": "succeeded", "report_path": "/r",
                "config": {"notify": {"mode": mode, "address": address}}}

    def test_file_outbox(self, tmp_path):
        notify(self.job("file"), str(tmp_path))
        files = os.listdir(tmp_path)
        assert files == ["jx.json"]
        payload = json.load(open(tmp_path / "jx.json"))
        assert payload["job_id"] == "jx"
        assert payload["state"] == "succeeded"

    def test_webhook_delivers(self, tmp_path):
        received = []

        class Handler(http.server.BaseHTTPRequestHandler):
            def do_POST(self):
                received.append(self.rfile.read(int(self.headers["Content-Length"])))
                self.send_response(200)
                self.end_headers()

            def log_message(self, *args):
                pass

        server = http.server.HTTPServer(("127.0.0.1", 0), Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            addr = f"http://127.0.0.1:{server.server_port}/hook"
            ok = notify(self.job("webhook", addr), str(tmp_path), sleep=lambda s: None)
            assert ok
            assert len(received) == 1
            assert json.loads(received[0])["job_id"] == "jx"
        finally:
            server.shutdown()

    def test_webhook_down_three_retry_records(self, tmp_path):
        records = []
        slept = []
        ok = notify(self.job("webhook", "http://127.0.0.1:1/hook"), str(tmp_path),
                    log=lambda stage, msg, level="info": records.append((level, msg)),
                    sleep=slept.append)
        assert ok is False
        warn_records = [r for r in records if r[0] == "warn"]
        assert len(warn_records) == 3
        assert slept == [1.0, 4.0]  # no sleep after the final attempt

    def test_never_raises(self, tmp_path):
        notify(self.job("webhook", "not a url"), str(tmp_path), sleep=lambda s: None)


class TestDatasetEndpoints:
    def test_upload_and_schema(self, client):
        ds = upload_demo(client)
        r = client.get(f"/api/v1/datasets/{ds}/schema")
        assert r.status_code == 200
        kinds = {c["name"]: c["kind"] for c in r.json()["columns"]}
        assert kinds["alpha"] == "continuous"
        assert kinds["outcome"] == "binary"

    def test_schema_stable(self, client):
        ds = upload_demo(client)
        a = client.get(f"/api/v1/datasets/{ds}/schema").json()
        b = client.get(f"/api/v1/datasets/{ds}/schema").json()
        assert a == b

    def test_empty_file_error_code(self, client):
        r = client.post("/api/v1/datasets", files={"file": ("e.csv", b"")})
        assert r.status_code == 400
        assert r.json()["error"] == "EmptyTable"

    def test_unknown_dataset_404(self, client):
        assert client.get("/api/v1/datasets/zzz/schema").status_code == 404

    def test_oversize_413(self, tmp_path):
        app = create_app(str(tmp_path / "small"), workers=0, start_workers=False,
                         max_upload_bytes=100)
        with TestClient(app) as c:
            r = c.post("/api/v1/datasets", files={"file": ("big.csv", b"a,b\n" + b"1,2\n" * 200)})
            assert r.status_code == 413

    def test_listing(self, client):
        upload_demo(client)
        upload_demo(client)
        assert len(client.get("/api/v1/datasets").json()) == 2


class TestJobEndpoints:
    def test_submit_queued(self, client):
        ds = upload_demo(client)
        r = client.post("/api/v1/jobs", json=dict(SMALL_CONFIG, dataset_id=ds))
        assert r.status_code == 202
        assert r.json()["state"] == "queued"

    def test_missing_target_field_named(self, client):
        ds = upload_demo(client)
        r = client.post("/api/v1/jobs", json={"task": "classification",
                                              "dataset_id": ds})
        assert r.status_code == 400
        assert r.json()["field"] == "target"

    def test_unknown_dataset(self, client):
        r = client.post("/api/v1/jobs", json={"task": "classification",
                                              "dataset_id": "nope", "target": "t"})
        assert r.status_code == 404

    def test_queued_report_409(self, client):
        ds = upload_demo(client)
        r = client.post("/api/v1/jobs", json=dict(SMALL_CONFIG, dataset_id=ds))
        jid = r.json()["job_id"]
        assert client.get(f"/api/v1/jobs/{jid}/report").status_code == 409

    def test_successful_job_full_cycle(self, client):
        ds = upload_demo(client)
        jid = run_job(client, dict(SMALL_CONFIG, dataset_id=ds))
        status = client.get(f"/api/v1/jobs/{jid}").json()
        assert status["state"] == "succeeded"
        report = client.get(f"/api/v1/jobs/{jid}/report")
        assert report.status_code == 200
        doc = report.json()
        assert doc["winner"]["name"] in ("knn", "naive_bayes")
        log = client.get(f"/api/v1/jobs/{jid}/log")
        assert log.status_code == 200
        assert all(json.loads(line) for line in log.text.strip().splitlines())

    def test_failed_job_stage_tagged(self, client):
        ds = upload_demo(client)
        jid = run_job(client, {"task": "classification", "dataset_id": ds,
                               "target": "missing_column"})
        status = client.get(f"/api/v1/jobs/{jid}").json()
        assert status["state"] == "failed"
        assert status["error"]["stage"] == "encode"

    def test_two_jobs_independent(self, client):
        ds = upload_demo(client)
        a = client.post("/api/v1/jobs", json=dict(SMALL_CONFIG, dataset_id=ds)).json()
        b = client.post("/api/v1/jobs", json=dict(SMALL_CONFIG, dataset_id=ds)).json()
        assert a["job_id"] != b["job_id"]
        client.app.state.service.execute_job(a["job_id"])
        assert client.get(f"/api/v1/jobs/{a['job_id']}").json()["state"] == "succeeded"
        assert client.get(f"/api/v1/jobs/{b['job_id']}").json()["state"] == "queued"

    def test_notification_written_once(self, client, tmp_path):
        ds = upload_demo(client)
        jid = run_job(client, dict(SMALL_CONFIG, dataset_id=ds,
                                   notify={"mode": "file"}))
        outbox = client.app.state.service.outbox_dir
        assert os.listdir(outbox) == [f"{jid}.json"]
        # re-running a terminal job must not duplicate the notification
        client.app.state.service.execute_job(jid)
        assert os.listdir(outbox) == [f"{jid}.json"]


class TestRestartRecovery:
    def test_interrupted_job_requeued_and_identical_bytes(self, tmp_path):
        root = str(tmp_path / "svc")
        app = create_app(root, workers=0, start_workers=False)
        with TestClient(app) as client:
            ds = upload_demo(client)
            config = dict(SMALL_CONFIG, dataset_id=ds)
            jid = run_job(client, config)
            ref_bytes = client.get(f"/api/v1/jobs/{jid}/report").content

        # simulate a crash mid-rerun: journal's last word is "running"
        record = app.state.service.store.get(jid)
        record.update(state="running", finished_at=None, report_path=None)
        with open(os.path.join(root, "jobs.jsonl"), "a") as fh:
            fh.write(json.dumps(record) + "\n")

        app2 = create_app(root, workers=0, start_workers=False)
        with TestClient(app2) as client2:
            assert client2.get(f"/api/v1/jobs/{jid}").json()["state"] == "queued"
            app2.state.service.execute_job(jid)
            rerun_bytes = client2.get(f"/api/v1/jobs/{jid}/report").content
        assert rerun_bytes == ref_bytes
