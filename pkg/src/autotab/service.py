"""HTTP job service: dataset upload, background runs, notification, reports."""

from __future__ import annotations

import json
import os
import queue
import threading
import uuid

from fastapi import FastAPI, Request, UploadFile
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import report as report_mod
from .dataset import infer_schema, read_table
from .errors import AutotabError, ConfigError, EmptyTable, MalformedInput, StageError
from .jobstore import TERMINAL, JobStore
from .notify import notify
from .pipeline import parse_config, run_pipeline
from .runlog import RunLogger

DEFAULT_MAX_UPLOAD_BYTES = 100 * 1024 * 1024


class ServiceState:
    """Owns the data root layout, the job store, and the worker pool."""

    def __init__(self, data_root: str, workers: int = 2,
                 model_timeout_seconds: float = 120.0,
                 max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
                 start_workers: bool = True):
        self.data_root = data_root
        self.model_timeout_seconds = model_timeout_seconds
        self.max_upload_bytes = max_upload_bytes
        os.makedirs(self.datasets_dir, exist_ok=True)
        os.makedirs(self.jobs_dir, exist_ok=True)
        os.makedirs(self.outbox_dir, exist_ok=True)
        self.store = JobStore(os.path.join(data_root, "jobs.jsonl"))
        self.queue: queue.Queue[str] = queue.Queue()
        for job_id in self.store.requeue_interrupted():
            self.queue.put(job_id)
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()
        if start_workers:
            for i in range(workers):
                t = threading.Thread(target=self._worker, name=f"worker-{i}", daemon=True)
                t.start()
                self._threads.append(t)

    @property
    def datasets_dir(self) -> str:
        return os.path.join(self.data_root, "datasets")

    @property
    def jobs_dir(self) -> str:
        return os.path.join(self.data_root, "jobs")

    @property
    def outbox_dir(self) -> str:
        return os.path.join(self.data_root, "outbox")

    # --- datasets ---------------------------------------------------------

    def dataset_record_path(self, dataset_id: str) -> str:
        return os.path.join(self.datasets_dir, f"{dataset_id}.json")

    def save_dataset(self, filename: str, payload: bytes) -> dict:
        dataset_id = uuid.uuid4().hex[:12]
        suffix = ".tsv" if filename.lower().endswith(".tsv") else ".csv"
        data_path = os.path.join(self.datasets_dir, f"{dataset_id}{suffix}")
        with open(data_path, "wb") as fh:
            fh.write(payload)
        try:
            table = read_table(data_path)
            schema = infer_schema(table)
        except AutotabError:
            os.remove(data_path)
            raise
        record = {
            "dataset_id": dataset_id,
            "filename": filename,
            "bytes": len(payload),
            "schema": schema.to_dict(),
            "n_rows": table.n_rows,
            "path": data_path,
        }
        with open(self.dataset_record_path(dataset_id), "w", encoding="utf-8") as fh:
            json.dump(record, fh)
        return record

    def get_dataset(self, dataset_id: str) -> dict | None:
        path = self.dataset_record_path(dataset_id)
        if not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def list_datasets(self) -> list[dict]:
        records = []
        for name in sorted(os.listdir(self.datasets_dir)):
            if name.endswith(".json"):
                with open(os.path.join(self.datasets_dir, name), encoding="utf-8") as fh:
                    records.append(json.load(fh))
        return records

    # --- jobs -------------------------------------------------------------

    def submit_job(self, config_doc: dict) -> dict:
        config = parse_config(config_doc)
        if self.get_dataset(config.dataset_id) is None:
            raise KeyError(config.dataset_id)
        job_id = uuid.uuid4().hex[:12]
        record = self.store.create(job_id, config.dataset_id, config_doc)
        self.queue.put(job_id)
        return record

    def _worker(self) -> None:
        while not self._stop.is_set():
            try:
                job_id = self.queue.get(timeout=0.2)
            except queue.Empty:
                continue
            self.execute_job(job_id)
            self.queue.task_done()

    def execute_job(self, job_id: str) -> dict:
        """Run one job to a terminal state; safe to call synchronously in tests."""
        record = self.store.get(job_id)
        if record is None or record["state"] != "queued":
            return record
        record = self.store.transition(job_id, "running")
        job_dir = os.path.join(self.jobs_dir, job_id)
        os.makedirs(job_dir, exist_ok=True)
        log_path = os.path.join(job_dir, "run.log.jsonl")
        try:
            config = parse_config(record["config"])
            config.model_timeout_seconds = self.model_timeout_seconds
            dataset = self.get_dataset(config.dataset_id)
            table = read_table(dataset["path"])
            result = run_pipeline(config, table, log_path=log_path, run_id=job_id)
            report_dir = os.path.join(job_dir, "report")
            report_mod.render_report(result, report_dir)
            record = self.store.transition(job_id, "succeeded", report_path=report_dir)
        except StageError as exc:
            record = self.store.transition(
                job_id, "failed", error=json.dumps({"stage": exc.stage, "message": str(exc.cause)})
            )
        except Exception as exc:  # noqa: BLE001 - job isolation
            record = self.store.transition(
                job_id, "failed", error=json.dumps({"stage": "service", "message": str(exc)})
            )
        if record["state"] in TERMINAL and self.store.mark_notified(job_id):
            logger = RunLogger(job_id, path=log_path)
            notify(record, self.outbox_dir,
                   log=lambda stage, msg, level="info": logger.log(stage, msg, level))
        return self.store.get(job_id)

    def shutdown(self) -> None:
        self._stop.set()


def _job_json(record: dict) -> dict:
    out = dict(record)
    out.pop("report_path", None)
    out["report_ready"] = record["state"] == "succeeded"
    if record.get("error"):
        try:
            out["error"] = json.loads(record["error"])
        except (TypeError, json.JSONDecodeError):
            pass
    return out


def create_app(data_root: str, workers: int = 2, model_timeout_seconds: float = 120.0,
               max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES,
               start_workers: bool = True) -> FastAPI:
    state = ServiceState(
        data_root, workers=workers, model_timeout_seconds=model_timeout_seconds,
        max_upload_bytes=max_upload_bytes, start_workers=start_workers,
    )
    app = FastAPI(title="autotab")
    app.state.service = state

    @app.post("/api/v1/datasets", status_code=201)
    async def upload_dataset(file: UploadFile):
        payload = await file.read()
        if len(payload) > state.max_upload_bytes:
            return JSONResponse({"error": "TooLarge"}, status_code=413)
        try:
            record = state.save_dataset(file.filename or "upload.csv", payload)
        except EmptyTable:
            return JSONResponse({"error": "EmptyTable"}, status_code=400)
        except MalformedInput as exc:
            return JSONResponse({"error": "MalformedInput", "detail": str(exc)},
                                status_code=400)
        record.pop("path", None)
        return record

    @app.get("/api/v1/datasets")
    def list_datasets():
        return [
            {k: v for k, v in record.items() if k != "path"}
            for record in state.list_datasets()
        ]

    @app.get("/api/v1/datasets/{dataset_id}/schema")
    def dataset_schema(dataset_id: str):
        record = state.get_dataset(dataset_id)
        if record is None:
            return JSONResponse({"error": "NotFound"}, status_code=404)
        return record["schema"]

    @app.post("/api/v1/jobs", status_code=202)
    async def submit_job(request: Request):
        try:
            doc = await request.json()
        except json.JSONDecodeError:
            return JSONResponse({"error": "InvalidJSON"}, status_code=400)
        try:
            record = state.submit_job(doc)
        except ConfigError as exc:
            return JSONResponse(
                {"error": "InvalidConfig", "field": exc.field, "detail": str(exc)},
                status_code=400,
            )
        except KeyError:
            return JSONResponse({"error": "UnknownDataset"}, status_code=404)
        return _job_json(record)

    @app.get("/api/v1/jobs/{job_id}")
    def job_status(job_id: str):
        record = state.store.get(job_id)
        if record is None:
            return JSONResponse({"error": "NotFound"}, status_code=404)
        return _job_json(record)

    @app.get("/api/v1/jobs/{job_id}/report")
    def job_report(job_id: str):
        record = state.store.get(job_id)
        if record is None:
            return JSONResponse({"error": "NotFound"}, status_code=404)
        if record["state"] != "succeeded":
            return JSONResponse({"error": "NotReady", "state": record["state"]},
                                status_code=409)
        return FileResponse(os.path.join(record["report_path"], "report.json"),
                            media_type="application/json")

    @app.get("/api/v1/jobs/{job_id}/report/figures/{name}")
    def job_figure(job_id: str, name: str):
        record = state.store.get(job_id)
        if record is None or record["state"] != "succeeded":
            return JSONResponse({"error": "NotFound"}, status_code=404)
        path = os.path.join(record["report_path"], "figures", os.path.basename(name))
        if not os.path.exists(path):
            return JSONResponse({"error": "NotFound"}, status_code=404)
        return FileResponse(path, media_type="image/svg+xml")

    @app.get("/api/v1/jobs/{job_id}/log")
    def job_log(job_id: str):
        record = state.store.get(job_id)
        if record is None:
            return JSONResponse({"error": "NotFound"}, status_code=404)
        path = os.path.join(state.jobs_dir, job_id, "run.log.jsonl")
        if not os.path.exists(path):
            return PlainTextResponse("", media_type="application/x-ndjson")
        return FileResponse(path, media_type="application/x-ndjson")

    static_dir = os.environ.get(
        "AUTOTAB_STATIC_DIR",
        os.path.join(os.path.dirname(__file__), "static"),
    )
    if os.path.isdir(static_dir) and os.listdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
