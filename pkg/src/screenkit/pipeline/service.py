"""HTTP job service: submit a job spec, poll its record, fetch artifacts.

One worker thread drains a FIFO queue. Every job lives in
``WORKDIR/jobs/<id>/`` with ``record.json`` (rewritten atomically) and an
``artifacts/`` directory. On start-up, jobs left ``running`` by a previous
process are marked failed and ``queued`` jobs are queued again.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import queue
import threading
import time
from collections import deque
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response

from .. import __version__
from .jobs import SCHEMA, JobError, SpecError, execute, validate

log = logging.getLogger("screenkit.service")

LOG_TAIL = 50
MEDIA = {
    ".json": "application/json", ".jsonl": "application/x-ndjson", ".csv": "text/csv",
    ".smi": "text/plain", ".png": "image/png", ".bin": "application/octet-stream",
}


def _atomic_write(path: Path, data: bytes):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class _Tail(logging.Handler):
    def __init__(self):
        super().__init__(logging.INFO)
        self.lines: deque[str] = deque(maxlen=LOG_TAIL)

    def emit(self, record):
        self.lines.append(f"{record.levelname} {record.name}: {record.getMessage()}")


class JobStore:
    """Job records on disk plus the queue and the worker that drains it."""

    def __init__(self, workdir: str | Path):
        self.workdir = Path(workdir).resolve()
        self.root = self.workdir / "jobs"
        self.root.mkdir(parents=True, exist_ok=True)
        self.lock = threading.Lock()
        self.queue: queue.Queue[str | None] = queue.Queue()
        self.worker: threading.Thread | None = None
        self._recover()

    # records
    def _dir(self, job_id: str) -> Path:
        return self.root / job_id

    def read(self, job_id: str) -> dict | None:
        if not job_id.isalnum():
            return None
        path = self._dir(job_id) / "record.json"
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def _write(self, rec: dict):
        d = self._dir(rec["id"])
        d.mkdir(parents=True, exist_ok=True)
        _atomic_write(d / "record.json", json.dumps(rec, indent=1, sort_keys=True).encode())

    def _update(self, job_id: str, **fields) -> dict:
        with self.lock:
            rec = self.read(job_id)
            rec.update(fields)
            self._write(rec)
            return rec

    def _recover(self):
        queued = []
        for path in self.root.glob("*/record.json"):
            try:
                rec = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                log.warning("skipping unreadable record %s", path)
                continue
            if rec.get("state") == "running":
                rec.update(state="failed", error="interrupted by a service restart", finished=time.time())
                self._write(rec)
            elif rec.get("state") == "queued":
                queued.append(rec)
        for rec in sorted(queued, key=lambda r: (r["created"], r["id"])):
            self.queue.put(rec["id"])

    # submission and execution
    def submit(self, spec: dict) -> dict:
        validate(spec)
        now = time.time()
        digest = hashlib.sha256(json.dumps(spec, sort_keys=True).encode() + f"|{time.time_ns()}".encode())
        rec = {
            "id": digest.hexdigest()[:16], "state": "queued", "spec": spec, "created": now,
            "started": None, "finished": None, "artifacts": [], "error": None, "log": [],
        }
        with self.lock:
            self._write(rec)
        self.queue.put(rec["id"])
        return rec

    def run_one(self, job_id: str):
        rec = self._update(job_id, state="running", started=time.time())
        tail = _Tail()
        pkg_log = logging.getLogger("screenkit")
        pkg_log.addHandler(tail)
        old_level = pkg_log.level
        if pkg_log.getEffectiveLevel() > logging.INFO:
            pkg_log.setLevel(logging.INFO)
        try:
            artifacts = execute(rec["spec"], self.workdir)
        except (JobError, SpecError) as err:
            self._update(job_id, state="failed", error=str(err), finished=time.time(), log=list(tail.lines))
            return
        except Exception as err:  # keep the worker alive whatever the job does
            log.exception("job %s crashed", job_id)
            self._update(job_id, state="failed", error=f"internal error: {err!r}", finished=time.time(),
                         log=list(tail.lines))
            return
        finally:
            pkg_log.removeHandler(tail)
            pkg_log.setLevel(old_level)
        out = self._dir(job_id) / "artifacts"
        out.mkdir(exist_ok=True)
        for name, data in artifacts.items():
            _atomic_write(out / name, data)
        self._update(job_id, state="done", artifacts=sorted(artifacts), finished=time.time(),
                     log=list(tail.lines))

    def _loop(self):
        while True:
            job_id = self.queue.get()
            if job_id is None:
                return
            self.run_one(job_id)

    def start(self):
        if self.worker is None or not self.worker.is_alive():
            self.worker = threading.Thread(target=self._loop, name="screenkit-worker", daemon=True)
            self.worker.start()

    def stop(self):
        if self.worker is not None and self.worker.is_alive():
            self.queue.put(None)
            self.worker.join()
        self.worker = None

    def wait(self, job_id: str, timeout: float = 60.0) -> dict:
        """Poll until the job finishes; handy for tests and scripts."""
        end = time.monotonic() + timeout
        while time.monotonic() < end:
            rec = self.read(job_id)
            if rec["state"] in ("done", "failed"):
                return rec
            time.sleep(0.05)
        raise TimeoutError(f"job {job_id} still {rec['state']} after {timeout}s")

    def artifact(self, job_id: str, name: str) -> Path | None:
        rec = self.read(job_id)
        if rec is None or name not in rec["artifacts"]:
            return None
        return self._dir(job_id) / "artifacts" / name


def create_app(workdir: str | Path | None = None, start_worker: bool = True) -> FastAPI:
    store = JobStore(workdir or os.environ.get("WORKDIR", "./screenkit-work"))

    @asynccontextmanager
    async def lifespan(_app):
        if start_worker:
            store.start()
        yield
        store.stop()

    app = FastAPI(title="screenkit", version=__version__, lifespan=lifespan)
    app.state.store = store

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__, "queued": store.queue.qsize()}

    @app.get("/schema")
    def schema():
        return SCHEMA

    @app.post("/jobs", status_code=202)
    async def submit(request: Request):
        try:
            spec = await request.json()
        except ValueError:
            return JSONResponse({"errors": [{"field": "/", "message": "body is not valid JSON"}]}, status_code=400)
        try:
            rec = store.submit(spec)
        except SpecError as err:
            return JSONResponse({"errors": err.errors}, status_code=400)
        return {"id": rec["id"], "state": rec["state"]}

    @app.get("/jobs/{job_id}")
    def record(job_id: str):
        rec = store.read(job_id)
        if rec is None:
            raise HTTPException(404, f"no job {job_id}")
        return rec

    @app.get("/jobs/{job_id}/artifacts/{name}")
    def artifact(job_id: str, name: str):
        if store.read(job_id) is None:
            raise HTTPException(404, f"no job {job_id}")
        path = store.artifact(job_id, name)
        if path is None:
            raise HTTPException(404, f"job {job_id} has no artifact {name}")
        return Response(path.read_bytes(), media_type=MEDIA.get(path.suffix, "application/octet-stream"))

    return app


def serve(workdir: str | Path, port: int, host: str = "127.0.0.1"):
    import uvicorn

    uvicorn.run(create_app(workdir), host=host, port=port, workers=1)
