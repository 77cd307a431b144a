"""HTTP JSON job API: submit a query image + keywords, poll for results.

Jobs run asynchronously on a worker pool because an ingest plus O(corpus)
comparisons exceeds interactive latency; clients poll ``GET /jobs/{id}``
until the state reaches ``complete`` and then read the results, users,
sentiment and retweets views. All state lives on disk under the data root
(atomic write-then-rename), so a restarted service serves finished jobs
unchanged and re-queues the ones that were interrupted.

Layout under the data root::

    corpora/<corpus_id>/...      ingested corpora (shared across jobs)
    jobs/<job_id>/job.json       record: request, state, progress, timings
    jobs/<job_id>/query.png      the query image
    jobs/<job_id>/results.json   retrieval output (state == complete)
    jobs/<job_id>/report.json    analytics output (state == complete)
"""

from __future__ import annotations

import base64
import json
import os
import queue
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

import requests
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .analytics import build_spread_report
from .errors import NeardupError
from .imagecore import decode_image
from .ingest import ingest_corpus, load_corpus
from .methods import METHOD_NAMES, make_method
from .retrieval import ResultSet, search

TERMINAL_STATES = ("complete", "failed")


@dataclass
class ServiceConfig:
    data_root: Path
    default_source: str | None = None
    default_method: str = "improved-orb"
    default_threshold: float | None = None
    default_max_posts: int = 200
    checkpoint: str | None = None
    workers: int = 1
    threads: int = 1
    ui_dir: Path | None = None  # built web UI to serve at /


class JobStore:
    """Disk-backed job records with atomic updates."""

    def __init__(self, data_root: Path):
        self.root = Path(data_root)
        self.jobs_dir = self.root / "jobs"
        self.corpora_dir = self.root / "corpora"
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self.corpora_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def job_dir(self, job_id: str) -> Path:
        return self.jobs_dir / job_id

    def write_record(self, record: dict) -> None:
        with self._lock:
            path = self.job_dir(record["job_id"]) / "job.json"
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(record, indent=2))
            os.replace(tmp, path)

    def read_record(self, job_id: str) -> dict | None:
        path = self.job_dir(job_id) / "job.json"
        if not path.is_file():
            return None
        return json.loads(path.read_text())

    def write_artifact(self, job_id: str, name: str, payload: dict) -> None:
        path = self.job_dir(job_id) / name
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, indent=2))
        os.replace(tmp, path)

    def read_artifact(self, job_id: str, name: str) -> dict | None:
        path = self.job_dir(job_id) / name
        if not path.is_file():
            return None
        return json.loads(path.read_text())

    def all_job_ids(self) -> list[str]:
        return sorted(p.name for p in self.jobs_dir.iterdir() if p.is_dir())

    def list_corpora(self) -> list[dict]:
        out = []
        for meta_path in sorted(self.corpora_dir.glob("*/meta.json")):
            meta = json.loads(meta_path.read_text())
            posts_path = meta_path.parent / "posts.ndjson"
            n_posts = 0
            if posts_path.is_file():
                n_posts = sum(1 for line in posts_path.read_text().splitlines() if line.strip())
            out.append({"corpus_id": meta["corpus_id"], "keywords": meta.get("keywords", []),
                        "source": meta.get("source", ""),
                        "created_at": meta.get("created_at", ""),
                        "n_images": len(meta.get("images", {})), "n_posts": n_posts})
        return out

    def find_image(self, sha: str) -> Path | None:
        for hit in self.corpora_dir.glob(f"*/images/{sha}.*"):
            return hit
        return None


def result_payload(result: ResultSet, corpus) -> dict:
    """results.json body: retrieved entries with their posts and authors."""
    posts_by_id = {p.post_id: p for p in corpus.posts}
    entries = []
    for e in result.entries:
        posts = []
        for pid in e.post_ids:
            post = posts_by_id.get(pid)
            if post is None:
                continue
            posts.append({"post_id": post.post_id, "text": post.text,
                          "created_at": post.created_at, "is_retweet": post.is_retweet,
                          "username": post.author.username,
                          "display_name": post.author.display_name,
                          "profile_url": post.author.profile_url})
        entries.append({"sha256": e.sha256, "score": e.score,
                        "image_url": f"/images/{e.sha256}", "posts": posts})
    return {
        "query": result.query, "corpus_id": result.corpus_id, "method": result.method,
        "threshold": result.threshold, "corpus_size": result.corpus_size,
        "retrieved": len(result.entries), "compared": result.compared,
        "skipped": result.skipped, "reduction_pct": result.reduction_pct,
        "timings": result.timings, "entries": entries,
    }


def report_payload(report) -> dict:
    return {
        "users": [{"username": u.username, "display_name": u.display_name,
                   "description": u.description, "location": u.location,
                   "profile_image_url": u.profile_image_url,
                   "profile_url": u.profile_url, "post_count": c}
                  for u, c in report.users],
        "sentiment_pct": report.sentiment_pct,
        "retweet_pct": report.retweet_pct,
        "reduction_pct": report.reduction_pct,
        "post_count": report.post_count,
    }


class JobRunner:
    def __init__(self, store: JobStore, config: ServiceConfig):
        self.store = store
        self.config = config
        self.queue: queue.Queue = queue.Queue()
        self.workers: list[threading.Thread] = []

    def start(self) -> None:
        for _ in range(max(1, self.config.workers)):
            t = threading.Thread(target=self._worker_loop, daemon=True)
            t.start()
            self.workers.append(t)

    def enqueue(self, job_id: str) -> None:
        self.queue.put(job_id)

    def recover_interrupted(self) -> None:
        """Re-queue every non-terminal job found on disk at startup."""
        for job_id in self.store.all_job_ids():
            record = self.store.read_record(job_id)
            if record and record["state"] not in TERMINAL_STATES:
                record["state"] = "queued"
                record["progress"] = None
                self.store.write_record(record)
                self.enqueue(job_id)

    def _worker_loop(self) -> None:
        while True:
            job_id = self.queue.get()
            try:
                self._run_job(job_id)
            except Exception as exc:  # defensive: a worker must never die
                record = self.store.read_record(job_id)
                if record is not None:
                    record["state"] = "failed"
                    record["error"] = f"internal error: {exc}"
                    self.store.write_record(record)
            finally:
                self.queue.task_done()

    def _fail(self, record: dict, reason: str) -> None:
        record["state"] = "failed"
        record["error"] = reason
        self.store.write_record(record)

    def _run_job(self, job_id: str) -> None:
        record = self.store.read_record(job_id)
        if record is None or record["state"] in TERMINAL_STATES:
            return
        request = record["request"]
        job_dir = self.store.job_dir(job_id)

        # resolve the query image (upload already stored, or fetch by URL)
        query_path = job_dir / "query.png"
        if not query_path.is_file():
            url = request.get("image_url")
            try:
                resp = requests.get(url, timeout=15)
                resp.raise_for_status()
                decode_image(resp.content)
                query_path.write_bytes(resp.content)
            except Exception as exc:
                self._fail(record, f"query image fetch failed: {exc}")
                return

        record["state"] = "ingesting"
        self.store.write_record(record)
        t0 = time.perf_counter()
        tmp_dir = self.store.corpora_dir / f"tmp-{job_id}"
        try:
            corpus = ingest_corpus(request["source"], request["keywords"], tmp_dir,
                                   max_posts=request["max_posts"])
            # publish under the content-derived id; an existing corpus wins
            corpus_dir = self.store.corpora_dir / corpus.corpus_id
            if corpus_dir.exists():
                import shutil
                shutil.rmtree(tmp_dir)
            else:
                os.replace(tmp_dir, corpus_dir)
            corpus = load_corpus(corpus_dir)
        except NeardupError as exc:
            self._fail(record, f"ingest failed: {exc}")
            return
        ingest_s = time.perf_counter() - t0
        record["corpus_id"] = corpus.corpus_id
        record["state"] = "comparing"
        record["progress"] = {"done": 0, "total": len(corpus.images)}
        self.store.write_record(record)

        def on_progress(done: int, total: int) -> None:
            record["progress"] = {"done": done, "total": total}
            self.store.write_record(record)

        t1 = time.perf_counter()
        try:
            method = make_method(request["method"], threshold=request.get("threshold"),
                                 checkpoint=self.config.checkpoint)
            result = search(method, query_path, corpus,
                            threads=self.config.threads, progress=on_progress)
        except NeardupError as exc:
            self._fail(record, f"search failed: {exc}")
            return
        compare_s = time.perf_counter() - t1

        t2 = time.perf_counter()
        report = build_spread_report(result, corpus)
        analyze_s = time.perf_counter() - t2

        self.store.write_artifact(job_id, "results.json", result_payload(result, corpus))
        self.store.write_artifact(job_id, "report.json", report_payload(report))
        record["state"] = "complete"
        record["progress"] = {"done": result.compared + result.skipped,
                              "total": len(corpus.images)}
        record["timings"] = {
            "ingest_s": round(ingest_s, 6),
            "compare_s": round(compare_s, 6),
            "analyze_s": round(analyze_s, 6),
            "mean_pair_s": round(result.timings.get("mean_pair_s", 0.0), 6),
        }
        self.store.write_record(record)


def _parse_keywords(raw) -> list[str]:
    if isinstance(raw, str):
        return [k.strip() for k in raw.split(",") if k.strip()]
    if isinstance(raw, (list, tuple)):
        return [str(k).strip() for k in raw if str(k).strip()]
    return []


def create_app(config: ServiceConfig) -> FastAPI:
    store = JobStore(Path(config.data_root))
    runner = JobRunner(store, config)
    runner.recover_interrupted()
    runner.start()

    app = FastAPI(title="near-duplicate image retrieval service")
    app.state.store = store
    app.state.runner = runner

    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    def error(status: int, message: str):
        return JSONResponse(status_code=status, content={"error": message})

    @app.post("/jobs", status_code=202)
    async def submit_job(request: Request):
        content_type = request.headers.get("content-type", "")
        image_bytes = None
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            fields = {k: form[k] for k in form if k != "image"}
            upload = form.get("image")
            if upload is not None:
                image_bytes = await upload.read()
        else:
            try:
                fields = await request.json()
            except json.JSONDecodeError:
                return error(400, "body must be JSON or multipart/form-data")
            if not isinstance(fields, dict):
                return error(400, "JSON body must be an object")
            b64 = fields.get("image_b64")
            if b64:
                try:
                    image_bytes = base64.b64decode(b64)
                except ValueError:
                    return error(422, "image_b64 is not valid base64")

        keywords = _parse_keywords(fields.get("keywords"))
        if not keywords:
            return error(400, "keywords are required (comma separated or list)")
        method = str(fields.get("method") or config.default_method)
        if method not in METHOD_NAMES:
            return error(400, f"unknown method {method!r}; valid: {', '.join(METHOD_NAMES)}")
        source = fields.get("source") or config.default_source
        if not source:
            return error(400, "source feed is required (no default configured)")
        threshold = fields.get("threshold", config.default_threshold)
        threshold = float(threshold) if threshold is not None else None
        max_posts = int(fields.get("max_posts") or config.default_max_posts)
        image_url = fields.get("image_url")
        if image_bytes is None and not image_url:
            return error(400, "provide an image upload, image_b64 or image_url")

        if image_bytes is not None:
            try:
                decode_image(image_bytes)
            except NeardupError as exc:
                return error(422, f"query image is not decodable: {exc}")

        job_id = str(uuid.uuid4())
        job_dir = store.job_dir(job_id)
        job_dir.mkdir(parents=True)
        if image_bytes is not None:
            (job_dir / "query.png").write_bytes(image_bytes)
        record = {
            "job_id": job_id,
            "state": "queued",
            "progress": None,
            "error": None,
            "timings": None,
            "corpus_id": None,
            "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "request": {"keywords": keywords, "method": method, "threshold": threshold,
                        "source": str(source), "max_posts": max_posts,
                        "image_url": image_url},
        }
        store.write_record(record)
        runner.enqueue(job_id)
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def job_state(job_id: str):
        record = store.read_record(job_id)
        if record is None:
            return error(404, "unknown job")
        return record

    def artifact_endpoint(job_id: str, name: str, slicer):
        record = store.read_record(job_id)
        if record is None:
            return error(404, "unknown job")
        if record["state"] != "complete":
            return error(409, f"job is {record['state']}, not complete")
        payload = store.read_artifact(job_id, name)
        if payload is None:
            return error(409, "job artifacts missing")
        return slicer(payload)

    @app.get("/jobs/{job_id}/results")
    def job_results(job_id: str):
        return artifact_endpoint(job_id, "results.json", lambda p: p)

    @app.get("/jobs/{job_id}/users")
    def job_users(job_id: str):
        return artifact_endpoint(job_id, "report.json",
                                 lambda p: {"users": p["users"],
                                            "post_count": p["post_count"]})

    @app.get("/jobs/{job_id}/sentiment")
    def job_sentiment(job_id: str):
        return artifact_endpoint(job_id, "report.json",
                                 lambda p: {**p["sentiment_pct"],
                                            "post_count": p["post_count"]})

    @app.get("/jobs/{job_id}/retweets")
    def job_retweets(job_id: str):
        return artifact_endpoint(job_id, "report.json",
                                 lambda p: {"retweet_pct": p["retweet_pct"],
                                            "post_count": p["post_count"]})

    @app.get("/images/{sha}")
    def image_bytes(sha: str):
        path = store.find_image(sha)
        if path is None:
            return error(404, "unknown image")
        media_type = "image/png" if path.suffix == ".png" else "image/jpeg"
        return Response(content=path.read_bytes(), media_type=media_type)

    @app.get("/corpora")
    def corpora():
        return store.list_corpora()

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz():
        return "ok"

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        from fastapi.responses import FileResponse
        from fastapi.staticfiles import StaticFiles

        ui_dir = Path(config.ui_dir)

        @app.get("/")
        def ui_index():
            return FileResponse(ui_dir / "index.html")

        app.mount("/dist", StaticFiles(directory=ui_dir / "dist"), name="ui")

    return app


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port, log_level="info")
