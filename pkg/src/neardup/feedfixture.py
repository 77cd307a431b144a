"""In-process NDJSON feed + media server for tests, demos and CI.

Serves the same wire format the ingest module consumes:

* ``GET /feed?cursor=<n>`` returns a page of posts as NDJSON; while more
  pages remain the ``X-Next-Cursor`` header carries the next cursor.
* ``GET /media/<name>`` returns registered image bytes.

The server binds an ephemeral port on localhost and runs on a background
thread; use as a context manager or call start()/stop().
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse


class FixtureFeedServer:
    def __init__(self, posts: list[dict], media: dict[str, bytes] | None = None,
                 page_size: int = 10, host: str = "127.0.0.1"):
        self.posts = list(posts)
        self.media = dict(media or {})
        self.page_size = page_size
        self._host = host
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # --- lifecycle ---

    def start(self) -> str:
        handler = self._make_handler()
        self._server = ThreadingHTTPServer((self._host, 0), handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self.base_url

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self) -> "FixtureFeedServer":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def base_url(self) -> str:
        assert self._server is not None, "server not started"
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def feed_url(self) -> str:
        return f"{self.base_url}/feed"

    def media_url(self, name: str) -> str:
        return f"{self.base_url}/media/{name}"

    # --- request handling ---

    def _make_handler(self):
        fixture = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output clean
                pass

            def do_GET(self):
                parsed = urlparse(self.path)
                if parsed.path == "/feed":
                    query = parse_qs(parsed.query)
                    try:
                        cursor = int(query.get("cursor", ["0"])[0])
                    except ValueError:
                        cursor = 0
                    page = fixture.posts[cursor:cursor + fixture.page_size]
                    base = fixture.base_url
                    page = [
                        {**p, "image_urls": [u if u.startswith("http") else base + u
                                             for u in p.get("image_urls", [])]}
                        for p in page
                    ]
                    body = "\n".join(json.dumps(p) for p in page).encode()
                    self.send_response(200)
                    self.send_header("Content-Type", "application/x-ndjson")
                    self.send_header("Content-Length", str(len(body)))
                    nxt = cursor + fixture.page_size
                    if nxt < len(fixture.posts):
                        self.send_header("X-Next-Cursor", str(nxt))
                    self.end_headers()
                    self.wfile.write(body)
                    return
                if parsed.path.startswith("/media/"):
                    name = parsed.path[len("/media/"):]
                    data = fixture.media.get(name)
                    if data is None:
                        self.send_error(404, "no such media")
                        return
                    ctype = "image/png" if name.endswith(".png") else "image/jpeg"
                    self.send_response(200)
                    self.send_header("Content-Type", ctype)
                    self.send_header("Content-Length", str(len(data)))
                    self.end_headers()
                    self.wfile.write(data)
                    return
                self.send_error(404, "unknown path")

        return Handler
