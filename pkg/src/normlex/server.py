"""Local HTTP serving of the normalizer.

All processing stays in-process; the listening socket is the only network
activity anywhere in the package.  Request concurrency is bounded by a
semaphore over the handler threads, and error responses never carry
internal paths.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .index import UnknownLanguage
from .pipeline import SearchLevel
from .service import Normalizer

_MAX_BODY = 4 * 1024 * 1024


class NormalizeServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], normalizer: Normalizer, workers: int = 4):
        super().__init__(address, _Handler)
        self.normalizer = normalizer
        self.worker_slots = threading.BoundedSemaphore(workers)


class _Handler(BaseHTTPRequestHandler):
    server: NormalizeServer

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
        pass

    def _reply(self, status: int, payload) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802 - stdlib handler name
        if self.path == "/health":
            self._reply(200, {"status": "ok"})
        else:
            self._reply(404, {"error": "not found"})

    def do_POST(self) -> None:  # noqa: N802 - stdlib handler name
        if self.path != "/normalize":
            self._reply(404, {"error": "not found"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            self._reply(400, {"error": "bad content length"})
            return
        if length <= 0 or length > _MAX_BODY:
            self._reply(400, {"error": "bad content length"})
            return
        raw = self.rfile.read(length)
        try:
            request = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._reply(400, {"error": "malformed JSON body"})
            return

        terms = request.get("terms") if isinstance(request, dict) else None
        lang = request.get("lang") if isinstance(request, dict) else None
        if (
            not isinstance(terms, list)
            or not all(isinstance(t, str) for t in terms)
            or not isinstance(lang, str)
        ):
            self._reply(400, {"error": "body must carry terms: [str] and lang: str"})
            return
        raw_level = request.get("max_level", "BTM")
        try:
            max_level = SearchLevel(raw_level)
        except ValueError:
            self._reply(400, {"error": f"bad max_level {raw_level!r}"})
            return
        if max_level is SearchLevel.NONE:
            self._reply(400, {"error": "max_level must be ML, CL, or BTM"})
            return

        with self.server.worker_slots:
            try:
                outcomes = [
                    self.server.normalizer.normalize(term, lang, max_level)
                    for term in terms
                ]
            except UnknownLanguage as exc:
                self._reply(422, {"error": str(exc)})
                return
            except Exception:
                # never leak internals
                self._reply(500, {"error": "internal error"})
                return
        self._reply(
            200,
            [
                {
                    "term": o.term,
                    "level": o.level.value,
                    "cui": o.cui,
                    "candidates": list(o.candidates),
                }
                for o in outcomes
            ],
        )


def serve(normalizer: Normalizer, host: str, port: int, workers: int = 4) -> NormalizeServer:
    """Create a server bound to (host, port); caller runs serve_forever()."""
    return NormalizeServer((host, port), normalizer, workers=workers)
