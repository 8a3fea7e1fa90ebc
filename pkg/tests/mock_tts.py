"""Loopback synthesis endpoint for submit tests."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from helpers import wav_bytes


class MockTts:
    """``mode``: "ok", "fail" (always 500), "flaky" (500 until ``fail_first`` hits), "bad-audio", "reject" (400)."""

    def __init__(self, mode: str = "ok", fail_first: int = 0) -> None:
        self.mode = mode
        self.fail_first = fail_first
        self.hits: dict[str, int] = {}
        self.bodies: list[dict] = []
        self.auth: list[str | None] = []
        self.in_flight = 0
        self.max_in_flight = 0
        self._lock = threading.Lock()
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), self._handler())
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/synthesize"

    def __enter__(self) -> "MockTts":
        self._thread.start()
        return self

    def __exit__(self, *exc: object) -> None:
        self._server.shutdown()
        self._server.server_close()

    def _handler(self):
        mock = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args) -> None:
                pass

            def do_POST(self) -> None:
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                uid = body["utterance_id"]
                with mock._lock:
                    mock.bodies.append(body)
                    mock.auth.append(self.headers.get("Authorization"))
                    mock.hits[uid] = n = mock.hits.get(uid, 0) + 1
                    mock.in_flight += 1
                    mock.max_in_flight = max(mock.max_in_flight, mock.in_flight)
                try:
                    if mock.mode == "fail" or (mock.mode == "flaky" and n <= mock.fail_first):
                        self._json(500, {"code": "internal", "message": "synthesis failed"})
                    elif mock.mode == "reject":
                        self._json(400, {"code": "bad-request", "message": "unknown speaker"})
                    elif mock.mode == "bad-audio":
                        self._send(200, b"<html>oops</html>", "text/html")
                    else:
                        self._send(200, wav_bytes(uid.encode()), "audio/wav")
                finally:
                    with mock._lock:
                        mock.in_flight -= 1

            def _json(self, status: int, obj: dict) -> None:
                self._send(status, json.dumps(obj).encode(), "application/json")

            def _send(self, status: int, data: bytes, ctype: str) -> None:
                self.send_response(status)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        return Handler
