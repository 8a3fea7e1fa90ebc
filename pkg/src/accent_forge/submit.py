"""POST TTS requests to a synthesis endpoint and store the returned WAVs.

Contract: one JSON TtsRequest per POST; a 200 reply carries RIFF/WAVE
bytes. 5xx replies and transport errors are retried with exponential
backoff; other statuses fail the request straight away.
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
import threading
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import httpx

from .pipeline import TtsRequest, read_jsonl

TOKEN_ENV = "ACCENT_FORGE_TOKEN"
DEFAULT_CONCURRENCY = 4
DEFAULT_ATTEMPTS = 3
DEFAULT_BACKOFF = 0.5

_SAFE_ID = re.compile(r"^[\w.\-]+$")

log = logging.getLogger(__name__)


class SubmitFailure(Exception):
    def __init__(self, kind: str, message: str, retryable: bool = False) -> None:
        self.kind, self.retryable = kind, retryable
        super().__init__(message)


@dataclass
class SubmitSummary:
    submitted: int = 0
    ok: int = 0
    failed: int = 0
    failures: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"submitted": self.submitted, "ok": self.ok, "failed": self.failed, "failures": self.failures}


def is_wav(data: bytes) -> bool:
    return len(data) >= 12 and data[:4] == b"RIFF" and data[8:12] == b"WAVE"


def _error_message(resp: httpx.Response) -> str:
    try:
        body = resp.json()
        return f"HTTP {resp.status_code} {body.get('code', '')}: {body.get('message', '')}".strip()
    except (ValueError, AttributeError):
        return f"HTTP {resp.status_code}"


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Submitter:
    def __init__(
        self,
        endpoint: str,
        out_dir: str | Path,
        *,
        concurrency: int = DEFAULT_CONCURRENCY,
        attempts: int = DEFAULT_ATTEMPTS,
        backoff: float = DEFAULT_BACKOFF,
        timeout: float = 30.0,
        token: str | None = None,
        client: httpx.Client | None = None,
    ) -> None:
        if concurrency < 1 or attempts < 1 or backoff < 0:
            raise ValueError("concurrency and attempts must be >= 1, backoff >= 0")
        self.endpoint = endpoint
        self.out_dir = Path(out_dir)
        self.concurrency = concurrency
        self.attempts = attempts
        self.backoff = backoff
        token = token if token is not None else os.environ.get(TOKEN_ENV)
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self._client = client or httpx.Client(timeout=timeout, headers=headers)
        self._owns_client = client is None

    def close(self) -> None:
        if self._owns_client:
            self._client.close()

    def __enter__(self) -> "Submitter":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def _post_once(self, body: dict) -> bytes:
        try:
            resp = self._client.post(self.endpoint, json=body)
        except httpx.TransportError as e:
            raise SubmitFailure("transport", f"{type(e).__name__}: {e}", retryable=True) from None
        if resp.status_code >= 500:
            raise SubmitFailure("http-status", _error_message(resp), retryable=True)
        if resp.status_code != 200:
            raise SubmitFailure("http-status", _error_message(resp))
        if not is_wav(resp.content):
            raise SubmitFailure("bad-audio", "response body is not a RIFF/WAVE file")
        return resp.content

    def submit_one(self, req: TtsRequest) -> Path:
        """Send one request with retries; returns the written WAV path."""
        body = req.to_json()
        for attempt in range(1, self.attempts + 1):
            try:
                data = self._post_once(body)
                break
            except SubmitFailure as e:
                if not e.retryable or attempt == self.attempts:
                    raise SubmitFailure(e.kind, f"{e} (attempt {attempt}/{self.attempts})") from None
                log.debug("%s: %s, retrying", req.utterance_id, e)
                time.sleep(self.backoff * 2 ** (attempt - 1))
        path = self.out_dir / f"{req.utterance_id}.wav"
        _write_atomic(path, data)
        return path

    def run(self, stream: IO[str]) -> SubmitSummary:
        """Submit every request in a TtsRequest JSONL stream.

        At most ``concurrency`` requests are in flight and at most twice
        that many are buffered. Failures are listed in input order.
        """
        self.out_dir.mkdir(parents=True, exist_ok=True)
        summary = SubmitSummary()
        results: dict[int, dict | None] = {}
        slots = threading.BoundedSemaphore(self.concurrency * 2)
        seen: set[str] = set()

        def done(idx: int, uid: str, fut: Future) -> None:
            exc = fut.exception()
            results[idx] = None if exc is None else _failure(uid, exc)
            slots.release()

        with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
            for idx, (line_no, obj) in enumerate(read_jsonl(stream)):
                summary.submitted += 1
                uid = obj.get("utterance_id") if isinstance(obj, dict) else None
                try:
                    req = TtsRequest.from_json(obj)
                    if not _SAFE_ID.match(req.utterance_id) or req.utterance_id.startswith("."):
                        raise SubmitFailure("bad-id", f"utterance_id {req.utterance_id!r} is not a safe file name")
                    if req.utterance_id in seen:
                        raise SubmitFailure("duplicate-id", f"utterance_id {req.utterance_id!r} repeats")
                except (ValueError, SubmitFailure) as e:
                    results[idx] = _failure(uid, e, line_no)
                    continue
                seen.add(req.utterance_id)
                slots.acquire()
                fut = pool.submit(self.submit_one, req)
                fut.add_done_callback(lambda f, i=idx, u=req.utterance_id: done(i, u, f))

        for idx in sorted(results):
            if results[idx] is None:
                summary.ok += 1
            else:
                summary.failed += 1
                summary.failures.append(results[idx])
        return summary


def _failure(uid: object, exc: BaseException, line_no: int | None = None) -> dict:
    if isinstance(exc, SubmitFailure):
        kind = exc.kind
    elif isinstance(exc, ValueError):
        kind = "invalid-request"
    else:
        kind = "io-error" if isinstance(exc, OSError) else type(exc).__name__
    rec = {"utterance_id": uid if isinstance(uid, str) else None, "error": kind, "message": str(exc)}
    if line_no is not None:
        rec["line"] = line_no
    return rec


def submit_file(path: str | Path, endpoint: str, out_dir: str | Path, **kwargs) -> SubmitSummary:
    with Submitter(endpoint, out_dir, **kwargs) as sub, open(path, encoding="utf-8") as f:
        return sub.run(f)


def summary_json(summary: SubmitSummary) -> str:
    return json.dumps(summary.to_json(), ensure_ascii=False, indent=2)
