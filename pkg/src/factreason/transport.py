"""HTTP plumbing shared by the LLM client and the retrievers.

* :class:`HttpTransport` wraps ``httpx`` with retry and backoff.
* :class:`DiskCache` stores immutable request/response pairs under
  ``<root>/<kind>/<2 hex>/<sha256>.json``; writes go through a temp file and
  an atomic rename so concurrent writers never expose partial entries.
* :class:`RequestBudget` caps the number of requests in flight.
* :func:`bounded_map` fans work out over threads and returns results in
  input order regardless of completion order.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Protocol, Sequence, TypeVar

import httpx
from loguru import logger

from .errors import QuotaError, TransportError

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_CONCURRENCY = 8
_RETRY_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}
_QUOTA_STATUS = {402, 429}


class Transport(Protocol):
    def post_json(self, url: str, payload: Mapping[str, Any], headers: Mapping[str, str] | None = None) -> Any: ...

    def get_json(self, url: str, params: Mapping[str, Any] | None = None, headers: Mapping[str, str] | None = None) -> Any: ...

    def get_text(self, url: str, headers: Mapping[str, str] | None = None) -> str: ...


class HttpTransport:
    def __init__(
        self,
        max_retries: int = 3,
        timeout: float = 120.0,
        backoff: float = 1.0,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.max_retries = max_retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout, follow_redirects=True)
        self._sleep = sleep

    def _request(self, method: str, url: str, **kwargs) -> httpx.Response:
        last: str = ""
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._client.request(method, url, **kwargs)
            except httpx.HTTPError as exc:
                last = f"{type(exc).__name__}: {exc}"
            else:
                if resp.status_code < 400:
                    return resp
                last = f"HTTP {resp.status_code}: {resp.text[:200]}"
                if resp.status_code == 402:
                    raise QuotaError(f"{method} {url}: {last}")
                if resp.status_code not in _RETRY_STATUS:
                    raise TransportError(f"{method} {url}: {last}")
                if resp.status_code in _QUOTA_STATUS and attempt == self.max_retries:
                    raise QuotaError(f"{method} {url}: {last}")
            if attempt < self.max_retries:
                delay = self.backoff * 2**attempt
                logger.warning("{} {} failed ({}), retrying in {:.1f}s", method, url, last, delay)
                self._sleep(delay)
        raise TransportError(f"{method} {url} failed after {self.max_retries + 1} attempts: {last}")

    def post_json(self, url, payload, headers=None):
        return self._request("POST", url, json=dict(payload), headers=dict(headers or {})).json()

    def get_json(self, url, params=None, headers=None):
        return self._request("GET", url, params=dict(params or {}), headers=dict(headers or {})).json()

    def get_text(self, url, headers=None):
        return self._request("GET", url, headers=dict(headers or {})).text


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class DiskCache:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    @staticmethod
    def key(kind: str, request: Any) -> str:
        return hashlib.sha256(f"{kind}\n{canonical_json(request)}".encode("utf-8")).hexdigest()

    def path(self, kind: str, request: Any) -> Path:
        digest = self.key(kind, request)
        return self.root / kind / digest[:2] / f"{digest}.json"

    def get(self, kind: str, request: Any) -> Any | None:
        p = self.path(kind, request)
        try:
            with open(p, encoding="utf-8") as fh:
                entry = json.load(fh)
        except FileNotFoundError:
            with self._lock:
                self.misses += 1
            return None
        with self._lock:
            self.hits += 1
        return entry["response"]

    def put(self, kind: str, request: Any, response: Any) -> None:
        p = self.path(kind, request)
        if p.exists():
            return
        p.parent.mkdir(parents=True, exist_ok=True)
        entry = {
            "request": request,
            "response": response,
            "created_at": datetime.now(timezone.utc).isoformat(),
        }
        fd, tmp = tempfile.mkstemp(dir=p.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(entry, fh, ensure_ascii=False)
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def fetch(self, kind: str, request: Any, compute: Callable[[], Any]) -> Any:
        hit = self.get(kind, request)
        if hit is not None:
            return hit
        response = compute()
        self.put(kind, request, response)
        return response


def cached(cache: DiskCache | None, kind: str, request: Any, compute: Callable[[], Any]) -> Any:
    if cache is None:
        return compute()
    return cache.fetch(kind, request, compute)


class RequestBudget:
    """Semaphore bounding outstanding outbound requests across all clients sharing it."""

    def __init__(self, limit: int = DEFAULT_CONCURRENCY):
        if limit < 1:
            raise ValueError(f"concurrency limit must be >= 1, got {limit}")
        self.limit = limit
        self._sem = threading.BoundedSemaphore(limit)

    def __enter__(self):
        self._sem.acquire()
        return self

    def __exit__(self, *exc):
        self._sem.release()
        return False


def bounded_map(fn: Callable[[T], R], items: Iterable[T], max_workers: int = DEFAULT_CONCURRENCY) -> list[R]:
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(max_workers, len(items))) as pool:
        return list(pool.map(fn, items))
