"""Evidence retrievers: Wikipedia search, Serper-compatible web search, and fixtures."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Mapping, Sequence

from loguru import logger

from .errors import TransportError
from .model_builder import CONTENT_CAP, AtomRecord, ContextRecord, ContextSource
from .transport import DiskCache, HttpTransport, RequestBudget, Transport, cached

SERPER_KEY_ENV = "FACTREASON_SERPER_KEY"
WIKIPEDIA_API = "https://en.wikipedia.org/w/api.php"
SERPER_URL = "https://google.serper.dev/search"

_DEFAULT_K = {"wikipedia": 3, "web_search": 5, "cached_fixture": 3}


@dataclass(frozen=True)
class RetrieverConfig:
    source: str = "wikipedia"
    k: int | None = None
    content_cap: int = CONTENT_CAP
    api_key: str | None = field(default=None, repr=False)
    endpoint: str | None = None
    fixture: Mapping[str, Sequence[Mapping[str, str]]] | None = None

    def __post_init__(self):
        if self.source not in _DEFAULT_K:
            raise ValueError(f"unknown retriever source {self.source!r}")
        if self.k is None:
            object.__setattr__(self, "k", _DEFAULT_K[self.source])
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.content_cap <= 0:
            raise ValueError(f"content_cap must be positive, got {self.content_cap}")
        if self.source == "cached_fixture" and self.fixture is None:
            raise ValueError("cached_fixture retrieval needs a fixture mapping")

    @classmethod
    def from_fixture_file(cls, path: str | os.PathLike, k: int | None = None) -> "RetrieverConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(source="cached_fixture", k=k, fixture=json.load(fh))


class _TextExtractor(HTMLParser):
    _SKIP = {"script", "style", "noscript", "head", "svg"}

    def __init__(self):
        super().__init__()
        self.parts: list[str] = []
        self._depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._depth += 1

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._depth:
            self._depth -= 1

    def handle_data(self, data):
        if not self._depth and data.strip():
            self.parts.append(data.strip())


def html_to_text(html: str) -> str:
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    return " ".join(parser.parts)


class Retriever:
    """Fetch up to ``k`` contexts per atom from the configured source, in provider rank order."""

    def __init__(
        self,
        config: RetrieverConfig,
        transport: Transport | None = None,
        cache: DiskCache | None = None,
        budget: RequestBudget | None = None,
    ):
        self.config = config
        self.transport = transport or HttpTransport()
        self.cache = cache
        self.budget = budget

    def _call(self, fn, *args):
        if self.budget is None:
            return fn(*args)
        with self.budget:
            return fn(*args)

    def search(self, query: str) -> list[dict[str, str]]:
        """Raw ``{title, link, snippet, content}`` hits for ``query``."""
        cfg = self.config
        if cfg.source == "cached_fixture":
            hits = cfg.fixture.get(query, ())
            return [dict(h) for h in list(hits)[: cfg.k]]
        request = {"query": query, "k": cfg.k, "cap": cfg.content_cap}
        if cfg.source == "wikipedia":
            return cached(self.cache, "wikipedia", request, lambda: self._wikipedia(query))
        return cached(self.cache, "web_search", request, lambda: self._web(query))

    def retrieve(self, atom: AtomRecord) -> list[ContextRecord]:
        default = ContextSource.WEB_SEARCH if self.config.source == "web_search" else ContextSource.WIKIPEDIA
        out = []
        for rank, hit in enumerate(self.search(atom.text)[: self.config.k]):
            content = (hit.get("content") or "")[: self.config.content_cap]
            out.append(
                ContextRecord(
                    context_id=f"{atom.atom_id}:c{rank}",
                    title=hit.get("title", ""),
                    link=hit.get("link", ""),
                    snippet=hit.get("snippet", ""),
                    content=content,
                    source=ContextSource(hit.get("source", default)),
                    retrieved_for=frozenset({atom.atom_id}),
                )
            )
        return out

    def _wikipedia(self, query: str) -> list[dict[str, str]]:
        api = self.config.endpoint or WIKIPEDIA_API
        found = self._call(
            self.transport.get_json,
            api,
            {"action": "query", "list": "search", "srsearch": query, "srlimit": self.config.k, "format": "json"},
        )
        hits = []
        for item in found.get("query", {}).get("search", [])[: self.config.k]:
            title = item["title"]
            page = self._call(
                self.transport.get_json,
                api,
                {
                    "action": "query",
                    "prop": "extracts|info",
                    "inprop": "url",
                    "explaintext": 1,
                    "redirects": 1,
                    "titles": title,
                    "format": "json",
                },
            )
            pages = list(page.get("query", {}).get("pages", {}).values())
            info = pages[0] if pages else {}
            link = info.get("fullurl") or "https://en.wikipedia.org/wiki/" + title.replace(" ", "_")
            hits.append(
                {
                    "title": title,
                    "link": link,
                    "snippet": html_to_text(item.get("snippet", "")),
                    "content": (info.get("extract") or "")[: self.config.content_cap],
                }
            )
        return hits

    def _web(self, query: str) -> list[dict[str, str]]:
        key = self.config.api_key or os.environ.get(SERPER_KEY_ENV)
        if not key:
            raise TransportError(f"web search needs an API key in ${SERPER_KEY_ENV}")
        url = self.config.endpoint or SERPER_URL
        found = self._call(
            self.transport.post_json,
            url,
            {"q": query, "num": self.config.k},
            {"X-API-KEY": key, "Content-Type": "application/json"},
        )
        hits = []
        for item in found.get("organic", [])[: self.config.k]:
            link = item.get("link", "")
            snippet = item.get("snippet", "")
            try:
                content = html_to_text(self._call(self.transport.get_text, link)) if link else ""
            except TransportError as exc:
                logger.warning("could not fetch {}: {}", link, exc)
                content = ""
            hits.append(
                {
                    "title": item.get("title", ""),
                    "link": link,
                    "snippet": snippet,
                    "content": (content or snippet)[: self.config.content_cap],
                }
            )
        return hits


def retrieve(atom: AtomRecord, retriever: Retriever) -> list[ContextRecord]:
    return retriever.retrieve(atom)
