import json

import httpx
import pytest

from factreason.errors import TransportError
from factreason.model_builder import AtomRecord, ContextSource
from factreason.retrieval import SERPER_KEY_ENV, Retriever, RetrieverConfig, html_to_text, retrieve
from factreason.testing import CountingTransport
from factreason.transport import DiskCache, HttpTransport


def test_config_defaults_and_validation(tmp_path):
    assert RetrieverConfig().k == 3
    assert RetrieverConfig(source="web_search").k == 5
    with pytest.raises(ValueError):
        RetrieverConfig(k=0)
    with pytest.raises(ValueError):
        RetrieverConfig(source="bing")
    with pytest.raises(ValueError):
        RetrieverConfig(source="cached_fixture")
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"q": [{"title": "t"}]}))
    assert RetrieverConfig.from_fixture_file(path, k=2).fixture == {"q": [{"title": "t"}]}


def test_html_to_text_drops_scripts():
    assert html_to_text("<p>Hello <b>world</b></p><script>x()</script>") == "Hello world"


def test_fixture_retrieval_ids_cap_and_rank():
    hits = [{"title": f"T{i}", "link": f"https://x/{i}", "content": "y" * 5000} for i in range(4)]
    cfg = RetrieverConfig(source="cached_fixture", k=2, fixture={"claim": hits}, content_cap=100)
    out = retrieve(AtomRecord("a3", "claim"), Retriever(cfg, transport=object()))
    assert [c.context_id for c in out] == ["a3:c0", "a3:c1"]
    assert len(out[0].content) == 100 and out[0].retrieved_for == {"a3"}
    assert out[1].title == "T1"


def wiki_handler(request):
    params = dict(request.url.params)
    if params.get("list") == "search":
        return httpx.Response(200, json={"query": {"search": [
            {"title": "Paris", "snippet": "<span>Capital</span> of France"},
            {"title": "France", "snippet": "Country"},
        ]}})
    title = params["titles"]
    return httpx.Response(200, json={"query": {"pages": {"1": {"fullurl": f"https://w/{title}", "extract": f"{title} article"}}}})


def test_wikipedia_search_and_cache(tmp_path):
    counting = CountingTransport(HttpTransport(client=httpx.Client(transport=httpx.MockTransport(wiki_handler))))
    cfg = RetrieverConfig(source="wikipedia", k=2)
    out = Retriever(cfg, counting, DiskCache(tmp_path)).retrieve(AtomRecord("a0", "Paris capital"))
    assert [(c.title, c.link, c.snippet, c.content) for c in out] == [
        ("Paris", "https://w/Paris", "Capital of France", "Paris article"),
        ("France", "https://w/France", "Country", "France article"),
    ]
    assert all(c.source is ContextSource.WIKIPEDIA for c in out)
    assert counting.requests == 3
    again = Retriever(cfg, counting, DiskCache(tmp_path)).retrieve(AtomRecord("a0", "Paris capital"))
    assert again == out and counting.requests == 3


def test_web_search_uses_env_key(monkeypatch):
    seen = {}

    def handler(request):
        if request.method == "POST":
            seen["key"] = request.headers["x-api-key"]
            seen["body"] = json.loads(request.content)
            return httpx.Response(200, json={"organic": [
                {"title": "A", "link": "https://a", "snippet": "sa"},
                {"title": "B", "link": "https://b", "snippet": "sb"},
            ]})
        if request.url.host == "a":
            return httpx.Response(200, text="<html><body><p>Page A</p></body></html>")
        return httpx.Response(404)

    transport = HttpTransport(max_retries=0, client=httpx.Client(transport=httpx.MockTransport(handler)))
    r = Retriever(RetrieverConfig(source="web_search", k=2), transport)
    with pytest.raises(TransportError, match=SERPER_KEY_ENV):
        monkeypatch.delenv(SERPER_KEY_ENV, raising=False)
        r.retrieve(AtomRecord("a0", "q"))
    monkeypatch.setenv(SERPER_KEY_ENV, "k123")
    out = r.retrieve(AtomRecord("a0", "q"))
    assert seen == {"key": "k123", "body": {"q": "q", "num": 2}}
    assert [c.content for c in out] == ["Page A", "sb"]  # unreachable page falls back to snippet
    assert out[0].source is ContextSource.WEB_SEARCH
