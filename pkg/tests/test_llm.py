import httpx
import pytest

from factreason.errors import TransportError
from factreason.llm import LLM_KEY_ENV, ChatClient, LLMConfig, build_request, parse_response
from factreason.testing import CountingTransport, MockChatTransport
from factreason.transport import DiskCache, HttpTransport


def test_request_shape():
    cfg = LLMConfig(endpoint="http://h/v1/", model_name="m", logprobs=True, top_logprobs=3, max_tokens=8)
    assert cfg.url == "http://h/v1/chat/completions"
    req = build_request(cfg, "hi")
    assert req == {"model": "m", "messages": [{"role": "user", "content": "hi"}], "temperature": 0.0,
                   "logprobs": True, "top_logprobs": 3, "max_tokens": 8}
    assert "logprobs" not in build_request(LLMConfig(), "hi")
    with pytest.raises(ValueError):
        LLMConfig(temperature=-1)


def test_parse_response_with_and_without_logprobs():
    data = {"choices": [{"message": {"content": "Neutral"}, "logprobs": {"content": [
        {"token": "Neutral", "logprob": -0.1, "top_logprobs": [{"token": "Neutral", "logprob": -0.1}, {"token": "Ent", "logprob": -2.5}]}
    ]}}]}
    reply = parse_response(data)
    assert reply.text == "Neutral" and reply.tokens[0].top[1] == ("Ent", -2.5)
    assert parse_response({"choices": [{"message": {"content": "x"}}]}).tokens is None
    with pytest.raises(TransportError):
        parse_response({"error": "nope"})


def test_api_key_comes_from_environment(monkeypatch):
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    monkeypatch.setenv(LLM_KEY_ENV, "secret")
    transport = HttpTransport(client=httpx.Client(transport=httpx.MockTransport(handler)))
    assert ChatClient(LLMConfig(), transport).complete("p").text == "ok"
    assert seen["auth"] == "Bearer secret"


def test_cache_makes_second_call_free(tmp_path):
    counting = CountingTransport(MockChatTransport(lambda p: (p.upper(), None)))
    first = ChatClient(LLMConfig(), counting, DiskCache(tmp_path)).complete("abc")
    second = ChatClient(LLMConfig(), counting, DiskCache(tmp_path)).complete("abc")
    assert first == second and first.text == "ABC"
    assert counting.requests == 1


def test_with_config_shares_transport():
    t = MockChatTransport(lambda p: ("x", None))
    c = ChatClient(LLMConfig(), t).with_config(model_name="other")
    assert c.transport is t and c.config.model_name == "other"
