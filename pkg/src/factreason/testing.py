"""Offline stand-ins for the LLM endpoint and search providers.

:class:`RuleBasedResponder` answers every prompt template in
:mod:`factreason.prompts` with a deterministic, text-overlap rule so that the
pipeline, the baselines and the harness can be exercised without network
access.  :class:`MockChatTransport` wraps a responder in the chat-completion
wire format (including token log-probabilities) and counts requests.
"""

from __future__ import annotations

import math
import re
import string
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from . import prompts
from .errors import TransportError

_PLACEHOLDER = re.compile(r"\{(\w+)\}")


def template_pattern(template: str) -> re.Pattern:
    """Regex that matches a filled-in ``template`` and captures its placeholders."""
    parts, pos = [], 0
    for m in _PLACEHOLDER.finditer(template):
        parts.append(re.escape(template[pos : m.start()]))
        parts.append(f"(?P<{m.group(1)}>.*?)")
        pos = m.end()
    parts.append(re.escape(template[pos:]))
    return re.compile("".join(parts) + r"\Z", re.DOTALL)


_TEMPLATES = {
    name: template_pattern(getattr(prompts, name))
    for name in ("ATOMIZER", "REVISER", "NLI", "FACTSCORE", "FACTVERIFY", "VERISCORE", "DEEPSEEK")
}


def identify_prompt(prompt: str) -> tuple[str, dict[str, str]]:
    for name, pattern in _TEMPLATES.items():
        m = pattern.match(prompt)
        if m:
            return name, m.groupdict()
    raise ValueError(f"prompt matches no known template: {prompt[:60]!r}")


_NEGATIONS = {"not", "never", "no", "isn't", "wasn't", "doesn't", "didn't", "aren't", "weren't"}
_STOP = {"a", "an", "the", "is", "was", "are", "were", "of", "in", "on", "at", "to", "and", "by", "as"}
_PUNCT = str.maketrans("", "", string.punctuation.replace("'", ""))


def _content(text: str) -> tuple[frozenset[str], int]:
    words = text.lower().translate(_PUNCT).split()
    neg = sum(w in _NEGATIONS for w in words) % 2
    return frozenset(w for w in words if w not in _NEGATIONS and w not in _STOP), neg


def overlap_rule(premise: str, hypothesis: str) -> str:
    """``entailment`` when the hypothesis' content words all occur in the premise
    with the same negation parity, ``contradiction`` when the parity differs,
    ``neutral`` otherwise."""
    p_words, p_neg = _content(premise)
    h_words, h_neg = _content(hypothesis)
    if not h_words or not h_words <= p_words:
        return "neutral"
    return "entailment" if p_neg == h_neg else "contradiction"


@dataclass
class RuleBasedResponder:
    """Deterministic replies for every template.

    ``overrides`` maps ``(premise, hypothesis)`` to ``(label, p)`` and takes
    precedence over :func:`overlap_rule`; ``p_entail``/``p_contradict`` are
    the confidences encoded in the synthetic log-probabilities.
    """

    p_entail: float = 0.9
    p_contradict: float = 0.9
    overrides: Mapping[tuple[str, str], tuple[str, float]] = field(default_factory=dict)
    revise: Callable[[str], str] = staticmethod(lambda s: s)

    def nli(self, premise: str, hypothesis: str) -> tuple[str, float]:
        key = (premise.strip(), hypothesis.strip())
        if key in self.overrides:
            return self.overrides[key]
        label = overlap_rule(premise, hypothesis)
        p = {"entailment": self.p_entail, "contradiction": self.p_contradict}.get(label, 0.9)
        return label, p

    def _verdict(self, statement: str, passages: list[str]) -> str:
        labels = {self.nli(p, statement)[0] for p in passages}
        if "contradiction" in labels:
            return "Contradicted"
        if "entailment" in labels:
            return "Supported"
        return "Undecided"

    def __call__(self, prompt: str) -> tuple[str, tuple[str, float] | None]:
        """Reply text plus, for NLI prompts, the ``(label, p)`` pair behind it."""
        name, f = identify_prompt(prompt)
        if name == "ATOMIZER":
            sentences = [s for s in re.split(r"(?<=[.!?])\s+", f["paragraph"].strip()) if s]
            return "\n".join(f"- {s}" for s in sentences), None
        if name == "REVISER":
            return f"####{self.revise(f['statement'])}####", None
        if name == "NLI":
            label, p = self.nli(f["premise"], f["hypothesis"])
            return label.capitalize(), (label, p)
        if name == "FACTSCORE":
            passages = re.split(r"\n\n(?=\d+\. )", f["contexts"])
            verdict = self._verdict(f["atom"], [re.sub(r"^\d+\. (Title: .*\n)?", "", p) for p in passages])
            return ("True" if verdict == "Supported" else "False"), None
        if name == "VERISCORE":
            blocks = re.findall(r"^Content: (.*)$", f["search_results"], re.MULTILINE)
            return f"###{self._verdict(f['claim'], blocks)}###", None
        body = f["knowledge"] if name == "FACTVERIFY" else f["evidence"]
        passages = [line[2:] for line in body.splitlines() if line.startswith("- ")]
        verdict = self._verdict(f["statement"], passages)
        return f"The evidence was weighed point by point.\n[{verdict}]", None


_LABEL_TOKENS = {"entailment": ("Ent", "ailment"), "contradiction": ("Contr", "adiction"), "neutral": ("Neutral", "")}


def nli_logprobs(label: str, p: float) -> list[dict[str, Any]]:
    """Chat-completion ``logprobs.content`` for an NLI reply with confidence ``p``."""
    rest = max((1.0 - p) / 2.0, 1e-300)
    first, tail = _LABEL_TOKENS[label]
    top = [{"token": _LABEL_TOKENS[lab][0], "logprob": math.log(p if lab == label else rest)} for lab in _LABEL_TOKENS]
    content = [{"token": first, "logprob": math.log(p), "top_logprobs": top}]
    if tail:
        content.append({"token": tail, "logprob": 0.0, "top_logprobs": [{"token": tail, "logprob": 0.0}]})
    return content


class MockChatTransport:
    """A :class:`~factreason.transport.Transport` answering chat completions from a responder.

    Search endpoints are not served; use a fixture retriever alongside.
    """

    def __init__(self, responder: Callable[[str], tuple[str, Any]] | None = None):
        self.responder = responder or RuleBasedResponder()
        self.calls = 0
        self.prompts: list[str] = []
        self._lock = threading.Lock()

    def post_json(self, url: str, payload: Mapping[str, Any], headers: Mapping[str, str] | None = None) -> Any:
        if not url.endswith("/chat/completions"):
            raise TransportError(f"mock transport serves chat completions only, not {url}")
        prompt = payload["messages"][-1]["content"]
        with self._lock:
            self.calls += 1
            self.prompts.append(prompt)
        text, nli = self.responder(prompt)
        choice: dict[str, Any] = {"index": 0, "message": {"role": "assistant", "content": text}}
        if payload.get("logprobs") and nli is not None:
            choice["logprobs"] = {"content": nli_logprobs(*nli)}
        return {"choices": [choice]}

    def get_json(self, url: str, params: Mapping[str, Any] | None = None, headers=None) -> Any:
        raise TransportError(f"mock transport is offline: GET {url}")

    def get_text(self, url: str, headers=None) -> str:
        raise TransportError(f"mock transport is offline: GET {url}")


class CountingTransport:
    """Forwards to ``inner`` while counting outbound requests."""

    def __init__(self, inner):
        self.inner = inner
        self.requests = 0
        self._lock = threading.Lock()

    def _count(self):
        with self._lock:
            self.requests += 1

    def post_json(self, url, payload, headers=None):
        self._count()
        return self.inner.post_json(url, payload, headers)

    def get_json(self, url, params=None, headers=None):
        self._count()
        return self.inner.get_json(url, params, headers)

    def get_text(self, url, headers=None):
        self._count()
        return self.inner.get_text(url, headers)
