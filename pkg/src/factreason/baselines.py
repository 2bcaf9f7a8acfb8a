"""Prompt-based comparison assessors: FactScore, FactVerify, VeriScore and DeepSeek.

Each assessor issues exactly one LLM call per atom and parses the reply with
its own grammar.  Parsing is pure and exposed separately for testing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

from . import prompts
from .errors import UnparseableReplyError
from .llm import ChatClient
from .metrics import Verdict
from .model_builder import AtomRecord, ContextRecord


@dataclass(frozen=True)
class BaselineVerdict:
    atom_id: str
    label: Verdict
    raw_reply: str


_TRUE_FALSE = re.compile(r"\b(true|false)\b", re.IGNORECASE)
_BRACKETED = re.compile(r"\[(supported|contradicted|undecided)\]", re.IGNORECASE)
_HASHED = re.compile(r"###\s*(supported|contradicted|undecided)\s*###", re.IGNORECASE)


def parse_true_false(reply: str) -> Verdict:
    m = _TRUE_FALSE.search(reply)
    if m is None:
        raise UnparseableReplyError(f"no True/False answer in {reply[:80]!r}", reply)
    return Verdict.SUPPORTED if m.group(1).lower() == "true" else Verdict.CONTRADICTED


def _last(pattern: re.Pattern, reply: str, what: str) -> Verdict:
    found = pattern.findall(reply)
    if not found:
        raise UnparseableReplyError(f"no {what} answer in {reply[:80]!r}", reply)
    return Verdict(found[-1].lower())


def parse_bracketed(reply: str) -> Verdict:
    return _last(_BRACKETED, reply, "[bracketed]")


def parse_hashed(reply: str) -> Verdict:
    return _last(_HASHED, reply, "###-delimited")


def _require_contexts(contexts: Sequence[ContextRecord]) -> None:
    if not contexts:
        raise ValueError("prompt-based assessors need at least one context")


def format_fs_contexts(contexts: Sequence[ContextRecord]) -> str:
    blocks = []
    for i, c in enumerate(contexts, start=1):
        head = f"Title: {c.title}\n" if c.title else ""
        blocks.append(f"{i}. {head}{c.text}")
    return "\n\n".join(blocks)


def format_knowledge(contexts: Sequence[ContextRecord]) -> str:
    return "\n".join(f"- {c.text}" for c in contexts)


def format_search_results(contexts: Sequence[ContextRecord]) -> str:
    blocks = []
    for i, c in enumerate(contexts, start=1):
        blocks.append(
            f"Search result {i}\nTitle: {c.title}\nContent: {c.snippet or c.content}\nLink: {c.link}"
        )
    return "\n\n".join(blocks)


def fs_prompt(atom: AtomRecord, contexts: Sequence[ContextRecord]) -> str:
    return prompts.FACTSCORE.format(contexts=format_fs_contexts(contexts), atom=atom.text)


def fv_prompt(atom: AtomRecord, contexts: Sequence[ContextRecord]) -> str:
    return prompts.FACTVERIFY.format(knowledge=format_knowledge(contexts), statement=atom.text)


def vs_prompt(atom: AtomRecord, contexts: Sequence[ContextRecord]) -> str:
    return prompts.VERISCORE.format(claim=atom.text, search_results=format_search_results(contexts))


def deepseek_prompt(atom: AtomRecord, contexts: Sequence[ContextRecord]) -> str:
    return prompts.DEEPSEEK.format(evidence=format_knowledge(contexts), statement=atom.text)


def _assess(
    build: Callable[[AtomRecord, Sequence[ContextRecord]], str],
    parse: Callable[[str], Verdict],
    atom: AtomRecord,
    contexts: Sequence[ContextRecord],
    client: ChatClient,
) -> BaselineVerdict:
    _require_contexts(contexts)
    reply = client.complete(build(atom, contexts)).text
    return BaselineVerdict(atom.atom_id, parse(reply), reply)


def fs_assess(atom: AtomRecord, contexts: Sequence[ContextRecord], client: ChatClient) -> BaselineVerdict:
    """FactScore: first True/False in the reply; never undecided."""
    return _assess(fs_prompt, parse_true_false, atom, contexts, client)


def fv_assess(atom: AtomRecord, contexts: Sequence[ContextRecord], client: ChatClient) -> BaselineVerdict:
    return _assess(fv_prompt, parse_bracketed, atom, contexts, client)


def vs_assess(atom: AtomRecord, contexts: Sequence[ContextRecord], client: ChatClient) -> BaselineVerdict:
    return _assess(vs_prompt, parse_hashed, atom, contexts, client)


def deepseek_assess(atom: AtomRecord, contexts: Sequence[ContextRecord], client: ChatClient) -> BaselineVerdict:
    return _assess(deepseek_prompt, parse_bracketed, atom, contexts, client)


ASSESSORS: dict[str, Callable[[AtomRecord, Sequence[ContextRecord], ChatClient], BaselineVerdict]] = {
    "fs": fs_assess,
    "fv": fv_assess,
    "vs": vs_assess,
    "deepseek": deepseek_assess,
}
