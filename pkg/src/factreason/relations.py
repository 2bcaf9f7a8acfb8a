"""LLM-backed relation extraction between pairs of utterances."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from . import prompts
from .errors import MissingLogprobsError, UnparseableReplyError
from .llm import ChatClient, LLMConfig, TokenLogprob
from .model_builder import P_STAR_MAX, P_STAR_MIN, Relation, RelationEdge


@dataclass(frozen=True)
class RelationModelConfig(LLMConfig):
    logprobs: bool = True
    fallback_p_star: float = 0.95

    def __post_init__(self):
        super().__post_init__()
        if not 0.5 < self.fallback_p_star < 1.0:
            raise ValueError(f"fallback_p_star must lie in (0.5, 1), got {self.fallback_p_star}")


class NliLabel(str, Enum):
    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class NliJudgment:
    label: NliLabel
    p_star: float
    raw_reply: str


class PairKind(str, Enum):
    CONTEXT_ATOM = "context_atom"
    CONTEXT_CONTEXT = "context_context"


_KEYWORD = re.compile(r"(entail|contradict|neutral)", re.IGNORECASE)
_STEMS = {"entail": NliLabel.ENTAILMENT, "contradict": NliLabel.CONTRADICTION, "neutral": NliLabel.NEUTRAL}


def parse_nli_label(reply: str) -> NliLabel:
    m = _KEYWORD.search(reply)
    if m is None:
        raise UnparseableReplyError(f"no NLI label in reply {reply[:80]!r}", reply)
    return _STEMS[m.group(1).lower()]


def token_label(token: str) -> NliLabel | None:
    """Label a single token stands for, e.g. ``" Ent"`` -> entailment."""
    t = token.strip().strip("'\"():*").lower()
    if len(t) < 2:
        return None
    for label in NliLabel:
        if label.value.startswith(t) or t.startswith(label.value[:6]):
            return label
    return None


def probability_from_logprobs(tokens: Sequence[TokenLogprob] | None, label: NliLabel) -> float:
    """Probability of ``label`` renormalised over the label tokens among the top alternatives.

    The first reply token that spells a label is located; its alternatives
    are grouped by the label they spell and the emitted label's share of the
    grouped mass is returned, clamped to ``[0.5, 1 - 1e-6]``.
    """
    if not tokens:
        raise MissingLogprobsError("reply carries no token log-probabilities")
    for tok in tokens:
        if token_label(tok.token) is None:
            continue
        alts = dict(tok.top)
        alts.setdefault(tok.token, tok.logprob)
        mass = {lab: 0.0 for lab in NliLabel}
        for text, lp in alts.items():
            lab = token_label(text)
            if lab is not None:
                mass[lab] += math.exp(lp)
        total = sum(mass.values())
        if mass[label] <= 0.0 or total <= 0.0:
            break
        return min(max(mass[label] / total, P_STAR_MIN), P_STAR_MAX)
    raise MissingLogprobsError(f"no alternatives for label {label.value!r} in the reply log-probabilities")


def classify_relation(premise: str, hypothesis: str, context_text: str, client: ChatClient) -> NliJudgment:
    if not premise.strip() or not hypothesis.strip():
        raise ValueError("premise and hypothesis must be non-empty")
    prompt = prompts.NLI.format(premise=premise, hypothesis=hypothesis, context=context_text or premise)
    reply = client.complete(prompt)
    label = parse_nli_label(reply.text)
    fallback = getattr(client.config, "fallback_p_star", 0.95)
    try:
        p = probability_from_logprobs(reply.tokens, label)
    except MissingLogprobsError:
        p = fallback
    return NliJudgment(label, p, reply.text)


_TO_RELATION = {NliLabel.ENTAILMENT: Relation.ENTAIL, NliLabel.CONTRADICTION: Relation.CONTRADICT}


def extract_pair_relation(
    text_a: str,
    text_b: str,
    kind: PairKind | str,
    client: ChatClient,
    ids: tuple[str, str] = ("a", "b"),
) -> RelationEdge | None:
    """Relation edge from ``text_a`` (a context) to ``text_b``, or ``None`` when neutral.

    Context-atom pairs use one call with the context as premise. Context-context
    pairs are judged in both orderings: entailment both ways is an equivalence
    at the smaller confidence, a single non-neutral ordering keeps that
    direction, and disagreeing non-neutral labels yield no edge.
    """
    kind = PairKind(kind)
    a_id, b_id = ids
    forward = classify_relation(text_a, text_b, "", client)
    if kind is PairKind.CONTEXT_ATOM:
        if forward.label is NliLabel.NEUTRAL:
            return None
        return RelationEdge(a_id, b_id, _TO_RELATION[forward.label], forward.p_star)

    backward = classify_relation(text_b, text_a, "", client)
    fl, bl = forward.label, backward.label
    if fl is NliLabel.NEUTRAL and bl is NliLabel.NEUTRAL:
        return None
    if fl is NliLabel.NEUTRAL:
        return RelationEdge(b_id, a_id, _TO_RELATION[bl], backward.p_star)
    if bl is NliLabel.NEUTRAL:
        return RelationEdge(a_id, b_id, _TO_RELATION[fl], forward.p_star)
    p = min(forward.p_star, backward.p_star)
    if fl is NliLabel.ENTAILMENT and bl is NliLabel.ENTAILMENT:
        return RelationEdge(a_id, b_id, Relation.EQUIVALENCE, p)
    if fl is NliLabel.CONTRADICTION and bl is NliLabel.CONTRADICTION:
        return RelationEdge(a_id, b_id, Relation.CONTRADICT, p)
    return None


__all__ = [
    "NliJudgment",
    "NliLabel",
    "PairKind",
    "RelationModelConfig",
    "classify_relation",
    "extract_pair_relation",
    "parse_nli_label",
    "probability_from_logprobs",
    "token_label",
]
