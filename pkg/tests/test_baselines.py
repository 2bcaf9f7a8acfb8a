import pytest

from factreason.baselines import (
    ASSESSORS,
    deepseek_assess,
    format_fs_contexts,
    format_search_results,
    fs_assess,
    fv_assess,
    vs_assess,
)
from factreason.llm import ChatClient, LLMConfig
from factreason.metrics import Verdict
from factreason.model_builder import AtomRecord, ContextRecord
from factreason.testing import MockChatTransport, RuleBasedResponder, identify_prompt

ATOM = AtomRecord("a0", "Rome is the capital of Italy.")
SUPPORT = ContextRecord("c0", title="Rome", link="https://w/Rome", snippet="Capital city", content="Rome is the capital of Italy.")
AGAINST = ContextRecord("c1", title="Milan", link="https://w/Milan", snippet="Rome is not the capital of Italy.", content="Rome is not the capital of Italy.")
OTHER = ContextRecord("c2", title="Pizza", link="https://w/Pizza", content="Pizza is food.")


def client():
    return ChatClient(LLMConfig(), MockChatTransport(RuleBasedResponder()))


@pytest.mark.parametrize("fn, contexts, expected", [
    (fs_assess, [SUPPORT], Verdict.SUPPORTED),
    (fs_assess, [OTHER], Verdict.CONTRADICTED),  # no undecided option
    (fv_assess, [SUPPORT, OTHER], Verdict.SUPPORTED),
    (fv_assess, [OTHER], Verdict.UNDECIDED),
    (vs_assess, [AGAINST], Verdict.CONTRADICTED),
    (vs_assess, [OTHER], Verdict.UNDECIDED),
    (deepseek_assess, [SUPPORT, AGAINST], Verdict.CONTRADICTED),
    (deepseek_assess, [SUPPORT], Verdict.SUPPORTED),
])
def test_assessors_with_rule_based_llm(fn, contexts, expected):
    c = client()
    v = fn(ATOM, contexts, c)
    assert v.label is expected and v.atom_id == "a0"
    assert c.transport.calls == 1


def test_each_assessor_fills_its_own_template():
    names = {}
    for key, fn in ASSESSORS.items():
        c = client()
        fn(ATOM, [SUPPORT], c)
        names[key] = identify_prompt(c.transport.prompts[0])[0]
    assert names == {"fs": "FACTSCORE", "fv": "FACTVERIFY", "vs": "VERISCORE", "deepseek": "DEEPSEEK"}


def test_context_formatting():
    assert format_fs_contexts([SUPPORT, OTHER]) == (
        "1. Title: Rome\nRome is the capital of Italy.\n\n2. Title: Pizza\nPizza is food.")
    assert format_search_results([SUPPORT]) == (
        "Search result 1\nTitle: Rome\nContent: Capital city\nLink: https://w/Rome")


def test_requires_contexts_and_parseable_reply():
    with pytest.raises(ValueError):
        fv_assess(ATOM, [], client())
    silent = ChatClient(LLMConfig(), MockChatTransport(lambda p: ("", None)))
    from factreason.errors import UnparseableReplyError
    with pytest.raises(UnparseableReplyError):
        deepseek_assess(ATOM, [SUPPORT], silent)
