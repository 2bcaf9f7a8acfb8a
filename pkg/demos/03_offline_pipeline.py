"""
The assessment pipeline, end to end and offline
===============================================

A long-form response goes through four stages: it is split into atoms, each
atom is made self-contained, evidence is retrieved per atom, and relations
between evidence and atoms are judged by an NLI prompt whose token
log-probabilities set the factor strength.

Here the LLM is replaced by a deterministic rule-based responder that speaks
the same chat-completion wire format, and retrieval reads from a fixture.
Point ``LLMConfig.endpoint`` at a real OpenAI-compatible server and switch the
retriever to ``wikipedia`` to run the same code against live services.
"""

import json
from pathlib import Path

from factreason import FR1, FR2, FR3
from factreason.llm import ChatClient, LLMConfig
from factreason.metrics import build_report, verdicts_from_marginals
from factreason.pipeline import PipelineConfig, ResponseRecord, assess_response
from factreason.relations import RelationModelConfig
from factreason.retrieval import Retriever, RetrieverConfig
from factreason.testing import MockChatTransport, RuleBasedResponder

HERE = Path(__file__).parent
fixture = json.loads((HERE / "data" / "fixture.json").read_text())

transport = MockChatTransport(RuleBasedResponder(p_entail=0.85, p_contradict=0.9))
config = PipelineConfig(
    atomizer=ChatClient(LLMConfig(), transport),
    relation=ChatClient(RelationModelConfig(), transport),
    retriever=Retriever(RetrieverConfig(source="cached_fixture", fixture=fixture), transport),
)

record = ResponseRecord(
    "curie",
    "Tell me a bio of Marie Curie.",
    "Marie Curie won two Nobel Prizes. Marie Curie was born in Warsaw. Marie Curie was not a physicist.",
)

# %%
for variant in (FR1, FR2, FR3):
    before = transport.calls
    result = assess_response(record, variant, config)
    report = build_report(verdicts_from_marginals(result.marginals), k=3)
    print(f"\n{variant.name}: {len(result.contexts)} contexts, {len(result.edges)} edges, "
          f"{transport.calls - before} LLM calls")
    for atom in result.atoms:
        print(f"  P={result.marginals[atom.atom_id][1]:.3f}  {atom.text}")
    print(f"  Pr={report.precision:.3f}  F1@3={report.f1_at_k:.3f}  E={report.e_measure:.4f}")
