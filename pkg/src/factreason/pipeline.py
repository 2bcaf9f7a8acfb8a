"""Atomizer -> Reviser -> Retriever -> Evaluator orchestration."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from loguru import logger

from . import prompts
from .errors import EmptyDecompositionError, FactReasonError, QuotaError, StageError
from .inference import InferenceConfig, InferenceResult, infer
from .llm import ChatClient
from .model_builder import (
    DEFAULT_ATOM_PRIOR,
    AtomRecord,
    ContextRecord,
    FrVariant,
    RelationEdge,
    build_fr_model,
    dedup_contexts,
)
from .pgm_core import GraphicalModel
from .relations import PairKind, extract_pair_relation
from .retrieval import Retriever
from .transport import DEFAULT_CONCURRENCY, bounded_map


@dataclass(frozen=True)
class ResponseRecord:
    id: str
    prompt: str
    response: str

    def __post_init__(self):
        if not self.response.strip():
            raise ValueError(f"response {self.id!r} is empty")


@dataclass
class PipelineConfig:
    """Clients and parameters for every stage.

    ``reviser`` defaults to the atomizer's client and ``relation`` should be
    built from a :class:`~factreason.relations.RelationModelConfig` so that
    log-probabilities are requested.
    """

    atomizer: ChatClient
    relation: ChatClient
    retriever: Retriever
    reviser: ChatClient | None = None
    revise_atoms: bool = True
    atom_prior: float = DEFAULT_ATOM_PRIOR
    context_prior: float | None = None
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    max_workers: int = DEFAULT_CONCURRENCY


@dataclass
class AssessmentResult:
    atoms: list[AtomRecord]
    contexts: list[ContextRecord]
    edges: list[RelationEdge]
    marginals: dict[str, tuple[float, float]]
    variant: FrVariant
    inference: InferenceResult
    model: GraphicalModel
    relation_calls: int = 0


_BULLET = re.compile(r"^\s*-\s+(.*\S)\s*$")
_REVISED = re.compile(r"####(.*?)####", re.DOTALL)


def parse_atoms(reply: str) -> list[str]:
    """Items of a ``- `` bulleted reply, in order; other lines are ignored."""
    out = []
    for line in reply.splitlines():
        m = _BULLET.match(line)
        if m:
            out.append(m.group(1).strip())
    return out


def atomize(response: str, client: ChatClient) -> list[AtomRecord]:
    if not response.strip():
        raise ValueError("cannot atomize an empty response")
    reply = client.complete(prompts.ATOMIZER.format(paragraph=response))
    texts = parse_atoms(reply.text)
    if not texts:
        raise EmptyDecompositionError(f"atomizer reply contained no '- ' items: {reply.text[:120]!r}")
    return [AtomRecord(f"a{i}", t) for i, t in enumerate(texts)]


def parse_revision(reply: str) -> str | None:
    m = _REVISED.search(reply)
    if m is None or not m.group(1).strip():
        return None
    return m.group(1).strip()


def revise(atom: AtomRecord, enclosing_context: str, client: ChatClient) -> AtomRecord:
    reply = client.complete(prompts.REVISER.format(context=enclosing_context, statement=atom.text))
    text = parse_revision(reply.text)
    if text is None:
        logger.debug("reviser reply for {} had no ####-delimited statement", atom.atom_id)
        return AtomRecord(atom.atom_id, atom.text, atom.source_span, revision_failed=True)
    return AtomRecord(atom.atom_id, text, atom.source_span)


def _stage(name: str, ids: Sequence[str], fn, *args):
    try:
        return fn(*args)
    except (StageError, QuotaError):
        raise
    except FactReasonError as exc:
        raise StageError(name, tuple(ids), exc) from exc


def prepare_atoms(record: ResponseRecord, config: PipelineConfig) -> list[AtomRecord]:
    atoms = _stage("atomizer", (record.id,), atomize, record.response, config.atomizer)
    if not config.revise_atoms:
        return atoms
    reviser = config.reviser or config.atomizer
    return bounded_map(
        lambda a: _stage("reviser", (record.id, a.atom_id), revise, a, record.response, reviser),
        atoms,
        config.max_workers,
    )


def gather_contexts(atoms: Sequence[AtomRecord], config: PipelineConfig) -> list[ContextRecord]:
    """Per-atom retrieval, concatenated in atom order then provider rank order."""
    per_atom = bounded_map(
        lambda a: _stage("retriever", (a.atom_id,), config.retriever.retrieve, a),
        atoms,
        config.max_workers,
    )
    return [c for batch in per_atom for c in batch]


def relation_pairs(
    atoms: Sequence[AtomRecord], contexts: Sequence[ContextRecord], variant: FrVariant
) -> list[tuple[ContextRecord, AtomRecord | ContextRecord, PairKind]]:
    pairs: list[tuple[ContextRecord, AtomRecord | ContextRecord, PairKind]] = []
    if variant.name == "FR1":
        for atom in atoms:
            own = [c for c in contexts if atom.atom_id in c.retrieved_for][: variant.k_per_atom]
            pairs.extend((c, atom, PairKind.CONTEXT_ATOM) for c in own)
        return pairs
    for atom in atoms:
        pairs.extend((c, atom, PairKind.CONTEXT_ATOM) for c in contexts)
    if variant.context_pairs:
        pairs.extend((a, b, PairKind.CONTEXT_CONTEXT) for a, b in combinations(contexts, 2))
    return pairs


def _pair_id(obj: AtomRecord | ContextRecord) -> str:
    return obj.atom_id if isinstance(obj, AtomRecord) else obj.context_id


def evaluate(
    atoms: Sequence[AtomRecord],
    contexts: Sequence[ContextRecord],
    variant: FrVariant,
    config: PipelineConfig,
) -> AssessmentResult:
    """Extract relations, build the variant's model and compute atom posteriors."""
    atoms = list(atoms)
    contexts = dedup_contexts(contexts) if variant.dedups else list(contexts)
    pairs = relation_pairs(atoms, contexts, variant)

    def judge(pair):
        src, dst, kind = pair
        ids = (src.context_id, _pair_id(dst))
        return _stage("evaluator", ids, extract_pair_relation, src.text, dst.text, kind, config.relation, ids)

    edges = [e for e in bounded_map(judge, pairs, config.max_workers) if e is not None]
    calls = sum(2 if kind is PairKind.CONTEXT_CONTEXT else 1 for _, _, kind in pairs)
    model, binding = build_fr_model(atoms, contexts, edges, variant, config.atom_prior, config.context_prior)
    result = infer(model, config.inference)
    marginals = {a.atom_id: result.marginals[binding[a.atom_id]] for a in atoms}
    return AssessmentResult(atoms, contexts, edges, marginals, variant, result, model, calls)


def assess_response(record: ResponseRecord, variant: FrVariant, config: PipelineConfig) -> AssessmentResult:
    atoms = prepare_atoms(record, config)
    contexts = gather_contexts(atoms, config)
    return evaluate(atoms, contexts, variant, config)
