"""Dataset loading, experiment runs across assessors, and report rendering."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from loguru import logger

from .baselines import ASSESSORS, BaselineVerdict
from .errors import DatasetError, FactReasonError, QuotaError
from .inference import InferenceConfig
from .llm import ChatClient, LLMConfig
from .metrics import AtomVerdict, FactualityReport, Verdict, build_report, classify_atom
from .model_builder import (
    DEFAULT_CONTEXT_PRIOR,
    AtomRecord,
    ContextRecord,
    ContextSource,
    FrVariant,
)
from .pipeline import PipelineConfig, ResponseRecord, evaluate, gather_contexts, prepare_atoms
from .relations import RelationModelConfig
from .retrieval import Retriever, RetrieverConfig
from .transport import DEFAULT_CONCURRENCY, DiskCache, RequestBudget, Transport, bounded_map

ASSESSOR_NAMES = ("fr1", "fr2", "fr3", "fs", "fv", "vs", "deepseek")
DATASET_FORMATS = ("labeled", "unlabeled", "conflicts")
REPORT_FORMATS = ("json", "csv", "markdown")
CSV_COLUMNS = ("assessor", "dataset", "S", "C", "U", "Pr", "F1atK", "E", "MAE", "Brier", "accuracy")
DEFAULT_K = 22


# ---------------------------------------------------------------- datasets


@dataclass(frozen=True)
class DatasetEntry:
    id: str
    prompt: str = ""
    response: str | None = None
    gold_atoms: tuple[tuple[str, str], ...] | None = None
    inline_contexts: tuple[tuple[str, str], ...] | None = None
    claim: str | None = None

    def __post_init__(self):
        if (self.response is None) == (self.claim is None):
            raise ValueError(f"entry {self.id!r}: exactly one of response and claim must be set")
        if self.gold_atoms is not None and self.response is None:
            raise ValueError(f"entry {self.id!r}: gold atoms need a response")


def _text(obj: Mapping, key: str, line: int, where: str = "") -> str:
    name = f"{where}{key}"
    if key not in obj:
        raise DatasetError("missing required field", line, name)
    value = obj[key]
    if not isinstance(value, str) or not value.strip():
        raise DatasetError("expected a non-empty string", line, name)
    return value


def _items(obj: Mapping, key: str, line: int) -> list:
    value = obj.get(key)
    if value is None:
        raise DatasetError("missing required field", line, key)
    if not isinstance(value, list) or not value:
        raise DatasetError("expected a non-empty list", line, key)
    return value


def _entry(obj: Any, fmt: str, line: int) -> DatasetEntry:
    if not isinstance(obj, dict):
        raise DatasetError("each line must hold a JSON object", line)
    eid = _text(obj, "id", line)
    if fmt == "conflicts":
        contexts = []
        for i, c in enumerate(_items(obj, "contexts", line)):
            where = f"contexts[{i}]."
            if not isinstance(c, dict):
                raise DatasetError("expected an object", line, f"contexts[{i}]")
            stance = c.get("stance")
            if stance not in ("support", "conflict"):
                raise DatasetError("stance must be 'support' or 'conflict'", line, where + "stance")
            contexts.append((_text(c, "text", line, where), stance))
        return DatasetEntry(eid, obj.get("prompt", "") or "", claim=_text(obj, "claim", line), inline_contexts=tuple(contexts))

    prompt = obj.get("prompt", "")
    if not isinstance(prompt, str):
        raise DatasetError("expected a string", line, "prompt")
    response = _text(obj, "response", line)
    if fmt == "unlabeled":
        return DatasetEntry(eid, prompt, response=response)
    atoms = []
    for i, a in enumerate(_items(obj, "atoms", line)):
        where = f"atoms[{i}]."
        if not isinstance(a, dict):
            raise DatasetError("expected an object", line, f"atoms[{i}]")
        text = _text(a, "text", line, where)
        if "label" not in a:
            raise DatasetError("missing required field", line, where + "label")
        if a["label"] not in ("S", "NS"):
            raise DatasetError("label must be 'S' or 'NS'", line, where + "label")
        atoms.append((text, a["label"]))
    return DatasetEntry(eid, prompt, response=response, gold_atoms=tuple(atoms))


def load_dataset(path: str | os.PathLike, format: str) -> list[DatasetEntry]:
    """Parse a JSON-Lines dataset; every error names its 1-based line (and field)."""
    if format not in DATASET_FORMATS:
        raise ValueError(f"unknown dataset format {format!r}; expected one of {DATASET_FORMATS}")
    entries: list[DatasetEntry] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON: {exc.msg} (column {exc.colno})", line_no) from None
            entry = _entry(obj, format, line_no)
            if entry.id in seen:
                raise DatasetError(f"duplicate id {entry.id!r}", line_no, "id")
            seen.add(entry.id)
            entries.append(entry)
    return entries


# ---------------------------------------------------------------- runs


@dataclass(frozen=True)
class RunConfig:
    """Everything one experiment run needs.

    ``llm`` serves the atomizer, the reviser and the prompt-based assessors;
    ``relation_llm`` (log-probabilities on) serves relation extraction and
    defaults to ``llm``'s endpoint and model.
    """

    assessor: str = "fr2"
    K: int = DEFAULT_K
    retriever: RetrieverConfig = field(default_factory=RetrieverConfig)
    atom_prior: float = 0.5
    context_prior: float | None = None
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    llm: LLMConfig = field(default_factory=LLMConfig)
    relation_llm: RelationModelConfig | None = None
    cache_dir: str | None = None
    seed: int = 0
    concurrency: int = DEFAULT_CONCURRENCY
    revise_atoms: bool = True
    dataset: str = "dataset"

    def __post_init__(self):
        if self.assessor not in ASSESSOR_NAMES:
            raise ValueError(f"unknown assessor {self.assessor!r}; expected one of {ASSESSOR_NAMES}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.concurrency < 1:
            raise ValueError(f"concurrency must be >= 1, got {self.concurrency}")
        for name, value in (("atom_prior", self.atom_prior), ("context_prior", self.context_prior)):
            if value is not None and not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if self.relation_llm is None:
            rel = RelationModelConfig(
                endpoint=self.llm.endpoint,
                model_name=self.llm.model_name,
                temperature=self.llm.temperature,
                max_retries=self.llm.max_retries,
            )
            object.__setattr__(self, "relation_llm", rel)
        object.__setattr__(self, "inference", replace(self.inference, seed=self.seed))

    @property
    def is_fr(self) -> bool:
        return self.assessor.startswith("fr")


@dataclass(frozen=True)
class EntryResult:
    entry_id: str
    report: FactualityReport | None = None
    atoms: tuple[AtomRecord, ...] = ()
    baseline: tuple[BaselineVerdict, ...] | None = None
    correct: bool | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class ExperimentResult:
    assessor: str
    dataset: str
    format: str
    K: int
    entries: tuple[EntryResult, ...]
    aggregate: Mapping[str, float | int | None]


def _inline_contexts(entry: DatasetEntry, atom: AtomRecord, prior: float, cap: int) -> list[ContextRecord]:
    return [
        ContextRecord(
            context_id=f"{atom.atom_id}:c{i}",
            title="",
            link="",
            snippet="",
            content=text[:cap],
            source=ContextSource.INLINE,
            prior_true=prior,
            retrieved_for=frozenset({atom.atom_id}),
        )
        for i, (text, _stance) in enumerate(entry.inline_contexts or ())
    ]


class _Runner:
    def __init__(self, config: RunConfig, transport: Transport | None):
        self.config = config
        cache = DiskCache(config.cache_dir) if config.cache_dir else None
        budget = RequestBudget(config.concurrency)
        self.chat = ChatClient(config.llm, transport, cache, budget)
        self.relation = ChatClient(config.relation_llm, self.chat.transport, cache, budget)
        self.pipeline = PipelineConfig(
            atomizer=self.chat,
            relation=self.relation,
            retriever=Retriever(config.retriever, self.chat.transport, cache, budget),
            revise_atoms=config.revise_atoms,
            atom_prior=config.atom_prior,
            context_prior=config.context_prior,
            inference=config.inference,
            max_workers=config.concurrency,
        )
        self.variant = FrVariant(config.assessor.upper(), config.retriever.k) if config.is_fr else None

    def atoms_and_contexts(self, entry: DatasetEntry) -> tuple[list[AtomRecord], list[ContextRecord]]:
        if entry.claim is not None:
            atom = AtomRecord("a0", entry.claim)
            prior = self.config.context_prior if self.config.context_prior is not None else DEFAULT_CONTEXT_PRIOR
            return [atom], _inline_contexts(entry, atom, prior, self.config.retriever.content_cap)
        if entry.gold_atoms is not None:
            atoms = [AtomRecord(f"a{i}", text) for i, (text, _) in enumerate(entry.gold_atoms)]
        else:
            atoms = prepare_atoms(ResponseRecord(entry.id, entry.prompt, entry.response), self.pipeline)
        return atoms, gather_contexts(atoms, self.pipeline)

    def run(self, entry: DatasetEntry) -> EntryResult:
        try:
            atoms, contexts = self.atoms_and_contexts(entry)
            if self.variant is not None:
                result = evaluate(atoms, contexts, self.variant, self.pipeline)
                verdicts = [AtomVerdict(a.atom_id, classify_atom(result.marginals[a.atom_id][1]), result.marginals[a.atom_id][1]) for a in atoms]
                baseline = None
            else:
                assess = ASSESSORS[self.config.assessor]

                def one(atom: AtomRecord) -> BaselineVerdict:
                    own = [c for c in contexts if atom.atom_id in c.retrieved_for]
                    return assess(atom, own, self.chat)

                baseline = tuple(bounded_map(one, atoms, self.config.concurrency))
                verdicts = [AtomVerdict(b.atom_id, b.label) for b in baseline]
            gold = [label == "S" for _, label in entry.gold_atoms] if entry.gold_atoms is not None else None
            report = build_report(verdicts, self.config.K, gold)
            correct = verdicts[0].label is Verdict.SUPPORTED if entry.claim is not None else None
            return EntryResult(entry.id, report, tuple(atoms), baseline, correct)
        except QuotaError:
            raise
        except (FactReasonError, ValueError) as exc:
            logger.warning("entry {} failed: {}", entry.id, exc)
            return EntryResult(entry.id, error=f"{type(exc).__name__}: {exc}")


def _mean(values: Iterable[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    return math.fsum(vals) / len(vals) if vals else None


def aggregate(entries: Sequence[EntryResult], conflicts: bool) -> dict[str, float | int | None]:
    """Arithmetic means over the successful entries; F1@K is not reported for single-claim datasets."""
    ok = [e for e in entries if e.ok]
    reports = [e.report for e in ok]
    out: dict[str, float | int | None] = {
        "entries": len(entries),
        "failed": len(entries) - len(ok),
        "S": _mean(r.supported for r in reports),
        "C": _mean(r.contradicted for r in reports),
        "U": _mean(r.undecided for r in reports),
        "Pr": _mean(r.precision for r in reports),
        "RatK": None if conflicts else _mean(r.recall_at_k for r in reports),
        "F1atK": None if conflicts else _mean(r.f1_at_k for r in reports),
        "E": _mean(r.e_measure for r in reports),
        "MAE": _mean(r.mae for r in reports),
        "Brier": _mean(r.brier for r in reports),
        "accuracy": _mean(float(e.correct) for e in ok) if conflicts else None,
    }
    return out


def run_experiment(
    entries: Sequence[DatasetEntry],
    config: RunConfig,
    transport: Transport | None = None,
) -> ExperimentResult:
    """Assess every entry with ``config.assessor``; failures are recorded per entry.

    A :class:`~factreason.errors.QuotaError` aborts the run so it can be
    resumed later from the cache.
    """
    runner = _Runner(config, transport)
    results = bounded_map(runner.run, entries, config.concurrency)
    results.sort(key=lambda r: r.entry_id)
    conflicts = any(e.claim is not None for e in entries)
    fmt = "conflicts" if conflicts else ("labeled" if any(e.gold_atoms for e in entries) else "unlabeled")
    return ExperimentResult(config.assessor, config.dataset, fmt, config.K, tuple(results), aggregate(results, conflicts))


# ---------------------------------------------------------------- reports


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def canonical_json(obj: Any) -> str:
    """JSON with sorted keys, no insignificant whitespace, and every float to 6 decimals."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Mapping):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k, ensure_ascii=False)}:{canonical_json(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def entry_to_dict(entry: EntryResult) -> dict[str, Any]:
    out: dict[str, Any] = {"id": entry.entry_id, "error": entry.error, "correct": entry.correct}
    r = entry.report
    if r is None:
        return out
    texts = {a.atom_id: a.text for a in entry.atoms}
    out["metrics"] = {
        "S": r.supported,
        "C": r.contradicted,
        "U": r.undecided,
        "Pr": r.precision,
        "RatK": r.recall_at_k,
        "F1atK": r.f1_at_k,
        "E": r.e_measure,
        "MAE": r.mae,
        "Brier": r.brier,
        "truth_precision": r.truth_precision,
    }
    out["atoms"] = [
        {"id": v.atom_id, "text": texts.get(v.atom_id, ""), "label": v.label.value, "p_true": v.p_true}
        for v in r.verdicts
    ]
    return out


def result_to_dict(result: ExperimentResult) -> dict[str, Any]:
    return {
        "assessor": result.assessor,
        "dataset": result.dataset,
        "format": result.format,
        "K": result.K,
        "aggregate": dict(result.aggregate),
        "entries": [entry_to_dict(e) for e in result.entries],
    }


def _row(result: ExperimentResult) -> dict[str, Any]:
    agg = result.aggregate
    row = {"assessor": result.assessor, "dataset": result.dataset}
    row.update({c: agg.get(c) for c in CSV_COLUMNS[2:]})
    return row


def render_report(results: ExperimentResult | Sequence[ExperimentResult], format: str) -> str:
    runs = [results] if isinstance(results, ExperimentResult) else list(results)
    if not runs:
        raise ValueError("cannot render an empty result set")
    if format == "json":
        return canonical_json({"runs": [result_to_dict(r) for r in runs]}) + "\n"
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in runs:
            row = _row(r)
            writer.writerow(["" if row[c] is None else (_fmt_float(row[c]) if isinstance(row[c], float) else row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()
    if format == "markdown":
        lines = ["| " + " | ".join(CSV_COLUMNS) + " |", "|" + "---|" * len(CSV_COLUMNS)]
        for r in runs:
            row = _row(r)
            cells = ["-" if row[c] is None else (f"{row[c]:.3f}" if isinstance(row[c], float) else str(row[c])) for c in CSV_COLUMNS]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}; expected one of {REPORT_FORMATS}")


def write_report(results: ExperimentResult | Sequence[ExperimentResult], path: str | os.PathLike, format: str = "json") -> None:
    text = render_report(results, format)
    Path(path).write_text(text, encoding="utf-8")
