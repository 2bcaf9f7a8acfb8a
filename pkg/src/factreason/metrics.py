"""Factuality measures computed from per-atom posteriors or verdict labels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

UNDECIDED_TOLERANCE = 1e-6
E_MEASURE_FLOOR = 1e-12


class Verdict(str, Enum):
    SUPPORTED = "supported"
    CONTRADICTED = "contradicted"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class AtomVerdict:
    atom_id: str
    label: Verdict
    p_true: float | None = None


def classify_atom(p_true: float, tolerance: float = UNDECIDED_TOLERANCE) -> Verdict:
    """Supported above ``0.5 + tolerance``, contradicted below ``0.5 - tolerance``."""
    if p_true > 0.5 + tolerance:
        return Verdict.SUPPORTED
    if p_true < 0.5 - tolerance:
        return Verdict.CONTRADICTED
    return Verdict.UNDECIDED


def verdicts_from_marginals(marginals: Mapping[str, tuple[float, float]]) -> list[AtomVerdict]:
    return [AtomVerdict(aid, classify_atom(pt), pt) for aid, (_, pt) in marginals.items()]


def _labels(verdicts: Iterable[AtomVerdict | Verdict]) -> list[Verdict]:
    return [v.label if isinstance(v, AtomVerdict) else Verdict(v) for v in verdicts]


def count_labels(verdicts: Iterable[AtomVerdict | Verdict]) -> tuple[int, int, int]:
    labels = _labels(verdicts)
    return (
        labels.count(Verdict.SUPPORTED),
        labels.count(Verdict.CONTRADICTED),
        labels.count(Verdict.UNDECIDED),
    )


def _check(n: int, k: int | None = None) -> None:
    if n < 1:
        raise ValueError("factuality measures need at least one atom")
    if k is not None and k < 1:
        raise ValueError(f"K must be >= 1, got {k}")


def precision(verdicts: Sequence[AtomVerdict | Verdict]) -> float:
    _check(len(verdicts))
    s, _, _ = count_labels(verdicts)
    return s / len(verdicts)


def recall_at_k(verdicts: Sequence[AtomVerdict | Verdict], k: int) -> float:
    _check(len(verdicts), k)
    s, _, _ = count_labels(verdicts)
    return min(s / k, 1.0)


def f1_at_k(verdicts: Sequence[AtomVerdict | Verdict], k: int) -> float:
    _check(len(verdicts), k)
    s, _, _ = count_labels(verdicts)
    if s == 0:
        return 0.0
    pr = s / len(verdicts)
    rk = min(s / k, 1.0)
    return 2 * pr * rk / (pr + rk)


def e_measure(p_trues: Sequence[float], eps: float = E_MEASURE_FLOOR) -> float:
    """Mean of ``-p * log10(p)`` over atoms; ``p`` is floored at ``eps`` inside the log.

    All-undecided responses score ``0.150515`` and fully supported ones ``0``.
    Note ``-p log p`` vanishes as ``p -> 0`` as well, so atoms that are
    certainly false also score close to zero under this formula.
    """
    if len(p_trues) == 0:
        raise ValueError("e_measure needs at least one atom")
    total = 0.0
    for p in p_trues:
        total += -p * math.log10(min(max(p, eps), 1.0))
    return total / len(p_trues)


def mae(predicted: Sequence[float], truth: Sequence[float]) -> float:
    if len(predicted) != len(truth):
        raise ValueError(f"length mismatch: {len(predicted)} predictions vs {len(truth)} truths")
    if not predicted:
        raise ValueError("mae needs at least one pair")
    return sum(abs(a - b) for a, b in zip(predicted, truth)) / len(predicted)


def brier(p_trues: Sequence[float], labels: Sequence[bool]) -> float:
    if len(p_trues) != len(labels):
        raise ValueError(f"length mismatch: {len(p_trues)} probabilities vs {len(labels)} labels")
    if not p_trues:
        raise ValueError("brier needs at least one pair")
    return sum((p - float(bool(y))) ** 2 for p, y in zip(p_trues, labels)) / len(p_trues)


@dataclass(frozen=True)
class FactualityReport:
    verdicts: tuple[AtomVerdict, ...]
    supported: int
    contradicted: int
    undecided: int
    precision: float
    recall_at_k: float
    f1_at_k: float
    k: int
    e_measure: float | None = None
    truth_precision: float | None = None
    mae: float | None = None
    brier: float | None = None
    extra: Mapping[str, float] = field(default_factory=dict)


def build_report(
    verdicts: Sequence[AtomVerdict],
    k: int,
    gold_labels: Sequence[bool] | None = None,
) -> FactualityReport:
    """Aggregate one response's verdicts; posterior-based fields need ``p_true`` on every verdict."""
    verdicts = tuple(verdicts)
    s, c, u = count_labels(verdicts)
    probs = [v.p_true for v in verdicts]
    has_probs = all(p is not None for p in probs)
    pr = precision(verdicts)
    truth_pr = mae_val = brier_val = None
    if gold_labels is not None:
        truth_pr = sum(bool(g) for g in gold_labels) / len(gold_labels)
        mae_val = abs(pr - truth_pr)
        if has_probs:
            brier_val = brier(probs, gold_labels)
    return FactualityReport(
        verdicts=verdicts,
        supported=s,
        contradicted=c,
        undecided=u,
        precision=pr,
        recall_at_k=recall_at_k(verdicts, k),
        f1_at_k=f1_at_k(verdicts, k),
        k=k,
        e_measure=e_measure(probs) if has_probs else None,
        truth_precision=truth_pr,
        mae=mae_val,
        brier=brier_val,
    )
