"""Turn atoms, contexts and relation judgments into a binary graphical model.

Each atom and each context becomes a binary variable with a unary prior.
Every non-neutral relation between a context and an atom (or between two
contexts) becomes a pairwise factor over ``(source, target)``:

=============  ==========  ===========  =============
(x, y)         entail      contradict   equivalence
=============  ==========  ===========  =============
(true, true)   p           1 - p        p
(true, false)  1 - p       p            1 - p
(false, true)  p           p            1 - p
(false,false)  p           p            p
=============  ==========  ===========  =============

Stored tables follow the package convention (index 1 = true), so the rows
above appear in reverse order in :attr:`Factor.values`.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence
from urllib.parse import urlsplit, urlunsplit

from .errors import DuplicateVariableError, UnknownIdError
from .pgm_core import Factor, GraphicalModel

CONTENT_CAP = 4000
DEFAULT_ATOM_PRIOR = 0.5
DEFAULT_CONTEXT_PRIOR = 0.99
P_STAR_MIN = 0.5
P_STAR_MAX = 1.0 - 1e-6


class Relation(str, Enum):
    ENTAIL = "entail"
    CONTRADICT = "contradict"
    EQUIVALENCE = "equivalence"
    NONE = "none"


class ContextSource(str, Enum):
    WIKIPEDIA = "wikipedia"
    WEB_SEARCH = "web_search"
    INLINE = "inline"


@dataclass(frozen=True)
class AtomRecord:
    atom_id: str
    text: str
    source_span: tuple[int, int] | None = None
    revision_failed: bool = False

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"atom {self.atom_id!r} has empty text")


@dataclass(frozen=True)
class ContextRecord:
    context_id: str
    title: str = ""
    link: str = ""
    snippet: str = ""
    content: str = ""
    source: ContextSource = ContextSource.WIKIPEDIA
    prior_true: float = DEFAULT_CONTEXT_PRIOR
    retrieved_for: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "source", ContextSource(self.source))
        object.__setattr__(self, "retrieved_for", frozenset(self.retrieved_for))
        if len(self.content) > CONTENT_CAP:
            raise ValueError(
                f"context {self.context_id!r} content has {len(self.content)} characters, cap is {CONTENT_CAP}"
            )
        if not 0.0 < self.prior_true <= 1.0:
            raise ValueError(f"context prior must lie in (0, 1], got {self.prior_true}")

    @property
    def text(self) -> str:
        """The utterance used for relation extraction."""
        return self.content or self.snippet or self.title


def clamp_p_star(p: float) -> float:
    return min(max(float(p), P_STAR_MIN), P_STAR_MAX)


@dataclass(frozen=True)
class RelationEdge:
    """A directed judgment ``source -> target``; ``p_star`` is clamped to ``[0.5, 1)``."""

    source_id: str
    target_id: str
    relation: Relation
    p_star: float

    def __post_init__(self):
        object.__setattr__(self, "relation", Relation(self.relation))
        object.__setattr__(self, "p_star", clamp_p_star(self.p_star))
        if self.source_id == self.target_id:
            raise ValueError(f"relation edge loops on {self.source_id!r}")


@dataclass(frozen=True)
class FrVariant:
    name: str = "FR2"
    k_per_atom: int = 3

    def __post_init__(self):
        name = self.name.upper()
        if name not in ("FR1", "FR2", "FR3"):
            raise ValueError(f"unknown FactReasoner variant {self.name!r}")
        if self.k_per_atom < 1:
            raise ValueError(f"k_per_atom must be >= 1, got {self.k_per_atom}")
        object.__setattr__(self, "name", name)

    @property
    def dedups(self) -> bool:
        return self.name != "FR1"

    @property
    def context_pairs(self) -> bool:
        return self.name == "FR3"


FR1 = FrVariant("FR1")
FR2 = FrVariant("FR2")
FR3 = FrVariant("FR3")


def prior_factor(variable_id: int, prob_true: float) -> Factor:
    if not 0.0 <= prob_true <= 1.0:
        raise ValueError(f"prior probability must lie in [0, 1], got {prob_true}")
    return Factor((variable_id,), (1.0 - prob_true, prob_true))


def relation_factor(edge: RelationEdge, source_var: int, target_var: int) -> Factor:
    p = edge.p_star
    q = 1.0 - p
    # index order: (~x,~y), (~x,y), (x,~y), (x,y)
    if edge.relation is Relation.ENTAIL:
        values = (p, p, q, p)
    elif edge.relation is Relation.CONTRADICT:
        values = (p, p, p, q)
    elif edge.relation is Relation.EQUIVALENCE:
        values = (p, q, q, p)
    else:
        raise ValueError("neutral relations have no factor and must not be materialized")
    return Factor((source_var, target_var), values)


def table1_rows(factor: Factor) -> tuple[float, float, float, float]:
    """Entries in ``(x,y), (x,~y), (~x,y), (~x,~y)`` order."""
    v = factor.values
    return float(v[3]), float(v[2]), float(v[1]), float(v[0])


_WS = re.compile(r"\s+")


def normalize_link(link: str) -> str:
    parts = urlsplit(link.strip())
    path = parts.path.rstrip("/")
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), path, parts.query, ""))


def normalize_content(text: str) -> str:
    return _WS.sub(" ", text.casefold()).strip()


def content_key(text: str) -> str:
    digest = hashlib.sha256(normalize_content(text).encode("utf-8")).digest()
    return digest[:8].hex()


def dedup_key(ctx: ContextRecord) -> str:
    if ctx.link.strip():
        return "link:" + normalize_link(ctx.link)
    return "content:" + content_key(ctx.content or ctx.snippet)


def dedup_contexts(contexts: Iterable[ContextRecord]) -> list[ContextRecord]:
    """Merge duplicates in first-seen order, unioning their ``retrieved_for`` sets."""
    merged: dict[str, ContextRecord] = {}
    for ctx in contexts:
        key = dedup_key(ctx)
        if key in merged:
            first = merged[key]
            merged[key] = replace(first, retrieved_for=first.retrieved_for | ctx.retrieved_for)
        else:
            merged[key] = ctx
    return list(merged.values())


def _fr1_allowed(contexts: Sequence[ContextRecord], k: int) -> set[tuple[str, str]]:
    """(context_id, atom_id) pairs where the context ranks within the atom's first ``k``."""
    seen: dict[str, int] = {}
    allowed = set()
    for ctx in contexts:
        for atom_id in sorted(ctx.retrieved_for):
            rank = seen.get(atom_id, 0)
            seen[atom_id] = rank + 1
            if rank < k:
                allowed.add((ctx.context_id, atom_id))
    return allowed


def build_fr_model(
    atoms: Sequence[AtomRecord],
    contexts: Sequence[ContextRecord],
    edges: Iterable[RelationEdge],
    variant: FrVariant = FR2,
    atom_prior: float = DEFAULT_ATOM_PRIOR,
    context_prior_override: float | None = None,
) -> tuple[GraphicalModel, dict[str, int]]:
    """Assemble the model for ``variant``; returns it with the id -> variable binding.

    Atoms take variables ``0..n-1`` followed by contexts in input order. FR1
    keeps only context->atom edges where the context was retrieved for the
    atom and ranks within ``variant.k_per_atom`` of that atom's contexts; FR2
    keeps every context->atom edge; FR3 also keeps context-context edges.
    """
    binding: dict[str, int] = {}
    names: list[str] = []
    for rid in [a.atom_id for a in atoms] + [c.context_id for c in contexts]:
        if rid in binding:
            raise DuplicateVariableError(f"id {rid!r} appears more than once")
        binding[rid] = len(names)
        names.append(rid)
    atom_ids = {a.atom_id for a in atoms}
    context_ids = {c.context_id for c in contexts}

    factors = [prior_factor(binding[a.atom_id], atom_prior) for a in atoms]
    for c in contexts:
        q = c.prior_true if context_prior_override is None else context_prior_override
        factors.append(prior_factor(binding[c.context_id], q))

    if variant.name == "FR1":
        missing = [c.context_id for c in contexts if not c.retrieved_for]
        if missing:
            raise ValueError(f"FR1 needs retrieved_for on every context; missing for {missing}")
        allowed = _fr1_allowed(contexts, variant.k_per_atom)

    context_pairs: set[frozenset[str]] = set()
    for e in edges:
        for rid in (e.source_id, e.target_id):
            if rid not in binding:
                raise UnknownIdError(f"relation edge references unknown id {rid!r}")
        if e.source_id not in context_ids:
            raise ValueError(f"relation edges must originate at a context, got {e.source_id!r}")
        if e.relation is Relation.NONE:
            continue
        if e.target_id in atom_ids:
            if variant.name == "FR1" and (e.source_id, e.target_id) not in allowed:
                continue
        else:
            if not variant.context_pairs:
                continue
            pair = frozenset((e.source_id, e.target_id))
            if pair in context_pairs:
                raise ValueError(f"more than one edge between contexts {sorted(pair)}")
            context_pairs.add(pair)
        factors.append(relation_factor(e, binding[e.source_id], binding[e.target_id]))

    model = GraphicalModel.from_factors(len(names), factors, names, {"variant": variant.name})
    return model, binding
