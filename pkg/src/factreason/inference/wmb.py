"""Weighted mini-bucket elimination (Liu & Ihler, 2011).

Each bucket is split into mini-buckets whose joint scope holds at most
``i_bound`` variables.  Mini-bucket ``r`` gets a Hölder weight ``w_r`` (uniform,
summing to one within the bucket) and eliminates its variable with the
weighted power sum ``(sum_x psi_r ** (1/w_r)) ** w_r``; by Hölder's inequality
the product of the resulting constants bounds ``Z`` from above.

Before elimination the mini-buckets of a bucket exchange cost shifts on the
variables they share (moment matching).  A matching step is the exact
minimiser of the bound over shifts on that variable, so each of the
``iterations`` sweeps can only tighten the bound.  A backward pass then
yields pseudo-marginals; when no bucket is split everything collapses to
exact bucket-tree sum-product.

Greedy partitions for different i-bounds are not refinements of one another,
so a single pass at a larger i-bound can occasionally give a looser bound
than a pass at a smaller one.  Since a partition that respects a smaller
i-bound also respects a larger one, :func:`wmb_marginals` by default climbs
the ladder ``1..i_bound`` and returns the pass with the tightest bound,
which makes the bound non-increasing in ``i_bound`` by construction.

All arithmetic is in the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..errors import InvalidModelError, ZeroPartitionError
from ..pgm_core import GraphicalModel, MarginalTable, require_valid
from . import tables as T
from .ordering import EliminationOrder, min_fill_order
from .result import InferenceResult

_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class WmbConfig:
    i_bound: int = 6
    iterations: int = 10
    seed: int = 0
    ladder: bool = True

    def __post_init__(self):
        if self.i_bound < 1:
            raise InvalidModelError(f"i_bound must be >= 1, got {self.i_bound}")
        if self.iterations < 0:
            raise InvalidModelError(f"iterations must be >= 0, got {self.iterations}")


@dataclass
class _Item:
    """A log-table living in a bucket; ``source`` is the sending node for messages."""

    scope: tuple[int, ...]
    log: np.ndarray
    source: int | None = None


@dataclass
class _Node:
    var: int
    items: list[_Item] = field(default_factory=list)
    scope: tuple[int, ...] = ()
    weight: float = 1.0
    shift: np.ndarray | None = None
    parent: int | None = None
    message: _Item | None = None
    backward: _Item | None = None

    def potential(self, exclude: int | None = None) -> np.ndarray:
        parts = [(it.scope, it.log) for it in self.items if exclude is None or it.source != exclude]
        out = T.log_sum(parts, self.scope)
        return out + self.shift

    def children(self) -> list[int]:
        return [it.source for it in self.items if it.source is not None]


def _partition(items: list[_Item], i_bound: int, rng: np.random.Generator) -> list[list[_Item]]:
    """First-fit by decreasing scope size; ties broken in seeded random order."""
    tie = rng.permutation(len(items))
    ranked = sorted(range(len(items)), key=lambda k: (-len(items[k].scope), tie[k]))
    groups: list[list[_Item]] = []
    scopes: list[set[int]] = []
    for k in ranked:
        it = items[k]
        for g, s in zip(groups, scopes):
            if len(s | set(it.scope)) <= i_bound:
                g.append(it)
                s.update(it.scope)
                break
        else:
            groups.append([it])
            scopes.append(set(it.scope))
    return groups


def _match_moments(nodes: list[_Node], var: int, iterations: int) -> None:
    """Cost-shift the bucket's mini-buckets until their beliefs agree on shared variables."""
    shared: dict[int, list[_Node]] = {}
    for nd in nodes:
        for u in nd.scope:
            shared.setdefault(u, []).append(nd)
    targets = [var] + sorted(u for u, group in shared.items() if u != var and len(group) > 1)
    for _ in range(iterations):
        moved = 0.0
        for u in targets:
            group = shared[u]
            pots = [nd.potential() for nd in group]
            mus = [T.log_marginal_of(nd.scope, p / nd.weight, u) for nd, p in zip(group, pots)]
            wsum = sum(nd.weight for nd in group)
            avg = sum(nd.weight * mu for nd, mu in zip(group, mus)) / wsum
            for nd, mu in zip(group, mus):
                delta = nd.weight * (avg - mu)
                moved = max(moved, float(np.max(np.abs(delta))))
                nd.shift = nd.shift + T.expand(((u,), delta), nd.scope)
        if moved < _MATCH_TOL:
            break


def wmb_marginals(
    model: GraphicalModel,
    order: EliminationOrder | None = None,
    config: WmbConfig = WmbConfig(),
) -> InferenceResult:
    """Upper bound on ``log Z`` and pseudo-marginals; exact when no bucket needs splitting."""
    require_valid(model)
    if order is None:
        order = min_fill_order(model)
    else:
        order = EliminationOrder.from_sequence(model, order.order)
    if not config.ladder:
        return _wmb_pass(model, order, config)
    best: InferenceResult | None = None
    for i in range(1, config.i_bound + 1):
        res = _wmb_pass(model, order, WmbConfig(i, config.iterations, config.seed, ladder=False))
        if res.exact:
            return res
        # ties go to the larger i-bound, whose pseudo-marginals are usually closer
        if best is None or res.upper_bound <= best.upper_bound:
            best = res
    return best


def _wmb_pass(model: GraphicalModel, order: EliminationOrder, config: WmbConfig) -> InferenceResult:
    rng = np.random.default_rng(config.seed)
    pos = {v: i for i, v in enumerate(order.order)}

    pending: dict[int, list[_Item]] = {v: [] for v in order.order}
    with np.errstate(divide="ignore"):
        for f in model.factors:
            scope, arr = T.from_factor(f)
            pending[min(scope, key=pos.__getitem__)].append(_Item(scope, np.log(arr)))

    nodes: list[_Node] = []
    by_var: dict[int, list[int]] = {}
    log_z = 0.0
    split = False
    for v in order.order:
        items = pending.pop(v) or [_Item((v,), np.zeros(2))]
        groups = _partition(items, config.i_bound, rng)
        split = split or len(groups) > 1
        weight = 1.0 / len(groups)
        bucket = []
        for g in groups:
            scope = T.union_scope([it.scope for it in g] + [(v,)])
            nd = _Node(v, g, scope, weight, np.zeros((2,) * len(scope)))
            bucket.append(nd)
        if len(bucket) > 1 and config.iterations > 0:
            _match_moments(bucket, v, config.iterations)
        ids = []
        for nd in bucket:
            sep, msg = T.logsumexp_out(nd.scope, nd.potential() / nd.weight, [v])
            msg = nd.weight * msg
            c = float(np.max(msg))
            if not np.isfinite(c):
                raise ZeroPartitionError("partition function bound is zero or non-finite")
            log_z += c
            idx = len(nodes)
            ids.append(idx)
            nodes.append(nd)
            if sep:
                nd.message = _Item(sep, msg - c, idx)
                nd.parent = min(sep, key=pos.__getitem__)
                pending[nd.parent].append(nd.message)
        by_var[v] = ids

    # node ids are created in elimination order, so parents always have larger ids
    for idx in range(len(nodes) - 1, -1, -1):
        parent = nodes[idx]
        base = parent.backward
        for child_id in parent.children():
            child = nodes[child_id]
            pot = parent.potential(exclude=child_id)
            if base is not None:
                pot = pot + T.expand((base.scope, base.log), parent.scope)
            term = pot / parent.weight
            coef = 1.0 / parent.weight - 1.0 / child.weight
            if coef != 0.0:
                m = np.maximum(child.message.log, -700.0) if coef < 0 else child.message.log
                term = term + coef * T.expand((child.message.scope, m), parent.scope)
            sep = child.message.scope
            _, back = T.logsumexp_out(parent.scope, term, [u for u in parent.scope if u not in sep])
            back = child.weight * back
            child.backward = _Item(sep, back - np.max(back))

    probs = np.empty((model.num_variables, 2))
    for v, ids in by_var.items():
        acc = np.zeros(2)
        for idx in ids:
            nd = nodes[idx]
            pot = nd.potential()
            if nd.backward is not None:
                pot = pot + T.expand((nd.backward.scope, nd.backward.log), nd.scope)
            acc += nd.weight * np.exp(T.log_marginal_of(nd.scope, pot / nd.weight, v))
        probs[v] = acc / acc.sum()

    if split:
        return InferenceResult(MarginalTable(probs), log_z, log_z, False, "wmb")
    return InferenceResult(MarginalTable(probs), log_z, None, True, "wmb")
