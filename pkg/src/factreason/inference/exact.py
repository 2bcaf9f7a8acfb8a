"""Exact marginals by bucket elimination with a backward (distribution) pass.

The forward pass eliminates variables along the order and yields ``log Z``;
the backward pass sends messages from later buckets to earlier ones so every
bucket ends up holding its exact clique belief, from which the eliminated
variable's marginal is read off.  All tables stay in the linear domain and are
rescaled by their maximum, with the scale folded into ``log Z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import WidthExceededError, ZeroPartitionError
from ..pgm_core import GraphicalModel, MarginalTable, require_valid
from . import tables as T
from .ordering import EliminationOrder, min_fill_order
from .result import InferenceResult

MAX_VE_WIDTH = 22


@dataclass
class _Bucket:
    var: int
    factors: list[T.Table] = field(default_factory=list)
    # (child bucket var, forward message from that child)
    incoming: list[tuple[int, T.Table]] = field(default_factory=list)
    scope: tuple[int, ...] = ()
    parent: int | None = None
    message: T.Table | None = None
    backward: T.Table | None = None


def _assign_factors(model: GraphicalModel, order: EliminationOrder) -> tuple[dict[int, int], dict[int, _Bucket]]:
    pos = {v: i for i, v in enumerate(order.order)}
    buckets = {v: _Bucket(v) for v in order.order}
    for f in model.factors:
        scope, arr = T.from_factor(f)
        first = min(scope, key=pos.__getitem__)
        buckets[first].factors.append((scope, arr))
    return pos, buckets


def ve_marginals(model: GraphicalModel, order: EliminationOrder | None = None) -> InferenceResult:
    require_valid(model)
    if order is None:
        order = min_fill_order(model)
    else:
        order = EliminationOrder.from_sequence(model, order.order)
    if order.induced_width > MAX_VE_WIDTH:
        raise WidthExceededError(
            f"induced width {order.induced_width} exceeds the exact-inference limit {MAX_VE_WIDTH}"
        )
    pos, buckets = _assign_factors(model, order)

    log_z = 0.0
    for v in order.order:
        b = buckets[v]
        parts = b.factors + [msg for _, msg in b.incoming]
        b.scope = T.union_scope([s for s, _ in parts] + [(v,)])
        psi = T.product(parts, b.scope)
        scope, msg = T.sum_out(b.scope, psi, [v])
        c = float(np.max(msg))
        if not c > 0.0:
            raise ZeroPartitionError("partition function is zero; the factors are jointly contradictory")
        log_z += math.log(c)
        msg = msg / c
        if scope:
            b.parent = min(scope, key=pos.__getitem__)
            b.message = (scope, msg)
            buckets[b.parent].incoming.append((v, b.message))

    probs = np.empty((model.num_variables, 2))
    for v in reversed(order.order):
        b = buckets[v]
        base = b.factors + ([b.backward] if b.backward is not None else [])
        # messages to each child exclude that child's own contribution
        for child, _ in b.incoming:
            others = base + [m for c, m in b.incoming if c != child]
            child_scope = buckets[child].message[0]
            psi = T.product(others, b.scope)
            _, back = T.sum_out(b.scope, psi, [u for u in b.scope if u not in child_scope])
            back = back / np.max(back)
            buckets[child].backward = (child_scope, back)
        belief = T.product(base + [m for _, m in b.incoming], b.scope)
        m = T.marginal_of(b.scope, belief, v)
        probs[v] = m / m.sum()

    return InferenceResult(MarginalTable(probs), log_z, None, True, "ve")
