"""Small helpers for dense binary tables keyed by a sorted scope.

A table is a pair ``(scope, array)`` where ``scope`` is a sorted tuple of
variable ids and ``array`` has one axis of length 2 per scope entry, in
scope order.  Because every scope is sorted, aligning two tables only needs
singleton axes inserted, never a transpose.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from ..pgm_core import Factor

Table = tuple[tuple[int, ...], np.ndarray]


def from_factor(f: Factor) -> Table:
    order = np.argsort(f.scope, kind="stable")
    scope = tuple(f.scope[i] for i in order)
    return scope, np.transpose(f.table, order).copy()


def union_scope(scopes: Iterable[Sequence[int]]) -> tuple[int, ...]:
    out: set[int] = set()
    for s in scopes:
        out.update(s)
    return tuple(sorted(out))


def expand(table: Table, target: tuple[int, ...]) -> np.ndarray:
    """Broadcast ``table`` onto the full ``target`` scope."""
    scope, arr = table
    shape = [2 if v in scope else 1 for v in target]
    return np.broadcast_to(arr.reshape(shape), (2,) * len(target))


def product(tables: Sequence[Table], target: tuple[int, ...]) -> np.ndarray:
    out = np.ones((2,) * len(target))
    for t in tables:
        out = out * expand(t, target)
    return out


def log_sum(tables: Sequence[Table], target: tuple[int, ...]) -> np.ndarray:
    out = np.zeros((2,) * len(target))
    for t in tables:
        out = out + expand(t, target)
    return out


def sum_out(scope: tuple[int, ...], arr: np.ndarray, drop: Iterable[int]) -> Table:
    drop = set(drop)
    axes = tuple(i for i, v in enumerate(scope) if v in drop)
    keep = tuple(v for v in scope if v not in drop)
    return keep, arr.sum(axis=axes) if axes else arr


def logsumexp_out(scope: tuple[int, ...], arr: np.ndarray, drop: Iterable[int]) -> Table:
    drop = set(drop)
    axes = tuple(i for i, v in enumerate(scope) if v in drop)
    keep = tuple(v for v in scope if v not in drop)
    if not axes:
        return keep, arr
    return keep, logsumexp(arr, axis=axes)


def marginal_of(scope: tuple[int, ...], arr: np.ndarray, var: int) -> np.ndarray:
    """Linear-domain marginal over ``var`` of a linear table (unnormalized)."""
    _, m = sum_out(scope, arr, [v for v in scope if v != var])
    return m


def log_marginal_of(scope: tuple[int, ...], arr: np.ndarray, var: int) -> np.ndarray:
    _, m = logsumexp_out(scope, arr, [v for v in scope if v != var])
    return m - logsumexp(m)
