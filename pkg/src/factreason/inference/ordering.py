from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import InvalidModelError
from ..pgm_core import GraphicalModel


@dataclass(frozen=True)
class EliminationOrder:
    order: tuple[int, ...]
    induced_width: int

    @classmethod
    def from_sequence(cls, model: GraphicalModel, order: Sequence[int]) -> "EliminationOrder":
        order = tuple(int(v) for v in order)
        return cls(order, induced_width(model, order))

    def __iter__(self):
        return iter(self.order)

    def __len__(self) -> int:
        return len(self.order)


def interaction_graph(model: GraphicalModel) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v.id: set() for v in model.variables}
    for f in model.factors:
        for a in f.scope:
            for b in f.scope:
                if a != b:
                    adj[a].add(b)
    return adj


def _check_permutation(model: GraphicalModel, order: Sequence[int]) -> None:
    n = model.num_variables
    if sorted(order) != list(range(n)):
        raise InvalidModelError(f"elimination order is not a permutation of 0..{n - 1}: {list(order)}")


def induced_width(model: GraphicalModel, order: Iterable[int]) -> int:
    """Largest neighbour count of a variable at the moment it is eliminated."""
    order = list(order)
    _check_permutation(model, order)
    adj = interaction_graph(model)
    width = 0
    for v in order:
        nbrs = adj.pop(v)
        width = max(width, len(nbrs))
        for a in nbrs:
            adj[a].discard(v)
            adj[a].update(nbrs - {a})
    return width


def _fill_count(adj: dict[int, set[int]], v: int) -> int:
    nbrs = sorted(adj[v])
    missing = 0
    for i, a in enumerate(nbrs):
        for b in nbrs[i + 1 :]:
            if b not in adj[a]:
                missing += 1
    return missing


def min_fill_order(model: GraphicalModel) -> EliminationOrder:
    """Greedy min-fill elimination order; ties go to the lowest variable id."""
    adj = interaction_graph(model)
    order: list[int] = []
    width = 0
    while adj:
        v = min(adj, key=lambda u: (_fill_count(adj, u), u))
        nbrs = adj.pop(v)
        width = max(width, len(nbrs))
        for a in nbrs:
            adj[a].discard(v)
            adj[a].update(nbrs - {a})
        order.append(v)
    return EliminationOrder(tuple(order), width)
