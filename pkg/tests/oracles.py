"""Independent reference computations used as test oracles.

Nothing here calls into the inference code under test: marginals come from a
plain loop over all assignments, and star models use the odds-product form.
"""

from __future__ import annotations

import itertools
import math

from factreason.model_builder import Relation
from factreason.pgm_core import Factor, GraphicalModel


def brute_force(model: GraphicalModel) -> tuple[list[float], float]:
    """``P(X_i = 1)`` for every variable and ``log Z`` by explicit summation."""
    n = model.num_variables
    z = 0.0
    mass_true = [0.0] * n
    for assignment in itertools.product((0, 1), repeat=n):
        w = 1.0
        for f in model.factors:
            idx = 0
            for v in f.scope:
                idx = 2 * idx + assignment[v]
            w *= float(f.values[idx])
        z += w
        for i, x in enumerate(assignment):
            if x:
                mass_true[i] += w
    return [m / z for m in mass_true], math.log(z)


def star_lambda(relation: Relation, p: float, q: float) -> float:
    """Odds multiplier that a context with prior ``q`` exerts on its atom.

    Summing the context out of prior(c) * f(c, a) gives ``p`` on one side and
    ``(1-q) p + q (1-p)`` on the other.
    """
    mixed = (1.0 - q) * p + q * (1.0 - p)
    if relation is Relation.ENTAIL:
        return p / mixed
    if relation is Relation.CONTRADICT:
        return mixed / p
    raise ValueError(relation)


def star_posterior(atom_prior: float, spokes: list[tuple[Relation, float, float]]) -> float:
    """``P(a = 1)`` for one atom joined to independent contexts ``(relation, p*, q)``."""
    odds = atom_prior / (1.0 - atom_prior)
    for relation, p, q in spokes:
        odds *= star_lambda(relation, p, q)
    return odds / (1.0 + odds)


def two_context_factors() -> list[Factor]:
    """Atom 0 with two contexts: 1 entails it (0.8), 2 contradicts it (0.9)."""
    return [
        Factor((0,), (0.5, 0.5)),
        Factor((1,), (0.01, 0.99)),
        Factor((2,), (0.01, 0.99)),
        Factor((1, 0), (0.8, 0.8, 0.2, 0.8)),
        Factor((2, 0), (0.9, 0.9, 0.9, 0.1)),
    ]


def two_context_model() -> GraphicalModel:
    return GraphicalModel.from_factors(3, two_context_factors(), ["a1", "C1", "C2"])


def three_context_model(p: float) -> GraphicalModel:
    """The two-context model plus context 3 (prior 0.99) contradicting context 2 with strength ``p``."""
    extra = [Factor((3,), (0.01, 0.99)), Factor((3, 2), (p, p, p, 1.0 - p))]
    return GraphicalModel.from_factors(4, two_context_factors() + extra, ["a1", "C1", "C2", "C3"])
