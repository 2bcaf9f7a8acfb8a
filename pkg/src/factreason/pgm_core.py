"""Binary discrete graphical models and a brute-force inference oracle.

Conventions used throughout the package:

* every variable is binary, value 0 is *false* and value 1 is *true*;
* a factor table is stored flat, row-major over its scope in the order the
  scope is given, so for a pair ``(X, Y)`` the entries are
  ``(x=0,y=0), (x=0,y=1), (x=1,y=0), (x=1,y=1)``.

Models are immutable value objects. :func:`enumerate_joint` sums over all
``2**n`` assignments and is meant as ground truth for testing the faster
engines in :mod:`factreason.inference`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidModelError, TooManyVariablesError, ZeroPartitionError

MAX_ENUMERATION_VARIABLES = 25


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    cardinality: int = 2


@dataclass(frozen=True, eq=False)
class Factor:
    """A nonnegative table over one or two binary variables."""

    scope: tuple[int, ...]
    values: np.ndarray

    def __init__(self, scope: Iterable[int], values: Iterable[float] | np.ndarray):
        scope = tuple(int(v) for v in scope)
        arr = np.array(values, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "values", arr)

    @property
    def table(self) -> np.ndarray:
        """Values reshaped to one axis per scope variable."""
        return self.values.reshape((2,) * len(self.scope))

    def scaled(self, c: float) -> "Factor":
        return Factor(self.scope, self.values * c)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Factor):
            return NotImplemented
        return self.scope == other.scope and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash((self.scope, self.values.tobytes()))

    def __repr__(self) -> str:
        vals = ", ".join(f"{v:g}" for v in self.values)
        return f"Factor(scope={self.scope}, values=[{vals}])"


@dataclass(frozen=True)
class GraphicalModel:
    variables: tuple[Variable, ...]
    factors: tuple[Factor, ...]
    metadata: Mapping[str, str] = field(default_factory=dict)
    isolated: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "metadata", dict(self.metadata))
        object.__setattr__(self, "isolated", frozenset(self.isolated))

    @classmethod
    def from_factors(
        cls,
        n: int,
        factors: Iterable[Factor],
        names: Sequence[str] | None = None,
        metadata: Mapping[str, str] | None = None,
    ) -> "GraphicalModel":
        """Build a model over variables ``0..n-1``; untouched variables are marked isolated."""
        factors = tuple(factors)
        names = list(names) if names is not None else [f"X{i}" for i in range(n)]
        touched = {v for f in factors for v in f.scope}
        isolated = frozenset(i for i in range(n) if i not in touched)
        variables = tuple(Variable(i, names[i]) for i in range(n))
        return cls(variables, factors, metadata or {}, isolated)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def with_factors(self, factors: Iterable[Factor]) -> "GraphicalModel":
        return GraphicalModel(self.variables, tuple(factors), self.metadata, self.isolated)


class MarginalTable:
    """Per-variable ``(P_false, P_true)`` pairs, stored as an ``(n, 2)`` array."""

    def __init__(self, probs: np.ndarray | Sequence[Sequence[float]]):
        arr = np.array(probs, dtype=np.float64).reshape(-1, 2)
        arr.setflags(write=False)
        self.probs = arr

    def __len__(self) -> int:
        return self.probs.shape[0]

    def __getitem__(self, var: int) -> tuple[float, float]:
        row = self.probs[var]
        return float(row[0]), float(row[1])

    def p_true(self, var: int) -> float:
        return float(self.probs[var, 1])

    def max_abs_diff(self, other: "MarginalTable") -> float:
        if len(self) == 0 and len(other) == 0:
            return 0.0
        return float(np.max(np.abs(self.probs - other.probs)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MarginalTable):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __repr__(self) -> str:
        return f"MarginalTable({self.probs.tolist()})"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_model(model: GraphicalModel) -> ValidationResult:
    """Check the structural invariants of ``model``; violations are returned, never raised."""
    problems: list[str] = []
    n = model.num_variables
    for pos, var in enumerate(model.variables):
        if var.id != pos:
            problems.append(f"variable {var.name!r} has id {var.id}, expected dense id {pos}")
        if var.cardinality != 2:
            problems.append(f"variable {var.name!r} has cardinality {var.cardinality}, expected 2")
    touched: set[int] = set()
    for k, f in enumerate(model.factors):
        if not 1 <= len(f.scope) <= 2:
            problems.append(f"factor {k} has arity {len(f.scope)}, expected 1 or 2")
        if len(set(f.scope)) != len(f.scope):
            problems.append(f"factor {k} has repeated variables in scope {f.scope}")
        missing = [v for v in f.scope if not 0 <= v < n]
        if missing:
            problems.append(f"factor {k} references unknown variables {missing}")
        if f.values.size != 2 ** len(f.scope):
            problems.append(
                f"factor {k} has {f.values.size} values, expected {2 ** len(f.scope)}"
            )
        if np.any(~np.isfinite(f.values)):
            problems.append(f"factor {k} has non-finite factor value")
        elif np.any(f.values < 0):
            problems.append(f"factor {k} has negative factor value")
        touched.update(f.scope)
    for var in model.variables:
        if var.id not in touched and var.id not in model.isolated:
            problems.append(f"variable {var.name!r} has no factor and is not marked isolated")
    return ValidationResult(tuple(problems))


def require_valid(model: GraphicalModel) -> None:
    result = validate_model(model)
    if not result.ok:
        raise InvalidModelError("; ".join(result.violations))


def _canonical_factors(factors: Iterable[Factor]) -> list[Factor]:
    # fixed accumulation order so the oracle is bit-identical under factor permutation
    return sorted(factors, key=lambda f: (f.scope, f.values.tobytes()))


def joint_table(model: GraphicalModel) -> np.ndarray:
    """Unnormalized joint over all variables, one axis per variable id."""
    n = model.num_variables
    if n > MAX_ENUMERATION_VARIABLES:
        raise TooManyVariablesError(
            f"enumeration supports at most {MAX_ENUMERATION_VARIABLES} variables, got {n}"
        )
    joint = np.ones((2,) * n)
    for f in _canonical_factors(model.factors):
        order = np.argsort(f.scope)
        table = np.transpose(f.table, order)
        shape = [1] * n
        for v in f.scope:
            shape[v] = 2
        joint = joint * table.reshape(shape)
    return joint


def enumerate_joint(model: GraphicalModel) -> tuple[MarginalTable, float]:
    """Marginals and natural-log partition function by summing over every assignment."""
    require_valid(model)
    joint = joint_table(model)
    z = float(joint.sum())
    if not z > 0.0:
        raise ZeroPartitionError("partition function is zero; the factors are jointly contradictory")
    n = model.num_variables
    probs = np.empty((n, 2))
    for i in range(n):
        axes = tuple(a for a in range(n) if a != i)
        m = joint.sum(axis=axes) if axes else joint
        probs[i] = m / m.sum()
    return MarginalTable(probs), math.log(z)


def random_model(
    rng: np.random.Generator,
    num_variables: int,
    num_factors: int,
    pairwise_fraction: float = 0.7,
    low: float = 1e-3,
) -> GraphicalModel:
    """Random binary model with unary and pairwise factors, values in ``(low, 1]``."""
    factors = []
    for _ in range(num_factors):
        if num_variables >= 2 and rng.random() < pairwise_fraction:
            scope = rng.choice(num_variables, size=2, replace=False)
        else:
            scope = rng.choice(num_variables, size=1)
        vals = rng.uniform(low, 1.0, size=2 ** len(scope))
        factors.append(Factor(scope.tolist(), vals))
    return GraphicalModel.from_factors(num_variables, factors)
