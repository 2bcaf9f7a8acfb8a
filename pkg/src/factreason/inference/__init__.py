"""Marginal inference engines: exact bucket elimination and weighted mini-buckets."""

from __future__ import annotations

from dataclasses import dataclass

from ..pgm_core import GraphicalModel
from .exact import MAX_VE_WIDTH, ve_marginals
from .ordering import EliminationOrder, induced_width, min_fill_order
from .result import InferenceResult
from .uai import read_uai, write_uai
from .wmb import WmbConfig, wmb_marginals

__all__ = [
    "EliminationOrder",
    "InferenceConfig",
    "InferenceResult",
    "MAX_VE_WIDTH",
    "WmbConfig",
    "infer",
    "induced_width",
    "min_fill_order",
    "read_uai",
    "ve_marginals",
    "wmb_marginals",
    "write_uai",
]


@dataclass(frozen=True)
class InferenceConfig:
    """Engine choice: ``auto`` runs exact elimination up to ``exact_width_limit``, else WMB."""

    engine: str = "auto"
    i_bound: int = 6
    iterations: int = 10
    seed: int = 0
    exact_width_limit: int = 12

    def __post_init__(self):
        if self.engine not in ("auto", "ve", "wmb"):
            raise ValueError(f"unknown inference engine {self.engine!r}")


def infer(model: GraphicalModel, config: InferenceConfig = InferenceConfig()) -> InferenceResult:
    order = min_fill_order(model)
    engine = config.engine
    if engine == "auto":
        engine = "ve" if order.induced_width <= config.exact_width_limit else "wmb"
    if engine == "ve":
        return ve_marginals(model, order)
    return wmb_marginals(model, order, WmbConfig(config.i_bound, config.iterations, config.seed))
