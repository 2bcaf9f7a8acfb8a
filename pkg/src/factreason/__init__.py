"""Factuality assessment of long-form text via probabilistic reasoning over
atom/context relations, with exact and bounded inference on binary Markov networks."""

from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.1.0"

from .errors import FactReasonError
from .inference import InferenceConfig, InferenceResult, infer, read_uai, ve_marginals, wmb_marginals, write_uai
from .model_builder import FR1, FR2, FR3, AtomRecord, ContextRecord, FrVariant, Relation, RelationEdge, build_fr_model
from .pgm_core import Factor, GraphicalModel, MarginalTable, Variable, enumerate_joint

__all__ = [
    "FR1",
    "FR2",
    "FR3",
    "AtomRecord",
    "ContextRecord",
    "FactReasonError",
    "Factor",
    "FrVariant",
    "GraphicalModel",
    "InferenceConfig",
    "InferenceResult",
    "MarginalTable",
    "Relation",
    "RelationEdge",
    "Variable",
    "__version__",
    "build_fr_model",
    "enumerate_joint",
    "infer",
    "read_uai",
    "ve_marginals",
    "wmb_marginals",
    "write_uai",
]
