from __future__ import annotations

from dataclasses import dataclass

from ..pgm_core import MarginalTable


@dataclass(frozen=True)
class InferenceResult:
    marginals: MarginalTable
    log_z: float
    log_z_upper: float | None = None
    exact: bool = True
    engine: str = "ve"

    @property
    def upper_bound(self) -> float:
        """``log_z_upper`` when approximate, otherwise the exact ``log_z``."""
        return self.log_z if self.log_z_upper is None else self.log_z_upper
