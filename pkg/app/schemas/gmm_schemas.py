"""
Gaussian-mixture Pydantic Schemas
"""
from typing import Dict, List, NamedTuple

from pydantic import BaseModel, ConfigDict, Field, computed_field

from app.models.models import MeanEstimatorKind, TradeoffCell

MAX_SEED = 2**64 - 1


class ScalarSample(NamedTuple):
    """One observed X together with its protected indicator (True iff X_protected = x*)."""
    value: float
    is_priv: bool


class GmmParams(BaseModel):
    """Two-component mixture with fixed group counts."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    mu_priv: float
    mu_dis: float
    sigma2_priv: float = Field(..., ge=0)
    sigma2_dis: float = Field(..., ge=0)
    n_priv: int = Field(..., ge=1)
    n_dis: int = Field(..., ge=1)

    @property
    def n(self) -> int:
        return self.n_priv + self.n_dis

    @property
    def p_priv(self) -> float:
        return self.n_priv / self.n

    @property
    def p_dis(self) -> float:
        return self.n_dis / self.n

    @property
    def delta_mu(self) -> float:
        return abs(self.mu_priv - self.mu_dis)

    @property
    def signed_delta_mu(self) -> float:
        """mu_dis - mu_priv, the sign carried by every signed bias term."""
        return self.mu_dis - self.mu_priv


class McConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicates: int = Field(..., ge=2)
    seed: int = Field(0, ge=0, le=MAX_SEED)


class MeanEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    value_for_priv: float
    value_for_dis: float


class TradeoffEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    bias_on_priv: float
    bias_on_dis: float
    variance_on_priv: float
    variance_on_dis: float

    @computed_field  # type: ignore[misc]
    @property
    def mse_on_priv(self) -> float:
        return self.bias_on_priv**2 + self.variance_on_priv

    @computed_field  # type: ignore[misc]
    @property
    def mse_on_dis(self) -> float:
        return self.bias_on_dis**2 + self.variance_on_dis

    def cell(self, cell: TradeoffCell) -> float:
        return float(getattr(self, cell.value))


class TradeoffStandardErrors(BaseModel):
    model_config = ConfigDict(frozen=True)

    bias_on_priv: float
    bias_on_dis: float
    variance_on_priv: float
    variance_on_dis: float

    def cell(self, cell: TradeoffCell) -> float:
        return float(getattr(self, cell.value))


class MonteCarloResult(BaseModel):
    kind: MeanEstimatorKind
    replicates: int
    entry: TradeoffEntry
    standard_errors: TradeoffStandardErrors


class VerificationCell(BaseModel):
    estimator: MeanEstimatorKind
    cell: TradeoffCell
    analytic: float
    empirical: float
    se: float
    passed: bool


class VerificationReport(BaseModel):
    params: GmmParams
    mc: McConfig
    abs_tol: float
    se_mult: float
    cells: List[VerificationCell]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.cells)

    def failures(self) -> List[VerificationCell]:
        return [c for c in self.cells if not c.passed]

    def rows(self) -> List[Dict[str, object]]:
        return [
            {
                "estimator": c.estimator.value,
                "cell": c.cell.value,
                "analytic": c.analytic,
                "empirical": c.empirical,
                "se": c.se,
                "pass": c.passed,
            }
            for c in self.cells
        ]
