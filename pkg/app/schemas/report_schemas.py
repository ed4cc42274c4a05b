"""
Metric and report Pydantic Schemas
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.models import METRIC_NAMES


class ConfusionCounts(BaseModel):
    """Positive class is label 1."""
    model_config = ConfigDict(frozen=True)

    tp: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


class MetricSet(BaseModel):
    """None marks an undefined ratio (zero denominator)."""
    model_config = ConfigDict(frozen=True)

    accuracy: Optional[float] = None
    tpr: Optional[float] = None
    fpr: Optional[float] = None
    fnr: Optional[float] = None
    tnr: Optional[float] = None
    selection_rate: Optional[float] = None
    positive_rate: Optional[float] = None

    def get(self, metric: str) -> Optional[float]:
        if metric not in METRIC_NAMES:
            raise KeyError(f"Unknown metric: {metric}")
        return getattr(self, metric)

    @classmethod
    def undefined(cls) -> "MetricSet":
        return cls()


class MetricCell(BaseModel):
    """Mean and sample std over the runs where the metric was defined."""
    model_config = ConfigDict(frozen=True)

    model: str
    subgroup: str
    metric: str
    mean: Optional[float] = None
    std: Optional[float] = None
    defined_runs: int = Field(0, ge=0)
    runs: int = Field(..., ge=1)


class GroupedMetricsReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    runs: int = Field(..., ge=1)
    models: List[str]
    subgroups: List[str]
    metrics: List[str] = Field(default_factory=lambda: list(METRIC_NAMES))
    cells: List[MetricCell]
    error_bars: str = "std"

    def cell(self, model: str, subgroup: str, metric: str) -> MetricCell:
        for c in self.cells:
            if c.model == model and c.subgroup == subgroup and c.metric == metric:
                return c
        raise KeyError(f"No cell for ({model}, {subgroup}, {metric})")


class RunRecord(BaseModel):
    """One row of the raw per-run metric log."""
    model_config = ConfigDict(frozen=True)

    run: int
    model: str
    subgroup: str
    metric: str
    value: Optional[float] = None


class RunInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    run: int
    seed: int
    train_size: int
    test_size: int
    validation_size: int
    test_fingerprint: str
    failed_schemes: List[str] = Field(default_factory=list)


class CompositionRow(BaseModel):
    """Subgroup proportions of one row set: "Full" or a cluster ("Group1", ...)."""
    model_config = ConfigDict(frozen=True)

    subset: str
    size: int
    proportions: Dict[str, float]


class DisparityRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    spec: str
    metric: str
    max_abs_difference: Optional[float] = None
    ratio_min_over_max: Optional[float] = None


class ReportBundle(BaseModel):
    """Everything written by `run`; every plotted value is re-derivable from run_log."""
    model_config = ConfigDict(frozen=True)

    tool: str
    version: str
    experiment: str
    config: Dict[str, Any]
    base_seed: int
    run_seeds: List[int]
    tuned_learner: Dict[str, Any]
    report: GroupedMetricsReport
    runs: List[RunInfo]
    composition: List[CompositionRow]
    disparity: List[DisparityRecord]
    bayes_accuracy: Optional[Dict[str, float]] = None
    run_log: List[RunRecord]
