"""
Models package initialization
"""
from app.models.models import (
    ColumnKind,
    GroupFlag,
    LearnerKind,
    MeanEstimatorKind,
    MetricName,
    SchemeKind,
    TradeoffCell,
)

__all__ = [
    "ColumnKind",
    "GroupFlag",
    "LearnerKind",
    "MeanEstimatorKind",
    "MetricName",
    "SchemeKind",
    "TradeoffCell",
]
