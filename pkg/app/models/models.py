"""
Domain enumerations
"""
from enum import Enum


class MeanEstimatorKind(str, Enum):
    OVERALL = "overall"
    CIID = "ciid"
    ENSEMBLE = "ensemble"
    DIS_ONLY = "dis_only"
    PRIV_ONLY = "priv_only"


class TradeoffCell(str, Enum):
    BIAS_ON_PRIV = "bias_on_priv"
    BIAS_ON_DIS = "bias_on_dis"
    VARIANCE_ON_PRIV = "variance_on_priv"
    VARIANCE_ON_DIS = "variance_on_dis"


class LearnerKind(str, Enum):
    LOGISTIC_REGRESSION = "logistic_regression"
    DECISION_TREE = "decision_tree"
    K_NEIGHBORS = "k_neighbors"


class SchemeKind(str, Enum):
    OVERALL = "overall"
    PER_GROUP = "per_group"
    SINGLE_GROUP = "single_group"
    PER_CLUSTER = "per_cluster"


class ColumnKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class GroupFlag(str, Enum):
    PRIV = "priv"
    DIS = "dis"


class MetricName(str, Enum):
    ACCURACY = "accuracy"
    TPR = "tpr"
    FPR = "fpr"
    FNR = "fnr"
    TNR = "tnr"
    SELECTION_RATE = "selection_rate"
    POSITIVE_RATE = "positive_rate"


METRIC_NAMES = [m.value for m in MetricName]
FULL_SUBGROUP = "Full"
MISSING_LEVEL = "missing"
