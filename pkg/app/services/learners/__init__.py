"""
Learners package: base predictors and k-means.
"""
from dataclasses import dataclass

import numpy as np

from app.models.models import LearnerKind
from app.schemas.learner_schemas import (
    DecisionTreeConfig,
    KNeighborsConfig,
    LearnerConfig,
    LogisticRegressionConfig,
)
from app.services.learners.base import FittedLearner, as_training_data, check_width
from app.services.learners.kmeans import KMeansModel, kmeans_assign, kmeans_fit
from app.services.learners.logistic import LogisticRegressionModel, fit_logistic
from app.services.learners.neighbors import KNeighborsModel, fit_neighbors
from app.services.learners.tree import DecisionTreeModel, fit_tree


@dataclass(frozen=True)
class ConstantModel:
    """What any learner becomes when every training label is identical."""
    kind: LearnerKind
    label: int
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = check_width(X, self.n_features)
        return np.full(X.shape[0], self.label, dtype=np.int64)


def fit(config: LearnerConfig, X: np.ndarray, y: np.ndarray, seed: int = 0) -> FittedLearner:
    """
    Fit one learner. All three learners are deterministic; `seed` is accepted so
    every fit call has the same signature as the randomised steps around it.
    """
    X, y = as_training_data(X, y)
    kind = LearnerKind(config.kind)
    if np.all(y == y[0]):
        return ConstantModel(kind=kind, label=int(y[0]), n_features=X.shape[1])

    if isinstance(config, LogisticRegressionConfig):
        return fit_logistic(config, X, y)
    if isinstance(config, DecisionTreeConfig):
        return fit_tree(config, X, y)
    if isinstance(config, KNeighborsConfig):
        return fit_neighbors(config, X, y)
    raise TypeError(f"Unsupported learner config: {type(config).__name__}")


def predict(model: FittedLearner, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


__all__ = [
    "ConstantModel",
    "DecisionTreeModel",
    "FittedLearner",
    "KMeansModel",
    "KNeighborsModel",
    "LogisticRegressionModel",
    "fit",
    "kmeans_assign",
    "kmeans_fit",
    "predict",
]
