"""
Shared plumbing for the learners: input validation and standardisation.
"""
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from app.core.exceptions import DimensionMismatch, NonFiniteFeatures, TooFewSamples
from app.models.models import LearnerKind


class FittedLearner(Protocol):
    """An immutable fitted predictor."""

    kind: LearnerKind
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray: ...


def as_feature_matrix(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatch(f"Feature matrix must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeatures("Feature matrix contains NaN or infinite values")
    return X


def as_training_data(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = as_feature_matrix(X)
    y = np.asarray(y).astype(np.int64).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
    if X.shape[0] == 0:
        raise TooFewSamples("Cannot fit on zero samples")
    if not np.all((y == 0) | (y == 1)):
        raise DimensionMismatch("Labels must be binary (0/1)")
    return X, y


def check_width(X: np.ndarray, n_features: int) -> np.ndarray:
    X = as_feature_matrix(X)
    if X.shape[1] != n_features:
        raise DimensionMismatch(f"Model fitted on {n_features} features, got {X.shape[1]}")
    return X


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        # constant columns stay centred at zero
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean=mean, scale=scale)

    @classmethod
    def identity(cls, n_features: int) -> "Standardizer":
        return cls(mean=np.zeros(n_features), scale=np.ones(n_features))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale
