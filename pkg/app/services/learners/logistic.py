"""
Logistic regression trained by full-batch gradient descent.
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.special import expit

from app.models.models import LearnerKind
from app.schemas.learner_schemas import LogisticRegressionConfig
from app.services.learners.base import Standardizer, check_width


def loss_and_gradient(
    params: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float
) -> Tuple[float, np.ndarray]:
    """
    Regularised mean log-loss and its gradient.

    params = [bias, w_1 .. w_d]; the bias is not penalised.
    """
    bias, w = params[0], params[1:]
    z = X @ w + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(w, w))
    residual = expit(z) - y
    grad = np.empty_like(params)
    grad[0] = residual.mean()
    grad[1:] = X.T @ residual / X.shape[0] + l2 * w
    return loss, grad


@dataclass(frozen=True)
class LogisticRegressionModel:
    weights: np.ndarray
    bias: float
    standardizer: Standardizer
    n_features: int
    kind: LearnerKind = field(default=LearnerKind.LOGISTIC_REGRESSION)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = check_width(X, self.n_features)
        return self.standardizer.transform(X) @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        # probability > 0.5 exactly when the logit is positive
        return (self.decision_function(X) > 0).astype(np.int64)


def fit_logistic(
    config: LogisticRegressionConfig, X: np.ndarray, y: np.ndarray
) -> LogisticRegressionModel:
    standardizer = Standardizer.fit(X)
    Z = standardizer.transform(X)
    yf = y.astype(float)

    params = np.zeros(X.shape[1] + 1)
    for _ in range(config.iterations):
        _, grad = loss_and_gradient(params, Z, yf, config.l2)
        params -= config.learning_rate * grad

    return LogisticRegressionModel(
        weights=params[1:].copy(),
        bias=float(params[0]),
        standardizer=standardizer,
        n_features=X.shape[1],
    )
