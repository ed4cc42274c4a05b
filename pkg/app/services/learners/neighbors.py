"""
k-nearest-neighbours classifier.
"""
from dataclasses import dataclass, field

import numpy as np

from app.models.models import LearnerKind
from app.schemas.learner_schemas import KNeighborsConfig
from app.services.learners.base import Standardizer, check_width

# rows per distance block, bounds the (block x train) distance matrix
_BLOCK_ROWS = 32


@dataclass(frozen=True)
class KNeighborsModel:
    train_X: np.ndarray
    train_y: np.ndarray
    k: int
    standardizer: Standardizer
    n_features: int
    kind: LearnerKind = field(default=LearnerKind.K_NEIGHBORS)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Fraction of positive labels among the k neighbours."""
        X = self.standardizer.transform(check_width(X, self.n_features))
        k = min(self.k, self.train_X.shape[0])
        out = np.empty(X.shape[0])
        for start in range(0, X.shape[0], _BLOCK_ROWS):
            block = X[start:start + _BLOCK_ROWS]
            d2 = ((block[:, None, :] - self.train_X[None, :, :]) ** 2).sum(axis=2)
            # stable sort: equidistant neighbours resolve to the lowest training index
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
            out[start:start + block.shape[0]] = self.train_y[nearest].mean(axis=1)
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        # vote ties go to label 0
        return (self.predict_proba(X) > 0.5).astype(np.int64)


def fit_neighbors(config: KNeighborsConfig, X: np.ndarray, y: np.ndarray) -> KNeighborsModel:
    standardizer = Standardizer.fit(X)
    return KNeighborsModel(
        train_X=standardizer.transform(X),
        train_y=y.copy(),
        k=config.k,
        standardizer=standardizer,
        n_features=X.shape[1],
    )
