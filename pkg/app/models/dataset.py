"""
Array-carrying dataset records
"""
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

import numpy as np

from app.core.exceptions import LengthMismatch, UnknownColumn
from app.schemas.dataset_schemas import DatasetSchema, canonical_value


@dataclass(frozen=True)
class FeatureColumn:
    name: str          # encoded name, "age" or "race=Caucasian"
    source: str        # schema column it was encoded from
    protected: bool


@dataclass(frozen=True)
class LabeledDataset:
    """
    Encoded features, binary labels and the raw protected values per row.

    Numeric features may hold NaN until imputed on a training split.
    """
    schema: DatasetSchema
    features: np.ndarray
    labels: np.ndarray
    feature_columns: Tuple[FeatureColumn, ...]
    protected: Dict[str, np.ndarray]
    row_ids: np.ndarray
    dropped_rows: int = field(default=0)

    def __post_init__(self) -> None:
        n = self.labels.shape[0]
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise LengthMismatch(
                f"Feature matrix shape {self.features.shape} does not match {n} labels"
            )
        if self.features.shape[1] != len(self.feature_columns):
            raise LengthMismatch("Feature columns do not match the feature matrix width")
        if self.row_ids.shape[0] != n:
            raise LengthMismatch("Row ids do not match the number of labels")
        for name, values in self.protected.items():
            if values.shape[0] != n:
                raise LengthMismatch(
                    f"Protected column '{name}' has {values.shape[0]} rows, expected {n}"
                )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    # ------------------------------------------------------------------
    # Views
    # ------------------------------------------------------------------
    def subset(self, indices: np.ndarray) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return replace(
            self,
            features=self.features[indices],
            labels=self.labels[indices],
            protected={k: v[indices] for k, v in self.protected.items()},
            row_ids=self.row_ids[indices],
        )

    def with_features(self, features: np.ndarray) -> "LabeledDataset":
        return replace(self, features=features)

    def with_protected(self, column: str, values: np.ndarray) -> "LabeledDataset":
        """Replace the raw values of a protected column and re-encode its indicator."""
        self.protected_values(column)
        values = np.asarray(values, dtype=object)
        features = self.features.copy()
        privileged = self.schema.privileged_value(column)
        if privileged is not None:
            target = canonical_value(privileged)
            flags = np.array([canonical_value(v) == target for v in values], dtype=float)
            for i, c in enumerate(self.feature_columns):
                if c.protected and c.source == column:
                    features[:, i] = flags
        return replace(self, features=features, protected={**self.protected, column: values})

    def feature_indices(self, include_protected: bool) -> np.ndarray:
        return np.array(
            [i for i, c in enumerate(self.feature_columns) if include_protected or not c.protected],
            dtype=np.int64,
        )

    def feature_matrix(self, include_protected: bool) -> np.ndarray:
        return self.features[:, self.feature_indices(include_protected)]

    def protected_values(self, column: str) -> np.ndarray:
        if column not in self.protected:
            raise UnknownColumn(f"Column '{column}' is not a protected column of this dataset")
        return self.protected[column]

    def privileged_mask(self, column: str, privileged_value: str) -> np.ndarray:
        values = self.protected_values(column)
        target = canonical_value(privileged_value)
        return np.array([canonical_value(v) == target for v in values], dtype=bool)
