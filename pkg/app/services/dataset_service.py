"""
Dataset Service - CSV ingestion and encoding, splitting, imputation and the
synthetic conditional-i.i.d. generator.
"""
import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from app.core.exceptions import (
    EmptyDataset,
    MalformedCsv,
    MissingColumn,
    TooFewRows,
    UnparsableCell,
)
from app.core.logging_config import logger
from app.models.dataset import FeatureColumn, LabeledDataset
from app.models.models import MISSING_LEVEL, ColumnKind, GroupFlag
from app.schemas.dataset_schemas import (
    SYNTH_GROUP_COLUMN,
    SYNTH_TARGET_COLUMN,
    DatasetSchema,
    SplitConfig,
    SynthConfig,
    canonical_value,
)


# ---------------------------------------------------------------------------
# ENCODING
# ---------------------------------------------------------------------------

def _numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    raw = frame[column]
    values = pd.to_numeric(raw, errors="coerce")
    bad = (values.isna() & raw.notna()) | np.isinf(values.fillna(0.0))
    if bad.any():
        label = bad[bad].index[0]
        # header is line 1, the first data row line 2
        raise UnparsableCell(row=int(label) + 2, column=column, value=str(raw.loc[label]))
    return values.to_numpy(dtype=float)


def encode_frame(frame: pd.DataFrame, schema: DatasetSchema) -> LabeledDataset:
    """
    Encode a string-typed frame: numeric columns parsed (NaN kept for
    imputation), categoricals one-hot over their sorted levels, each protected
    column as a single privileged indicator. Rows without a target are dropped.
    """
    required = [c.name for c in schema.columns] + [schema.target] + schema.protected_names
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise MissingColumn(f"Dataset is missing columns: {missing}")

    has_target = frame[schema.target].notna() & (frame[schema.target].str.strip() != "")
    dropped = int((~has_target).sum())
    frame = frame[has_target]
    if frame.empty:
        raise EmptyDataset("Dataset has no rows with a target value")

    blocks: List[np.ndarray] = []
    columns: List[FeatureColumn] = []
    for spec in schema.columns:
        if spec.kind == ColumnKind.NUMERIC:
            blocks.append(_numeric_column(frame, spec.name)[:, None])
            columns.append(FeatureColumn(spec.name, spec.name, protected=False))
            continue
        values = frame[spec.name].fillna(MISSING_LEVEL).str.strip()
        for level in sorted(values.unique()):
            blocks.append((values == level).to_numpy(dtype=float)[:, None])
            columns.append(FeatureColumn(f"{spec.name}={level}", spec.name, protected=False))

    protected: Dict[str, np.ndarray] = {}
    for attr in schema.protected:
        raw = frame[attr.name].fillna(MISSING_LEVEL).str.strip()
        protected[attr.name] = raw.to_numpy(dtype=object)
        is_priv = raw.map(canonical_value) == attr.privileged_value
        blocks.append(is_priv.to_numpy(dtype=float)[:, None])
        columns.append(
            FeatureColumn(f"{attr.name}={attr.privileged_value}", attr.name, protected=True)
        )

    labels = (frame[schema.target].map(canonical_value) == schema.positive_label).to_numpy(
        dtype=np.int64
    )
    features = np.hstack(blocks) if blocks else np.zeros((len(frame), 0))
    return LabeledDataset(
        schema=schema,
        features=features,
        labels=labels,
        feature_columns=tuple(columns),
        protected=protected,
        row_ids=frame.index.to_numpy(dtype=np.int64),
        dropped_rows=dropped,
    )


_PARSER_LINE = re.compile(r"line (\d+)")


def _first_undecodable_line(path: Union[str, Path]) -> Optional[int]:
    with open(path, "rb") as f:
        for number, raw in enumerate(f, start=1):
            try:
                raw.decode("utf-8")
            except UnicodeDecodeError:
                return number
    return None


def read_frame(path: Union[str, Path]) -> pd.DataFrame:
    """Read every cell as a string; unreadable files surface as data errors with a line."""
    try:
        return pd.read_csv(
            path, dtype=str, keep_default_na=True, skipinitialspace=True, encoding="utf-8"
        )
    except pd.errors.EmptyDataError as exc:
        raise EmptyDataset(f"Dataset {path} is empty") from exc
    except pd.errors.ParserError as exc:
        detail = str(exc).split("error: ")[-1].strip()
        match = _PARSER_LINE.search(detail)
        line = int(match.group(1)) if match else None
        raise MalformedCsv(str(path), detail, line=line) from exc
    except UnicodeDecodeError as exc:
        raise MalformedCsv(
            str(path), f"invalid UTF-8 ({exc.reason})", line=_first_undecodable_line(path)
        ) from exc


def load_csv(path: Union[str, Path], schema: DatasetSchema) -> LabeledDataset:
    logger.info(f"Loading dataset : path={path}")
    frame = read_frame(path)
    if frame.empty:
        raise EmptyDataset(f"Dataset {path} has no data rows")
    dataset = encode_frame(frame, schema)
    logger.info(
        f"Dataset loaded : rows={len(dataset)} , dropped_rows={dataset.dropped_rows} , "
        f"features={len(dataset.feature_columns)}"
    )
    return dataset


# ---------------------------------------------------------------------------
# SPLIT / IMPUTE
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetSplit:
    train: LabeledDataset
    test: LabeledDataset
    validation: LabeledDataset

    @property
    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.test), len(self.validation)

    @property
    def test_fingerprint(self) -> str:
        return split_fingerprint(self.test)


def split(dataset: LabeledDataset, cfg: SplitConfig) -> DatasetSplit:
    """Seeded permutation sliced train, test, validation; floors for the first two."""
    n = len(dataset)
    if n < 10:
        raise TooFewRows(f"Need at least 10 rows to split, got {n}")
    order = np.random.default_rng(cfg.seed).permutation(n)
    n_train = n * cfg.train // 100
    n_test = n * cfg.test // 100
    return DatasetSplit(
        train=dataset.subset(order[:n_train]),
        test=dataset.subset(order[n_train : n_train + n_test]),
        validation=dataset.subset(order[n_train + n_test :]),
    )


def split_fingerprint(dataset: LabeledDataset) -> str:
    return hashlib.sha256(dataset.row_ids.astype("<i8").tobytes()).hexdigest()


def fit_medians(train: LabeledDataset) -> np.ndarray:
    """Column medians of the training rows; all-missing columns impute to 0."""
    medians = np.zeros(train.features.shape[1])
    for j in range(train.features.shape[1]):
        column = train.features[:, j]
        present = column[~np.isnan(column)]
        if present.size:
            medians[j] = float(np.median(present))
    return medians


def impute(dataset: LabeledDataset, medians: np.ndarray) -> LabeledDataset:
    holes = np.isnan(dataset.features)
    if not holes.any():
        return dataset
    features = np.where(holes, medians[None, :], dataset.features)
    return dataset.with_features(features)


def impute_missing(data: DatasetSplit) -> DatasetSplit:
    medians = fit_medians(data.train)
    return DatasetSplit(
        train=impute(data.train, medians),
        test=impute(data.test, medians),
        validation=impute(data.validation, medians),
    )


# ---------------------------------------------------------------------------
# SYNTHETIC DATA
# ---------------------------------------------------------------------------

def bayes_accuracy(noise: float) -> float:
    """P(sign(w.x + e) = sign(w.x)) for w.x ~ N(0, 1), e ~ N(0, noise^2)."""
    return 1.0 - math.atan(noise) / math.pi


def synth_frame(cfg: SynthConfig) -> pd.DataFrame:
    """
    x ~ N(0, I); the privileged boundary normal is e1, the disadvantaged one is
    e1 rotated by boundary_shift in the (x0, x1) plane; y = 1[w.x + e > 0].
    """
    rng = np.random.default_rng(cfg.seed)
    w_priv = np.zeros(cfg.dims)
    w_priv[0] = 1.0
    w_dis = np.zeros(cfg.dims)
    w_dis[0], w_dis[1] = math.cos(cfg.boundary_shift), math.sin(cfg.boundary_shift)

    parts = []
    for flag, n, w, noise in (
        (GroupFlag.PRIV, cfg.n_priv, w_priv, cfg.noise_priv),
        (GroupFlag.DIS, cfg.n_dis, w_dis, cfg.noise_dis),
    ):
        X = rng.standard_normal((n, cfg.dims))
        y = (X @ w + noise * rng.standard_normal(n) > 0).astype(np.int64)
        part = pd.DataFrame(X, columns=[f"x{j}" for j in range(cfg.dims)])
        part[SYNTH_GROUP_COLUMN] = flag.value
        part[SYNTH_TARGET_COLUMN] = y
        parts.append(part)
    return pd.concat(parts, ignore_index=True)


@dataclass(frozen=True)
class SyntheticData:
    dataset: LabeledDataset
    frame: pd.DataFrame
    bayes_accuracy: Dict[str, float]


def synth_ciid(cfg: SynthConfig) -> SyntheticData:
    frame = synth_frame(cfg)
    schema = cfg.dataset_schema()
    # target as text, the way load_csv sees it
    encoded = frame.assign(**{SYNTH_TARGET_COLUMN: frame[SYNTH_TARGET_COLUMN].astype(str)})
    dataset = encode_frame(encoded, schema)
    logger.info(
        f"Synthetic dataset : n_priv={cfg.n_priv} , n_dis={cfg.n_dis} , dims={cfg.dims} , "
        f"shift={cfg.boundary_shift:.4f} , seed={cfg.seed}"
    )
    return SyntheticData(
        dataset=dataset,
        frame=frame,
        bayes_accuracy={
            GroupFlag.PRIV.value: bayes_accuracy(cfg.noise_priv),
            GroupFlag.DIS.value: bayes_accuracy(cfg.noise_dis),
        },
    )
