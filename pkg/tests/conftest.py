"""
Shared fixtures
"""
import os

os.environ.setdefault("CIID_LOG_TO_FILE", "false")
os.environ.setdefault("CIID_LOG_LEVEL", "WARNING")

import math  # noqa: E402
from typing import Dict, List, Optional  # noqa: E402

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import pytest  # noqa: E402

from app.models.dataset import LabeledDataset  # noqa: E402
from app.models.models import ColumnKind  # noqa: E402
from app.schemas.dataset_schemas import (  # noqa: E402
    ColumnSpec,
    DatasetSchema,
    ProtectedAttribute,
    SynthConfig,
)
from app.schemas.experiment_schemas import DataSource, ExperimentConfig, GroupSpec  # noqa: E402
from app.schemas.learner_schemas import LogisticRegressionConfig  # noqa: E402
from app.services.dataset_service import encode_frame  # noqa: E402


def build_dataset(
    numeric: Dict[str, List[float]],
    labels: List[int],
    protected: Optional[Dict[str, List[str]]] = None,
    privileged: Optional[Dict[str, str]] = None,
) -> LabeledDataset:
    """Encode a small hand-written table; protected values default to x* = "priv"."""
    protected = protected or {}
    privileged = privileged or {name: "priv" for name in protected}
    frame = pd.DataFrame({**numeric, **protected, "y": [str(v) for v in labels]})
    schema = DatasetSchema(
        columns=[ColumnSpec(name=n, kind=ColumnKind.NUMERIC) for n in numeric],
        target="y",
        positive_label="1",
        protected=[
            ProtectedAttribute(name=n, privileged_value=privileged[n]) for n in protected
        ],
    )
    return encode_frame(frame, schema)


@pytest.fixture
def make_dataset():
    return build_dataset


@pytest.fixture
def two_attribute_dataset() -> LabeledDataset:
    """40 rows over sex x race with unequal group sizes and both labels in every group."""
    rng = np.random.default_rng(7)
    sizes = {("priv", "priv"): 6, ("priv", "dis"): 8, ("dis", "priv"): 10, ("dis", "dis"): 16}
    sex, race = [], []
    for (s, r), n in sizes.items():
        sex += [s] * n
        race += [r] * n
    n = len(sex)
    labels = [i % 2 for i in range(n)]
    return build_dataset(
        {"x0": list(rng.normal(size=n)), "x1": list(rng.normal(size=n))},
        labels,
        protected={"sex": sex, "race": race},
    )


@pytest.fixture
def sex_spec() -> GroupSpec:
    return GroupSpec(protected_columns=["sex"], privileged_values=["priv"])


@pytest.fixture
def race_spec() -> GroupSpec:
    return GroupSpec(protected_columns=["race"], privileged_values=["priv"])


@pytest.fixture
def sex_race_spec() -> GroupSpec:
    return GroupSpec(protected_columns=["sex", "race"], privileged_values=["priv", "priv"])


@pytest.fixture
def directional_synth() -> SynthConfig:
    """Orthogonal group boundaries with a small disadvantaged group."""
    return SynthConfig(
        n_priv=4000,
        n_dis=1000,
        dims=2,
        boundary_shift=math.pi / 2,
        noise_priv=0.2,
        noise_dis=0.5,
        seed=0,
    )


@pytest.fixture
def synthetic_experiment(directional_synth) -> ExperimentConfig:
    return ExperimentConfig(
        name="synthetic_test",
        data=DataSource(synthetic=directional_synth),
        specs=[["group"]],
        learner=LogisticRegressionConfig(learning_rate=0.5, iterations=300),
        runs=18,
        base_seed=0,
    )


@pytest.fixture
def constant_feature_config(tmp_path):
    """Factory: a 50-row CSV with one constant feature and 70% positive labels."""

    def _make(group_values, specs, runs=1, roster=None) -> ExperimentConfig:
        lines = ["x0,g,y"]
        for i in range(50):
            lines.append(f"0,{group_values[i % len(group_values)]},{1 if i % 10 < 7 else 0}")
        (tmp_path / "data.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        cfg = ExperimentConfig.model_validate(
            {
                "name": "constant",
                "data": {"csv": "data.csv"},
                "schema": {
                    "columns": [{"name": "x0", "kind": "numeric"}],
                    "target": "y",
                    "positive_label": "1",
                    "protected": [{"name": "g", "privileged_value": "a"}],
                },
                "specs": specs,
                "roster": roster,
                "runs": runs,
            }
        )
        return cfg.with_source_dir(tmp_path)

    return _make
