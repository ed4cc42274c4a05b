"""
Learner configuration Schemas
"""
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter


class LogisticRegressionConfig(BaseModel):
    """Gradient descent on the L2-regularised mean log-loss (standardised features)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["logistic_regression"] = "logistic_regression"
    learning_rate: float = Field(0.1, gt=0)
    iterations: int = Field(1000, gt=0)
    l2: float = Field(1e-3, ge=0)


class DecisionTreeConfig(BaseModel):
    """Greedy CART on Gini impurity."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["decision_tree"] = "decision_tree"
    max_depth: int = Field(8, gt=0)
    min_samples_leaf: int = Field(5, gt=0)


class KNeighborsConfig(BaseModel):
    """Majority vote among the k nearest (Euclidean, standardised) training rows."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["k_neighbors"] = "k_neighbors"
    k: int = Field(5, gt=0)


LearnerConfig = Annotated[
    Union[LogisticRegressionConfig, DecisionTreeConfig, KNeighborsConfig],
    Field(discriminator="kind"),
]

learner_config_adapter: TypeAdapter[LearnerConfig] = TypeAdapter(LearnerConfig)
