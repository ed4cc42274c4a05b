"""
Experiment-related Pydantic Schemas
"""
from itertools import product
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from app.core.config import settings
from app.models.models import GroupFlag, SchemeKind
from app.schemas.dataset_schemas import DatasetSchema, SplitConfig, SynthConfig, canonical_value
from app.schemas.learner_schemas import DecisionTreeConfig, LearnerConfig

GroupId = Tuple[GroupFlag, ...]


class GroupSpec(BaseModel):
    """
    Privileged/disadvantaged partition over one or more protected columns.

    A row's group id is the tuple of per-column priv/dis flags, so a
    two-column spec yields four intersectional groups.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    protected_columns: List[str] = Field(..., min_length=1)
    privileged_values: List[str] = Field(..., min_length=1)

    @field_validator("privileged_values", mode="before")
    @classmethod
    def normalise_values(cls, v: object) -> object:
        if isinstance(v, (list, tuple)):
            return [canonical_value(x) for x in v]
        return v

    @model_validator(mode="after")
    def check_lengths(self) -> "GroupSpec":
        if len(self.protected_columns) != len(self.privileged_values):
            raise ValueError("protected_columns and privileged_values must have equal length")
        if len(set(self.protected_columns)) != len(self.protected_columns):
            raise ValueError("A column may appear only once in a group spec")
        return self

    @property
    def name(self) -> str:
        return "_".join(self.protected_columns)

    def group_ids(self) -> List[GroupId]:
        """All ids in table order: priv_priv, priv_dis, dis_priv, dis_dis."""
        return [tuple(ids) for ids in product(list(GroupFlag), repeat=len(self.protected_columns))]

    def group_name(self, group_id: GroupId) -> str:
        return f"{self.name}_" + "_".join(flag.value for flag in group_id)

    def marginals(self) -> List["GroupSpec"]:
        return [
            GroupSpec(protected_columns=[c], privileged_values=[v])
            for c, v in zip(self.protected_columns, self.privileged_values)
        ]


class TrainingScheme(BaseModel):
    """
    overall | per_group(spec) | single_group(spec, group_id) | per_cluster(k[, cluster_id]).

    per_cluster without cluster_id routes each row to its cluster's learner;
    with cluster_id it is the single-cluster model applied to everyone.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SchemeKind
    spec: Optional[GroupSpec] = None
    group_id: Optional[GroupId] = None
    k: Optional[int] = Field(None, ge=2)
    cluster_id: Optional[int] = Field(None, ge=0)
    include_protected_features: Optional[bool] = None
    name: Optional[str] = None

    @model_validator(mode="after")
    def check_kind(self) -> "TrainingScheme":
        if self.kind in (SchemeKind.PER_GROUP, SchemeKind.SINGLE_GROUP) and self.spec is None:
            raise ValueError(f"{self.kind.value} scheme needs a group spec")
        if self.kind == SchemeKind.SINGLE_GROUP:
            if self.group_id is None or len(self.group_id) != len(self.spec.protected_columns):
                raise ValueError("single_group scheme needs a group id realizable under its spec")
        if self.kind == SchemeKind.PER_CLUSTER:
            if self.k is None:
                raise ValueError("per_cluster scheme needs k")
            if self.cluster_id is not None and self.cluster_id >= self.k:
                raise ValueError(f"cluster_id {self.cluster_id} out of range for k={self.k}")
            if self.include_protected_features:
                raise ValueError("per_cluster schemes are blind: protected features are excluded")

        if self.include_protected_features is None:
            object.__setattr__(
                self, "include_protected_features", self.kind == SchemeKind.OVERALL
            )
        if self.name is None:
            object.__setattr__(self, "name", self._default_name())
        return self

    def _default_name(self) -> str:
        if self.kind == SchemeKind.OVERALL:
            return "overall"
        if self.kind == SchemeKind.SINGLE_GROUP:
            return self.spec.group_name(self.group_id)
        if self.kind == SchemeKind.PER_GROUP:
            return f"{self.spec.name}_ciid"
        if self.cluster_id is None:
            return f"clusters_k{self.k}_ciid"
        return f"Group{self.cluster_id + 1}"

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def overall(cls) -> "TrainingScheme":
        return cls(kind=SchemeKind.OVERALL)

    @classmethod
    def per_group(cls, spec: GroupSpec) -> "TrainingScheme":
        return cls(kind=SchemeKind.PER_GROUP, spec=spec)

    @classmethod
    def single_group(cls, spec: GroupSpec, group_id: GroupId) -> "TrainingScheme":
        return cls(kind=SchemeKind.SINGLE_GROUP, spec=spec, group_id=group_id)

    @classmethod
    def per_cluster(
        cls, k: int, cluster_id: Optional[int] = None, name: Optional[str] = None
    ) -> "TrainingScheme":
        return cls(kind=SchemeKind.PER_CLUSTER, k=k, cluster_id=cluster_id, name=name)


class DataSource(BaseModel):
    """Exactly one of a CSV path (relative to the config file) or a synthetic generator."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    csv: Optional[str] = None
    synthetic: Optional[SynthConfig] = None

    @model_validator(mode="after")
    def exactly_one(self) -> "DataSource":
        if (self.csv is None) == (self.synthetic is None):
            raise ValueError("data must set exactly one of 'csv' or 'synthetic'")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    name: str = Field(..., min_length=1)
    data: DataSource
    dataset_schema: Optional[DatasetSchema] = Field(None, alias="schema")
    specs: List[List[str]] = Field(default_factory=list)
    cluster_k: List[int] = Field(default_factory=list)
    roster: Optional[List[str]] = None
    learner: LearnerConfig = Field(default_factory=DecisionTreeConfig)
    grid: List[LearnerConfig] = Field(default_factory=list)
    runs: int = Field(default_factory=lambda: settings.DEFAULT_RUNS, ge=1)
    base_seed: int = Field(0, ge=0)
    split: SplitConfig = Field(default_factory=SplitConfig)

    _source_dir: Optional[Path] = PrivateAttr(default=None)

    @field_validator("cluster_k")
    @classmethod
    def check_k(cls, v: List[int]) -> List[int]:
        if any(k < 2 for k in v):
            raise ValueError("every cluster_k must be >= 2")
        return v

    @model_validator(mode="after")
    def check_specs(self) -> "ExperimentConfig":
        if self.data.csv is not None and self.dataset_schema is None:
            raise ValueError("a csv data source needs a schema")
        protected = set(self.schema_for_data().protected_names)
        for columns in self.specs:
            if not columns:
                raise ValueError("a spec must name at least one protected column")
            missing = [c for c in columns if c not in protected]
            if missing:
                raise ValueError(f"spec columns {missing} are not protected columns in the schema")
        return self

    def schema_for_data(self) -> DatasetSchema:
        """The declared schema, or the generator's schema for synthetic sources."""
        if self.dataset_schema is not None:
            return self.dataset_schema
        return self.data.synthetic.dataset_schema()

    def group_specs(self) -> List[GroupSpec]:
        schema = self.schema_for_data()
        return [
            GroupSpec(
                protected_columns=list(columns),
                privileged_values=[schema.privileged_value(c) for c in columns],
            )
            for columns in self.specs
        ]

    def with_source_dir(self, directory: Path) -> "ExperimentConfig":
        self._source_dir = directory
        return self

    def resolve_csv(self) -> Optional[Path]:
        if self.data.csv is None:
            return None
        path = Path(self.data.csv)
        if not path.is_absolute() and self._source_dir is not None:
            path = self._source_dir / path
        return path
