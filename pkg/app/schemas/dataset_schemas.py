"""
Dataset-related Pydantic Schemas
"""
import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.models import ColumnKind, GroupFlag

SYNTH_GROUP_COLUMN = "group"
SYNTH_TARGET_COLUMN = "y"


def canonical_value(raw: object) -> str:
    """String form used for label/privileged-value comparison ("1.0" == "1")."""
    text = str(raw).strip()
    try:
        number = float(text)
    except ValueError:
        return text
    if math.isfinite(number) and number.is_integer():
        return str(int(number))
    return text


class ColumnSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(..., min_length=1)
    kind: ColumnKind = ColumnKind.NUMERIC


class ProtectedAttribute(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(..., min_length=1)
    privileged_value: str

    @field_validator("privileged_value", mode="before")
    @classmethod
    def normalise_value(cls, v: object) -> str:
        return canonical_value(v)


class DatasetSchema(BaseModel):
    """
    Column kinds, target with its positive label, protected columns with x*.

    Protected columns are listed only under `protected`; each is encoded as a
    single 0/1 feature (1 iff the row holds the privileged value).
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    columns: List[ColumnSpec] = Field(..., min_length=1)
    target: str = Field(..., min_length=1)
    positive_label: str
    protected: List[ProtectedAttribute] = Field(default_factory=list)
    notes: Optional[str] = None

    @field_validator("positive_label", mode="before")
    @classmethod
    def normalise_label(cls, v: object) -> str:
        return canonical_value(v)

    @model_validator(mode="after")
    def check_columns(self) -> "DatasetSchema":
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("Duplicate column names in schema")
        if self.target in names:
            raise ValueError(f"Target column '{self.target}' cannot also be a feature column")
        protected = [p.name for p in self.protected]
        if len(set(protected)) != len(protected):
            raise ValueError("Duplicate protected column names in schema")
        if self.target in protected:
            raise ValueError("Target column cannot be protected")
        overlap = sorted(set(protected) & set(names))
        if overlap:
            raise ValueError(f"Protected columns {overlap} must not also be listed in columns")
        return self

    @property
    def protected_names(self) -> List[str]:
        return [p.name for p in self.protected]

    def privileged_value(self, column: str) -> Optional[str]:
        for p in self.protected:
            if p.name == column:
                return p.privileged_value
        return None


class SplitConfig(BaseModel):
    """train:test:validation percentages; slicing order is train, test, validation."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    train: int = Field(80, gt=0)
    test: int = Field(10, gt=0)
    validation: int = Field(10, gt=0)
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def check_total(self) -> "SplitConfig":
        if self.train + self.test + self.validation != 100:
            raise ValueError("Split ratios must sum to 100")
        return self


class SynthConfig(BaseModel):
    """
    Two groups with unit-norm linear boundaries separated by `boundary_shift`
    radians and Gaussian label noise of standard deviation noise_<group>.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_priv: int = Field(..., gt=0)
    n_dis: int = Field(..., gt=0)
    dims: int = Field(2, ge=2)
    boundary_shift: float = Field(0.0, ge=0, le=math.pi)
    noise_priv: float = Field(0.2, ge=0)
    noise_dis: float = Field(0.5, ge=0)
    seed: int = Field(0, ge=0)

    def dataset_schema(self) -> DatasetSchema:
        """Numeric x0..x{dims-1}, target "y" (positive "1"), protected "group" (x* = "priv")."""
        return DatasetSchema(
            columns=[ColumnSpec(name=f"x{j}", kind=ColumnKind.NUMERIC) for j in range(self.dims)],
            target=SYNTH_TARGET_COLUMN,
            positive_label="1",
            protected=[
                ProtectedAttribute(name=SYNTH_GROUP_COLUMN, privileged_value=GroupFlag.PRIV.value)
            ],
            notes=(
                f"synthetic: boundary_shift={self.boundary_shift} , noise_priv={self.noise_priv} , "
                f"noise_dis={self.noise_dis} , seed={self.seed}"
            ),
        )
