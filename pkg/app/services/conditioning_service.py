"""
Conditioning Service - group partitions, training schemes and routed prediction.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.exceptions import (
    DimensionMismatch,
    EmptyTargetGroup,
    TooFewSamples,
    UnseenGroup,
)
from app.core.logging_config import logger
from app.models.dataset import LabeledDataset
from app.models.models import SchemeKind
from app.schemas.experiment_schemas import GroupId, GroupSpec, TrainingScheme
from app.schemas.learner_schemas import LearnerConfig
from app.services.learners import FittedLearner, KMeansModel, fit, kmeans_assign, kmeans_fit
from app.services.learners.base import Standardizer

LearnerKey = Union[GroupId, int, str]
ALL_ROWS = "all"


# ---------------------------------------------------------------------------
# PARTITIONS
# ---------------------------------------------------------------------------

def group_index(dataset: LabeledDataset, spec: GroupSpec) -> np.ndarray:
    """
    Position of each row's group id within spec.group_ids().

    The first protected column is the most significant flag, so for a pair
    spec the order is priv_priv, priv_dis, dis_priv, dis_dis.
    """
    index = np.zeros(len(dataset), dtype=np.int64)
    for column, value in zip(spec.protected_columns, spec.privileged_values):
        dis = ~dataset.privileged_mask(column, value)
        index = index * 2 + dis.astype(np.int64)
    return index


def group_masks(dataset: LabeledDataset, spec: GroupSpec) -> Dict[GroupId, np.ndarray]:
    index = group_index(dataset, spec)
    return {gid: index == i for i, gid in enumerate(spec.group_ids())}


def partition_by_group(dataset: LabeledDataset, spec: GroupSpec) -> Dict[GroupId, LabeledDataset]:
    """Disjoint, order-preserving subsets keyed by group id; empty groups stay as empty subsets."""
    return {
        gid: dataset.subset(np.flatnonzero(mask))
        for gid, mask in group_masks(dataset, spec).items()
    }


# ---------------------------------------------------------------------------
# CONDITIONAL MODEL
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalModel:
    """
    Fitted learners keyed by group id (PerGroup), cluster id (PerCluster) or
    ALL_ROWS (single-learner schemes), plus what the router needs.
    """
    scheme: TrainingScheme
    learners: Dict[LearnerKey, FittedLearner]
    feature_names: Tuple[str, ...]
    feature_indices: np.ndarray
    train_sizes: Dict[LearnerKey, int] = field(default_factory=dict)
    kmeans: Optional[KMeansModel] = None
    cluster_indices: Optional[np.ndarray] = None
    cluster_standardizer: Optional[Standardizer] = None

    @property
    def name(self) -> str:
        return self.scheme.name

    @property
    def n_learners(self) -> int:
        return len(self.learners)

    def clusters_of(self, dataset: LabeledDataset) -> np.ndarray:
        if self.kmeans is None or self.cluster_standardizer is None:
            raise TypeError(f"Model {self.name} is not cluster-conditioned")
        X = dataset.features[:, self.cluster_indices]
        return kmeans_assign(self.kmeans, self.cluster_standardizer.transform(X))


def _fit_rows(
    train: LabeledDataset,
    rows: np.ndarray,
    columns: np.ndarray,
    learner: LearnerConfig,
    seed: int,
    target: str,
) -> FittedLearner:
    if rows.size == 0:
        raise EmptyTargetGroup(f"No training rows for {target}")
    X = train.features[np.ix_(rows, columns)]
    return fit(learner, X, train.labels[rows], seed=seed)


def fit_clusters(
    train: LabeledDataset, k: int, seed: int
) -> Tuple[KMeansModel, np.ndarray, Standardizer]:
    cluster_indices = train.feature_indices(include_protected=False)
    if cluster_indices.size == 0:
        raise TooFewSamples("Cluster conditioning needs at least one non-protected feature")
    X = train.features[:, cluster_indices]
    standardizer = Standardizer.fit(X)
    model = kmeans_fit(standardizer.transform(X), k, seed)
    logger.debug(
        f"Clusters fitted : k={k} , iterations={model.n_iter} , inertia={model.inertia:.4f} , "
        f"sizes={model.cluster_sizes.tolist()}"
    )
    return model, cluster_indices, standardizer


def train_scheme(
    train: LabeledDataset, scheme: TrainingScheme, learner: LearnerConfig, seed: int
) -> ConditionalModel:
    if len(train) == 0:
        raise TooFewSamples("Cannot train a scheme on an empty training split")

    columns = train.feature_indices(bool(scheme.include_protected_features))
    names = tuple(c.name for c in train.feature_columns)
    learners: Dict[LearnerKey, FittedLearner] = {}
    sizes: Dict[LearnerKey, int] = {}
    kmeans = None
    cluster_indices = None
    standardizer = None

    if scheme.kind == SchemeKind.OVERALL:
        rows = np.arange(len(train))
        learners[ALL_ROWS] = _fit_rows(train, rows, columns, learner, seed, scheme.name)
        sizes[ALL_ROWS] = rows.size

    elif scheme.kind == SchemeKind.SINGLE_GROUP:
        mask = group_masks(train, scheme.spec)[scheme.group_id]
        rows = np.flatnonzero(mask)
        learners[ALL_ROWS] = _fit_rows(train, rows, columns, learner, seed, scheme.name)
        sizes[ALL_ROWS] = rows.size

    elif scheme.kind == SchemeKind.PER_GROUP:
        for gid, mask in group_masks(train, scheme.spec).items():
            rows = np.flatnonzero(mask)
            learners[gid] = _fit_rows(
                train, rows, columns, learner, seed, scheme.spec.group_name(gid)
            )
            sizes[gid] = rows.size

    else:
        if len(train) < scheme.k:
            raise TooFewSamples(f"Need at least k={scheme.k} training rows, got {len(train)}")
        kmeans, cluster_indices, standardizer = fit_clusters(train, scheme.k, seed)
        targets = range(scheme.k) if scheme.cluster_id is None else [scheme.cluster_id]
        for cid in targets:
            rows = np.flatnonzero(kmeans.labels == cid)
            key: LearnerKey = cid if scheme.cluster_id is None else ALL_ROWS
            learners[key] = _fit_rows(
                train, rows, columns, learner, seed, f"cluster {cid + 1} of {scheme.k}"
            )
            sizes[key] = rows.size

    logger.debug(
        f"Scheme trained : scheme={scheme.name} , learners={len(learners)} , "
        f"rows={sum(sizes.values())}"
    )
    return ConditionalModel(
        scheme=scheme,
        learners=learners,
        feature_names=names,
        feature_indices=columns,
        train_sizes=sizes,
        kmeans=kmeans,
        cluster_indices=cluster_indices,
        cluster_standardizer=standardizer,
    )


# ---------------------------------------------------------------------------
# ROUTING
# ---------------------------------------------------------------------------

def _route(model: ConditionalModel, test: LabeledDataset) -> Dict[LearnerKey, np.ndarray]:
    scheme = model.scheme
    if ALL_ROWS in model.learners:
        return {ALL_ROWS: np.arange(len(test))}

    if scheme.kind == SchemeKind.PER_GROUP:
        index = group_index(test, scheme.spec)
        keys: Sequence[LearnerKey] = scheme.spec.group_ids()
    else:
        index = model.clusters_of(test)
        keys = list(range(scheme.k))

    routes: Dict[LearnerKey, np.ndarray] = {}
    for i, key in enumerate(keys):
        rows = np.flatnonzero(index == i)
        if rows.size == 0:
            continue
        if key not in model.learners:
            raise UnseenGroup(f"Model {model.name} has no learner for {key}")
        routes[key] = rows
    return routes


def predict_routed(model: ConditionalModel, test: LabeledDataset) -> np.ndarray:
    """Score each test row with the learner its group (or nearest centroid) selects."""
    names = tuple(c.name for c in test.feature_columns)
    if names != model.feature_names:
        raise DimensionMismatch(
            f"Test feature layout does not match the layout {model.name} was trained on"
        )

    preds = np.zeros(len(test), dtype=np.int64)
    X = test.features[:, model.feature_indices]
    for key, rows in _route(model, test).items():
        preds[rows] = model.learners[key].predict(X[rows])
    return preds


# ---------------------------------------------------------------------------
# ROSTER
# ---------------------------------------------------------------------------

def enumerate_models(specs: Sequence[GroupSpec], ks: Sequence[int]) -> List[TrainingScheme]:
    """
    overall, every SingleGroup of every spec, the routed PerGroup model per
    spec, then per k the single-cluster models Group1..Groupk and the routed
    cluster model.
    """
    roster = [TrainingScheme.overall()]
    for spec in specs:
        roster.extend(TrainingScheme.single_group(spec, gid) for gid in spec.group_ids())
    roster.extend(TrainingScheme.per_group(spec) for spec in specs)

    prefix = len(ks) > 1
    for k in ks:
        for cid in range(k):
            name = f"k{k}_Group{cid + 1}" if prefix else f"Group{cid + 1}"
            roster.append(TrainingScheme.per_cluster(k, cluster_id=cid, name=name))
        roster.append(TrainingScheme.per_cluster(k))
    return roster
