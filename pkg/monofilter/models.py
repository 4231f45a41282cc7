from __future__ import annotations
from enum import Enum
from functools import cached_property
from typing import Any
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class AttributeKind(str, Enum):
    real="real"; integer="integer"; ordinal="ordinal-categorical"

class Relation(str, Enum):
    equal="Equal"; dominated_by="DominatedBy"; dominates="Dominates"; incomparable="Incomparable"

class ClassifierKind(str, Enum):
    mknn="MkNN"; olm="OLM"; osdl="OSDL"; mid="MID"; c45="C45"; ordinal_c45="OrdinalC45"
    knn="KNN"; logistic="LogisticRegression"

class Preprocessing(str, Enum):
    none="none"; relabel="relabel"; menn="menn"; mrnge="mrnge"; mipf="mipf"; minffc="minffc"

class Direction(str, Enum):
    higher="higher-better"; lower="lower-better"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class AttributeMeta(BaseModel):
    name: str
    kind: AttributeKind = AttributeKind.real
    observed_min: float
    observed_max: float
    levels: list[str] = Field(default_factory=list)   # ordinal-categorical value order

    @model_validator(mode="after")
    def _check(self):
        if self.observed_min > self.observed_max:
            raise ValueError(f"{self.name}: observed_min > observed_max")
        if self.kind is AttributeKind.ordinal and len(self.levels) < 2:
            raise ValueError(f"{self.name}: ordinal attribute needs at least 2 levels")
        return self


class Instance(BaseModel):
    model_config = ConfigDict(frozen=True)
    features: tuple[float, ...]
    label: int = Field(ge=0)


class _ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("X", mode="before", check_fields=False)
    @classmethod
    def _features(cls, v):
        X = np.array(v, dtype=np.float64, copy=True)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 0)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D array")
        return _frozen(X)


class OrdinalDataset(_ArrayModel):
    """The universe D: n instances, f ordered attributes, c ordered classes.

    Arrays are read-only; every transformation returns a new dataset.
    """
    attributes: list[AttributeMeta]
    X: np.ndarray
    y: np.ndarray
    class_names: list[str]
    class_attribute: str = "class"
    name: str = "dataset"
    source: str | None = None

    @field_validator("y", mode="before")
    @classmethod
    def _labels(cls, v):
        y = np.array(v, copy=True)
        if y.size and not np.all(np.equal(np.mod(y, 1), 0)):
            raise ValueError("labels must be integral class indices")
        return _frozen(y.astype(np.int64).reshape(-1))

    @model_validator(mode="after")
    def _check(self):
        n, f = self.X.shape
        if n < 1: raise ValueError("no instances")
        if f < 1 or f != len(self.attributes):
            raise ValueError(f"feature count {f} does not match {len(self.attributes)} attributes")
        if len(self.class_names) < 2: raise ValueError("at least 2 classes are required")
        if len(self.y) != n: raise ValueError("one label per instance is required")
        if self.y.min() < 0 or self.y.max() >= len(self.class_names):
            raise ValueError("label outside 0..c-1")
        return self

    @property
    def n(self) -> int: return self.X.shape[0]
    @property
    def f(self) -> int: return self.X.shape[1]
    @property
    def class_count(self) -> int: return len(self.class_names)

    def instance(self, i: int) -> Instance:
        return Instance(features=tuple(float(v) for v in self.X[i]), label=int(self.y[i]))

    def subset(self, indices) -> OrdinalDataset:
        """Rows in the given order; may be empty (callers guard n ≥ 1 themselves)."""
        idx = np.asarray(indices, dtype=np.int64)
        return self.model_copy(update={"X": _frozen(self.X[idx]), "y": _frozen(self.y[idx])})

    def with_labels(self, labels) -> OrdinalDataset:
        y = np.asarray(labels, dtype=np.int64)
        if y.shape != self.y.shape or (y.size and (y.min() < 0 or y.max() >= self.class_count)):
            raise ValueError("replacement labels must match n and lie in 0..c-1")
        return self.model_copy(update={"y": _frozen(y.copy())})


class RegressionDataset(_ArrayModel):
    attributes: list[AttributeMeta]
    X: np.ndarray
    target: np.ndarray
    target_name: str = "target"
    name: str = "dataset"
    source: str | None = None

    @field_validator("target", mode="before")
    @classmethod
    def _target(cls, v):
        return _frozen(np.array(v, dtype=np.float64, copy=True).reshape(-1))

    @model_validator(mode="after")
    def _check(self):
        if self.X.shape[0] < 1: raise ValueError("no instances")
        if self.X.shape[0] != len(self.target): raise ValueError("one target per instance is required")
        return self


class LabelInterval(BaseModel):
    y_min: int
    y_max: int

    @property
    def empty(self) -> bool: return self.y_min > self.y_max


class MonotonicityReport(BaseModel):
    nmi1: float = Field(ge=0, le=1)
    nmi2: float = Field(ge=0, le=1)
    non_comparable_pairs: int = Field(ge=0)
    clash_counts: list[int] = Field(default_factory=list)
    size: int = Field(ge=0)

    def to_row(self) -> dict[str, float]:
        return {"nmi1": self.nmi1, "nmi2": self.nmi2, "noncomparable": self.non_comparable_pairs, "size": self.size}


class ViolationGraph(BaseModel):
    n: int
    edges: list[tuple[int, int]]   # unordered clash pairs, stored with i < j

    @cached_property
    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j); adj[j].add(i)
        return adj

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])


class RelabelResult(BaseModel):
    dataset: OrdinalDataset
    changed_indices: list[int]
    changes: int
    original_labels: list[int]
    clamped: list[int] = Field(default_factory=list)

    def change_log(self) -> list[dict[str, int]]:
        return [{"index": i, "old_label": self.original_labels[i], "new_label": int(self.dataset.y[i])}
                for i in self.changed_indices]


class NoiseMask(BaseModel):
    corrupted_indices: list[int]
    original_labels: dict[int, int]
    noise_fraction: float = Field(ge=0, le=1)
    seed: int


class FilterIteration(BaseModel):
    iteration: int
    removed: int
    good: int = 0
    working: int


class FilterReport(BaseModel):
    filter_name: str
    kept: list[int]
    removed: list[int]
    iterations: list[FilterIteration] = Field(default_factory=list)
    parameters: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _disjoint(self):
        if set(self.kept) & set(self.removed):
            raise ValueError("kept and removed overlap")
        return self

    def apply(self, ds: OrdinalDataset) -> OrdinalDataset:
        return ds.subset(sorted(self.kept))


class FilterAudit(BaseModel):
    noisy_removed: int
    noisy_kept: int
    clean_removed: int
    clean_kept: int

    @property
    def total(self) -> int:
        return self.noisy_removed + self.noisy_kept + self.clean_removed + self.clean_kept

    def percentages(self) -> dict[str, float]:
        t = self.total or 1
        return {k: 100.0 * v / t for k, v in self.model_dump().items()}


class ExperimentRecord(BaseModel):
    dataset: str
    noise_level: float
    noise_seed: int
    preprocessing: str
    classifier: str
    fold: int
    accuracy: float = Field(ge=0, le=1)
    mae: float = Field(ge=0)
    train_monotonicity: MonotonicityReport
    filter_audit: FilterAudit | None = None
    test_digest: str = ""

    def key(self) -> tuple:
        return (self.dataset, self.noise_level, self.noise_seed, self.preprocessing, self.classifier, self.fold)

    def to_row(self) -> dict[str, Any]:
        row = {k: getattr(self, k) for k in
               ("dataset", "noise_level", "noise_seed", "preprocessing", "classifier", "fold", "accuracy", "mae")}
        row.update(self.train_monotonicity.to_row())
        audit = self.filter_audit.model_dump() if self.filter_audit else dict.fromkeys(FilterAudit.model_fields)
        row.update(audit)
        row["test_digest"] = self.test_digest
        return row


class HolmComparison(BaseModel):
    algorithm: str
    z: float
    p_value: float
    p_holm: float
    reject_05: bool
    reject_10: bool


class RankTable(BaseModel):
    algorithms: list[str]
    mean_ranks: dict[str, float]
    blocks: int
    direction: Direction
    statistic: float
    p_value: float
    control: str
    comparisons: list[HolmComparison] = Field(default_factory=list)


class DatasetSpec(BaseModel):
    path: str
    name: str | None = None
    format: str | None = None
    class_column: str | None = None
    discretize_bins: int | None = Field(default=None, ge=2)


class ExperimentConfig(BaseModel):
    datasets: list[DatasetSpec]
    noise_levels: list[float] = Field(default_factory=lambda: [0.0, 0.1, 0.2, 0.3])
    seeds: list[int] = Field(default_factory=lambda: [1, 2, 3])
    preprocessings: list[Preprocessing] = Field(default_factory=lambda: list(Preprocessing))
    classifiers: list[str] = Field(default_factory=lambda: ["mknn", "olm", "osdl", "mid"])
    folds: int = Field(default=10, ge=2)
    fold_seed: int = 0
    output_dir: str = "out"
    workers: int = Field(default=1, ge=1)
    filter_params: dict[str, dict[str, Any]] = Field(default_factory=dict)
    classifier_params: dict[str, dict[str, Any]] = Field(default_factory=dict)

    @field_validator("datasets", mode="before")
    @classmethod
    def _paths(cls, v):
        return [{"path": d} if isinstance(d, str) else d for d in v]

    @field_validator("noise_levels")
    @classmethod
    def _levels(cls, v):
        if any(not 0 <= x <= 1 for x in v):
            raise ValueError("noise levels must lie in [0, 1]")
        return v

    def expected_records(self) -> int:
        return (len(self.datasets) * len(self.noise_levels) * len(self.seeds)
                * len(self.preprocessings) * len(self.classifiers) * self.folds)
