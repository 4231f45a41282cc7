from __future__ import annotations
import importlib
import logging
from abc import ABC, abstractmethod
from typing import Any, Sequence
import numpy as np
from .errors import ConfigError, MonoFilterError
from .models import ClassifierKind, Instance, OrdinalDataset

log = logging.getLogger(__name__)

# name -> (module, class); imported lazily since the implementations import this module
_REGISTRY: dict[str, tuple[str, str]] = {
    "mknn": ("monofilter.neighbors", "MkNN"),
    "knn": ("monofilter.neighbors", "KNN"),
    "olm": ("monofilter.instance_models", "OLM"),
    "osdl": ("monofilter.instance_models", "OSDL"),
    "mid": ("monofilter.trees", "MID"),
    "c45": ("monofilter.trees", "C45Tree"),
    "ordinal_c45": ("monofilter.trees", "OrdinalC45"),
    "logistic": ("monofilter.logistic", "LogisticOVR"),
}
_BY_KIND = {
    ClassifierKind.mknn: "mknn", ClassifierKind.knn: "knn", ClassifierKind.olm: "olm",
    ClassifierKind.osdl: "osdl", ClassifierKind.mid: "mid", ClassifierKind.c45: "c45",
    ClassifierKind.ordinal_c45: "ordinal_c45", ClassifierKind.logistic: "logistic",
}


def as_matrix(X: OrdinalDataset | Instance | Sequence | np.ndarray, f: int | None = None) -> np.ndarray:
    if isinstance(X, OrdinalDataset):
        M = X.X
    elif isinstance(X, Instance):
        M = np.asarray(X.features, dtype=np.float64)[None, :]
    else:
        M = np.asarray(X, dtype=np.float64)
        if M.ndim == 1:
            M = M[None, :]
    if f is not None and M.shape[1] != f:
        raise MonoFilterError(f"model expects {f} features, got {M.shape[1]}")
    return M


def majority(labels: np.ndarray, c: int, prefer: float | None = None) -> int:
    """Most frequent label; ties go to the label nearest `prefer` (if given), then the lower one."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=c)
    tied = np.flatnonzero(counts == counts.max())
    if prefer is None or len(tied) == 1:
        return int(tied[0])
    return int(min(tied, key=lambda lbl: (abs(lbl - prefer), lbl)))


class ClassifierModel(ABC):
    """fit(ds) -> self, predict(X) -> labels. Fitting never mutates the dataset."""
    kind: ClassifierKind

    def __init__(self):
        self.class_count: int | None = None
        self.n_features: int | None = None

    @abstractmethod
    def fit(self, ds: OrdinalDataset) -> ClassifierModel: ...

    @abstractmethod
    def predict(self, X) -> np.ndarray: ...

    @abstractmethod
    def hyperparameters(self) -> dict[str, Any]: ...

    @abstractmethod
    def _state(self) -> dict[str, Any]: ...

    @abstractmethod
    def _load_state(self, state: dict[str, Any]) -> None: ...

    def predict_one(self, x: Instance | Sequence[float]) -> int:
        return int(self.predict(as_matrix(x))[0])

    def _fitted(self) -> None:
        if self.class_count is None:
            raise MonoFilterError(f"{type(self).__name__} is not fitted")

    def _remember(self, ds: OrdinalDataset) -> None:
        self.class_count, self.n_features = ds.class_count, ds.f

    def to_dict(self) -> dict[str, Any]:
        self._fitted()
        return {"kind": self.kind.value, "hyperparameters": self.hyperparameters(),
                "class_count": self.class_count, "n_features": self.n_features, "state": self._state()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ClassifierModel:
        m = cls(**d.get("hyperparameters", {}))
        m.class_count, m.n_features = d["class_count"], d["n_features"]
        m._load_state(d["state"])
        return m


def _resolve(name: str) -> type[ClassifierModel]:
    key = name.lower().replace("-", "_")
    if key not in _REGISTRY:
        raise ConfigError(f"unknown classifier {name!r}; expected one of {sorted(_REGISTRY)}")
    module, cls = _REGISTRY[key]
    return getattr(importlib.import_module(module), cls)


def make_classifier(name: str, **params) -> ClassifierModel:
    cls = _resolve(name)
    try:
        return cls(**params)
    except TypeError as e:
        raise ConfigError(f"{name}: {e}") from None


def model_from_dict(d: dict[str, Any]) -> ClassifierModel:
    try:
        kind = ClassifierKind(d["kind"])
    except (KeyError, ValueError):
        raise ConfigError(f"not a serialized model: kind={d.get('kind')!r}") from None
    return _resolve(_BY_KIND[kind]).from_dict(d)
