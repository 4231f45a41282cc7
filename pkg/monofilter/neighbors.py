from __future__ import annotations
import logging
from typing import Any
import numpy as np
from scipy.spatial.distance import cdist
from .classifiers import ClassifierModel, as_matrix, majority
from .config import KNN_K, MKNN_K
from .dataset import dominance_matrix
from .errors import ConfigError
from .models import ClassifierKind, Instance, LabelInterval, OrdinalDataset
from .relabel import relabel

log = logging.getLogger(__name__)


def label_intervals(Q: np.ndarray, X: np.ndarray, y: np.ndarray, c: int,
                    exclude_self: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised [y_min, y_max] for every query row against training (X, y).

    y_min is the largest label dominated by the query (0 if none), y_max the smallest
    label dominating it (c-1 if none). With exclude_self, Q is X and row i ignores itself.
    """
    below = dominance_matrix(X, Q)       # below[i, q]: X[i] <= Q[q]
    above = dominance_matrix(Q, X)       # above[q, i]: Q[q] <= X[i]
    if exclude_self:
        np.fill_diagonal(below, False)
        np.fill_diagonal(above, False)
    lo = np.where(below, y[:, None], 0).max(axis=0, initial=0)
    hi = np.where(above, y[None, :], c - 1).min(axis=1, initial=c - 1)
    return lo.astype(np.int64), hi.astype(np.int64)


def label_interval(x: Instance | np.ndarray, ds: OrdinalDataset) -> LabelInterval:
    lo, hi = label_intervals(as_matrix(x, ds.f), ds.X, ds.y, ds.class_count)
    return LabelInterval(y_min=int(lo[0]), y_max=int(hi[0]))


def nearest(distances: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    """k candidate indices by increasing distance; equal distances keep index order."""
    return candidates[np.argsort(distances[candidates], kind="stable")[:k]]


class MkNN(ClassifierModel):
    """k nearest neighbours restricted to the query's monotone label interval, on relabelled training data."""
    kind = ClassifierKind.mknn

    def __init__(self, k: int = MKNN_K, seed: int = 0, distance: str = "euclidean"):
        super().__init__()
        if k < 1:
            raise ConfigError("k must be at least 1")
        self.k, self.seed, self.distance = k, seed, distance
        self._rng = np.random.default_rng(seed)

    def hyperparameters(self) -> dict[str, Any]:
        return {"k": self.k, "seed": self.seed, "distance": self.distance}

    def fit(self, ds: OrdinalDataset) -> MkNN:
        result = relabel(ds)
        self.X_, self.y_ = result.dataset.X, result.dataset.y
        self.relabelled_ = result.changes
        self._rng = np.random.default_rng(self.seed)
        self._remember(ds)
        return self

    def predict(self, X) -> np.ndarray:
        self._fitted()
        Q = as_matrix(X, self.n_features)
        c = self.class_count
        lo, hi = label_intervals(Q, self.X_, self.y_, c)
        D = cdist(Q, self.X_, metric=self.distance)
        out = np.empty(len(Q), dtype=np.int64)
        for q in range(len(Q)):
            cand = np.flatnonzero((self.y_ >= lo[q]) & (self.y_ <= hi[q]))
            if cand.size:
                out[q] = majority(self.y_[nearest(D[q], cand, self.k)], c, prefer=(lo[q] + hi[q]) / 2)
            elif lo[q] <= hi[q]:
                out[q] = self._rng.integers(lo[q], hi[q] + 1)
            else:
                out[q] = self._rng.integers(0, c)
        return out

    def _state(self) -> dict[str, Any]:
        return {"X": self.X_.tolist(), "y": self.y_.tolist(), "relabelled": self.relabelled_}

    def _load_state(self, state: dict[str, Any]) -> None:
        self.X_ = np.asarray(state["X"], dtype=np.float64)
        self.y_ = np.asarray(state["y"], dtype=np.int64)
        self.relabelled_ = state.get("relabelled", 0)


class KNN(ClassifierModel):
    kind = ClassifierKind.knn

    def __init__(self, k: int = KNN_K, distance: str = "euclidean"):
        super().__init__()
        if k < 1:
            raise ConfigError("k must be at least 1")
        self.k, self.distance = k, distance

    def hyperparameters(self) -> dict[str, Any]:
        return {"k": self.k, "distance": self.distance}

    def fit(self, ds: OrdinalDataset) -> KNN:
        self.X_, self.y_ = ds.X, ds.y
        self._remember(ds)
        return self

    def neighbours(self, X, exclude_self: bool = False) -> np.ndarray:
        """Index matrix of the k nearest training rows per query (fewer columns if n is small)."""
        Q = as_matrix(X, self.n_features)
        D = cdist(Q, self.X_, metric=self.distance)
        if exclude_self:
            np.fill_diagonal(D, np.inf)
        k = min(self.k, len(self.X_) - (1 if exclude_self else 0))
        return np.argsort(D, axis=1, kind="stable")[:, :max(k, 0)]

    def predict(self, X) -> np.ndarray:
        self._fitted()
        idx = self.neighbours(X)
        return np.array([majority(self.y_[row], self.class_count) for row in idx], dtype=np.int64)

    def _state(self) -> dict[str, Any]:
        return {"X": self.X_.tolist(), "y": self.y_.tolist()}

    def _load_state(self, state: dict[str, Any]) -> None:
        self.X_ = np.asarray(state["X"], dtype=np.float64)
        self.y_ = np.asarray(state["y"], dtype=np.int64)
