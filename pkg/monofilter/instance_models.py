from __future__ import annotations
import logging
import math
from typing import Any
import numpy as np
from scipy.spatial.distance import cdist
from .classifiers import ClassifierModel, as_matrix
from .config import OSDL_INTERPOLATION, OSDL_INTERPOLATION_STEP_SIZE, OSDL_LOWER_BOUND, OSDL_UPPER_BOUND
from .dataset import dominance_matrix
from .errors import ConfigError
from .metrics import clash_matrix
from .models import ClassifierKind, OrdinalDataset

log = logging.getLogger(__name__)


def round_half_down(v: float) -> int:
    return int(math.ceil(v - 0.5))


class OLM(ClassifierModel):
    """Ordinal learning model: a consistent, non-redundant subset of the training data
    predicts the largest label it dominates, else the nearest member's label."""
    kind = ClassifierKind.olm

    def __init__(self, mode_resolution: str = "conservative", mode_classification: str = "conservative"):
        super().__init__()
        if mode_resolution != "conservative" or mode_classification != "conservative":
            raise ConfigError("only the conservative resolution and classification modes are supported")
        self.mode_resolution, self.mode_classification = mode_resolution, mode_classification

    def hyperparameters(self) -> dict[str, Any]:
        return {"mode_resolution": self.mode_resolution, "mode_classification": self.mode_classification}

    def fit(self, ds: OrdinalDataset) -> OLM:
        clash = clash_matrix(ds.X, ds.y)
        member = np.zeros(ds.n, dtype=bool)
        for i in range(ds.n):   # first seen wins
            if not (clash[i] & member).any():
                member[i] = True
        le = dominance_matrix(ds.X)
        for i in np.flatnonzero(member):
            others = member.copy()
            others[i] = False
            if (others & le[:, i] & (ds.y == ds.y[i])).any():
                member[i] = False
        self.X_, self.y_ = ds.X[member], ds.y[member]
        log.debug("OLM kept %d of %d training instances", len(self.y_), ds.n)
        self._remember(ds)
        return self

    def predict(self, X) -> np.ndarray:
        self._fitted()
        Q = as_matrix(X, self.n_features)
        below = dominance_matrix(self.X_, Q)
        out = np.where(below, self.y_[:, None], -1).max(axis=0)
        missing = out < 0
        if missing.any():
            D = cdist(Q[missing], self.X_)
            out[missing] = self.y_[np.argmin(D, axis=1)]
        return out.astype(np.int64)

    def _state(self) -> dict[str, Any]:
        return {"X": self.X_.tolist(), "y": self.y_.tolist()}

    def _load_state(self, state: dict[str, Any]) -> None:
        self.X_ = np.asarray(state["X"], dtype=np.float64)
        self.y_ = np.asarray(state["y"], dtype=np.int64)


class OSDL(ClassifierModel):
    """Ordinal stochastic dominance learner: interpolates between the largest label below
    the query and the smallest label above it. Weighting, balancing and tuning knobs are
    accepted for compatibility and have no effect."""
    kind = ClassifierKind.osdl

    def __init__(self, interpolation: float = OSDL_INTERPOLATION, lower_bound: float = OSDL_LOWER_BOUND,
                 upper_bound: float = OSDL_UPPER_BOUND, interpolation_step_size: int = OSDL_INTERPOLATION_STEP_SIZE,
                 classification_type: str = "media", balanced: bool = False, weighted: bool = False,
                 tune_interpolation: bool = False):
        super().__init__()
        if not lower_bound <= interpolation <= upper_bound:
            raise ConfigError(f"interpolation {interpolation} outside [{lower_bound}, {upper_bound}]")
        self.interpolation, self.lower_bound, self.upper_bound = interpolation, lower_bound, upper_bound
        self.interpolation_step_size = interpolation_step_size
        self.classification_type, self.balanced = classification_type, balanced
        self.weighted, self.tune_interpolation = weighted, tune_interpolation

    def hyperparameters(self) -> dict[str, Any]:
        return {"interpolation": self.interpolation, "lower_bound": self.lower_bound,
                "upper_bound": self.upper_bound, "interpolation_step_size": self.interpolation_step_size,
                "classification_type": self.classification_type, "balanced": self.balanced,
                "weighted": self.weighted, "tune_interpolation": self.tune_interpolation}

    def fit(self, ds: OrdinalDataset) -> OSDL:
        self.X_, self.y_ = ds.X, ds.y
        self.median_ = round_half_down(float(np.median(ds.y)))
        self._remember(ds)
        return self

    def predict(self, X) -> np.ndarray:
        self._fitted()
        Q = as_matrix(X, self.n_features)
        below = dominance_matrix(self.X_, Q)      # training row <= query
        above = dominance_matrix(Q, self.X_)      # query <= training row
        s = self.interpolation
        out = np.empty(len(Q), dtype=np.int64)
        for q in range(len(Q)):
            lo_set, hi_set = self.y_[below[:, q]], self.y_[above[q]]
            if not lo_set.size and not hi_set.size:
                out[q] = self.median_
                continue
            a = lo_set.max() if lo_set.size else hi_set.min()
            b = hi_set.min() if hi_set.size else a
            v = (1 - s) * a + s * b
            out[q] = min(max(round_half_down(v), 0), self.class_count - 1)
        return out

    def _state(self) -> dict[str, Any]:
        return {"X": self.X_.tolist(), "y": self.y_.tolist(), "median": self.median_}

    def _load_state(self, state: dict[str, Any]) -> None:
        self.X_ = np.asarray(state["X"], dtype=np.float64)
        self.y_ = np.asarray(state["y"], dtype=np.int64)
        self.median_ = state["median"]
