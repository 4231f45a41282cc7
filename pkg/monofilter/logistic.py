from __future__ import annotations
import warnings
from typing import Any
import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression
from sklearn.preprocessing import StandardScaler
from .classifiers import ClassifierModel, as_matrix
from .config import LOGISTIC_MAX_ITER, LOGISTIC_TOL
from .models import ClassifierKind, OrdinalDataset


class LogisticOVR(ClassifierModel):
    """One binary logistic model per class on standardised features; predicts the highest score.
    Classes absent from training never win."""
    kind = ClassifierKind.logistic

    def __init__(self, tol: float = LOGISTIC_TOL, max_iter: int = LOGISTIC_MAX_ITER, seed: int = 0):
        super().__init__()
        self.tol, self.max_iter, self.seed = tol, max_iter, seed

    def hyperparameters(self) -> dict[str, Any]:
        return {"tol": self.tol, "max_iter": self.max_iter, "seed": self.seed}

    def fit(self, ds: OrdinalDataset) -> LogisticOVR:
        self._remember(ds)
        scaler = StandardScaler().fit(ds.X)
        self.mean_, self.scale_ = scaler.mean_, scaler.scale_
        Z = scaler.transform(ds.X)
        c = ds.class_count
        self.coef_ = np.zeros((c, ds.f))
        self.intercept_ = np.full(c, -np.inf)
        present = np.unique(ds.y)
        if len(present) == 1:
            self.intercept_[present[0]] = 0.0
            return self
        for k in present:
            lr = LogisticRegression(tol=self.tol, max_iter=self.max_iter, random_state=self.seed)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                lr.fit(Z, (ds.y == k).astype(int))
            self.coef_[k], self.intercept_[k] = lr.coef_[0], lr.intercept_[0]
        return self

    def decision_function(self, X) -> np.ndarray:
        self._fitted()
        Z = (as_matrix(X, self.n_features) - self.mean_) / self.scale_
        return Z @ self.coef_.T + self.intercept_

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1).astype(np.int64)

    def _state(self) -> dict[str, Any]:
        return {"mean": self.mean_.tolist(), "scale": self.scale_.tolist(), "coef": self.coef_.tolist(),
                "intercept": [None if np.isinf(b) else float(b) for b in self.intercept_]}

    def _load_state(self, state: dict[str, Any]) -> None:
        self.mean_ = np.asarray(state["mean"], dtype=np.float64)
        self.scale_ = np.asarray(state["scale"], dtype=np.float64)
        self.coef_ = np.asarray(state["coef"], dtype=np.float64)
        self.intercept_ = np.array([-np.inf if b is None else b for b in state["intercept"]], dtype=np.float64)
