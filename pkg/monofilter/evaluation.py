from __future__ import annotations
import hashlib
import logging
from typing import Any
import numpy as np
from sklearn.model_selection import KFold, StratifiedKFold
from .classifiers import make_classifier
from .errors import ConfigError
from .filters import run_filter
from .metrics import compute_report
from .models import FilterAudit, FilterReport, NoiseMask, OrdinalDataset, Preprocessing
from .relabel import relabel

log = logging.getLogger(__name__)


def _pair(preds, truths) -> tuple[np.ndarray, np.ndarray]:
    p, t = np.asarray(preds, dtype=np.int64), np.asarray(truths, dtype=np.int64)
    if p.shape != t.shape or p.size < 1:
        raise ValueError("predictions and truths must be non-empty and of equal length")
    return p, t


def accuracy(preds, truths) -> float:
    p, t = _pair(preds, truths)
    return float(np.mean(p == t))


def mae(preds, truths) -> float:
    p, t = _pair(preds, truths)
    return float(np.mean(np.abs(p - t)))


def stratified_folds(y: np.ndarray, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified k folds; plain shuffled k folds when some class has fewer than k members."""
    y = np.asarray(y)
    if k < 2 or k > len(y):
        raise ConfigError(f"cannot split {len(y)} instances into {k} folds")
    counts = np.bincount(y)
    if counts[counts > 0].min() < k:
        log.info("smallest class has fewer than %d members; using unstratified folds", k)
        return list(KFold(n_splits=k, shuffle=True, random_state=seed).split(y))
    return list(StratifiedKFold(n_splits=k, shuffle=True, random_state=seed).split(np.zeros(len(y)), y))


def fold_digest(ds: OrdinalDataset) -> str:
    h = hashlib.sha1()
    h.update(np.ascontiguousarray(ds.X).tobytes())
    h.update(np.ascontiguousarray(ds.y).tobytes())
    return h.hexdigest()


def filter_decision_stats(report: FilterReport, mask: NoiseMask) -> FilterAudit:
    noisy = set(mask.corrupted_indices)
    removed = set(report.removed)
    n = len(report.kept) + len(report.removed)
    noisy_removed = len(noisy & removed)
    return FilterAudit(noisy_removed=noisy_removed, noisy_kept=len(noisy) - noisy_removed,
                       clean_removed=len(removed) - noisy_removed,
                       clean_kept=n - len(noisy) - len(removed) + noisy_removed)


def preprocess(ds: OrdinalDataset, method: str, seed: int = 0,
               params: dict[str, Any] | None = None) -> tuple[OrdinalDataset, FilterReport]:
    """Apply a preprocessing to a training set; the report lists removals (none for relabelling)."""
    method = Preprocessing(method)
    if method is Preprocessing.none:
        return ds, FilterReport(filter_name="none", kept=list(range(ds.n)), removed=[])
    if method is Preprocessing.relabel:
        return relabel(ds).dataset, FilterReport(filter_name="relabel", kept=list(range(ds.n)), removed=[])
    report = run_filter(method.value, ds, seed=seed, **(params or {}))
    return report.apply(ds), report


def case_study(ds: OrdinalDataset, classifier: str = "mid", preprocessing: str = "mipf",
               folds: int = 10, seed: int = 0) -> list[dict[str, Any]]:
    """k-fold comparison of a classifier with and without a preprocessing, averaged over folds."""
    out = []
    splits = stratified_folds(ds.y, folds, seed)
    for method in ("none", preprocessing):
        rows = []
        for fold, (train_idx, test_idx) in enumerate(splits):
            train, test = ds.subset(train_idx), ds.subset(test_idx)
            prepared, _ = preprocess(train, method, seed=seed + fold)
            if prepared.n == 0:
                prepared = train
            model = make_classifier(classifier).fit(prepared)
            rep = compute_report(prepared)
            rows.append({"nmi1": rep.nmi1, "nmi2": rep.nmi2, "noncomparable": rep.non_comparable_pairs,
                         "size": rep.size, "mae": mae(model.predict(test.X), test.y),
                         "branches": getattr(model, "n_branches", np.nan)})
        mean = {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}
        out.append({"preprocessing": method, **mean})
    return out
