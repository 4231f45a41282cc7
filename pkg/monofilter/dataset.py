from __future__ import annotations
import logging
from typing import Sequence
import numpy as np
from scipy.stats import spearmanr
from .config import DISCRETIZE_BINS, RMI_THRESHOLD
from .errors import DataError, SchemaMismatchError
from .models import AttributeKind, AttributeMeta, Instance, OrdinalDataset, RegressionDataset, Relation

log = logging.getLogger(__name__)

_CHUNK = 512


def _vector(x: Instance | Sequence[float] | np.ndarray) -> np.ndarray:
    return np.asarray(x.features if isinstance(x, Instance) else x, dtype=np.float64).reshape(-1)


def dominance(x, x_other) -> Relation:
    """Relation of x to x_other under componentwise <= (exact comparison, no epsilon)."""
    a, b = _vector(x), _vector(x_other)
    if a.shape != b.shape:
        raise SchemaMismatchError(f"feature counts differ: {a.size} vs {b.size}")
    le, ge = bool(np.all(a <= b)), bool(np.all(a >= b))
    if le and ge: return Relation.equal
    if le: return Relation.dominated_by
    if ge: return Relation.dominates
    return Relation.incomparable


def is_monotone_pair(x: Instance, x_other: Instance) -> bool:
    """True when the pair is comparable and respects the label order. Incomparable pairs return False."""
    rel = dominance(x, x_other)
    if rel is Relation.equal: return x.label == x_other.label
    if rel is Relation.dominated_by: return x.label <= x_other.label
    if rel is Relation.dominates: return x.label >= x_other.label
    return False


def dominance_matrix(X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """le[i, j] = all(X[i] <= Y[j]); Y defaults to X."""
    X = np.asarray(X, dtype=np.float64)
    Y = X if Y is None else np.asarray(Y, dtype=np.float64)
    if X.shape[1] != Y.shape[1]:
        raise SchemaMismatchError(f"feature counts differ: {X.shape[1]} vs {Y.shape[1]}")
    out = np.empty((X.shape[0], Y.shape[0]), dtype=bool)
    for start in range(0, X.shape[0], _CHUNK):
        stop = start + _CHUNK
        out[start:stop] = (X[start:stop, None, :] <= Y[None, :, :]).all(axis=2)
    return out


def discretize_target(ds: RegressionDataset, bins: int = DISCRETIZE_BINS) -> OrdinalDataset:
    """Equal-frequency cut of a real target into ordered classes; ties at a cut go to the lower bin."""
    if bins < 2:
        raise DataError("bins must be at least 2")
    t = ds.target
    if np.unique(t).size < bins:
        raise DataError(f"{np.unique(t).size} distinct target values cannot fill {bins} bins")
    s = np.sort(t)
    sizes = [len(part) for part in np.array_split(s, bins)]
    cuts = np.unique(s[np.cumsum(sizes)[:-1] - 1])
    cuts = cuts[cuts < s[-1]]
    if len(cuts) != bins - 1:
        log.warning("%s: ties collapsed %d bins into %d", ds.name, bins, len(cuts) + 1)
    labels = np.searchsorted(cuts, t, side="left")
    edges = [-np.inf, *cuts.tolist(), np.inf]
    names = [f"({edges[k]:g}, {edges[k + 1]:g}]" for k in range(len(cuts) + 1)]
    return OrdinalDataset(attributes=ds.attributes, X=ds.X, y=labels, class_names=names,
                          class_attribute=ds.target_name, name=ds.name, source=ds.source)


def monotone_feature_scores(ds: OrdinalDataset) -> list[float]:
    """Spearman rank correlation of every feature with the class; constant columns score 0."""
    scores = []
    for j in range(ds.f):
        col = ds.X[:, j]
        if ds.n < 2 or np.all(col == col[0]) or np.all(ds.y == ds.y[0]):
            scores.append(0.0)
            continue
        rho = spearmanr(col, ds.y)[0]
        scores.append(0.0 if np.isnan(rho) else float(rho))
    return scores


def monotone_feature_count(ds: OrdinalDataset, threshold: float = RMI_THRESHOLD) -> int:
    return sum(abs(s) > threshold for s in monotone_feature_scores(ds))


def make_monotone_dataset(n: int, f: int = 2, c: int = 3, seed: int = 0, margin: float = 0.0,
                          name: str = "synthetic") -> OrdinalDataset:
    """Random points in [0, 1]^f labelled by quantiles of their coordinate sum.

    The sum is increasing under dominance, so the labelling is monotone. A positive
    margin keeps only points at least that far (in sum) from every class boundary.
    """
    rng = np.random.default_rng(seed)
    X = rng.random((max(4 * n, 64), f))
    s = X.sum(axis=1)
    cuts = np.quantile(s, np.arange(1, c) / c)
    if margin > 0:
        X = X[np.min(np.abs(s[:, None] - cuts[None, :]), axis=1) >= margin]
        while len(X) < n:
            more = rng.random((4 * n, f))
            ms = more.sum(axis=1)
            X = np.vstack([X, more[np.min(np.abs(ms[:, None] - cuts[None, :]), axis=1) >= margin]])
    X = X[:n]
    y = np.searchsorted(cuts, X.sum(axis=1), side="left")
    attrs = [AttributeMeta(name=f"a{j}", kind=AttributeKind.real,
                           observed_min=float(X[:, j].min()), observed_max=float(X[:, j].max()))
             for j in range(f)]
    return OrdinalDataset(attributes=attrs, X=X, y=y, class_names=[str(k) for k in range(c)], name=name)


def dataset_from_arrays(X, y, c: int | None = None, name: str = "dataset") -> OrdinalDataset:
    """Wrap raw arrays with inferred real-valued attribute metadata."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=np.int64)
    c = c if c is not None else max(int(y.max()) + 1 if y.size else 2, 2)
    attrs = [AttributeMeta(name=f"a{j}", observed_min=float(X[:, j].min()), observed_max=float(X[:, j].max()))
             for j in range(X.shape[1])]
    return OrdinalDataset(attributes=attrs, X=X, y=y, class_names=[str(k) for k in range(c)], name=name)
