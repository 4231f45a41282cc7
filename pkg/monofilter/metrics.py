from __future__ import annotations
import numpy as np
from .dataset import dominance_matrix
from .errors import SchemaMismatchError
from .models import Instance, MonotonicityReport, OrdinalDataset


def clash_matrix(X: np.ndarray, y: np.ndarray, le: np.ndarray | None = None) -> np.ndarray:
    """Symmetric boolean matrix of comparable pairs whose labels break the order."""
    le = dominance_matrix(X) if le is None else le
    y = np.asarray(y)
    gt = y[:, None] > y[None, :]
    return (le & gt) | (le.T & gt.T)


def nclash_counts(ds: OrdinalDataset) -> np.ndarray:
    return clash_matrix(ds.X, ds.y).sum(axis=1)


def nclash(x: Instance | int, ds: OrdinalDataset) -> int:
    """Number of members of ds that clash with x (x itself never clashes with its own copy)."""
    if isinstance(x, (int, np.integer)):
        x = ds.instance(int(x))
    v = np.asarray(x.features, dtype=np.float64)
    if v.size != ds.f:
        raise SchemaMismatchError(f"feature counts differ: {v.size} vs {ds.f}")
    below = (ds.X <= v).all(axis=1)
    above = (ds.X >= v).all(axis=1)
    return int(np.sum((below & (ds.y > x.label)) | (above & (ds.y < x.label))))


def nmi1_contributions(ds: OrdinalDataset) -> np.ndarray:
    """Each instance's share of NMI1: nclash(x) / (n - 1)."""
    if ds.n < 2:
        return np.zeros(ds.n)
    return nclash_counts(ds) / (ds.n - 1)


def compute_report(ds: OrdinalDataset) -> MonotonicityReport:
    n = ds.n
    if n < 2:
        return MonotonicityReport(nmi1=0.0, nmi2=0.0, non_comparable_pairs=0, clash_counts=[0] * n, size=n)
    le = dominance_matrix(ds.X)
    counts = clash_matrix(ds.X, ds.y, le).sum(axis=1)
    return MonotonicityReport(
        nmi1=float(counts.sum()) / (n * (n - 1)),
        nmi2=float(np.count_nonzero(counts)) / n,
        non_comparable_pairs=int((~(le | le.T)).sum() // 2),
        clash_counts=counts.astype(int).tolist(),
        size=n,
    )
