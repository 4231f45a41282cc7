from __future__ import annotations
import inspect
import logging
import math
from typing import Callable
import numpy as np
from scipy.spatial.distance import cdist
from sklearn.model_selection import KFold
from .classifiers import ClassifierModel, majority
from .config import (FILTER_MAX_ITERATIONS, MENN_K, MINFFC_G, MINFFC_K, MINFFC_P, MINFFC_PARTITIONS,
                     MINFFC_SCHEME, MINFFC_THRESHOLD, MIPF_G, MIPF_P, MIPF_PARTITIONS, MIPF_SCHEME,
                     MRNGE_FIRST_ORDER_EDITION)
from .errors import ConfigError, DataError
from .logistic import LogisticOVR
from .metrics import nmi1_contributions
from .models import FilterIteration, FilterReport, OrdinalDataset
from .neighbors import KNN, label_intervals, nearest
from .trees import OrdinalC45

log = logging.getLogger(__name__)

SCHEMES = ("consensus", "majority")


def _flagged(wrong_votes: np.ndarray, voters: int, scheme: str) -> np.ndarray:
    if scheme == "consensus":
        return wrong_votes >= voters
    if scheme == "majority":
        return wrong_votes > voters / 2
    raise ConfigError(f"unknown voting scheme {scheme!r}; expected one of {SCHEMES}")


def _folds(n: int, partitions: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    return list(KFold(n_splits=min(partitions, n), shuffle=True, random_state=seed % 2**32).split(np.arange(n)))


def menn(ds: OrdinalDataset, k: int = MENN_K) -> FilterReport:
    """Monotonic edited nearest neighbour: drop x when the majority of its k nearest
    neighbours inside x's label interval (over the rest of the set) disagrees with it."""
    if k < 1:
        raise ConfigError("k must be at least 1")
    lo, hi = label_intervals(ds.X, ds.X, ds.y, ds.class_count, exclude_self=True)
    D = cdist(ds.X, ds.X)
    np.fill_diagonal(D, np.inf)
    removed = []
    for i in range(ds.n):
        if lo[i] > hi[i]:
            continue
        cand = np.flatnonzero((ds.y >= lo[i]) & (ds.y <= hi[i]))
        cand = cand[cand != i]
        if not cand.size:
            continue
        if ds.y[i] != majority(ds.y[nearest(D[i], cand, k)], ds.class_count):
            removed.append(i)
    log.info("MENN removed %d of %d", len(removed), ds.n)
    return _report("menn", ds.n, removed, [FilterIteration(iteration=1, removed=len(removed), working=ds.n)],
                   {"k": k})


def gabriel_graph(X: np.ndarray) -> list[np.ndarray]:
    """Neighbour lists: (i, j) is an edge when d_ij^2 <= d_ik^2 + d_jk^2 for every other point k."""
    D2 = cdist(X, X, metric="sqeuclidean")
    adj = []
    for i in range(len(X)):
        bound = (D2[i][None, :] + D2).min(axis=1)   # k = i and k = j reduce to d_ij^2 itself
        row = D2[i] <= bound
        row[i] = False
        adj.append(np.flatnonzero(row))
    return adj


def mrnge(ds: OrdinalDataset, first_order_edition: bool = MRNGE_FIRST_ORDER_EDITION) -> FilterReport:
    """Proximity-graph editing: an instance misclassified by its graph neighbours is removed
    when the neighbourhood of it and its same-class neighbours is mostly of another class."""
    if ds.n < 2:
        raise DataError("MRNGE needs at least 2 instances")
    adj = gabriel_graph(ds.X)
    y, removed = ds.y, []
    for i in range(ds.n):
        nb = adj[i]
        if not nb.size:
            continue
        if first_order_edition and majority(y[nb], ds.class_count) == y[i]:
            continue
        group = {i, *nb[y[nb] == y[i]].tolist()}
        hood = set().union(*(adj[r].tolist() for r in group)) - group
        hood = np.fromiter(hood, dtype=np.int64, count=len(hood))
        if np.count_nonzero(y[hood] != y[i]) > np.count_nonzero(y[hood] == y[i]):
            removed.append(i)
    log.info("MRNGE removed %d of %d", len(removed), ds.n)
    return _report("mrnge", ds.n, removed, [FilterIteration(iteration=1, removed=len(removed), working=ds.n)],
                   {"first_order_edition": first_order_edition})


def mipf(ds: OrdinalDataset, partitions: int = MIPF_PARTITIONS, p: float = MIPF_P, y_good: int | None = None,
         g: int = MIPF_G, scheme: str = MIPF_SCHEME, seed: int = 0,
         max_iterations: int = FILTER_MAX_ITERATIONS) -> FilterReport:
    """Iterative partitioning filter with ordinal C4.5 voters.

    Every iteration splits the working set T into folds, trains one model per fold
    complement and flags instances the ensemble misclassifies (consensus by default).
    Flagged instances are dropped; y_good unflagged ones move to the good pool T_G.
    Stops after g consecutive iterations with fewer than p·|T| removals.
    """
    if partitions < 2:
        raise ConfigError("partitions must be at least 2")
    work, good, removed, history = np.arange(ds.n), [], [], []
    quiet, it = 0, 0
    while len(work) >= 2 and it < max_iterations:
        it += 1
        sub = ds.subset(work)
        folds = _folds(len(work), partitions, seed + it)
        wrong = np.zeros(len(work), dtype=np.int64)
        for train, _ in folds:
            wrong += OrdinalC45().fit(sub.subset(train)).predict(sub.X) != sub.y
        noisy = _flagged(wrong, len(folds), scheme)
        take = y_good if y_good is not None else math.ceil(0.01 * len(work))
        good_now = np.flatnonzero(~noisy)[:take]
        removed.extend(work[noisy].tolist())
        good.extend(work[good_now].tolist())
        drop = noisy.copy()
        drop[good_now] = True
        history.append(FilterIteration(iteration=it, removed=int(noisy.sum()), good=len(good_now), working=len(work)))
        log.info("MIPF iteration %d: %d noisy, %d good, |T|=%d", it, noisy.sum(), len(good_now), len(work))
        quiet = quiet + 1 if noisy.sum() < p * len(work) else 0
        work = work[~drop]
        if quiet >= g:
            break
    return _report("mipf", ds.n, removed, history,
                   {"partitions": partitions, "p": p, "y_good": y_good, "g": g, "scheme": scheme, "seed": seed})


def _ensemble(k: int, seed: int) -> list[ClassifierModel]:
    return [OrdinalC45(), KNN(k=k), LogisticOVR(seed=seed)]


def noise_scores(wrong_fraction: np.ndarray, neighbours: np.ndarray) -> np.ndarray:
    """Score in [-1, 1] from the fraction v of voters that misclassify an instance and the
    share a of its neighbours carrying the same noisy/clean flag: (2v - 1)(1 + a) / 2."""
    v = np.asarray(wrong_fraction, dtype=np.float64)
    flag = v > 0.5
    if neighbours.size and neighbours.shape[1]:
        agree = (flag[neighbours] == flag[:, None]).mean(axis=1)
    else:
        agree = np.zeros(len(v))
    return (2 * v - 1) * (1 + agree) / 2


def minffc(ds: OrdinalDataset, partitions: int = MINFFC_PARTITIONS, p: float = MINFFC_P, g: int = MINFFC_G,
           k: int = MINFFC_K, threshold: float = MINFFC_THRESHOLD, scheme: str = MINFFC_SCHEME, seed: int = 0,
           max_iterations: int = FILTER_MAX_ITERATIONS) -> FilterReport:
    """Fusion of classifiers filter with a monotonicity-weighted noise score.

    A preliminary out-of-fold vote of ordinal C4.5, k-NN and logistic regression
    separates likely-clean instances; the ensemble is retrained on them and re-votes
    every instance. score = noise score × the instance's NMI1 share; instances scoring
    above the threshold are removed. Stops once g consecutive iterations remove fewer
    than p·|T| instances.
    """
    if partitions < 2:
        raise ConfigError("partitions must be at least 2")
    work, removed, history = np.arange(ds.n), [], []
    countdown, it = g, 0
    while len(work) >= 2 and it < max_iterations:
        it += 1
        sub = ds.subset(work)
        n = len(work)
        wrong = np.zeros(n, dtype=np.int64)
        for train, test in _folds(n, partitions, seed + it):
            for model in _ensemble(k, seed):
                wrong[test] += model.fit(sub.subset(train)).predict(sub.X[test]) != sub.y[test]
        clean = np.flatnonzero(~_flagged(wrong, 3, scheme))
        if len(clean) < 2:
            log.warning("MINFFC iteration %d: fewer than 2 preliminary clean instances; using all of T", it)
            clean = np.arange(n)
        fold_of = np.full(n, -1)
        preds = []
        for f, (train, test) in enumerate(_folds(len(clean), partitions, seed + 7919 * it)):
            fold_of[clean[test]] = f
            preds.append(np.array([m.fit(sub.subset(clean[train])).predict(sub.X) for m in _ensemble(k, seed)]))
        preds = np.stack(preds)                      # folds × models × n
        miss = preds != sub.y[None, None, :]
        v = miss.reshape(-1, n).mean(axis=0)         # instances outside the clean set: every model votes
        own = fold_of >= 0
        v[own] = miss[fold_of[own], :, np.flatnonzero(own)].mean(axis=1)
        nb = KNN(k=k).fit(sub).neighbours(sub.X, exclude_self=True)
        score = noise_scores(v, nb) * nmi1_contributions(sub)
        drop = score > threshold
        removed.extend(work[drop].tolist())
        history.append(FilterIteration(iteration=it, removed=int(drop.sum()), good=len(clean), working=n))
        log.info("MINFFC iteration %d: removed %d, |T|=%d", it, drop.sum(), n)
        countdown = countdown - 1 if drop.sum() < p * n else g
        work = work[~drop]
        if countdown <= 0:
            break
    return _report("minffc", ds.n, removed, history,
                   {"partitions": partitions, "p": p, "g": g, "k": k, "threshold": threshold,
                    "scheme": scheme, "seed": seed})


def _report(name: str, n: int, removed: list[int], history: list[FilterIteration], params: dict) -> FilterReport:
    gone = set(removed)
    return FilterReport(filter_name=name, kept=[i for i in range(n) if i not in gone], removed=sorted(gone),
                        iterations=history, parameters=params)


FILTERS: dict[str, Callable[..., FilterReport]] = {"menn": menn, "mrnge": mrnge, "mipf": mipf, "minffc": minffc}


def run_filter(name: str, ds: OrdinalDataset, seed: int = 0, **params) -> FilterReport:
    """Dispatch by name; `seed` only reaches the filters that draw folds."""
    key = name.lower()
    if key not in FILTERS:
        raise ConfigError(f"unknown filter {name!r}; expected one of {sorted(FILTERS)}")
    if key in ("mipf", "minffc"):
        params["seed"] = seed
    fn = FILTERS[key]
    try:
        inspect.signature(fn).bind(ds, **params)
    except TypeError as e:
        raise ConfigError(f"{name}: {e}") from None
    return fn(ds, **params)
