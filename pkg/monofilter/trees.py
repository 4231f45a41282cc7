"""C4.5-style decision trees.

C45Tree grows gain-ratio splits on numeric thresholds and prunes with the pessimistic
error estimate. MID subtracts R times an order-ambiguity penalty from every split
score. OrdinalC45 decomposes an ordinal target into c-1 binary C45Trees (y > k).
"""
from __future__ import annotations
import logging
import math
from typing import Any
import numpy as np
from pydantic import BaseModel
from scipy.stats import beta
from .classifiers import ClassifierModel, as_matrix
from .config import MID_R, TREE_CONFIDENCE, TREE_MAX_DEPTH, TREE_MIN_LEAF
from .dataset import dominance_matrix
from .errors import ConfigError
from .models import ClassifierKind, OrdinalDataset

log = logging.getLogger(__name__)

_EPS = 1e-12


class TreeNode(BaseModel):
    counts: list[float]
    label: int
    feature: int | None = None
    threshold: float | None = None
    left: TreeNode | None = None
    right: TreeNode | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def leaves(self) -> int:
        return 1 if self.is_leaf else self.left.leaves() + self.right.leaves()


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Row-wise entropy (bits) of class-count rows."""
    counts = np.atleast_2d(counts).astype(np.float64)
    tot = counts.sum(axis=1, keepdims=True)
    p = np.divide(counts, tot, out=np.zeros_like(counts), where=tot > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(p), 0.0).sum(axis=1)
    return h


def pessimistic_errors(n: float, errors: float, confidence: float) -> float:
    """Upper confidence bound on the error count of a leaf holding n instances."""
    if n <= 0:
        return 0.0
    if errors >= n:
        return float(n)
    return float(n * beta.ppf(1 - confidence, errors + 1, n - errors))


class C45Tree(ClassifierModel):
    kind = ClassifierKind.c45

    def __init__(self, confidence: float = TREE_CONFIDENCE, min_leaf: int = TREE_MIN_LEAF,
                 max_depth: int = TREE_MAX_DEPTH, ambiguity_weight: float = 0.0, prune: bool = True):
        super().__init__()
        if min_leaf < 1:
            raise ConfigError("min_leaf must be at least 1")
        if not 0 < confidence < 1:
            raise ConfigError("confidence must lie in (0, 1)")
        self.confidence, self.min_leaf, self.max_depth = confidence, min_leaf, max_depth
        self.ambiguity_weight, self.prune = ambiguity_weight, prune
        self.root_: TreeNode | None = None
        self.feature_names_: list[str] = []

    def hyperparameters(self) -> dict[str, Any]:
        return {"confidence": self.confidence, "min_leaf": self.min_leaf, "max_depth": self.max_depth,
                "ambiguity_weight": self.ambiguity_weight, "prune": self.prune}

    def fit(self, ds: OrdinalDataset) -> C45Tree:
        self.feature_names_ = [a.name for a in ds.attributes]
        self._remember(ds)
        return self.fit_arrays(ds.X, ds.y, ds.class_count)

    def fit_arrays(self, X: np.ndarray, y: np.ndarray, c: int) -> C45Tree:
        self._X, self._y, self._c = np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64), c
        self.class_count, self.n_features = c, self._X.shape[1]
        if not self.feature_names_:
            self.feature_names_ = [f"a{j}" for j in range(self.n_features)]
        self._le = dominance_matrix(self._X) if self.ambiguity_weight > 0 else None
        self.root_ = self._grow(np.arange(len(self._y)), 0)
        if self.prune:
            self._prune(self.root_)
        del self._X, self._y, self._le
        return self

    def _leaf(self, counts: np.ndarray) -> TreeNode:
        return TreeNode(counts=counts.astype(float).tolist(), label=int(np.argmax(counts)))

    def _grow(self, idx: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(self._y[idx], minlength=self._c)
        node = self._leaf(counts)
        if depth >= self.max_depth or len(idx) < 2 * self.min_leaf or counts.max() == len(idx):
            return node
        split = self._best_split(idx, counts)
        if split is None:
            return node
        f, thr = split
        go_left = self._X[idx, f] <= thr
        node.feature, node.threshold = f, thr
        node.left = self._grow(idx[go_left], depth + 1)
        node.right = self._grow(idx[~go_left], depth + 1)
        return node

    def _ambiguity(self, idx: np.ndarray, order: np.ndarray, pos: np.ndarray,
                   left_counts: np.ndarray, right_counts: np.ndarray) -> np.ndarray:
        """NMI1 of the node's instances relabelled with their child's majority class, per cut position."""
        m = len(idx)
        P = np.triu(self._le[np.ix_(idx[order], idx[order])], k=1)
        cross = np.cumsum(P.sum(axis=1) - P.sum(axis=0))[pos - 1]
        clashing = left_counts.argmax(axis=1) > right_counts.argmax(axis=1)
        return np.where(clashing, 2.0 * cross / (m * (m - 1)), 0.0)

    def _best_split(self, idx: np.ndarray, counts: np.ndarray) -> tuple[int, float] | None:
        m = len(idx)
        base = _entropy(counts)[0]
        gains, scores, feats, thrs = [], [], [], []
        for f in range(self._X.shape[1]):
            order = np.argsort(self._X[idx, f], kind="stable")
            xs, ys = self._X[idx[order], f], self._y[idx[order]]
            distinct = np.flatnonzero(xs[1:] > xs[:-1]) + 1
            if not distinct.size:
                continue
            pos = distinct[(distinct >= self.min_leaf) & (m - distinct >= self.min_leaf)]
            if not pos.size:
                continue
            cum = np.cumsum(np.eye(self._c, dtype=np.int64)[ys], axis=0)
            lc = cum[pos - 1]
            rc = counts[None, :] - lc
            w = pos / m
            gain = base - w * _entropy(lc) - (1 - w) * _entropy(rc)
            gain = gain - math.log2(len(distinct)) / m
            split_info = -(w * np.log2(w) + (1 - w) * np.log2(1 - w))
            score = gain / split_info
            if self.ambiguity_weight > 0 and m > 1:
                score = score - self.ambiguity_weight * self._ambiguity(idx, order, pos, lc, rc)
            thr = (xs[pos - 1] + xs[pos]) / 2
            thr = np.where(thr >= xs[pos], xs[pos - 1], thr)   # midpoint rounded onto the upper value
            gains.append(gain); scores.append(score); feats.append(np.full(len(pos), f)); thrs.append(thr)
        if not gains:
            return None
        gain, score = np.concatenate(gains), np.concatenate(scores)
        feat, thr = np.concatenate(feats), np.concatenate(thrs)
        useful = gain > _EPS
        if not useful.any():
            return None
        eligible = useful & (gain >= gain[useful].mean() - _EPS)
        best = int(np.argmax(np.where(eligible, score, -np.inf)))
        return int(feat[best]), float(thr[best])

    def _prune(self, node: TreeNode) -> float:
        """Collapse subtrees whose pessimistic error is not clearly below a leaf's; returns the estimate."""
        n = sum(node.counts)
        as_leaf = pessimistic_errors(n, n - max(node.counts), self.confidence)
        if node.is_leaf:
            return as_leaf
        subtree = self._prune(node.left) + self._prune(node.right)
        if as_leaf <= subtree + 0.1:
            node.feature = node.threshold = node.left = node.right = None
            return as_leaf
        return subtree

    def _leaf_for(self, x: np.ndarray) -> TreeNode:
        node = self.root_
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def predict(self, X) -> np.ndarray:
        self._fitted()
        Q = as_matrix(X, self.n_features)
        return np.array([self._leaf_for(x).label for x in Q], dtype=np.int64)

    def predict_proba(self, X) -> np.ndarray:
        self._fitted()
        Q = as_matrix(X, self.n_features)
        rows = [np.asarray(self._leaf_for(x).counts, dtype=np.float64) for x in Q]
        return np.array([r / r.sum() if r.sum() > 0 else np.full(len(r), 1 / len(r)) for r in rows])

    @property
    def n_branches(self) -> int:
        self._fitted()
        return self.root_.leaves()

    def rules(self) -> list[str]:
        """One rule per leaf: the conjunction of tests on its path and the predicted class."""
        self._fitted()
        out: list[str] = []

        def walk(node: TreeNode, path: list[str]) -> None:
            if node.is_leaf:
                out.append(f"{' AND '.join(path) or 'TRUE'} => {node.label}")
                return
            name = self.feature_names_[node.feature]
            walk(node.left, [*path, f"{name} <= {node.threshold:g}"])
            walk(node.right, [*path, f"{name} > {node.threshold:g}"])

        walk(self.root_, [])
        return out

    def _state(self) -> dict[str, Any]:
        return {"root": self.root_.model_dump(), "feature_names": self.feature_names_}

    def _load_state(self, state: dict[str, Any]) -> None:
        self.root_ = TreeNode.model_validate(state["root"])
        self.feature_names_ = state.get("feature_names", [])


class MID(C45Tree):
    """C4.5 whose split score is gain ratio minus R times the split's order ambiguity."""
    kind = ClassifierKind.mid

    def __init__(self, confidence: float = TREE_CONFIDENCE, min_leaf: int = TREE_MIN_LEAF,
                 max_depth: int = TREE_MAX_DEPTH, ambiguity_weight: float = MID_R, prune: bool = True):
        super().__init__(confidence, min_leaf, max_depth, ambiguity_weight, prune)


class OrdinalC45(ClassifierModel):
    """c-1 binary trees estimating P(y > k); class scores are successive differences."""
    kind = ClassifierKind.ordinal_c45

    def __init__(self, confidence: float = TREE_CONFIDENCE, min_leaf: int = TREE_MIN_LEAF,
                 max_depth: int = TREE_MAX_DEPTH):
        super().__init__()
        self.confidence, self.min_leaf, self.max_depth = confidence, min_leaf, max_depth
        self.trees_: list[C45Tree | float] = []

    def hyperparameters(self) -> dict[str, Any]:
        return {"confidence": self.confidence, "min_leaf": self.min_leaf, "max_depth": self.max_depth}

    def fit(self, ds: OrdinalDataset) -> OrdinalC45:
        self._remember(ds)
        self.trees_ = []
        for k in range(ds.class_count - 1):
            target = (ds.y > k).astype(np.int64)
            if target.min() == target.max():
                self.trees_.append(float(target[0]))    # constant P(y > k)
                continue
            tree = C45Tree(self.confidence, self.min_leaf, self.max_depth)
            tree.feature_names_ = [a.name for a in ds.attributes]
            self.trees_.append(tree.fit_arrays(ds.X, target, 2))
        return self

    def class_scores(self, X) -> np.ndarray:
        self._fitted()
        Q = as_matrix(X, self.n_features)
        gt = np.column_stack([np.full(len(Q), t) if isinstance(t, float) else t.predict_proba(Q)[:, 1]
                              for t in self.trees_])
        scores = np.empty((len(Q), self.class_count))
        scores[:, 0] = 1 - gt[:, 0]
        scores[:, 1:-1] = gt[:, :-1] - gt[:, 1:]
        scores[:, -1] = gt[:, -1]
        return scores

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.class_scores(X), axis=1).astype(np.int64)

    def _state(self) -> dict[str, Any]:
        return {"trees": [t if isinstance(t, float) else t.to_dict() for t in self.trees_]}

    def _load_state(self, state: dict[str, Any]) -> None:
        self.trees_ = [t if isinstance(t, float) else C45Tree.from_dict(t) for t in state["trees"]]
