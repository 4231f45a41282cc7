from __future__ import annotations
import logging
from typing import Sequence
import numpy as np
from scipy.stats import chi2, friedmanchisquare, norm, rankdata
from statsmodels.stats.multitest import multipletests
from .config import ALPHAS
from .errors import ConfigError
from .models import Direction, HolmComparison, RankTable

log = logging.getLogger(__name__)


def block_ranks(matrix: np.ndarray, direction: Direction | str) -> np.ndarray:
    """Rank 1 = best within each block (row); ties share the average rank."""
    M = np.asarray(matrix, dtype=np.float64)
    return rankdata(-M if Direction(direction) is Direction.higher else M, axis=1)


def _friedman_two(ranks: np.ndarray) -> tuple[float, float]:
    # scipy's friedmanchisquare needs at least three algorithms
    N, a = ranks.shape
    ties = sum(float((t ** 3 - t).sum()) for t in (np.unique(row, return_counts=True)[1] for row in ranks))
    correction = 1 - ties / (N * a * (a * a - 1))
    statistic = (12.0 / (N * a * (a + 1)) * float((ranks.sum(axis=0) ** 2).sum()) - 3 * N * (a + 1)) / correction
    return statistic, float(chi2.sf(statistic, a - 1))


def friedman_holm(matrix, direction: Direction | str = Direction.higher,
                  algorithms: Sequence[str] | None = None) -> RankTable:
    """Friedman test over blocks × algorithms plus Holm-corrected comparisons against the best-ranked algorithm."""
    M = np.asarray(matrix, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 2 or M.shape[1] < 2:
        raise ConfigError("need at least 2 blocks and 2 algorithms")
    N, a = M.shape
    names = list(algorithms) if algorithms is not None else [f"alg{j}" for j in range(a)]
    if len(names) != a:
        raise ConfigError("one name per algorithm column is required")
    ranks = block_ranks(M, direction)
    mean = ranks.mean(axis=0)
    if np.all(M == M[:, :1]):
        statistic, p_value = 0.0, 1.0
    elif a >= 3:
        statistic, p_value = (float(v) for v in friedmanchisquare(*M.T))
    else:
        statistic, p_value = _friedman_two(ranks)
    control = int(np.argmin(mean))
    se = np.sqrt(a * (a + 1) / (6.0 * N))
    others = [j for j in range(a) if j != control]
    z = (mean[others] - mean[control]) / se
    p = 2 * norm.sf(np.abs(z))
    p_holm = multipletests(p, method="holm")[1]
    comparisons = [HolmComparison(algorithm=names[j], z=float(zj), p_value=float(pj), p_holm=float(hj),
                                  reject_05=bool(hj < ALPHAS[0]), reject_10=bool(hj < ALPHAS[1]))
                   for j, zj, pj, hj in zip(others, z, p, p_holm)]
    return RankTable(algorithms=names, mean_ranks={n: float(r) for n, r in zip(names, mean)}, blocks=N,
                     direction=Direction(direction), statistic=float(statistic), p_value=p_value,
                     control=names[control], comparisons=comparisons)
