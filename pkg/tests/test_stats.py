import math
import numpy as np
import pytest
from scipy.stats import friedmanchisquare, norm

from monofilter.errors import ConfigError
from monofilter.models import Direction
from monofilter.stats import block_ranks, friedman_holm

HAND = np.array([[0.90, 0.80, 0.70],
                 [0.85, 0.80, 0.60],
                 [0.70, 0.75, 0.50],
                 [0.95, 0.90, 0.85]])


def test_hand_built_table():
    t = friedman_holm(HAND, "higher-better", ["mipf", "menn", "none"])
    assert t.mean_ranks == {"mipf": 1.25, "menn": 1.75, "none": 3.0}
    assert t.statistic == pytest.approx(6.5, abs=1e-9)
    assert t.p_value == pytest.approx(math.exp(-3.25), abs=1e-9)
    assert t.control == "mipf" and t.blocks == 4

    se = math.sqrt(3 * 4 / (6 * 4))
    p_menn = 2 * norm.sf(0.5 / se)
    p_none = 2 * norm.sf(1.75 / se)
    holm = {"none": min(1.0, 2 * p_none), "menn": min(1.0, max(2 * p_none, p_menn))}
    by_name = {c.algorithm: c for c in t.comparisons}
    assert set(by_name) == {"menn", "none"}
    for name, expected in holm.items():
        assert by_name[name].p_holm == pytest.approx(expected, abs=1e-9)
    assert by_name["none"].z == pytest.approx(1.75 / se)


def test_statistic_matches_scipy_with_ties():
    rng = np.random.default_rng(5)
    for _ in range(50):
        M = rng.integers(0, 4, size=(rng.integers(3, 12), rng.integers(3, 6))).astype(float)
        if np.all(M == M[:, :1]):
            continue
        try:
            ref = friedmanchisquare(*M.T)
        except ValueError:
            continue
        t = friedman_holm(M, Direction.lower)
        assert t.statistic == pytest.approx(ref[0], abs=1e-9)
        assert t.p_value == pytest.approx(ref[1], abs=1e-9)


def test_rank_sum_identity():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a = int(rng.integers(2, 7))
        M = rng.integers(0, 3, size=(int(rng.integers(2, 9)), a))
        assert np.allclose(block_ranks(M, "higher-better").sum(axis=1), a * (a + 1) / 2)


def test_two_algorithms():
    M = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    t = friedman_holm(M, "higher-better", ["mipf", "none"])
    # (wins - losses)^2 / blocks
    assert t.statistic == pytest.approx(1.0, abs=1e-9)
    assert t.p_value == pytest.approx(2 * norm.sf(1.0), abs=1e-9)
    assert t.control == "mipf"


def test_full_ties():
    t = friedman_holm(np.ones((5, 4)), Direction.higher)
    assert all(r == 2.5 for r in t.mean_ranks.values())
    assert t.statistic == 0.0 and t.p_value == 1.0
    assert not any(c.reject_10 for c in t.comparisons)


def test_direction_flips_control():
    assert friedman_holm(HAND, "lower-better").control == "alg2"
    assert block_ranks([[0.1, 0.3]], Direction.lower).tolist() == [[1.0, 2.0]]
    assert block_ranks([[0.1, 0.3]], Direction.higher).tolist() == [[2.0, 1.0]]


def test_flags_follow_thresholds():
    M = np.tile([0.9, 0.5, 0.1], (30, 1)) + np.random.default_rng(1).normal(0, 0.01, (30, 3))
    t = friedman_holm(M, "higher-better")
    worst = {c.algorithm: c for c in t.comparisons}["alg2"]
    assert worst.reject_05 and worst.reject_10 and t.p_value < 0.05


def test_shape_errors():
    with pytest.raises(ConfigError):
        friedman_holm(np.ones((1, 3)))
    with pytest.raises(ConfigError):
        friedman_holm(np.ones((3, 1)))
    with pytest.raises(ConfigError):
        friedman_holm(np.ones((3, 2)), algorithms=["a"])
