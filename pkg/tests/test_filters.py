import numpy as np
import pytest
from pydantic import ValidationError

from monofilter.dataset import dataset_from_arrays, make_monotone_dataset
from monofilter.errors import ConfigError
from monofilter.evaluation import filter_decision_stats
from monofilter.filters import gabriel_graph, menn, minffc, mipf, mrnge, noise_scores, run_filter
from monofilter.metrics import nclash_counts
from monofilter.models import FilterReport
from monofilter.noise import inject_noise


def _hexagon():
    angles = np.arange(6) * np.pi / 3
    ring = np.column_stack([np.cos(angles), np.sin(angles)])
    return dataset_from_arrays(np.vstack([ring, [[0.0, 0.0]]]), [0] * 6 + [1])


def _chain(n=60, width=20):
    x = np.arange(n, dtype=float)
    return dataset_from_arrays(x, (x // width).astype(int))


def test_menn_removes_lone_label():
    report = menn(dataset_from_arrays([1, 2, 3, 4, 5], [0, 0, 1, 0, 0]), k=3)
    assert 2 in report.removed
    assert {0, 1, 3} <= set(report.kept)
    assert report.parameters == {"k": 3}


@pytest.mark.parametrize("name", ["menn", "mrnge", "mipf", "minffc"])
def test_uniform_labels_nothing_removed(name):
    ds = dataset_from_arrays(np.random.default_rng(0).random((30, 2)), [0] * 30, c=2)
    assert run_filter(name, ds).removed == []


def test_menn_small_sets():
    report = menn(dataset_from_arrays([1, 2], [0, 0]), k=5)
    assert report.removed == []
    with pytest.raises(ConfigError):
        menn(dataset_from_arrays([1, 2], [0, 1]), k=0)


def test_menn_removals_reduce_clashes():
    for seed in range(5):
        ds, _ = inject_noise(make_monotone_dataset(80, f=2, c=3, seed=seed), 0.2, seed=seed)
        report = menn(ds)
        counts = nclash_counts(ds)
        if any(counts[i] > 0 for i in report.removed):
            assert nclash_counts(report.apply(ds)).sum() < counts.sum()


def test_gabriel_graph_hexagon():
    adj = gabriel_graph(_hexagon().X)
    assert sorted(adj[6].tolist()) == [0, 1, 2, 3, 4, 5]
    assert sorted(adj[0].tolist()) == [1, 5, 6]


def test_mrnge_removes_planted_outlier():
    report = mrnge(_hexagon())
    assert report.removed == [6]


def test_mrnge_two_instances():
    report = mrnge(dataset_from_arrays([0, 1], [0, 1]))
    assert report.removed == [0, 1]
    assert mrnge(dataset_from_arrays([0, 1], [0, 1])) == report


def test_mipf_separable_keeps_everything():
    report = mipf(_chain())
    assert report.removed == []
    assert len(report.iterations) == 1


def test_mipf_p_one_runs_once():
    ds, _ = inject_noise(_chain(100, 25), 0.1, seed=3)
    assert len(mipf(ds, p=1.0).iterations) == 1


def test_mipf_finds_corrupted_labels():
    found = total = 0
    for seed in range(10):
        ds, mask = inject_noise(_chain(200, 50), 0.1, seed)
        audit = filter_decision_stats(mipf(ds, seed=seed), mask)
        found += audit.noisy_removed
        total += audit.noisy_removed + audit.noisy_kept
    assert found / total >= 0.8


def test_noise_scores_sign():
    s = noise_scores(np.array([1.0, 0.0, 0.0]), np.array([[1], [2], [1]]))
    assert s.tolist() == [0.5, -1.0, -1.0]
    assert noise_scores(np.array([0.5]), np.empty((1, 0), dtype=int)).tolist() == [0.0]


def test_minffc_clean_data_nothing_removed():
    report = minffc(make_monotone_dataset(60, f=2, c=3, seed=1, margin=0.05))
    assert report.removed == []


def test_minffc_g_zero_single_iteration():
    ds, _ = inject_noise(make_monotone_dataset(60, f=2, c=3, seed=2), 0.2, seed=2)
    report = minffc(ds, g=0)
    assert len(report.iterations) == 1


@pytest.mark.parametrize("method", ["mipf", "minffc"])
def test_over_filtering_guard(method):
    for seed in range(3):
        ds = make_monotone_dataset(300, f=2, c=3, seed=seed, margin=0.05)
        assert len(run_filter(method, ds, seed=seed).removed) <= 0.05 * ds.n


@pytest.mark.parametrize("method", ["menn", "mrnge", "mipf", "minffc"])
def test_reports_partition_and_are_deterministic(method):
    ds, _ = inject_noise(make_monotone_dataset(70, f=2, c=3, seed=5), 0.2, seed=5)
    report = run_filter(method, ds, seed=4)
    assert sorted(report.kept + report.removed) == list(range(ds.n))
    kept = report.apply(ds)
    assert np.array_equal(kept.X, ds.X[report.kept]) and np.array_equal(kept.y, ds.y[report.kept])
    assert run_filter(method, ds, seed=4) == report


def test_run_filter_rejects_bad_configuration():
    ds = _chain()
    with pytest.raises(ConfigError):
        run_filter("ipf", ds)
    with pytest.raises(ConfigError):
        run_filter("menn", ds, partitions=3)
    with pytest.raises(ConfigError):
        run_filter("mipf", ds, scheme="unanimous")
    with pytest.raises(ConfigError):
        run_filter("minffc", ds, partitions=1)


def test_report_rejects_overlap():
    with pytest.raises(ValidationError):
        FilterReport(filter_name="x", kept=[0, 1], removed=[1])
