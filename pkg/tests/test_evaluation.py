import numpy as np
import pytest

from monofilter.dataset import dataset_from_arrays, make_monotone_dataset
from monofilter.errors import ConfigError
from monofilter.evaluation import (accuracy, case_study, filter_decision_stats, fold_digest, mae, preprocess,
                                   stratified_folds)
from monofilter.metrics import compute_report
from monofilter.models import FilterReport, NoiseMask
from monofilter.noise import inject_noise


def test_accuracy_and_mae_examples():
    assert accuracy([0, 1, 2], [0, 1, 2]) == 1.0
    assert accuracy([0, 0], [1, 1]) == 0.0
    assert accuracy([0, 1, 1, 2], [0, 1, 2, 2]) == 0.75
    assert mae([1, 2], [1, 2]) == 0.0
    assert mae([0, 2], [2, 0]) == 2.0
    assert mae([1, 3], [2, 3]) == 0.5
    with pytest.raises(ValueError):
        accuracy([0], [0, 1])


def test_stratified_folds_partition():
    y = np.repeat([0, 1, 2], 20)
    folds = stratified_folds(y, 10, seed=3)
    assert len(folds) == 10
    test = np.concatenate([t for _, t in folds])
    assert sorted(test.tolist()) == list(range(60))
    for train, t in folds:
        assert np.bincount(y[t], minlength=3).tolist() == [2, 2, 2]
        assert not set(train) & set(t)
    assert all(np.array_equal(a[1], b[1]) for a, b in zip(folds, stratified_folds(y, 10, seed=3)))


def test_stratified_folds_fallback_and_errors(caplog):
    y = np.array([0] * 12 + [1] * 3)
    with caplog.at_level("INFO", logger="monofilter.evaluation"):
        folds = stratified_folds(y, 5, seed=0)
    assert len(folds) == 5 and "unstratified" in caplog.text
    with pytest.raises(ConfigError):
        stratified_folds(y, 20, seed=0)


def test_filter_decision_stats():
    mask = NoiseMask(corrupted_indices=[], original_labels={}, noise_fraction=0.0, seed=0)
    none = FilterReport(filter_name="none", kept=list(range(10)), removed=[])
    audit = filter_decision_stats(none, mask)
    assert (audit.noisy_removed, audit.noisy_kept, audit.clean_removed, audit.clean_kept) == (0, 0, 0, 10)

    mask = NoiseMask(corrupted_indices=[2, 5], original_labels={2: 0, 5: 1}, noise_fraction=0.2, seed=0)
    perfect = FilterReport(filter_name="x", kept=[0, 1, 3, 4, 6, 7, 8, 9], removed=[2, 5])
    audit = filter_decision_stats(perfect, mask)
    assert (audit.noisy_removed, audit.noisy_kept, audit.clean_removed, audit.clean_kept) == (2, 0, 0, 8)

    mixed = FilterReport(filter_name="x", kept=[0, 1, 2, 3, 4, 6, 8, 9], removed=[5, 7])
    audit = filter_decision_stats(mixed, mask)
    assert (audit.noisy_removed, audit.noisy_kept, audit.clean_removed, audit.clean_kept) == (1, 1, 1, 7)
    assert sum(audit.percentages().values()) == pytest.approx(100.0)


def test_random_removal_decision_proportions():
    n, m, r = 1000, 0.3, 0.2
    rng = np.random.default_rng(11)
    totals = np.zeros(4)
    trials = 200
    for _ in range(trials):
        noisy = rng.choice(n, size=int(m * n), replace=False)
        removed = np.flatnonzero(rng.random(n) < r)
        report = FilterReport(filter_name="random", removed=removed.tolist(),
                              kept=np.setdiff1d(np.arange(n), removed).tolist())
        mask = NoiseMask(corrupted_indices=noisy.tolist(), original_labels={}, noise_fraction=m, seed=0)
        pct = filter_decision_stats(report, mask).percentages()
        assert sum(pct.values()) == pytest.approx(100.0)
        totals += [pct["noisy_removed"], pct["noisy_kept"], pct["clean_removed"], pct["clean_kept"]]
    expected = 100 * np.array([r * m, (1 - r) * m, r * (1 - m), (1 - r) * (1 - m)])
    assert np.allclose(totals / trials, expected, atol=1.0)


def test_fold_digest_tracks_content():
    ds = make_monotone_dataset(20, seed=0)
    assert fold_digest(ds) == fold_digest(ds.subset(range(20)))
    assert fold_digest(ds) != fold_digest(ds.with_labels((ds.y + 1) % ds.class_count))


def test_preprocess_methods():
    ds, _ = inject_noise(make_monotone_dataset(60, f=2, c=3, seed=1), 0.2, seed=1)
    same, report = preprocess(ds, "none")
    assert same is ds and report.removed == []

    relabelled, report = preprocess(ds, "relabel")
    assert relabelled.n == ds.n and compute_report(relabelled).nmi1 == 0

    filtered, report = preprocess(ds, "menn", params={"k": 3})
    assert filtered.n == len(report.kept) and report.filter_name == "menn"
    with pytest.raises(ValueError):
        preprocess(ds, "smote")


def test_case_study_rows():
    ds = make_monotone_dataset(60, f=2, c=3, seed=2)
    rows = case_study(ds, classifier="mid", preprocessing="menn", folds=3, seed=0)
    assert [r["preprocessing"] for r in rows] == ["none", "menn"]
    assert set(rows[0]) == {"preprocessing", "nmi1", "nmi2", "noncomparable", "size", "mae", "branches"}
    assert rows[0]["size"] == pytest.approx(40.0)
    assert rows[0]["branches"] >= 1
