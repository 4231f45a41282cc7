import pytest
from pydantic import ValidationError

from monofilter.dataset import dataset_from_arrays
from monofilter.models import ExperimentConfig, ExperimentRecord, FilterAudit, MonotonicityReport, ViolationGraph


def test_schema_roundtrip():
    schema = ExperimentConfig.model_json_schema()
    assert "properties" in schema and "noise_levels" in schema["properties"]


def test_dataset_arrays_are_read_only():
    ds = dataset_from_arrays([[1.0], [2.0]], [0, 1])
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0
    with pytest.raises(ValueError):
        ds.y[0] = 1


def test_with_labels_returns_new_dataset():
    ds = dataset_from_arrays([[1.0], [2.0]], [0, 1])
    other = ds.with_labels([1, 1])
    assert other.y.tolist() == [1, 1] and ds.y.tolist() == [0, 1]
    with pytest.raises(ValueError):
        ds.with_labels([0, 2])


def test_labels_outside_class_range_rejected():
    with pytest.raises(ValidationError):
        dataset_from_arrays([[1.0], [2.0]], [0, 3], c=2)


def test_experiment_config_defaults_and_validation():
    cfg = ExperimentConfig(datasets=["data/era.dat"])
    assert cfg.datasets[0].path == "data/era.dat"
    assert cfg.expected_records() == 1 * 4 * 3 * 6 * 4 * 10
    with pytest.raises(ValidationError):
        ExperimentConfig(datasets=["x.csv"], noise_levels=[1.5])


def test_filter_audit_percentages():
    audit = FilterAudit(noisy_removed=1, noisy_kept=1, clean_removed=0, clean_kept=2)
    assert audit.total == 4
    assert audit.percentages() == {"noisy_removed": 25.0, "noisy_kept": 25.0, "clean_removed": 0.0,
                                   "clean_kept": 50.0}


def test_record_row_without_audit():
    rep = MonotonicityReport(nmi1=0.0, nmi2=0.0, non_comparable_pairs=3, size=10)
    rec = ExperimentRecord(dataset="d", noise_level=0.0, noise_seed=1, preprocessing="none", classifier="mid",
                           fold=0, accuracy=0.5, mae=0.5, train_monotonicity=rep)
    row = rec.to_row()
    assert row["size"] == 10 and row["noisy_removed"] is None
    assert rec.key() == ("d", 0.0, 1, "none", "mid", 0)


def test_violation_graph_adjacency():
    g = ViolationGraph(n=3, edges=[(0, 1), (1, 2)])
    assert g.adjacency == [{1}, {0, 2}, {1}]
    assert [g.degree(v) for v in range(3)] == [1, 2, 1]
