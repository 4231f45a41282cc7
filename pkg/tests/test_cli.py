import json
import io
import pandas as pd
import pytest

from main import SUBCOMMANDS, CliInvocation, dispatch, main, parse_invocation
from monofilter.dataset import make_monotone_dataset
from monofilter.io import load_dataset, save_dataset
from monofilter.noise import inject_noise


@pytest.fixture
def noisy_csv(tmp_path):
    ds, _ = inject_noise(make_monotone_dataset(60, f=2, c=3, seed=1, name="toy"), 0.2, seed=1)
    p = tmp_path / "in.csv"
    save_dataset(ds, p)
    return p


def test_inspect_prints_metrics(noisy_csv, capsys):
    assert main(["inspect", str(noisy_csv), "--details"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert (out["name"], out["n"], out["f"], out["c"]) == ("toy", 60, 2, 3)
    assert {"nmi1", "nmi2", "noncomparable", "monotone_features", "attributes"} <= set(out)
    assert sum(out["class_distribution"].values()) == 60


def test_inject_is_reproducible(noisy_csv, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["inject", "--noise", "0.2", "--seed", "7", str(noisy_csv), str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    mask = json.loads((tmp_path / "a.csv.mask.json").read_text())
    assert len(mask["corrupted_indices"]) == 12


def test_relabel_writes_monotone_data_and_log(noisy_csv, tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["relabel", str(noisy_csv), str(out)]) == 0
    log = json.loads((tmp_path / "r.csv.changes.json").read_text())
    assert log["changes"] == len(log["log"])
    assert main(["inspect", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["nmi1"] == 0


def test_filter_report(noisy_csv, tmp_path):
    out = tmp_path / "f.csv"
    assert main(["filter", str(noisy_csv), str(out), "--method", "menn", "--k", "5"]) == 0
    report = json.loads((tmp_path / "f.csv.report.json").read_text())
    assert report["parameters"] == {"k": 5}
    assert load_dataset(out).n == len(report["kept"])


def test_train_then_predict(noisy_csv, tmp_path, capsys):
    model = tmp_path / "m.json"
    assert main(["train", str(noisy_csv), str(model), "--model", "olm"]) == 0
    assert json.loads(model.read_text())["kind"] == "OLM"
    capsys.readouterr()
    assert main(["predict", str(model), str(noisy_csv)]) == 0
    df = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(df.columns) == ["index", "prediction", "label"] and len(df) == 60


def test_stats_from_records(tmp_path, capsys):
    rows = [{"dataset": d, "noise_level": 0.3, "classifier": "mid", "preprocessing": p,
             "accuracy": acc + 0.01 * i, "mae": 1 - acc}
            for i, d in enumerate(["a", "b", "c"]) for p, acc in (("none", 0.6), ("mipf", 0.7))]
    path = tmp_path / "records.csv"
    pd.DataFrame(rows).to_csv(path, index=False)
    assert main(["stats", "--records", str(path), "--level", "0.3", "--classifier", "mid"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert table["control"] == "mipf" and table["blocks"] == 3
    assert main(["stats", "--records", str(path), "--level", "0.1", "--classifier", "mid"]) == 2


def test_experiment_row_count(noisy_csv, tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"datasets": [str(noisy_csv)], "noise_levels": [0.0], "seeds": [1],
                               "preprocessings": ["none"], "classifiers": ["osdl"], "folds": 3,
                               "output_dir": str(tmp_path / "out")}))
    assert main(["experiment", "--config", str(cfg), "--workers", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["records"] == 3
    assert len(pd.read_csv(tmp_path / "out" / "records.csv")) == 3


def test_exit_codes(noisy_csv, tmp_path):
    assert main(["inspect", str(tmp_path / "missing.csv")]) == 2
    assert main(["inspect", str(noisy_csv), "--bogus"]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["train", str(noisy_csv), str(tmp_path / "m.json"), "--model", "mknn", "--k", "0"]) == 1
    assert main(["experiment", "--config", str(tmp_path / "nope.toml")]) == 1


def test_help_documents_defaults(capsys):
    assert main(["--help"]) == 0
    text = capsys.readouterr().out
    assert "MIPF    numberPartitions = 5, consensus filter" in text
    assert "interpolationParameter = 0.5, interpolationStepSize = 10" in text
    assert "MID     confidence = 0.25, 2 items per leaf, R = 1" in text
    assert all(name in text for name in SUBCOMMANDS)


def test_parse_invocation_splits_paths_and_flags():
    inv = parse_invocation(["filter", "a.csv", "b.csv", "--method", "menn", "--k", "5"])
    assert inv.subcommand == "filter"
    assert inv.paths == {"input": "a.csv", "output": "b.csv"}
    assert inv.flags["method"] == "menn" and inv.flags["k"] == 5
    assert inv.flag("threshold", 0.0) == 0.0


def test_dispatch_runs_an_invocation(noisy_csv, capsys):
    assert dispatch(CliInvocation(subcommand="inspect", paths={"input": str(noisy_csv)})) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 60
    assert dispatch(CliInvocation(subcommand="relabel", paths={"input": str(noisy_csv)})) == 1
    with pytest.raises(ValueError):
        CliInvocation(subcommand="frobnicate")


def test_experiment_fails_on_missing_records(noisy_csv, tmp_path, monkeypatch):
    import main as cli

    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"datasets": [str(noisy_csv)], "noise_levels": [0.0], "seeds": [1],
                               "preprocessings": ["none"], "classifiers": ["osdl"], "folds": 3,
                               "output_dir": str(tmp_path / "out")}))
    monkeypatch.setattr(cli, "run_experiment", lambda config, workers=None: [])
    assert main(["experiment", "--config", str(cfg)]) == 2


def test_logs_go_to_stderr(noisy_csv, capsys):
    assert main(["--log-level", "INFO", "inspect", str(noisy_csv)]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["n"] == 60
    assert "loaded n=60" in captured.err
