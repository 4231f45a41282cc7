import argparse, json, logging, sys
from typing import Any
import numpy as np
import pandas as pd
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator
from monofilter.classifiers import make_classifier, model_from_dict
from monofilter.config import DEFAULTS_HELP, load_settings
from monofilter.dataset import monotone_feature_count
from monofilter.errors import ConfigError, DataError, MonoFilterError, UsageError
from monofilter.evaluation import case_study
from monofilter.filters import run_filter
from monofilter.io import load_dataset, read_json, save_dataset, write_json
from monofilter.logging_setup import setup_logging
from monofilter.metrics import compute_report
from monofilter.noise import inject_noise
from monofilter.pipeline import load_config, run_experiment
from monofilter.relabel import relabel
from monofilter.stats import friedman_holm

log = logging.getLogger("monofilter.cli")

SUBCOMMANDS = ("inspect", "inject", "relabel", "filter", "train", "predict", "experiment", "stats", "casestudy")
PATH_ARGS = ("input", "output", "model")


class CliInvocation(BaseModel):
    """One parsed command line: the subcommand, its positional paths and its flags."""
    subcommand: str
    paths: dict[str, str] = Field(default_factory=dict)
    flags: dict[str, Any] = Field(default_factory=dict)
    log_level: str | None = None

    @field_validator("subcommand")
    @classmethod
    def _known(cls, v):
        if v not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {v!r}")
        return v

    def path(self, name: str) -> str:
        if name not in self.paths:
            raise UsageError(f"{self.subcommand}: missing {name} path")
        return self.paths[name]

    def flag(self, name: str, default: Any = None) -> Any:
        v = self.flags.get(name)
        return default if v is None else v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _out(obj: Any) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, default=str) + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="monofilter", description="Monotonic classification: noise filters, relabelling, "
                 "monotonic classifiers and experiments.", epilog=DEFAULTS_HELP,
                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--log-level", default=None)
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def data_cmd(name, help, outputs=()):
        p = sub.add_parser(name, help=help, epilog=DEFAULTS_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("input")
        for o in outputs:
            p.add_argument(o)
        p.add_argument("--format", choices=["keel", "csv"], default=None)
        p.add_argument("--class-column", default=None)
        return p

    p = data_cmd("inspect", "dataset size and monotonicity metrics")
    p.add_argument("--details", action="store_true", help="per-attribute ranges and class distribution")

    p = data_cmd("inject", "adjacent-label noise on the class", ["output"])
    p.add_argument("--noise", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask", default=None, help="mask JSON path (default OUTPUT.mask.json)")

    p = data_cmd("relabel", "minimal monotone relabelling", ["output"])
    p.add_argument("--log", default=None, help="change log JSON path (default OUTPUT.changes.json)")

    p = data_cmd("filter", "monotonic noise filter", ["output"])
    p.add_argument("--method", choices=["menn", "mrnge", "mipf", "minffc"], required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--partitions", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--y-good", type=int)
    p.add_argument("--g", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--scheme", choices=["consensus", "majority"])
    p.add_argument("--no-first-order-edition", dest="first_order_edition", action="store_false", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="FilterReport JSON path (default OUTPUT.report.json)")

    p = data_cmd("train", "fit a classifier and export it as JSON", ["model"])
    p.add_argument("--model-kind", "--model", dest="kind", default="mid",
                   choices=["mknn", "olm", "osdl", "mid", "c45", "ordinal_c45", "knn", "logistic"])
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("predict", help="predict a dataset with a model JSON; CSV to stdout")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--format", choices=["keel", "csv"], default=None)
    p.add_argument("--class-column", default=None)

    p = sub.add_parser("experiment", help="run a cross-validation experiment from a TOML/JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("stats", help="Friedman/Holm table from a records CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--metric", choices=["accuracy", "mae"], default="accuracy")
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--classifier", required=True)

    p = data_cmd("casestudy", "k-fold comparison with and without a preprocessing")
    p.add_argument("--classifier", default="mid")
    p.add_argument("--preprocessing", default="mipf")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    return ap


def parse_invocation(argv: list[str] | None = None) -> CliInvocation:
    """argv -> CliInvocation; UsageError on unknown subcommands or flags."""
    args = vars(build_parser().parse_args(argv))
    subcommand, log_level = args.pop("subcommand"), args.pop("log_level")
    paths = {k: args.pop(k) for k in PATH_ARGS if k in args}
    return CliInvocation(subcommand=subcommand, paths=paths, flags=args, log_level=log_level)


def _load(inv: CliInvocation):
    return load_dataset(inv.path("input"), inv.flag("format"), inv.flag("class_column"))


def cmd_inspect(inv: CliInvocation) -> None:
    ds = _load(inv)
    rep = compute_report(ds)
    out = {"name": ds.name, "n": ds.n, "f": ds.f, "c": ds.class_count, "nmi1": rep.nmi1, "nmi2": rep.nmi2,
           "noncomparable": rep.non_comparable_pairs, "monotone_features": monotone_feature_count(ds)}
    if inv.flag("details", False):
        out["attributes"] = [a.model_dump(mode="json") for a in ds.attributes]
        out["class_distribution"] = dict(zip(ds.class_names, np.bincount(ds.y, minlength=ds.class_count).tolist()))
    _out(out)


def cmd_inject(inv: CliInvocation) -> None:
    ds = _load(inv)
    output = inv.path("output")
    noisy, mask = inject_noise(ds, inv.flag("noise"), inv.flag("seed", 0))
    save_dataset(noisy, output, inv.flag("format"))
    write_json(inv.flag("mask", f"{output}.mask.json"), mask)
    log.info("corrupted %d of %d labels", len(mask.corrupted_indices), ds.n)


def cmd_relabel(inv: CliInvocation) -> None:
    result = relabel(_load(inv))
    output = inv.path("output")
    save_dataset(result.dataset, output, inv.flag("format"))
    write_json(inv.flag("log", f"{output}.changes.json"),
               {"changes": result.changes, "clamped": result.clamped, "log": result.change_log()})
    log.info("relabelled %d instances", result.changes)


FILTER_FLAGS = ("k", "partitions", "p", "y_good", "g", "threshold", "scheme", "first_order_edition")


def cmd_filter(inv: CliInvocation) -> None:
    ds = _load(inv)
    output, method = inv.path("output"), inv.flag("method")
    params = {k: inv.flags[k] for k in FILTER_FLAGS if inv.flag(k) is not None}
    report = run_filter(method, ds, seed=inv.flag("seed", 0), **params)
    save_dataset(report.apply(ds), output, inv.flag("format"))
    write_json(inv.flag("report", f"{output}.report.json"), report)
    log.info("%s kept %d of %d", method, len(report.kept), ds.n)


def cmd_train(inv: CliInvocation) -> None:
    params = {k: inv.flags[k] for k in ("k", "seed") if inv.flag(k) is not None}
    model = make_classifier(inv.flag("kind", "mid"), **params).fit(_load(inv))
    write_json(inv.path("model"), model.to_dict())


def cmd_predict(inv: CliInvocation) -> None:
    model = model_from_dict(read_json(inv.path("model")))
    ds = _load(inv)
    pd.DataFrame({"index": range(ds.n), "prediction": model.predict(ds.X), "label": ds.y}).to_csv(
        sys.stdout, index=False)


def cmd_experiment(inv: CliInvocation) -> None:
    settings = load_settings()
    config = load_config(inv.flag("config"))
    records = run_experiment(config, workers=inv.flag("workers") or max(config.workers, settings.workers))
    expected = config.expected_records()
    if len(records) != expected:
        raise DataError(f"{config.output_dir}: {len(records)} records, expected {expected}")
    _out({"records": len(records), "expected": expected, "output_dir": config.output_dir})


def cmd_stats(inv: CliInvocation) -> None:
    classifier, level, metric = inv.flag("classifier"), inv.flag("level"), inv.flag("metric", "accuracy")
    df = pd.read_csv(inv.flag("records"))
    part = df[(df["classifier"] == classifier) & np.isclose(df["noise_level"], level)]
    if part.empty:
        raise DataError(f"no records for classifier {classifier} at level {level}")
    grid = part.pivot_table(index="dataset", columns="preprocessing", values=metric, aggfunc="mean").dropna()
    if grid.empty:
        raise DataError(f"no records for classifier {classifier} at level {level}")
    direction = "higher-better" if metric == "accuracy" else "lower-better"
    _out(friedman_holm(grid.to_numpy(), direction, list(grid.columns)).model_dump(mode="json"))


def cmd_casestudy(inv: CliInvocation) -> None:
    rows = case_study(_load(inv), inv.flag("classifier", "mid"), inv.flag("preprocessing", "mipf"),
                      inv.flag("folds", 10), inv.flag("seed", 0))
    pd.DataFrame(rows).to_csv(sys.stdout, index=False)


HANDLERS = {"inspect": cmd_inspect, "inject": cmd_inject, "relabel": cmd_relabel, "filter": cmd_filter,
            "train": cmd_train, "predict": cmd_predict, "experiment": cmd_experiment, "stats": cmd_stats,
            "casestudy": cmd_casestudy}


def dispatch(inv: CliInvocation) -> int:
    """Run one subcommand; 0 on success, 1 on usage/configuration errors, 2 on data errors."""
    log.debug("invocation %s", inv.model_dump())
    try:
        HANDLERS[inv.subcommand](inv)
    except (UsageError, ConfigError) as e:
        log.error("%s", e)
        return 1
    except (DataError, ValidationError, FileNotFoundError) as e:
        log.error("%s", e)
        return 2
    except MonoFilterError as e:
        log.error("%s", e)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        inv = parse_invocation(argv)
    except UsageError as e:
        setup_logging()
        log.error("usage: %s", e)
        return 1
    except SystemExit as e:    # --help
        return int(e.code or 0)
    setup_logging(inv.log_level)
    return dispatch(inv)


if __name__ == "__main__":
    load_dotenv()
    sys.exit(main())
