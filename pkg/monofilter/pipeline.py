from __future__ import annotations
import asyncio
import hashlib
import json
import logging
import os
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Any
import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError
from tqdm import tqdm
from .classifiers import make_classifier
from .dataset import discretize_target
from .errors import ConfigError, MonoFilterError
from .evaluation import accuracy, filter_decision_stats, fold_digest, mae, preprocess, stratified_folds
from .io import append_jsonl, load_dataset, load_jsonl, write_csv, write_json
from .metrics import compute_report
from .models import DatasetSpec, Direction, ExperimentConfig, ExperimentRecord, OrdinalDataset
from .noise import inject_noise
from .stats import friedman_holm

log = logging.getLogger(__name__)

RECORD_KEY = ["dataset", "noise_level", "noise_seed", "preprocessing", "classifier", "fold"]
METRICS = {"accuracy": Direction.higher, "mae": Direction.lower}


def load_config(path: str | Path) -> ExperimentConfig:
    """TOML or JSON experiment file -> validated ExperimentConfig."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as f:
                raw = tomllib.load(f)
        else:
            raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"{path}: {e}") from None
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from None


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


@lru_cache(maxsize=16)
def _load_spec(spec_json: str) -> OrdinalDataset:
    spec = DatasetSpec.model_validate_json(spec_json)
    if spec.discretize_bins:
        ds = discretize_target(load_dataset(spec.path, spec.format, spec.class_column, target="real"),
                               spec.discretize_bins)
    else:
        ds = load_dataset(spec.path, spec.format, spec.class_column)
    return ds.model_copy(update={"name": spec.name}) if spec.name else ds


def load_spec(spec: DatasetSpec) -> OrdinalDataset:
    return _load_spec(spec.model_dump_json())


class WorkUnit(BaseModel):
    """One (dataset, level, seed, preprocessing, fold); yields one record per classifier."""
    dataset: DatasetSpec
    dataset_index: int
    noise_level: float
    level_index: int
    seed: int
    preprocessing: str
    fold: int
    folds: int
    fold_seed: int
    classifiers: list[str]
    filter_params: dict[str, Any] = {}
    classifier_params: dict[str, dict[str, Any]] = {}

    @property
    def key(self) -> str:
        """Grid coordinates plus a digest of every setting, so a changed config never resumes stale units."""
        digest = hashlib.sha1(self.model_dump_json().encode("utf-8")).hexdigest()[:16]
        return f"{self.dataset_index}|{self.noise_level}|{self.seed}|{self.preprocessing}|{self.fold}|{digest}"


def run_unit(unit: WorkUnit) -> list[dict[str, Any]]:
    """Split, corrupt the training fold, preprocess it, fit every classifier and score the untouched test fold."""
    ds = load_spec(unit.dataset)
    train_idx, test_idx = stratified_folds(ds.y, unit.folds, unit.fold_seed)[unit.fold]
    train, test = ds.subset(train_idx), ds.subset(test_idx)
    digest = fold_digest(test)
    seed = derive_seed(unit.fold_seed, unit.dataset_index, unit.level_index, unit.seed, unit.fold)
    mask = None
    if unit.noise_level > 0:
        train, mask = inject_noise(train, unit.noise_level, seed)
    prepared, report = preprocess(train, unit.preprocessing, seed=seed, params=unit.filter_params)
    if prepared.n == 0:
        log.warning("%s fold %d: %s removed every instance; training on the unfiltered fold",
                    ds.name, unit.fold, unit.preprocessing)
        prepared = train
    mono = compute_report(prepared)
    audit = filter_decision_stats(report, mask) if mask is not None else None
    rows = []
    for name in unit.classifiers:
        params = dict(unit.classifier_params.get(name, {}))
        if name == "mknn":
            params.setdefault("seed", seed)
        model = make_classifier(name, **params).fit(prepared)
        pred = model.predict(test.X)
        rows.append(ExperimentRecord(
            dataset=ds.name, noise_level=unit.noise_level, noise_seed=unit.seed, preprocessing=unit.preprocessing,
            classifier=name, fold=unit.fold, accuracy=accuracy(pred, test.y), mae=mae(pred, test.y),
            train_monotonicity=mono.model_copy(update={"clash_counts": []}), filter_audit=audit,
            test_digest=digest).model_dump(mode="json"))
    if fold_digest(test) != digest:
        raise MonoFilterError(f"{ds.name} fold {unit.fold}: test fold changed during the run")
    return rows


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig, workers: int | None = None):
        self.config = config
        self.workers = workers or config.workers
        # Limits how many work units are in flight at once
        self.sem = asyncio.Semaphore(self.workers)
        self.out_dir = Path(config.output_dir)
        self.checkpoint = str(self.out_dir / "records.jsonl")
        self.skipped = 0

    def units(self) -> list[WorkUnit]:
        c = self.config
        return [WorkUnit(dataset=spec, dataset_index=di, noise_level=level, level_index=li, seed=seed,
                         preprocessing=pre.value, fold=fold, folds=c.folds, fold_seed=c.fold_seed,
                         classifiers=c.classifiers, filter_params=c.filter_params.get(pre.value, {}),
                         classifier_params=c.classifier_params)
                for di, spec in enumerate(c.datasets)
                for li, level in enumerate(c.noise_levels)
                for seed in c.seeds
                for pre in c.preprocessings
                for fold in range(c.folds)]

    def load_records(self) -> list[ExperimentRecord]:
        """Records of the current grid from the checkpoint; malformed rows are logged and counted in `skipped`."""
        wanted = {u.key for u in self.units()}
        seen: dict[tuple, ExperimentRecord] = {}
        self.skipped = 0
        for line in load_jsonl(self.checkpoint):
            if line.get("unit") not in wanted:
                continue
            for rec in line.get("records", []):
                try:
                    r = ExperimentRecord.model_validate(rec)
                except ValidationError as e:
                    self.skipped += 1
                    log.warning("unit %s: malformed record skipped (%d errors)", line["unit"], e.error_count())
                    continue
                seen[r.key()] = r
        if self.skipped:
            log.warning("%d malformed records skipped from %s", self.skipped, self.checkpoint)
        return sorted(seen.values(), key=lambda r: r.key())

    async def run(self) -> list[ExperimentRecord]:
        os.makedirs(self.out_dir, exist_ok=True)
        # Skip units checkpointed by a previous run
        done = {d.get("unit") for d in load_jsonl(self.checkpoint)}
        pending = [u for u in self.units() if u.key not in done]
        log.info("%d work units pending, %d already checkpointed", len(pending), len(self.units()) - len(pending))
        loop = asyncio.get_running_loop()
        executor = ProcessPoolExecutor(max_workers=self.workers) if self.workers > 1 else None
        progress = tqdm(total=len(pending), desc="experiment", unit="unit", disable=None)

        async def one(u: WorkUnit):
            async with self.sem:
                if executor is None:
                    rows = run_unit(u)
                else:
                    rows = await loop.run_in_executor(executor, run_unit, u)
                # Checkpoint immediately to JSONL for resumability
                await append_jsonl(self.checkpoint, {"unit": u.key, "records": rows})
                progress.update(1)

        try:
            await asyncio.gather(*(one(u) for u in pending))
        finally:
            progress.close()
            if executor is not None:
                executor.shutdown()
        records = self.load_records()
        self.materialise(records)
        return records

    def materialise(self, records: list[ExperimentRecord]) -> None:
        """Re-materialise every output from the checkpoint for deterministic files."""
        if not records:
            log.warning("no records to materialise")
            return
        df = pd.DataFrame([r.to_row() for r in records])
        n = write_csv(str(self.out_dir / "records.csv"), df.to_dict("records"), key=RECORD_KEY)
        log.info("wrote %s with %d rows", self.out_dir / "records.csv", n)
        tables = self.rank_tables(df)
        for (clf, metric, level), table in tables.items():
            write_json(self.out_dir / "ranks" / f"{clf}_{metric}_{level:g}.json", table)
        (self.out_dir / "summary.md").write_text(summary_markdown(df, tables), encoding="utf-8")
        write_plot_tables(df, self.out_dir)

    def rank_tables(self, df: pd.DataFrame) -> dict[tuple[str, str, float], Any]:
        """One Friedman/Holm table per (classifier, metric, level); blocks are datasets averaged over seeds and folds."""
        out = {}
        for (clf, level), part in df.groupby(["classifier", "noise_level"], sort=True):
            for metric, direction in METRICS.items():
                grid = part.pivot_table(index="dataset", columns="preprocessing", values=metric, aggfunc="mean")
                grid = grid.dropna()
                if grid.shape[0] < 2 or grid.shape[1] < 2:
                    log.info("%s/%s/%g: %d datasets, rank table skipped", clf, metric, level, grid.shape[0])
                    continue
                out[(clf, metric, float(level))] = friedman_holm(grid.to_numpy(), direction, list(grid.columns))
        return out


def _markdown(df: pd.DataFrame, digits: int = 2) -> str:
    cols = [str(df.index.name or "")] + [str(c) for c in df.columns]
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for idx, row in df.iterrows():
        cells = [f"{v:.{digits}f}" if isinstance(v, float) else str(v) for v in row.tolist()]
        lines.append("| " + " | ".join([str(idx), *cells]) + " |")
    return "\n".join(lines)


def summary_markdown(df: pd.DataFrame, tables: dict) -> str:
    """Accuracy and MAE per classifier (preprocessing × noise level), then training-set monotonicity."""
    parts = ["# Experiment summary", ""]
    for metric in METRICS:
        parts.append(f"## {metric.upper() if metric == 'mae' else metric.capitalize()}")
        for clf, part in df.groupby("classifier", sort=True):
            grid = part.pivot_table(index="preprocessing", columns="noise_level", values=metric, aggfunc="mean")
            grid.columns = [f"{c:.0%}" for c in grid.columns]
            parts += ["", f"### {clf}", "", _markdown(grid)]
            for (tc, tm, level), t in tables.items():
                if tc == clf and tm == metric:
                    marks = ", ".join(f"{c.algorithm} (p={c.p_holm:.3f}{'*' if c.reject_05 else ''})"
                                      for c in t.comparisons)
                    parts.append(f"\n{level:.0%}: control {t.control}, Friedman p={t.p_value:.4f}; {marks}")
        parts.append("")
    first = df[df["classifier"] == df["classifier"].iloc[0]]
    mono = first.groupby(["preprocessing", "noise_level"])[["nmi1", "nmi2", "noncomparable", "size"]].mean()
    mono.index = [f"{p} @ {lvl:.0%}" for p, lvl in mono.index]
    mono.index.name = "preprocessing"
    parts += ["## Monotonicity of the training sets", "", _markdown(mono, digits=4), ""]
    return "\n".join(parts)


def write_plot_tables(df: pd.DataFrame, out_dir: Path) -> None:
    """Plot-ready CSVs: per-unit NMI2 and non-comparable counts, filter decision percentages."""
    units = df.drop_duplicates(subset=["dataset", "noise_level", "noise_seed", "preprocessing", "fold"])
    cols = ["dataset", "noise_level", "noise_seed", "preprocessing", "fold"]
    write_csv(str(out_dir / "plot_nmi2.csv"), units[cols + ["nmi2"]].to_dict("records"))
    write_csv(str(out_dir / "plot_noncomparable.csv"), units[cols + ["noncomparable"]].to_dict("records"))
    audited = units.dropna(subset=["noisy_removed"])
    if audited.empty:
        return
    counts = ["noisy_removed", "noisy_kept", "clean_removed", "clean_kept"]
    agg = audited.groupby(["preprocessing", "noise_level"])[counts].sum()
    pct = agg.div(agg.sum(axis=1), axis=0).mul(100).reset_index()
    write_csv(str(out_dir / "plot_filter_decisions.csv"), pct.to_dict("records"))


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> list[ExperimentRecord]:
    """Run the whole grid from a synchronous caller; resumes from the checkpoint in `config.output_dir`."""
    return asyncio.run(ExperimentRunner(config, workers=workers).run())
