from __future__ import annotations
import json
import logging
import os
import re
from io import StringIO
from pathlib import Path
from typing import Any, Iterable
import aiofiles
import numpy as np
import pandas as pd
from pydantic import BaseModel
from .errors import DataError
from .models import AttributeKind, AttributeMeta, OrdinalDataset, RegressionDataset

log = logging.getLogger(__name__)

MISSING = {"", "?"}
_ATTR = re.compile(r"@attribute\s+('[^']+'|\"[^\"]+\"|\S+)\s+(.*)$", re.IGNORECASE)


def _num(tok: str, row: int, column: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise DataError(f"non-numeric value {tok!r} in column {column}", row=row) from None


def _label_name(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _format(path: str | Path, fmt: str | None) -> str:
    if fmt:
        return fmt.lower()
    return "keel" if str(path).lower().endswith(".dat") else "csv"


def _assemble(name, cols, kinds, levels, rows, class_col, class_order, target, source, relation=None):
    """Turn parsed string rows into a dataset; rows with missing values are dropped."""
    if class_col not in cols:
        raise DataError(f"class column {class_col!r} not found")
    feat = [c for c in cols if c != class_col]
    if not feat:
        raise DataError("at least one input attribute is required")
    pos = {c: k for k, c in enumerate(cols)}
    kept = [r for r in rows if not any(tok in MISSING for tok in r[1])]
    if len(kept) < len(rows):
        log.info("%s: dropped %d rows with missing values", name, len(rows) - len(kept))
    if not kept:
        raise DataError("no instances")
    X = np.empty((len(kept), len(feat)), dtype=np.float64)
    for r, (row_no, vals) in enumerate(kept):
        for j, c in enumerate(feat):
            tok = vals[pos[c]]
            if kinds.get(c) is AttributeKind.ordinal:
                if tok not in levels[c]:
                    raise DataError(f"unseen level {tok!r} for attribute {c}", row=row_no)
                X[r, j] = levels[c].index(tok)
            else:
                X[r, j] = _num(tok, row_no, c)
    attrs = [AttributeMeta(name=c, kind=kinds.get(c, AttributeKind.real), levels=levels.get(c, []),
                           observed_min=float(X[:, j].min()), observed_max=float(X[:, j].max()))
             for j, c in enumerate(feat)]
    raw = [(row_no, vals[pos[class_col]]) for row_no, vals in kept]
    if target == "real":
        t = [_num(tok, row_no, class_col) for row_no, tok in raw]
        return RegressionDataset(attributes=attrs, X=X, target=t, target_name=class_col,
                                 name=name, source=source)
    if class_order is None:
        try:
            values = sorted({float(tok) for _, tok in raw})
            lookup = {v: k for k, v in enumerate(values)}
            y = [lookup[float(tok)] for _, tok in raw]
            class_order = [_label_name(v) for v in values]
        except ValueError:
            class_order = sorted({tok for _, tok in raw})
            y = [class_order.index(tok) for _, tok in raw]
    else:
        y = []
        for row_no, tok in raw:
            if tok not in class_order:
                raise DataError(f"unseen class label {tok!r}", row=row_no)
            y.append(class_order.index(tok))
    if len(class_order) < 2:
        raise DataError("at least 2 classes are required")
    ds = OrdinalDataset(attributes=attrs, X=X, y=y, class_names=list(class_order),
                        class_attribute=class_col, name=name, source=source)
    log.info("%s: loaded n=%d f=%d c=%d", name, ds.n, ds.f, ds.class_count)
    return ds


def _load_keel(path: Path, class_column, target):
    relation, cols, kinds, levels, outputs = path.stem, [], {}, {}, []
    rows: list[tuple[int, list[str]]] = []
    in_data = False
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            if in_data:
                rows.append((len(rows), [t.strip() for t in line.split(",")]))
                if len(rows[-1][1]) != len(cols):
                    raise DataError(f"expected {len(cols)} values, got {len(rows[-1][1])}", row=rows[-1][0])
                continue
            low = line.lower()
            if low.startswith("@relation"):
                relation = line.split(None, 1)[1].strip() if " " in line else relation
            elif low.startswith("@attribute"):
                m = _ATTR.match(line)
                if not m:
                    raise DataError(f"line {line_no}: malformed @attribute declaration")
                name, decl = m.group(1).strip("'\""), m.group(2).strip()
                cols.append(name)
                if decl.startswith("{"):
                    levels[name] = [v.strip().strip("'\"") for v in decl.strip("{}").split(",")]
                    kinds[name] = AttributeKind.ordinal
                else:
                    kinds[name] = AttributeKind.integer if decl.lower().startswith("integer") else AttributeKind.real
            elif low.startswith("@output"):
                outputs = [t.strip() for t in line.split(None, 1)[1].split(",")]
            elif low.startswith("@data"):
                in_data = True
    class_col = class_column or (outputs[0] if outputs else (cols[-1] if cols else None))
    if class_col is None:
        raise DataError("no attributes declared")
    order = levels.pop(class_col, None)
    kinds.pop(class_col, None)
    for c, lv in levels.items():
        if len(lv) < 2:
            raise DataError(f"ordinal attribute {c} declares fewer than 2 levels")
    return _assemble(relation, cols, kinds, levels, rows, class_col, order, target, str(path))


def _split_csv(path: Path) -> tuple[str, dict[str, str]]:
    """Body text and the trailing `#key=value` metadata block; '#' inside data fields is left alone."""
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    end = len(lines)
    while end and (lines[end - 1].startswith("#") or not lines[end - 1].strip()):
        end -= 1
    meta = {}
    for line in lines[end:]:
        if line.startswith("#") and "=" in line:
            k, v = line[1:].rstrip("\r\n").split("=", 1)
            meta[k.strip()] = v
    return "".join(lines[:end]), meta


def _load_csv(path: Path, class_column, target):
    body, meta = _split_csv(path)
    try:
        df = pd.read_csv(StringIO(body), dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataError("header row required") from None
    except pd.errors.ParserError as e:
        raise DataError(f"malformed row: {e}") from None
    cols = [str(c).strip() for c in df.columns]
    kinds = {k: AttributeKind(v) for k, v in json.loads(meta.get("kinds", "{}")).items()}
    levels = {k[len("levels."):]: json.loads(v) for k, v in meta.items() if k.startswith("levels.")}
    class_col = class_column or meta.get("class_attribute") or cols[-1]
    order = json.loads(meta["class_order"]) if "class_order" in meta else None
    df.columns = cols
    rows = []
    for i, rec in enumerate(df.itertuples(index=False, name=None)):
        if any(not isinstance(v, str) for v in rec):
            raise DataError(f"expected {len(cols)} values", row=i)
        rows.append((i, [v.strip() for v in rec]))
    return _assemble(meta.get("relation", path.stem), cols, kinds, levels, rows, class_col, order,
                     target, meta.get("source", str(path)))


def load_dataset(path: str | Path, format: str | None = None, class_column: str | None = None,
                 target: str = "ordinal") -> OrdinalDataset | RegressionDataset:
    """Read a KEEL .dat or CSV file. Class column is last unless overridden (or declared by @outputs)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    fmt = _format(path, format)
    if fmt == "keel":
        return _load_keel(path, class_column, target)
    if fmt == "csv":
        return _load_csv(path, class_column, target)
    raise DataError(f"unknown format {fmt!r}")


def _cell(ds: OrdinalDataset, j: int, v: float) -> str:
    a = ds.attributes[j]
    if a.kind is AttributeKind.ordinal:
        return a.levels[int(v)]
    if a.kind is AttributeKind.integer and float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def save_dataset(ds: OrdinalDataset, path: str | Path, format: str | None = None) -> None:
    """Write the canonical CSV (trailing #key=value metadata block) or a KEEL .dat file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = _format(path, format)
    names = [a.name for a in ds.attributes]
    body = [[_cell(ds, j, v) for j, v in enumerate(row)] + [ds.class_names[int(lbl)]]
            for row, lbl in zip(ds.X, ds.y)]
    if fmt == "csv":
        df = pd.DataFrame(body, columns=[*names, ds.class_attribute])
        df.to_csv(path, index=False)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(f"#relation={ds.name}\n")
            fh.write(f"#source={ds.source or ''}\n")
            fh.write(f"#class_attribute={ds.class_attribute}\n")
            fh.write(f"#class_order={json.dumps(ds.class_names)}\n")
            fh.write(f"#kinds={json.dumps({a.name: a.kind.value for a in ds.attributes})}\n")
            for a in ds.attributes:
                if a.levels:
                    fh.write(f"#levels.{a.name}={json.dumps(a.levels)}\n")
    elif fmt == "keel":
        lines = [f"@relation {ds.name}"]
        for a in ds.attributes:
            if a.kind is AttributeKind.ordinal:
                lines.append(f"@attribute {a.name} {{{', '.join(a.levels)}}}")
            else:
                lines.append(f"@attribute {a.name} {a.kind.value} [{a.observed_min!r}, {a.observed_max!r}]")
        lines.append(f"@attribute {ds.class_attribute} {{{', '.join(ds.class_names)}}}")
        lines.append(f"@inputs {', '.join(names)}")
        lines.append(f"@outputs {ds.class_attribute}")
        lines.append("@data")
        lines.extend(", ".join(r) for r in body)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise DataError(f"unknown format {fmt!r}")


def _plain(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(path: str | Path, obj: Any) -> None:
    os.makedirs(os.path.dirname(str(path)) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_plain(obj) if isinstance(obj, BaseModel) else obj, f, indent=2, default=_plain)
        f.write("\n")


def read_json(path: str | Path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


async def append_jsonl(path: str, obj: dict[str, Any]) -> None:
    # Ensure parent directory exists for first-run resilience
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    async with aiofiles.open(path, "a", encoding="utf-8") as f:
        await f.write(json.dumps(obj, ensure_ascii=False, default=_plain) + "\n")


def load_jsonl(path: str) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
    except FileNotFoundError:
        return []


def write_csv(path: str, rows: Iterable[dict[str, Any]], key: list[str] | None = None) -> int:
    """Write rows with pandas, keeping the last row per key when one is given."""
    df = pd.DataFrame(list(rows))
    if df.empty:
        return 0
    if key:
        df = df.drop_duplicates(subset=key, keep="last")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    df.to_csv(path, index=False)
    return len(df)
