"""Delimited dataset files and test reports."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import MIN_GROUP_SIZE, PooledData, Sample, build_pooled
from .errors import ValidationError
from .jel import TestResult

BANKNOTE_NAMES = ("VW", "SW", "KW", "EI", "class")
P_FLOOR = 1e-15


@dataclass(frozen=True)
class Dataset:
    """Numeric columns plus one label column, as read from a file."""

    names: tuple
    values: np.ndarray
    labels: np.ndarray

    def select(self, cols=None) -> tuple[tuple, np.ndarray]:
        if not cols:
            return self.names, self.values
        idx = []
        for c in cols:
            if c in self.names:
                idx.append(self.names.index(c))
            elif str(c).isdigit() and int(c) < len(self.names):
                idx.append(int(c))
            else:
                raise ValidationError(f"unknown column {c!r}; available: {', '.join(self.names)}")
        return tuple(self.names[i] for i in idx), self.values[:, idx]

    def to_pooled(self, cols=None, min_group_size: int = MIN_GROUP_SIZE) -> PooledData:
        _, x = self.select(cols)
        groups = _ordered_labels(self.labels)
        if len(groups) < 2:
            raise ValidationError(f"label column has {len(groups)} distinct value(s); need at least 2")
        return build_pooled([Sample(g, x[self.labels == g]) for g in groups], min_group_size)


def _ordered_labels(labels):
    uniq = list(dict.fromkeys(labels.tolist()))
    try:
        return sorted(uniq, key=float)
    except ValueError:
        return sorted(uniq)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _sniff_delimiter(line: str) -> str:
    return "\t" if line.count("\t") > line.count(",") else ","


def read_dataset(path, label_col=None, delimiter=None, header=None, names=None) -> Dataset:
    """Read a comma- or tab-delimited file with one label column.

    Args:
        label_col: label column as a name or 0-based index; the last column
            when omitted.
        delimiter: field separator, sniffed from the first line if omitted.
        header: whether the first row holds column names; detected when
            omitted (a first row with two or more non-numeric fields).
        names: column names to use for a headerless file.
    """
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty file")
    delim = delimiter or _sniff_delimiter(lines[0])
    rows = list(csv.reader(lines, delimiter=delim))
    width = len(rows[0])
    if width < 2:
        raise ValidationError(f"{path}: need a label column and at least one numeric column")

    if header is None:
        # a data row has at most one non-numeric field (its label)
        header = sum(not _is_number(f) for f in rows[0]) >= 2
    if header:
        col_names = [f.strip() for f in rows[0]]
        body = rows[1:]
        first_line = 2
    else:
        col_names = list(names) if names else [f"x{i}" for i in range(width)]
        if len(col_names) != width:
            raise ValidationError(f"{path}: {len(col_names)} names given for {width} columns")
        body = rows
        first_line = 1

    if label_col is None:
        li = width - 1
    elif str(label_col) in col_names:
        li = col_names.index(str(label_col))
    elif str(label_col).lstrip("-").isdigit():
        li = int(label_col) % width
    else:
        raise ValidationError(f"{path}: unknown label column {label_col!r}")

    feat_idx = [i for i in range(width) if i != li]
    values, labels = [], []
    for offset, row in enumerate(body):
        lineno = first_line + offset
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != width or any(not f.strip() for f in row):
            raise ValidationError(f"{path}: line {lineno}: expected {width} non-empty fields, got {row!r}")
        try:
            vals = [float(row[i]) for i in feat_idx]
        except ValueError:
            raise ValidationError(f"{path}: line {lineno}: non-numeric feature value in {row!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"{path}: line {lineno}: non-finite value")
        values.append(vals)
        labels.append(_label(row[li].strip()))
    if not values:
        raise ValidationError(f"{path}: no observations")
    return Dataset(tuple(col_names[i] for i in feat_idx), np.array(values), np.array(labels, dtype=object))


def _label(s: str):
    # canonicalise numeric labels so "0" and "0.0" agree
    if _is_number(s):
        v = float(s)
        return str(int(v)) if v.is_integer() else repr(v)
    return s


def read_banknote(path) -> Dataset:
    return read_dataset(path, label_col="class", delimiter=",", header=False, names=BANKNOTE_NAMES)


def write_dataset(path, pooled: PooledData, names=None, delimiter=",") -> None:
    """Write pooled data with a header and a trailing ``label`` column.

    Floats are written with ``repr`` so re-reading is exact.
    """
    names = list(names) if names else [f"x{i + 1}" for i in range(pooled.dim)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(names + ["label"])
        for k, s in enumerate(pooled.samples):
            for row in s.points:
                w.writerow([repr(float(v)) for v in row] + [s.label])


def display_p(p: float) -> str:
    if p < P_FLOOR:
        return f"< {P_FLOOR:g}"
    return f"{p:.4g}"


def result_record(res: TestResult, variables: str = "") -> dict:
    """Machine-readable report record.

    Fields: ``method``, ``variables``, ``statistic``, ``df``, ``p_value``
    (never exactly zero), ``p_display``, ``alpha``, ``reject`` and
    ``details`` (solver or permutation diagnostics).
    """
    p = res.p_value if res.p_value > 0 else math.ulp(0.0)
    return {
        "method": res.method,
        "variables": variables,
        "statistic": float(res.statistic),
        "df": int(res.df),
        "p_value": float(p),
        "p_display": display_p(res.p_value),
        "alpha": float(res.alpha),
        "reject": bool(res.reject),
        "details": _jsonable(res.details),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def format_record(rec: dict) -> str:
    decision = "reject H0" if rec["reject"] else "do not reject H0"
    head = f"{rec['method']:<6}"
    if rec["variables"]:
        head += f" [{rec['variables']}]"
    line = (f"{head}  statistic={rec['statistic']:.6g}  df={rec['df']}  "
            f"p={rec['p_display']}  alpha={rec['alpha']:g}  {decision}")
    det = rec["details"]
    if rec["method"] == "JEL-S" and det:
        line += (f"\n        theta={det['theta']:.6g}  max|residual|={det['max_residual']:.2e}  "
                 f"converged={det['converged']}  iterations={det['iterations']}")
    return line


def records_to_csv(records, path) -> None:
    fields = ["method", "variables", "statistic", "df", "p_value", "p_display", "alpha", "reject"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r)


def records_to_json(records) -> str:
    return json.dumps(records, indent=2)
