"""Fetch and check the UCI banknote authentication data."""

from __future__ import annotations

import hashlib
import urllib.request
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .io import read_banknote

URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/00267/data_banknote_authentication.txt"
N_ROWS = 1372
CLASS_COUNTS = {"0": 762, "1": 610}
DEFAULT_PATH = Path("data") / "data_banknote_authentication.txt"

# (label, columns) rows of the published comparison, in order
TABLE_ROWS = (
    ("(Gdata, Fdata)", ("VW", "SW", "KW", "EI")),
    ("(Gdata-VW, Fdata-VW)", ("VW",)),
    ("(Gdata-SW, Fdata-SW)", ("SW",)),
    ("(Gdata-KW, Fdata-KW)", ("KW",)),
    ("(Gdata-EI, Fdata-EI)", ("EI",)),
)


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def verify(path, expected_sha256: str | None = None):
    """Check the file layout and class sizes, and optionally its digest."""
    if expected_sha256 is not None and sha256(path) != expected_sha256.lower():
        raise ValidationError(f"{path}: SHA-256 mismatch")
    ds = read_banknote(path)
    if ds.values.shape != (N_ROWS, 4):
        raise ValidationError(f"{path}: expected {N_ROWS} rows of 4 features, got {ds.values.shape}")
    labels, counts = np.unique(ds.labels.astype(str), return_counts=True)
    found = dict(zip(labels.tolist(), counts.tolist()))
    if found != CLASS_COUNTS:
        raise ValidationError(f"{path}: class counts {found}, expected {CLASS_COUNTS}")
    return ds


def fetch(dest=DEFAULT_PATH, url: str = URL, expected_sha256: str | None = None, timeout: float = 60):
    """Download the data file to ``dest`` and verify it; returns the path."""
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    tmp = dest.with_suffix(dest.suffix + ".part")
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        tmp.write_bytes(resp.read())
    try:
        verify(tmp, expected_sha256)
    except ValidationError:
        tmp.unlink(missing_ok=True)
        raise
    tmp.replace(dest)
    return dest
