"""Time series container conventions and the CSV loader."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .exceptions import ConfigError


def as_series(data, min_length: int = 2) -> np.ndarray:
    """Return ``data`` as a float array of shape ``(n, d)``.

    One-dimensional input is treated as a scalar series (``d = 1``).
    """
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    elif x.ndim != 2:
        raise ValueError(f"series must be 1-D or 2-D, got shape {x.shape}")
    if x.shape[0] < min_length:
        raise ValueError(f"series needs at least {min_length} observations, got {x.shape[0]}")
    if x.shape[1] < 1:
        raise ValueError("series has zero columns")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def load_csv(path) -> np.ndarray:
    """Read one observation per line, ``d`` comma separated reals, no header.

    Malformed rows raise ``ConfigError`` naming the offending line.
    """
    rows = []
    with Path(path).open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ConfigError(f"{path}, line {lineno}: {exc}") from None
            if len(rows[-1]) != len(rows[0]):
                raise ConfigError(
                    f"{path}, line {lineno}: expected {len(rows[0])} columns, got {len(rows[-1])}"
                )
    return as_series(np.array(rows))


def save_csv(path, series) -> None:
    x = as_series(series, min_length=1)
    np.savetxt(path, x, delimiter=",", fmt="%.17g")


def demean(x: np.ndarray, axis: int = 0) -> np.ndarray:
    """Subtract the mean along ``axis``; exactly zero for constant input."""
    first = np.take(x, [0], axis=axis)
    shifted = x - first
    return shifted - shifted.mean(axis=axis, keepdims=True)
