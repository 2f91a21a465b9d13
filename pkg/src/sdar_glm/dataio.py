"""LIBSVM text ingestion, label mapping, standardization, and splits.

The LIBSVM line format is `label idx:value idx:value ...` with 1-based,
strictly increasing indices; `#` starts a comment.  Files are densified on
read (absent indices become 0).  Only local paths are read; downloading is
out of scope.
"""

from __future__ import annotations

import numpy as np

from .families import Dataset
from .rng import as_rng

__all__ = [
    "LibsvmParseError",
    "InvalidLabelError",
    "MODE_MEAN_VAR",
    "MODE_LENGTH",
    "read_libsvm",
    "write_libsvm",
    "map_labels_to_binary",
    "standardize_columns",
    "pad_features",
    "train_test_split",
]

MODE_MEAN_VAR = "mean0var1"
MODE_LENGTH = "length-sqrt-n"


class LibsvmParseError(ValueError):
    """Malformed LIBSVM text; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        self.lineno = int(lineno)
        super().__init__(f"line {self.lineno}: {message}")


class InvalidLabelError(ValueError):
    """Labels outside both {-1, +1} and {0, 1}; lists the offenders."""

    def __init__(self, offenders):
        self.offenders = list(offenders)
        super().__init__(
            f"labels must lie in {{-1, +1}} or {{0, 1}}; found {self.offenders[:5]}"
        )


def read_libsvm(path: str, n_features: int | None = None) -> Dataset:
    """Parse a LIBSVM text file into a dense Dataset.

    The number of columns is the largest feature index seen, or n_features
    when given (which must cover every observed index).  Labels are kept
    verbatim; map_labels_to_binary converts them for logistic fits.
    """
    labels: list[float] = []
    rows: list[list[tuple[int, float]]] = []
    max_idx = 0
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise LibsvmParseError(lineno, f"bad label {parts[0]!r}") from None
            feats: list[tuple[int, float]] = []
            prev = 0
            for tok in parts[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep or not val_s:
                    raise LibsvmParseError(lineno, f"bad feature token {tok!r}")
                try:
                    idx = int(idx_s)
                except ValueError:
                    raise LibsvmParseError(lineno, f"bad feature index {idx_s!r}") from None
                try:
                    val = float(val_s)
                except ValueError:
                    raise LibsvmParseError(lineno, f"bad feature value {val_s!r}") from None
                if idx < 1:
                    raise LibsvmParseError(lineno, f"feature index {idx} is not positive")
                if idx <= prev:
                    raise LibsvmParseError(
                        lineno, f"feature indices must be strictly increasing, got {idx} after {prev}"
                    )
                if not np.isfinite(val):
                    raise LibsvmParseError(lineno, f"non-finite feature value {val_s!r}")
                feats.append((idx, val))
                prev = idx
            labels.append(label)
            rows.append(feats)
            max_idx = max(max_idx, prev)
    if not labels:
        raise LibsvmParseError(0, "file contains no data lines")
    p = max_idx if n_features is None else int(n_features)
    if p < max_idx:
        raise LibsvmParseError(0, f"n_features={p} is below the largest observed index {max_idx}")
    if p < 1:
        raise LibsvmParseError(0, "no features found")
    X = np.zeros((len(labels), p))
    for i, feats in enumerate(rows):
        for idx, val in feats:
            X[i, idx - 1] = val
    return Dataset(X, np.asarray(labels, dtype=float))


def write_libsvm(data: Dataset, path: str) -> None:
    """Write in LIBSVM text form; zeros are omitted, values round-trip exactly."""
    with open(path, "w", encoding="ascii") as fh:
        for i in range(data.n):
            row = data.X[i]
            toks = [repr(float(data.y[i]))]
            for j in np.flatnonzero(row):
                toks.append(f"{j + 1}:{float(row[j])!r}")
            fh.write(" ".join(toks) + "\n")


def map_labels_to_binary(y: np.ndarray) -> np.ndarray:
    """Map {-1, +1} labels to {0, 1}; {0, 1} passes through unchanged."""
    y = np.asarray(y, dtype=float).ravel()
    values = set(np.unique(y).tolist())
    if values <= {0.0, 1.0}:
        return y.copy()
    if values <= {-1.0, 1.0}:
        return (y > 0).astype(float)
    offenders = sorted(values - {-1.0, 0.0, 1.0}) or sorted(values)
    raise InvalidLabelError(offenders)


def standardize_columns(X: np.ndarray, mode: str = MODE_MEAN_VAR) -> np.ndarray:
    """Rescale columns: zero mean and unit sample variance (denominator n-1),
    or scale to length sqrt(n).

    A constant column cannot be variance-standardized and raises ValueError
    naming it; under the length mode a zero column is left alone.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("X must be 2-d with at least two rows")
    if mode == MODE_MEAN_VAR:
        sd = X.std(axis=0, ddof=1)
        dead = np.flatnonzero(sd == 0.0)
        if dead.size:
            raise ValueError(f"column {int(dead[0])} is constant and cannot be standardized")
        return (X - X.mean(axis=0)) / sd
    if mode == MODE_LENGTH:
        norms = np.linalg.norm(X, axis=0)
        safe = np.where(norms > 0.0, norms, 1.0)
        scale = np.where(norms > 0.0, np.sqrt(X.shape[0]) / safe, 1.0)
        return X * scale
    raise ValueError(f"unknown mode {mode!r}; use {MODE_MEAN_VAR!r} or {MODE_LENGTH!r}")


def pad_features(data: Dataset, p: int) -> Dataset:
    """Append zero columns so the dataset has exactly p features."""
    if p < data.p:
        raise ValueError(f"cannot shrink from {data.p} to {p} features")
    if p == data.p:
        return data
    X = np.zeros((data.n, p))
    X[:, : data.p] = data.X
    return Dataset(X, data.y)


def train_test_split(
    data: Dataset,
    train_fraction: float | None = None,
    train_size: int | None = None,
    seed: int | np.random.Generator = 0,
) -> tuple[Dataset, Dataset]:
    """Uniformly random row partition; give either a fraction or a count.

    train_fraction = 1.0 yields an empty test set.  An empty train set is an
    error.  Row order within each part is ascending, so the same seed gives
    the same split bytes-for-bytes.
    """
    if (train_fraction is None) == (train_size is None):
        raise ValueError("give exactly one of train_fraction and train_size")
    if train_fraction is not None:
        if not 0.0 < train_fraction <= 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1], got {train_fraction}")
        n_train = int(round(train_fraction * data.n))
    else:
        n_train = int(train_size)
    if not 0 < n_train <= data.n:
        raise ValueError(f"train size {n_train} must lie in [1, {data.n}]")
    perm = as_rng(seed).permutation(data.n)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    names = data.feature_names
    return (
        Dataset(data.X[train_idx], data.y[train_idx], names),
        Dataset(data.X[test_idx], data.y[test_idx], names),
    )
