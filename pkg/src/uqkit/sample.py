"""Labelled point collections and CSV exchange."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np


class Sample:
    """An ordered set of points in R^d with one label per column.

    Behaves like a 2-D array (``np.asarray(sample)`` works) and adds
    labels, CSV round trip and a few empirical statistics.
    """

    def __init__(self, values, labels=None):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError("a Sample is two-dimensional (rows x columns)")
        self.values = values
        if labels is None:
            labels = [f"x{i}" for i in range(values.shape[1])]
        labels = list(labels)
        if len(labels) != values.shape[1]:
            raise ValueError(f"{len(labels)} labels for {values.shape[1]} columns")
        self.labels = labels

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __len__(self):
        return self.values.shape[0]

    @property
    def dimension(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.values[:, self.labels.index(key)]
        return self.values[key]

    def __repr__(self):
        return f"Sample(n={len(self)}, labels={self.labels})"

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.values, other.values)

    def column(self, label):
        return self[label]

    def stack(self, other: "Sample") -> "Sample":
        """Side-by-side concatenation (same number of rows)."""
        if len(other) != len(self):
            raise ValueError("cannot stack samples of different sizes")
        return Sample(np.hstack([self.values, other.values]), self.labels + other.labels)

    def concat(self, other: "Sample") -> "Sample":
        """Row-wise concatenation."""
        if other.labels != self.labels:
            raise ValueError("label mismatch")
        return Sample(np.vstack([self.values, other.values]), self.labels)

    def mean(self):
        return self.values.mean(axis=0)

    def std(self, ddof=1):
        return self.values.std(axis=0, ddof=ddof)

    def covariance(self):
        return np.atleast_2d(np.cov(self.values, rowvar=False))

    def quantile(self, p):
        return np.quantile(self.values, p, axis=0)

    def to_csv(self, path=None):
        """Write with a header row of labels; returns the text when ``path`` is None."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.labels)
        for row in self.values:
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path_or_text):
        if isinstance(path_or_text, Path) or (
            isinstance(path_or_text, str) and "\n" not in path_or_text
        ):
            text = Path(path_or_text).read_text(encoding="utf-8")
        else:
            text = path_or_text
        rows = list(csv.reader(io.StringIO(text)))
        labels = rows[0]
        values = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        if values.size == 0:
            values = np.empty((0, len(labels)))
        return cls(values, labels)


def as_array(points, dim=None):
    """2-D float view of a Sample / array-like; a 1-D input is one point."""
    arr = np.asarray(points, dtype=float)
    if arr.size == 0 and dim is not None:
        return np.empty((0, dim))
    if arr.ndim == 1:
        arr = arr[None, :] if dim is None or arr.shape[0] == dim else arr[:, None]
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"expected {dim} columns, got {arr.shape[1]}")
    return arr
