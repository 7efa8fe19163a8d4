"""Two-modality dataset container and CSV ingestion.

A dataset file has a header ``sample_id,label,<prefix><name>,...``. Feature
columns are assigned to modalities by column-name prefix, e.g.
``{"clin_": "clinical", "img_": "image"}``. Feature names keep their prefix so
that writing a dataset back out reproduces the original header.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .exceptions import (EmptyModality, LengthMismatch, MissingColumn,
                         NonBinaryLabel, NonFiniteValue, UnknownModality)

DEFAULT_SCHEMA = {"clin_": "clinical", "img_": "image"}


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FeatureView:
    modality_name: str
    feature_names: tuple
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix, np.float64)
        if m.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        names = tuple(self.feature_names)
        if len(names) != m.shape[1]:
            raise LengthMismatch(
                f"{len(names)} feature names for {m.shape[1]} columns")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate feature names in view {self.modality_name!r}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def width(self) -> int:
        return self.matrix.shape[1]

    def take(self, indices) -> "FeatureView":
        return FeatureView(self.modality_name, self.feature_names,
                           self.matrix[np.asarray(indices, dtype=np.intp)])


@dataclass(frozen=True)
class ClassCounts:
    positive: int
    negative: int
    k: int = 2

    @property
    def n(self) -> int:
        return self.positive + self.negative

    def as_sizes(self) -> tuple:
        """Counts ordered (positive, negative), the order used for class weights."""
        return (self.positive, self.negative)


@dataclass(frozen=True, eq=False)
class Dataset:
    sample_ids: tuple
    labels: np.ndarray
    modalities: Mapping[str, FeatureView] = field(default_factory=dict)

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-D")
        if labels.size and not np.isin(labels, (0, 1)).all():
            bad = int(np.flatnonzero(~np.isin(labels, (0, 1)))[0])
            raise NonBinaryLabel(f"label {labels[bad]!r} at row {bad + 1} is not 0/1")
        object.__setattr__(self, "labels", _frozen(labels, np.int64))
        ids = tuple(self.sample_ids)
        if len(ids) != labels.shape[0]:
            raise LengthMismatch(f"{len(ids)} sample ids for {labels.shape[0]} labels")
        object.__setattr__(self, "sample_ids", ids)
        mods = dict(self.modalities)
        for name, view in mods.items():
            if view.n != labels.shape[0]:
                raise LengthMismatch(
                    f"modality {name!r} has {view.n} rows, expected {labels.shape[0]}")
            if not np.isfinite(view.matrix).all():
                r, c = np.argwhere(~np.isfinite(view.matrix))[0]
                raise NonFiniteValue(
                    f"non-finite value at row {r + 1}, column {view.feature_names[c]!r}")
        object.__setattr__(self, "modalities", mods)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def view(self, name: str) -> FeatureView:
        try:
            return self.modalities[name]
        except KeyError:
            raise UnknownModality(
                f"unknown modality {name!r}; have {sorted(self.modalities)}") from None

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(tuple(self.sample_ids[i] for i in idx), self.labels[idx],
                       {k: v.take(idx) for k, v in self.modalities.items()})

    def equals(self, other: "Dataset") -> bool:
        """Field-by-field equality, bit-exact on feature values."""
        if self.sample_ids != other.sample_ids:
            return False
        if not np.array_equal(self.labels, other.labels):
            return False
        if list(self.modalities) != list(other.modalities):
            return False
        for name, v in self.modalities.items():
            w = other.modalities[name]
            if v.feature_names != w.feature_names:
                return False
            if v.matrix.tobytes() != w.matrix.tobytes():
                return False
        return True


def class_counts(dataset: Dataset) -> ClassCounts:
    labels = dataset.labels if isinstance(dataset, Dataset) else np.asarray(dataset)
    pos = int(np.count_nonzero(labels == 1))
    return ClassCounts(positive=pos, negative=int(labels.shape[0]) - pos)


def concat_views(dataset: Dataset, names: Sequence[str]) -> FeatureView:
    """Stack the named modalities column-wise, in the order given."""
    views = [dataset.view(n) for n in names]
    if len(views) == 1:
        return views[0]
    return FeatureView("+".join(names),
                       tuple(f for v in views for f in v.feature_names),
                       np.hstack([v.matrix for v in views]))


def _parse_float(cell, row, col):
    try:
        value = float(cell)
    except ValueError:
        raise NonFiniteValue(f"unparseable value {cell!r} at row {row}, column {col!r}") from None
    if not math.isfinite(value):
        raise NonFiniteValue(f"non-finite value {cell!r} at row {row}, column {col!r}")
    return value


def load_dataset(path, schema: Mapping[str, str] = DEFAULT_SCHEMA) -> Dataset:
    """Read a dataset CSV, grouping feature columns by prefix.

    Columns that are neither ``sample_id``/``label`` nor match a declared
    prefix are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(f"{path}: empty file, no header row") from None
        rows = list(reader)

    for required in ("sample_id", "label"):
        if required not in header:
            raise MissingColumn(f"{path}: required column {required!r} absent")
    id_col, label_col = header.index("sample_id"), header.index("label")

    columns = {prefix: [j for j, name in enumerate(header) if name.startswith(prefix)]
               for prefix in schema}
    for prefix, cols in columns.items():
        if not cols:
            raise EmptyModality(f"{path}: no columns with prefix {prefix!r}")

    ids, labels = [], []
    data = {prefix: [] for prefix in schema}
    for r, row in enumerate(rows, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise MissingColumn(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
        ids.append(row[id_col])
        lab = _parse_float(row[label_col], r, "label")
        if lab not in (0.0, 1.0):
            raise NonBinaryLabel(f"{path}: label {row[label_col]!r} at row {r} is not 0/1")
        labels.append(int(lab))
        for prefix, cols in columns.items():
            data[prefix].append([_parse_float(row[j], r, header[j]) for j in cols])

    modalities = {}
    for prefix, name in schema.items():
        cols = columns[prefix]
        mat = np.array(data[prefix], dtype=np.float64).reshape(len(ids), len(cols))
        modalities[name] = FeatureView(name, tuple(header[j] for j in cols), mat)
    return Dataset(tuple(ids), np.array(labels, dtype=np.int64), modalities)


def write_dataset(dataset: Dataset, path) -> Path:
    """Write ``dataset`` in the CSV layout read by :func:`load_dataset`.

    Floats are written with ``repr`` so values round-trip bit-exactly.
    """
    path = Path(path)
    header = ["sample_id", "label"]
    for view in dataset.modalities.values():
        header.extend(view.feature_names)
    blocks = [v.matrix for v in dataset.modalities.values()]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, sid in enumerate(dataset.sample_ids):
            row = [sid, str(int(dataset.labels[i]))]
            for b in blocks:
                row.extend(repr(float(x)) for x in b[i])
            writer.writerow(row)
    return path
