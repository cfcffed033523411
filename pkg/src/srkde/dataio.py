"""CSV datasets: header ``x1,...,xm[,label]``, one point per row.

Floats are written with 17 significant digits so a write/read cycle is exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "{:.17g}"


class DataFormatError(ValueError):
    """A dataset file that does not follow the CSV contract."""


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class LabeledDataset(Dataset):
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.labels) != self.points.shape[0]:
            raise ValueError(
                f"{len(self.labels)} labels for {self.points.shape[0]} points"
            )

    def classes(self) -> list[str]:
        """Class labels in order of first appearance."""
        return list(dict.fromkeys(self.labels))

    def counts(self) -> dict[str, int]:
        out = dict.fromkeys(self.classes(), 0)
        for lab in self.labels:
            out[lab] += 1
        return out


def format_float(x: float) -> str:
    return FLOAT_FORMAT.format(float(x))


def write_csv(path, points, labels=None) -> Path:
    """Write points (and optional labels) in the dataset CSV format."""
    path = Path(path)
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    m = points.shape[1]
    header = [f"x{j + 1}" for j in range(m)]
    if labels is not None:
        header.append("label")
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i, row in enumerate(points):
                out = [format_float(v) for v in row]
                if labels is not None:
                    out.append(str(labels[i]))
                w.writerow(out)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def validate_csv(path) -> Dataset | LabeledDataset:
    """Parse a dataset CSV, returning a :class:`LabeledDataset` when a
    ``label`` column is present.

    Raises :class:`DataFormatError` naming the first bad row (1-based, the
    header being row 1).
    """
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        has_label = bool(header) and header[-1] == "label"
        coords = header[:-1] if has_label else header
        if not coords or coords != [f"x{j + 1}" for j in range(len(coords))]:
            raise DataFormatError(
                f"{path}: row 1: header must be x1,...,xm[,label], got {','.join(header)}"
            )
        m = len(coords)
        width = m + has_label
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DataFormatError(
                    f"{path}: row {lineno}: expected {width} fields, got {len(row)}"
                )
            try:
                vals = [float(v) for v in row[:m]]
            except ValueError:
                raise DataFormatError(f"{path}: row {lineno}: non-numeric value") from None
            if not all(math.isfinite(v) for v in vals):
                raise DataFormatError(f"{path}: row {lineno}: non-finite value")
            rows.append(vals)
            if has_label:
                labels.append(row[m].strip())
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    points = np.array(rows, dtype=float).reshape(len(rows), m)
    if has_label:
        return LabeledDataset(points, tuple(labels))
    return Dataset(points)
