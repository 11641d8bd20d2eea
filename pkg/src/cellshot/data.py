"""Regression datasets and strict CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import IngestionError


@dataclass
class RegressionData:
    """Response vector y and design matrix X with named columns.

    No missing values are allowed; both arrays are float64.
    """

    y: np.ndarray
    X: np.ndarray
    column_names: list[str] = field(default_factory=list)
    response_name: str = "y"

    def __post_init__(self):
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.X.ndim != 2 or self.y.ndim != 1:
            raise ValueError("X must be 2-d and y 1-d")
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y row counts differ")
        if not self.column_names:
            self.column_names = [f"x{j + 1}" for j in range(self.X.shape[1])]
        if len(self.column_names) != self.X.shape[1]:
            raise ValueError("column_names length must match X columns")
        if not np.all(np.isfinite(self.X)) or not np.all(np.isfinite(self.y)):
            raise ValueError("data contains non-finite values")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def subset(self, rows) -> "RegressionData":
        rows = np.asarray(rows)
        return RegressionData(self.y[rows], self.X[rows],
                              list(self.column_names), self.response_name)


def load_csv(path, response: str) -> RegressionData:
    """Read a strict numeric CSV (comma separator, header row, no missing
    cells) and split it into response and predictors.

    Raises IngestionError naming the offending row/column on any defect.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestionError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise IngestionError(f"{path}: duplicate column names in header")
        if response not in header:
            raise IngestionError(
                f"{path}: response column {response!r} not found "
                f"(columns: {', '.join(header)})")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestionError(
                    f"{path}: row {line_no} has {len(row)} fields, "
                    f"expected {len(header)}")
            parsed = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "" or cell.upper() in ("NA", "NAN", "NULL"):
                    raise IngestionError(
                        f"{path}: missing value at row {line_no}, "
                        f"column {name!r}")
                try:
                    value = float(cell)
                except ValueError:
                    raise IngestionError(
                        f"{path}: non-numeric value {cell!r} at row "
                        f"{line_no}, column {name!r}") from None
                if not np.isfinite(value):
                    raise IngestionError(
                        f"{path}: non-finite value at row {line_no}, "
                        f"column {name!r}")
                parsed.append(value)
            rows.append(parsed)
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=np.float64)
    r_idx = header.index(response)
    keep = [j for j in range(len(header)) if j != r_idx]
    return RegressionData(
        y=table[:, r_idx],
        X=table[:, keep],
        column_names=[header[j] for j in keep],
        response_name=response,
    )


def save_csv(path, data: RegressionData):
    """Write a dataset back out in the same strict dialect."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([data.response_name] + list(data.column_names))
        for i in range(data.n):
            writer.writerow([repr(float(data.y[i]))] +
                            [repr(float(v)) for v in data.X[i]])
