"""Sample sets: ordered collections of uncertainty vectors and CSV loading."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class SampleSet:
    """An ordered collection of N uncertainty vectors of dimension m.

    ``points`` is an (N, m) float array; rows are individual samples. The
    empirical distribution places mass 1/N on each row.
    """

    points: np.ndarray
    label: str | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError(f"sample points must be 1-D or 2-D, got ndim={pts.ndim}")
        if pts.shape[0] < 1:
            raise ValueError("sample set must contain at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


def as_sample_set(data, label: str | None = None) -> SampleSet:
    """Coerce an array-like or SampleSet into a SampleSet."""
    if isinstance(data, SampleSet):
        return data
    return SampleSet(np.asarray(data, dtype=float), label=label)


def _row_is_numeric(cells: list[str]) -> bool:
    try:
        for c in cells:
            float(c)
    except ValueError:
        return False
    return True


def load_samples_csv(path) -> SampleSet:
    """Load a sample set from a CSV file: one row per sample, numeric columns.

    A header row is auto-detected: if the first row contains any cell that
    does not parse as a number, it is skipped.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline()
    if not first.strip():
        raise ValueError(f"{path}: empty CSV file")
    skip = 0 if _row_is_numeric([c.strip() for c in first.split(",")]) else 1
    pts = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    return SampleSet(pts, label=path.stem)
