"""Series containers, detection configuration and the unit-interval rescaling.

Every detector operates on observations mapped into ``[0, 1]`` with

    f(x) = (x - m) / (M - m)

where ``m`` and ``M`` are the series minimum and maximum.  Distances between
rescaled observations then also live in ``[0, 1]`` which is the domain the
counting trees in :mod:`breakwatch.intervaltree` are built over.

Indices exposed by this package are 1-based: ``tau_hat = 20`` means the
first segment is ``Z_1 .. Z_20``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySeries, InvalidConfig, InvalidSeries, NonFiniteValue, ParseError

METHODS = ("edm", "edmx", "edivisive")
BETWEEN_SELECTIONS = ("head", "tail")
MAX_TREE_DEPTH = 24


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered real-valued observations ``Z_1 .. Z_n`` with optional labels.

    ``true_breakouts`` and ``anomaly_labels`` hold 1-based indices.
    Timestamps are carried along for output only; detectors ignore them.
    """

    values: np.ndarray
    timestamps: np.ndarray | None = None
    true_breakouts: frozenset[int] = field(default_factory=frozenset)
    anomaly_labels: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        values = _frozen_array(self.values)
        if values.ndim != 1:
            raise InvalidSeries("values must be one-dimensional")
        if values.size == 0:
            raise EmptySeries()
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            i = int(bad[0])
            raise NonFiniteValue(i + 1, float(values[i]))
        object.__setattr__(self, "values", values)

        if self.timestamps is not None:
            ts = _frozen_array(self.timestamps, dtype=np.int64)
            if ts.shape != values.shape:
                raise InvalidSeries(
                    f"timestamps length {ts.size} does not match values length {values.size}"
                )
            if ts.size > 1 and not np.all(np.diff(ts) > 0):
                raise InvalidSeries("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", ts)

        n = values.size
        for name in ("true_breakouts", "anomaly_labels"):
            labels = frozenset(int(i) for i in getattr(self, name))
            out = sorted(i for i in labels if not 1 <= i <= n)
            if out:
                raise InvalidSeries(f"{name} contains indices outside [1, {n}]: {out}")
            object.__setattr__(self, name, labels)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        same_ts = (self.timestamps is None and other.timestamps is None) or (
            self.timestamps is not None
            and other.timestamps is not None
            and np.array_equal(self.timestamps, other.timestamps)
        )
        return (
            np.array_equal(self.values, other.values)
            and same_ts
            and self.true_breakouts == other.true_breakouts
            and self.anomaly_labels == other.anomaly_labels
        )

    __hash__ = None  # type: ignore[assignment]

    def with_values(self, values: Sequence[float] | np.ndarray) -> TimeSeries:
        """Same labels and timestamps, new observations."""
        return TimeSeries(values, self.timestamps, self.true_breakouts, self.anomaly_labels)


def validate_series(
    raw: Iterable[float] | np.ndarray | TimeSeries,
    timestamps: Sequence[int] | None = None,
    true_breakouts: Iterable[int] = (),
    anomaly_labels: Iterable[int] = (),
) -> TimeSeries:
    """Build a :class:`TimeSeries`, raising on empty or non-finite input.

    >>> validate_series([1.0, 2.0, 3.0]).n
    3
    """
    if isinstance(raw, TimeSeries):
        return raw
    values = np.asarray(list(raw) if not isinstance(raw, np.ndarray) else raw, dtype=np.float64)
    return TimeSeries(values, timestamps, frozenset(true_breakouts), frozenset(anomaly_labels))


@dataclass(frozen=True, eq=False)
class ScaledSeries:
    values: np.ndarray
    scale_min: float
    scale_max: float
    degenerate: bool

    def invert(self, x: float | np.ndarray) -> float | np.ndarray:
        """Map unit-interval values back to the original scale."""
        if self.degenerate:
            return np.full_like(np.asarray(x, dtype=float), self.scale_min) if np.ndim(x) else self.scale_min
        return x * (self.scale_max - self.scale_min) + self.scale_min


def scale_to_unit(series: TimeSeries | Sequence[float] | np.ndarray) -> ScaledSeries:
    """Rescale a series so its minimum is 0 and its maximum is 1.

    A constant series has no defined rescaling; every value becomes 0.5 and
    the result is flagged ``degenerate``.
    """
    values = validate_series(series).values
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return ScaledSeries(_frozen_array(np.full(values.shape, 0.5)), lo, hi, True)
    scaled = (values - lo) / (hi - lo)
    # guard against 1 + eps from the division
    np.clip(scaled, 0.0, 1.0, out=scaled)
    return ScaledSeries(_frozen_array(scaled), lo, hi, False)


@dataclass(frozen=True)
class DetectionConfig:
    """Parameters shared by the detectors and the permutation test."""

    alpha: float = 2.0
    delta: int = 24
    tree_depth: int = 10
    between_selection: str = "tail"
    permutations: int = 199
    significance_level: float = 0.05
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not (isinstance(self.alpha, (int, float)) and 0.0 < self.alpha <= 2.0):
            raise InvalidConfig(f"alpha must lie in (0, 2], got {self.alpha!r}")
        if not isinstance(self.delta, (int, np.integer)) or self.delta < 2:
            raise InvalidConfig(f"delta must be an integer >= 2, got {self.delta!r}")
        if not isinstance(self.tree_depth, (int, np.integer)) or not 1 <= self.tree_depth <= MAX_TREE_DEPTH:
            raise InvalidConfig(
                f"tree_depth must be an integer in [1, {MAX_TREE_DEPTH}], got {self.tree_depth!r}"
            )
        if self.between_selection not in BETWEEN_SELECTIONS:
            raise InvalidConfig(
                f"between_selection must be one of {BETWEEN_SELECTIONS}, got {self.between_selection!r}"
            )
        if not isinstance(self.permutations, (int, np.integer)) or self.permutations < 0:
            raise InvalidConfig(f"permutations must be a nonnegative integer, got {self.permutations!r}")
        if not 0.0 < self.significance_level < 1.0:
            raise InvalidConfig(
                f"significance_level must lie in (0, 1), got {self.significance_level!r}"
            )
        if not isinstance(self.rng_seed, (int, np.integer)) or not 0 <= self.rng_seed < 2**64:
            raise InvalidConfig(f"rng_seed must be an integer in [0, 2**64), got {self.rng_seed!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> DetectionConfig:
        return cls(**data)


@dataclass(frozen=True)
class BreakoutReport:
    """Outcome of one detection run plus its permutation test."""

    tau_hat: int | None
    kappa_hat: int | None
    statistic: float
    p_value: float
    significant: bool
    method: str
    significance_level: float = 0.05

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise InvalidConfig(f"unknown method {self.method!r}")
        if not 0.0 <= self.p_value <= 1.0:
            raise InvalidConfig(f"p_value must lie in [0, 1], got {self.p_value!r}")
        if self.significant != (self.p_value < self.significance_level):
            raise InvalidConfig("significant must equal p_value < significance_level")
        if (self.tau_hat is None) != (self.kappa_hat is None):
            raise InvalidConfig("tau_hat and kappa_hat must both be set or both be None")
        if self.tau_hat is not None and not self.tau_hat < self.kappa_hat:
            raise InvalidConfig("tau_hat must precede kappa_hat")

    def check_bounds(self, n: int, delta: int) -> None:
        """Assert ``delta <= tau`` and ``tau + delta <= kappa <= n``."""
        if self.tau_hat is None:
            return
        if not (delta <= self.tau_hat and self.tau_hat + delta <= self.kappa_hat <= n):
            raise InvalidConfig(
                f"(tau, kappa)=({self.tau_hat}, {self.kappa_hat}) infeasible for n={n}, delta={delta}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> BreakoutReport:
        fields = ("tau_hat", "kappa_hat", "statistic", "p_value", "significant", "method", "significance_level")
        return cls(**{k: data[k] for k in fields if k in data})


def read_series_csv(path: str | Path) -> TimeSeries:
    """Read a series from CSV: one value per row, optional header row,
    optional second column of integer timestamps.

    Errors carry the 1-based row number within the file.
    """
    path = Path(path)
    values: list[float] = []
    stamps: list[int] = []
    with path.open(newline="") as fh:
        for rowno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            first = row[0].strip()
            if rowno == 1 and not values and not _looks_numeric(first):
                continue  # header
            try:
                value = float(first)
            except ValueError:
                raise ParseError(rowno, f"cannot parse value {first!r}", str(path)) from None
            if not math.isfinite(value):
                raise ParseError(rowno, f"non-finite value {first!r}", str(path))
            values.append(value)
            if len(row) > 1 and row[1].strip():
                try:
                    stamps.append(int(row[1].strip()))
                except ValueError:
                    raise ParseError(rowno, f"cannot parse timestamp {row[1]!r}", str(path)) from None
            elif stamps:
                raise ParseError(rowno, "missing timestamp", str(path))
    if stamps and len(stamps) != len(values):
        raise ParseError(1, "timestamps present on some rows only", str(path))
    if not values:
        raise EmptySeries()
    return TimeSeries(np.array(values), np.array(stamps) if stamps else None)


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def write_series_csv(series: TimeSeries, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if series.timestamps is None:
            writer.writerow(["value"])
            for v in series.values:
                writer.writerow([repr(float(v))])
        else:
            writer.writerow(["value", "timestamp"])
            for v, t in zip(series.values, series.timestamps):
                writer.writerow([repr(float(v)), int(t)])
