"""Scoring and synthetic data for detector evaluation.

Detections are matched to labeled breakouts greedily, nearest pair first,
within a window of ``w`` observations.  Only significant detections count.

A labeled dataset is a directory of ``<name>.csv`` series files, each with a
``<name>.json`` sidecar holding ``true_breakouts`` and ``anomaly_labels``
(1-based indices).
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import BreakoutReport, DetectionConfig, TimeSeries, read_series_csv, write_series_csv
from .errors import BreakwatchError, InvalidSpec, MalformedLabels


def ttd(true_breakout: int, estimate: int | None) -> int | None:
    """Observations between the true breakout and the estimate."""
    if estimate is None:
        return None
    return abs(int(estimate) - int(true_breakout))


def f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalOutcome:
    tp: int
    fp: int
    fn: int
    ttd: int | None = None

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f_measure(self) -> float:
        return f_measure(self.precision, self.recall)

    def __add__(self, other: EvalOutcome) -> EvalOutcome:
        # pooled counts; ttd does not pool
        return EvalOutcome(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def _position(d) -> int | None:
    if isinstance(d, BreakoutReport):
        return d.tau_hat if d.significant else None
    return None if d is None else int(d)


def score(detections: Iterable, truths: Iterable[int], w: int = 10) -> EvalOutcome:
    """Match detections to truths and count tp, fp and fn.

    ``detections`` may hold :class:`BreakoutReport` objects (non-significant
    ones are dropped) or plain indices.  ``ttd`` is measured from the first
    truth to the closest detection, matched or not.

    >>> o = score([103], [100])
    >>> (o.tp, o.fp, o.fn, o.ttd)
    (1, 0, 0, 3)
    """
    if w < 0:
        raise ValueError(f"match window must be >= 0, got {w}")
    found = sorted(p for p in map(_position, detections) if p is not None)
    truth = sorted(int(t) for t in truths)
    pairs = sorted(
        (abs(d - t), t, d, i, j)
        for i, d in enumerate(found)
        for j, t in enumerate(truth)
        if abs(d - t) <= w
    )
    used_d: set[int] = set()
    used_t: set[int] = set()
    for _, _, _, i, j in pairs:
        if i not in used_d and j not in used_t:
            used_d.add(i)
            used_t.add(j)
    tp = len(used_d)
    delay = None
    if truth and found:
        delay = min(ttd(truth[0], d) for d in found)
    return EvalOutcome(tp=tp, fp=len(found) - tp, fn=len(truth) - tp, ttd=delay)


@dataclass(frozen=True)
class SynthSpec:
    segment_lengths: tuple[int, ...] = (200, 200)
    segment_means: tuple[float, ...] = (0.0, 1.0)
    noise_sd: float = 0.1
    anomaly_count: int = 0
    anomaly_magnitude: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "segment_lengths", tuple(int(v) for v in self.segment_lengths))
        object.__setattr__(self, "segment_means", tuple(float(v) for v in self.segment_means))
        if not self.segment_lengths:
            raise InvalidSpec("at least one segment is required")
        if len(self.segment_lengths) != len(self.segment_means):
            raise InvalidSpec(
                f"{len(self.segment_lengths)} segment lengths but {len(self.segment_means)} means"
            )
        if any(v < 1 for v in self.segment_lengths):
            raise InvalidSpec("segment lengths must be positive")
        if not all(math.isfinite(m) for m in self.segment_means):
            raise InvalidSpec("segment means must be finite")
        if not (math.isfinite(self.noise_sd) and self.noise_sd >= 0):
            raise InvalidSpec(f"noise_sd must be >= 0, got {self.noise_sd}")
        if not math.isfinite(self.anomaly_magnitude):
            raise InvalidSpec("anomaly_magnitude must be finite")
        if not 0 <= self.anomaly_count < self.n:
            raise InvalidSpec(f"anomaly_count must lie in [0, {self.n}), got {self.anomaly_count}")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec(f"seed must lie in [0, 2**64), got {self.seed}")

    @property
    def n(self) -> int:
        return sum(self.segment_lengths)

    @property
    def breakouts(self) -> tuple[int, ...]:
        """1-based index of the last observation before each mean change."""
        return tuple(int(b) for b in np.cumsum(self.segment_lengths)[:-1])

    @property
    def max_shift(self) -> float:
        means = self.segment_means
        if len(means) < 2:
            return 1.0
        return max(abs(b - a) for a, b in zip(means, means[1:]))


def synthesize(spec: SynthSpec) -> TimeSeries:
    """Piecewise-constant means plus Gaussian noise and injected anomalies."""
    rng = np.random.default_rng(spec.seed)
    mean = np.repeat(spec.segment_means, spec.segment_lengths)
    values = mean + rng.normal(0.0, spec.noise_sd, spec.n) if spec.noise_sd > 0 else mean.copy()
    where = np.sort(rng.choice(spec.n, size=spec.anomaly_count, replace=False))
    signs = rng.choice((-1.0, 1.0), size=spec.anomaly_count)
    values[where] = mean[where] + signs * spec.anomaly_magnitude * spec.max_shift
    return TimeSeries(
        values,
        true_breakouts=spec.breakouts,
        anomaly_labels=tuple(int(i) + 1 for i in where),
    )


# Labeled datasets


def write_labeled(series: TimeSeries, csv_path: str | Path) -> Path:
    """Write ``series`` and its label sidecar; returns the sidecar path."""
    csv_path = Path(csv_path)
    write_series_csv(series, csv_path)
    sidecar = csv_path.with_suffix(".json")
    labels = {
        "true_breakouts": sorted(series.true_breakouts),
        "anomaly_labels": sorted(series.anomaly_labels),
    }
    sidecar.write_text(json.dumps(labels, indent=2) + "\n")
    return sidecar


def _label_list(data: dict, key: str, path: Path) -> list[int]:
    raw = data.get(key, [])
    if not isinstance(raw, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw):
        raise MalformedLabels(str(path), f"{key} must be a list of integers")
    return raw


def read_labeled(csv_path: str | Path) -> TimeSeries:
    csv_path = Path(csv_path)
    sidecar = csv_path.with_suffix(".json")
    try:
        data = json.loads(sidecar.read_text())
    except FileNotFoundError:
        raise MalformedLabels(str(sidecar), "label file is missing") from None
    except json.JSONDecodeError as exc:
        raise MalformedLabels(str(sidecar), f"invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict) or "true_breakouts" not in data:
        raise MalformedLabels(str(sidecar), "expected an object with true_breakouts")
    series = read_series_csv(csv_path)
    try:
        return TimeSeries(
            series.values,
            series.timestamps,
            true_breakouts=_label_list(data, "true_breakouts", sidecar),
            anomaly_labels=_label_list(data, "anomaly_labels", sidecar),
        )
    except MalformedLabels:
        raise
    except BreakwatchError as exc:
        raise MalformedLabels(str(sidecar), str(exc)) from None


def load_dataset(directory: str | Path) -> list[tuple[str, TimeSeries]]:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory} is not a directory")
    files = sorted(directory.glob("*.csv"))
    if not files:
        raise MalformedLabels(str(directory), "no labeled series found")
    return [(f.stem, read_labeled(f)) for f in files]


# Evaluation runs


SCOREBOARD_FIELDS = ("series", "method", "tau_hat", "kappa_hat", "statistic", "p_value",
                     "significant", "ttd", "tp", "fp", "fn")


@dataclass(frozen=True)
class ScoreRow:
    series: str
    method: str
    report: BreakoutReport
    outcome: EvalOutcome

    def as_row(self) -> list:
        r, o = self.report, self.outcome
        return [self.series, self.method, r.tau_hat, r.kappa_hat, repr(r.statistic), repr(r.p_value),
                str(r.significant).lower(), "" if o.ttd is None else o.ttd, o.tp, o.fp, o.fn]


def evaluate(
    dataset: Sequence[tuple[str, TimeSeries]],
    methods: Sequence[str],
    config: DetectionConfig = DetectionConfig(),
    w: int = 10,
    transform=None,
) -> list[ScoreRow]:
    """Run each method on each series; ``transform`` preprocesses the series."""
    from .sigtest import detect

    rows = []
    for name, series in dataset:
        data = transform(series) if transform else series
        for method in methods:
            report = detect(data, config, method)
            rows.append(ScoreRow(name, method, report, score([report], series.true_breakouts, w)))
    return rows


def summarize(rows: Sequence[ScoreRow], w: int = 10) -> dict:
    """Pooled precision, recall and F plus median TTD for each method."""
    summary: dict = {"match_window": w, "methods": {}}
    for method in dict.fromkeys(r.method for r in rows):
        mine = [r.outcome for r in rows if r.method == method]
        pooled = sum(mine, EvalOutcome(0, 0, 0))
        delays = [o.ttd for o in mine if o.ttd is not None]
        summary["methods"][method] = {
            "series": len(mine),
            "tp": pooled.tp,
            "fp": pooled.fp,
            "fn": pooled.fn,
            "precision": pooled.precision,
            "recall": pooled.recall,
            "f_measure": pooled.f_measure,
            "median_ttd": statistics.median(delays) if delays else None,
        }
    return summary


def write_scoreboard(rows: Sequence[ScoreRow], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCOREBOARD_FIELDS)
        for row in rows:
            writer.writerow(row.as_row())
