"""Median-based divergence between two samples.

The robust divergence replaces each mean of pairwise distances in the
energy statistic by a median::

    E~(X, Y; a) = 2 med|x_i - y_j|^a - med|x_i - x_j|^a - med|y_i - y_j|^a

Taking medians over every pair costs O(n^2) per evaluation, so detection
uses windowed distance sets controlled by ``delta``:

* within a segment: all pairs among its first ``delta`` points plus every
  consecutive pair along the whole segment;
* between segments: ``delta`` points of the left segment (its last ``delta``
  for ``tail`` selection, its first for ``head``) against the first
  ``delta`` points of the right segment.

Even-sized medians are the mean of the two middle values throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BETWEEN_SELECTIONS
from .energy import scale_factor
from .errors import InvalidAlpha, InvalidConfig, OutOfRange, SampleTooSmall, SegmentTooShort
from .intervaltree import IntervalTree


@dataclass(frozen=True)
class RobustDivergenceSpec:
    alpha: float = 2.0
    delta: int = 24
    between_selection: str = "tail"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 2.0:
            raise InvalidAlpha(self.alpha)
        if self.delta < 2:
            raise InvalidConfig(f"delta must be >= 2, got {self.delta}")
        if self.between_selection not in BETWEEN_SELECTIONS:
            raise InvalidConfig(f"unknown between selection {self.between_selection!r}")


@dataclass(frozen=True, eq=False)
class DistanceWindows:
    within_a: np.ndarray
    within_b: np.ndarray
    between: np.ndarray


def _pow(d: np.ndarray, alpha: float) -> np.ndarray:
    if alpha == 2.0:
        return d * d
    if alpha == 1.0:
        return d
    return d**alpha


def _pairs_upper(x: np.ndarray, alpha: float) -> np.ndarray:
    i, j = np.triu_indices(x.size, k=1)
    return _pow(np.abs(x[i] - x[j]), alpha)


def within_window(segment, delta: int, alpha: float) -> np.ndarray:
    """Distances over the leading ``delta`` pairs plus all consecutive pairs."""
    s = np.asarray(segment, dtype=np.float64)
    lead = _pairs_upper(s[:delta], alpha)
    tail = _pow(np.abs(np.diff(s[delta - 1 :])), alpha)
    return np.concatenate([lead, tail])


def between_window(a, b, delta: int, alpha: float, selection: str = "tail") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    left = a[-delta:] if selection == "tail" else a[:delta]
    return _pow(np.abs(left[:, None] - b[None, :delta]), alpha).ravel()


def distance_windows(a, b, spec: RobustDivergenceSpec) -> DistanceWindows:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < spec.delta or b.size < spec.delta:
        raise SegmentTooShort(
            f"segments need at least delta={spec.delta} points, got {a.size} and {b.size}"
        )
    return DistanceWindows(
        within_window(a, spec.delta, spec.alpha),
        within_window(b, spec.delta, spec.alpha),
        between_window(a, b, spec.delta, spec.alpha, spec.between_selection),
    )


def _tree_median(values: np.ndarray, depth: int) -> float:
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise OutOfRange("tree medians need distances in [0, 1]; rescale the series first")
    tree = IntervalTree(depth)
    for v in values:
        tree.insert(v)
    return tree.approximate_median()


def e_tilde_exact(x, y, alpha: float = 2.0) -> float:
    """Robust divergence with true medians over every pairwise distance."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if not 0.0 < alpha <= 2.0:
        raise InvalidAlpha(alpha)
    if x.size < 2 or y.size < 2:
        raise SampleTooSmall(f"both samples need at least 2 observations, got {x.size} and {y.size}")
    m_xy = np.median(_pow(np.abs(x[:, None] - y[None, :]), alpha))
    m_xx = np.median(_pairs_upper(x, alpha))
    m_yy = np.median(_pairs_upper(y, alpha))
    return float(2.0 * m_xy - m_xx - m_yy)


def e_tilde_windowed(
    a,
    b,
    spec: RobustDivergenceSpec,
    median_source: str = "exact",
    tree_depth: int = 10,
) -> float:
    """Windowed robust divergence between adjacent segments ``a`` and ``b``.

    With ``median_source="tree"`` the three medians come from interval trees
    of depth ``tree_depth``, which requires unit-scaled inputs.
    """
    w = distance_windows(a, b, spec)
    if median_source == "exact":
        med = np.median
    elif median_source == "tree":
        def med(v):
            return _tree_median(v, tree_depth)
    else:
        raise InvalidConfig(f"median_source must be 'exact' or 'tree', got {median_source!r}")
    return float(2.0 * med(w.between) - med(w.within_a) - med(w.within_b))


def q_tilde(
    a,
    b,
    spec: RobustDivergenceSpec,
    median_source: str = "exact",
    tree_depth: int = 10,
) -> float:
    """``|a||b| / (|a| + |b|)`` times the windowed robust divergence."""
    e = e_tilde_windowed(a, b, spec, median_source, tree_depth)
    return scale_factor(np.size(a), np.size(b)) * e
