"""Non-robust comparators.

``edivisive_detect`` is the single-split E-Divisive search: the arg-max of
the mean-based statistic ``Q^(A_tau, B_tau(kappa))`` over the same grid the
robust detectors use.  It follows the reference E-Divisive implementation:
a full distance matrix, then for every ``tau`` the right segment is grown
one point at a time and the between and within-B sums are updated by
summing that point's row of distances.  This costs O(n) per grid cell, so
O(n^3) per search.

The smoothers replace each observation by the mean or median of a centered
window.  Near the ends the window shrinks symmetrically to the neighbors
available on both sides, so the first and last values are kept as is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import DetectionConfig, TimeSeries, scale_to_unit, validate_series
from .edm import Detection
from .energy import _powdist
from .errors import InvalidAlpha, InvalidConfig, SeriesTooShort, WindowTooLarge


@numba.njit(cache=True, nogil=True)
def _row_sum(row, start, stop):
    # Four interleaved partial sums: a fixed summation order, so results are
    # reproducible, without a single serial dependency chain.
    s0 = 0.0
    s1 = 0.0
    s2 = 0.0
    s3 = 0.0
    i = start
    while i + 4 <= stop:
        s0 += row[i]
        s1 += row[i + 1]
        s2 += row[i + 2]
        s3 += row[i + 3]
        i += 4
    while i < stop:
        s0 += row[i]
        i += 1
    return (s0 + s1) + (s2 + s3)


@numba.njit(cache=True, nogil=True)
def _edivisive_sweep(z, delta, alpha):
    n = z.size
    dist = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            dist[i, j] = _powdist(abs(z[i] - z[j]), alpha)
    best_q = -np.inf
    best_tau = -1
    best_kappa = -1
    within_a = 0.0
    for i in range(delta):
        for j in range(i + 1, delta):
            within_a += dist[i, j]
    for tau in range(delta, n - delta + 1):
        if tau > delta:
            within_a += _row_sum(dist[tau - 1], 0, tau - 1)
        within_b = 0.0
        between = 0.0
        for j in range(tau, tau + delta):
            within_b += _row_sum(dist[j], tau, j)
            between += _row_sum(dist[j], 0, tau)
        for kappa in range(tau + delta, n + 1):
            if kappa > tau + delta:
                row = dist[kappa - 1]
                between += _row_sum(row, 0, tau)
                within_b += _row_sum(row, tau, kappa - 1)
            m = kappa - tau
            e = (
                2.0 * between / (tau * m)
                - within_a / (tau * (tau - 1) / 2.0)
                - within_b / (m * (m - 1) / 2.0)
            )
            q = tau * m / (tau + m) * e
            if q > best_q:
                best_q = q
                best_tau = tau
                best_kappa = kappa
    return best_tau, best_kappa, best_q


def edivisive_detect(
    series: TimeSeries | np.ndarray,
    alpha: float = 2.0,
    delta: int = 24,
) -> Detection:
    """Exhaustive single-breakout E-Divisive on the unit-scaled series."""
    series = validate_series(series)
    if not 0.0 < alpha <= 2.0:
        raise InvalidAlpha(alpha)
    if delta < 2:
        raise InvalidConfig(f"delta must be >= 2, got {delta}")
    if series.n < 2 * delta:
        raise SeriesTooShort(series.n, 2 * delta)
    scaled = scale_to_unit(series)
    if scaled.degenerate:
        return Detection(delta, 2 * delta, 0.0)
    tau, kappa, q = _edivisive_sweep(np.ascontiguousarray(scaled.values), delta, float(alpha))
    return Detection(int(tau), int(kappa), float(q))


def edivisive_with_config(series, config: DetectionConfig) -> Detection:
    return edivisive_detect(series, config.alpha, config.delta)


@dataclass(frozen=True)
class SmootherSpec:
    kind: str = "rolling_median"
    window: int = 3

    def __post_init__(self) -> None:
        if self.kind not in ("rolling_mean", "rolling_median"):
            raise InvalidConfig(f"unknown smoother {self.kind!r}")
        if self.window < 3 or self.window % 2 == 0:
            raise InvalidConfig(f"window must be odd and >= 3, got {self.window}")


def smooth(series: TimeSeries | np.ndarray, spec: SmootherSpec) -> TimeSeries:
    """Centered rolling mean or median, keeping length and labels.

    >>> smooth([1.0, 100.0, 1.0, 1.0, 1.0], SmootherSpec("rolling_median", 3)).values.tolist()
    [1.0, 1.0, 1.0, 1.0, 1.0]
    """
    series = validate_series(series)
    n = series.n
    if spec.window > n:
        raise WindowTooLarge(f"window {spec.window} exceeds series length {n}")
    half = spec.window // 2
    reducer = np.mean if spec.kind == "rolling_mean" else np.median
    x = series.values
    out = np.empty(n)
    for i in range(n):
        # shrink symmetrically so the window stays centered on i
        h = min(half, i, n - 1 - i)
        out[i] = reducer(x[i - h : i + h + 1])
    # a mean can round one ulp past the data range
    np.clip(out, x.min(), x.max(), out=out)
    return series.with_values(out)
