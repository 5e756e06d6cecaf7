"""Sample energy statistics.

``e_hat`` is the U-statistic estimator of the energy distance between two
samples::

    E(X, Y; a) = 2/(nm) sum_ij |x_i - y_j|^a
                 - C(n,2)^-1 sum_{i<j} |x_i - x_j|^a
                 - C(m,2)^-1 sum_{i<j} |y_i - y_j|^a

and ``q_hat`` scales it by ``nm / (n + m)``.  The finite-sample value can be
negative and is returned as is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidAlpha, SampleTooSmall


@numba.njit(cache=True, nogil=True, inline="always")
def _powdist(d, alpha):
    if alpha == 2.0:
        return d * d
    if alpha == 1.0:
        return d
    return d**alpha


@numba.njit(cache=True, nogil=True)
def _between_sum(x, y, alpha):
    # Neumaier compensated summation over all |x_i - y_j|^alpha.
    s = 0.0
    c = 0.0
    for i in range(x.size):
        xi = x[i]
        for j in range(y.size):
            v = _powdist(abs(xi - y[j]), alpha)
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s + c


@numba.njit(cache=True, nogil=True)
def _within_sum(x, alpha):
    s = 0.0
    c = 0.0
    for i in range(x.size):
        xi = x[i]
        for j in range(i + 1, x.size):
            v = _powdist(abs(xi - x[j]), alpha)
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s + c


def _check(x, y, alpha: float) -> tuple[np.ndarray, np.ndarray, float]:
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise InvalidAlpha(alpha)
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if x.size < 2 or y.size < 2:
        raise SampleTooSmall(f"both samples need at least 2 observations, got {x.size} and {y.size}")
    return x, y, alpha


def _canonical(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Fix the argument order so swapping X and Y is bit-for-bit symmetric.
    if (x.size, x.tobytes()) > (y.size, y.tobytes()):
        return y, x
    return x, y


def e_hat(x, y, alpha: float = 2.0) -> float:
    """Energy-distance estimate between samples ``x`` and ``y``.

    >>> e_hat([0.0, 0.0], [1.0, 1.0], 2.0)
    2.0
    """
    x, y, alpha = _check(x, y, alpha)
    x, y = _canonical(x, y)
    n, m = x.size, y.size
    between = _between_sum(x, y, alpha)
    within_x = _within_sum(x, alpha)
    within_y = _within_sum(y, alpha)
    return (
        2.0 * between / (n * m)
        - within_x / (n * (n - 1) / 2.0)
        - within_y / (m * (m - 1) / 2.0)
    )


def scale_factor(n: int, m: int) -> float:
    """The ``nm / (n + m)`` prefactor applied to a divergence."""
    return n * m / (n + m)


def q_hat(x, y, alpha: float = 2.0) -> float:
    n, m = np.size(x), np.size(y)
    return scale_factor(n, m) * e_hat(x, y, alpha)


@dataclass(frozen=True)
class SampleDivergence:
    e_hat: float
    q_hat: float
    n: int
    m: int
    alpha: float


def divergence(x, y, alpha: float = 2.0) -> SampleDivergence:
    e = e_hat(x, y, alpha)
    n, m = np.size(x), np.size(y)
    return SampleDivergence(e, scale_factor(n, m) * e, n, m, float(alpha))
