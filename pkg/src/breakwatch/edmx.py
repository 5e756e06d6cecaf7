"""E-Divisive with Exact Medians (the ``alpha = 2`` special case).

For ``alpha = 2`` the robust divergence reduces to a squared difference of
segment medians::

    E~(A_tau, B_tau(kappa)) = 2 [median(A_tau) - median(B_tau(kappa))]^2

and the search maximizes ``tau (kappa - tau) / kappa`` times that over the
same feasible grid as EDM.  Segment medians are exact, tracked with add-only
heap pairs: A's heaps grow with ``tau``, B's heaps are rebuilt for every
``tau`` and grow with ``kappa``.
"""

from __future__ import annotations

import numba
import numpy as np

from .core import DetectionConfig, TimeSeries, scale_to_unit, validate_series
from .edm import Detection
from .errors import SeriesTooShort
from .medianheap import pair_add, pair_median


@numba.njit(cache=True, nogil=True)
def _edmx_sweep(z, delta):
    n = z.size
    a_lo = np.empty(n)
    a_hi = np.empty(n)
    a_sz = np.zeros(2, dtype=np.int64)
    b_lo = np.empty(n)
    b_hi = np.empty(n)
    b_sz = np.zeros(2, dtype=np.int64)
    best_q = -np.inf
    best_tau = -1
    best_kappa = -1
    for i in range(delta - 1):
        pair_add(a_lo, a_hi, a_sz, z[i])
    for tau in range(delta, n - delta + 1):
        pair_add(a_lo, a_hi, a_sz, z[tau - 1])
        med_a = pair_median(a_lo, a_hi, a_sz)
        b_sz[0] = 0
        b_sz[1] = 0
        for i in range(tau, tau + delta - 1):
            pair_add(b_lo, b_hi, b_sz, z[i])
        for kappa in range(tau + delta, n + 1):
            pair_add(b_lo, b_hi, b_sz, z[kappa - 1])
            diff = med_a - pair_median(b_lo, b_hi, b_sz)
            m = kappa - tau
            q = tau * m / (tau + m) * (2.0 * (diff * diff))
            if q > best_q:
                best_q = q
                best_tau = tau
                best_kappa = kappa
    return best_tau, best_kappa, best_q


def edmx_detect(
    series: TimeSeries | np.ndarray,
    config: DetectionConfig = DetectionConfig(),
) -> Detection:
    """Locate the single most pronounced breakout in segment medians.

    ``config.alpha`` is not consulted; the statistic is the ``alpha = 2`` form.
    """
    series = validate_series(series)
    delta = config.delta
    if series.n < 2 * delta:
        raise SeriesTooShort(series.n, 2 * delta)
    scaled = scale_to_unit(series)
    if scaled.degenerate:
        return Detection(delta, 2 * delta, 0.0)
    tau, kappa, q = _edmx_sweep(np.ascontiguousarray(scaled.values), delta)
    return Detection(int(tau), int(kappa), float(q))
