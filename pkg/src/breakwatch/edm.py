"""E-Divisive with Medians.

Searches every split ``delta <= tau`` and right boundary
``tau + delta <= kappa <= n`` for the maximum of the windowed robust
statistic ``Q~(A_tau, B_tau(kappa))`` where ``A_tau = Z_1..Z_tau`` and
``B_tau(kappa) = Z_{tau+1}..Z_kappa``.

Three distance multisets are maintained incrementally (within-A, within-B,
between) and their medians read from interval trees, or from sorted
buffers when exact medians are requested.  For each ``tau`` the right
boundary is swept across its range, alternating direction between
consecutive ``tau`` values so no multiset is ever rebuilt:

* a forward step appends ``Z_kappa`` to B, adding one consecutive distance
  to within-B;
* a backward step drops it again;
* advancing ``tau`` moves ``Z_{tau+1}`` from B to A, which adds one
  consecutive distance to within-A, shifts B's leading window by one and
  shifts the between window.

Ties in the maximum go to the smallest ``tau``, then the smallest ``kappa``.
"""

from __future__ import annotations

from types import SimpleNamespace
from typing import NamedTuple

import numba
import numpy as np

from .core import DetectionConfig, TimeSeries, scale_to_unit, validate_series
from .energy import _powdist
from .errors import InvalidConfig, SeriesTooShort
from .intervaltree import tree_median, tree_update

WITHIN_A, WITHIN_B, BETWEEN = 0, 1, 2


class Detection(NamedTuple):
    """Arg-max of a detection statistic (1-based indices)."""

    tau: int
    kappa: int
    statistic: float


@numba.njit(cache=True, nogil=True, inline="always")
def _d(z, i, j, alpha):
    return _powdist(abs(z[i] - z[j]), alpha)


@numba.njit(cache=True, nogil=True)
def _evaluate(pos, med, best):
    """Score the current cell and keep the running maximum in ``best``."""
    tau = pos[0]
    m = pos[1] - tau
    e = 2.0 * med[BETWEEN] - med[WITHIN_A] - med[WITHIN_B]
    q = tau * m / (tau + m) * e
    if (
        q > best[0]
        or best[1] < 0
        or (q == best[0] and (tau < best[1] or (tau == best[1] and pos[1] < best[2])))
    ):
        best[0] = q
        best[1] = tau
        best[2] = pos[1]


def _build_kernels(exact: bool) -> SimpleNamespace:
    """Compile the sweep for one median source.

    ``exact`` is frozen into the closures so each variant compiles without
    the other's branch.  Multiset ``k`` lives either in ``counts[k]`` (an
    interval tree) or in the sorted prefix ``bufs[k, :sizes[k]]``.

    State arrays: ``pos = [tau, kappa]`` (1-based), ``med`` caches the three
    medians, ``best = [q, tau, kappa]``.
    """

    @numba.njit(nogil=True)
    def ms_add(k, x, counts, bufs, sizes, depth):
        if exact:
            n = sizes[k]
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if bufs[k, mid] <= x:
                    lo = mid + 1
                else:
                    hi = mid
            for i in range(n, lo, -1):
                bufs[k, i] = bufs[k, i - 1]
            bufs[k, lo] = x
        else:
            tree_update(counts, k, depth, x, 1)
        sizes[k] += 1

    @numba.njit(nogil=True)
    def ms_remove(k, x, counts, bufs, sizes, depth):
        # x is always recomputed from the same observations that produced the
        # stored value, so an exact match exists.
        if exact:
            n = sizes[k]
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if bufs[k, mid] < x:
                    lo = mid + 1
                else:
                    hi = mid
            for i in range(lo, n - 1):
                bufs[k, i] = bufs[k, i + 1]
        else:
            tree_update(counts, k, depth, x, -1)
        sizes[k] -= 1

    @numba.njit(nogil=True)
    def ms_median(k, counts, bufs, sizes, depth):
        if exact:
            n = sizes[k]
            if n % 2 == 1:
                return bufs[k, n // 2]
            return (bufs[k, n // 2 - 1] + bufs[k, n // 2]) / 2.0
        return tree_median(counts, k, depth)

    @numba.njit(nogil=True)
    def reset(z, tau, delta, alpha, depth, tail, counts, bufs, sizes, pos, med):
        counts[:] = 0
        sizes[:] = 0
        # within-A: leading pairs, then consecutive pairs up to tau
        for i in range(delta):
            for j in range(i + 1, delta):
                ms_add(WITHIN_A, _d(z, i, j, alpha), counts, bufs, sizes, depth)
        for i in range(delta - 1, tau - 1):
            ms_add(WITHIN_A, _d(z, i, i + 1, alpha), counts, bufs, sizes, depth)
        # within-B has length delta, so leading pairs only
        for i in range(tau, tau + delta):
            for j in range(i + 1, tau + delta):
                ms_add(WITHIN_B, _d(z, i, j, alpha), counts, bufs, sizes, depth)
        a0 = tau - delta if tail else 0
        for i in range(a0, a0 + delta):
            for j in range(tau, tau + delta):
                ms_add(BETWEEN, _d(z, i, j, alpha), counts, bufs, sizes, depth)
        pos[0] = tau
        pos[1] = tau + delta
        for k in range(3):
            med[k] = ms_median(k, counts, bufs, sizes, depth)

    @numba.njit(nogil=True)
    def forward(z, to_kappa, alpha, depth, counts, bufs, sizes, pos, med, best):
        while pos[1] < to_kappa:
            k = pos[1]  # 0-based index of the incoming point
            ms_add(WITHIN_B, _d(z, k - 1, k, alpha), counts, bufs, sizes, depth)
            pos[1] += 1
            med[WITHIN_B] = ms_median(WITHIN_B, counts, bufs, sizes, depth)
            _evaluate(pos, med, best)

    @numba.njit(nogil=True)
    def backward(z, to_kappa, alpha, depth, counts, bufs, sizes, pos, med, best):
        while pos[1] > to_kappa:
            k = pos[1] - 1  # 0-based index of the departing point
            ms_remove(WITHIN_B, _d(z, k - 1, k, alpha), counts, bufs, sizes, depth)
            pos[1] -= 1
            med[WITHIN_B] = ms_median(WITHIN_B, counts, bufs, sizes, depth)
            _evaluate(pos, med, best)

    @numba.njit(nogil=True)
    def advance_tau(z, delta, alpha, depth, tail, counts, bufs, sizes, pos, med):
        # requires kappa >= tau + delta + 1
        t = pos[0]  # 0-based index of the point moving from B to A
        ms_add(WITHIN_A, _d(z, t - 1, t, alpha), counts, bufs, sizes, depth)
        # B's leading window t..t+delta-1 becomes t+1..t+delta; the old
        # consecutive pair (t+delta-1, t+delta) now belongs to it
        for j in range(1, delta):
            ms_remove(WITHIN_B, _d(z, t, t + j, alpha), counts, bufs, sizes, depth)
        for j in range(1, delta - 1):
            ms_add(WITHIN_B, _d(z, t + j, t + delta, alpha), counts, bufs, sizes, depth)
        # between: B side shifts from t..t+delta-1 to t+1..t+delta
        if tail:
            # A side shifts from t-delta..t-1 to t-delta+1..t
            for j in range(t, t + delta):
                ms_remove(BETWEEN, _d(z, t - delta, j, alpha), counts, bufs, sizes, depth)
            for i in range(t - delta + 1, t):
                ms_remove(BETWEEN, _d(z, i, t, alpha), counts, bufs, sizes, depth)
                ms_add(BETWEEN, _d(z, i, t + delta, alpha), counts, bufs, sizes, depth)
            for j in range(t + 1, t + delta + 1):
                ms_add(BETWEEN, _d(z, t, j, alpha), counts, bufs, sizes, depth)
        else:
            for i in range(delta):
                ms_remove(BETWEEN, _d(z, i, t, alpha), counts, bufs, sizes, depth)
                ms_add(BETWEEN, _d(z, i, t + delta, alpha), counts, bufs, sizes, depth)
        pos[0] += 1
        for k in range(3):
            med[k] = ms_median(k, counts, bufs, sizes, depth)

    @numba.njit(nogil=True)
    def sweep(z, delta, alpha, depth, tail, counts, bufs, sizes, pos, med, best):
        n = z.size
        reset(z, delta, delta, alpha, depth, tail, counts, bufs, sizes, pos, med)
        _evaluate(pos, med, best)
        forward(z, n, alpha, depth, counts, bufs, sizes, pos, med, best)
        backward_next = True
        for tau in range(delta + 1, n - delta + 1):
            if pos[1] < tau + delta:
                # the previous sweep ended at its lower bound; step back in
                # (that cell was already scored)
                forward(z, pos[1] + 1, alpha, depth, counts, bufs, sizes, pos, med, best)
            advance_tau(z, delta, alpha, depth, tail, counts, bufs, sizes, pos, med)
            _evaluate(pos, med, best)
            if backward_next:
                backward(z, tau + delta, alpha, depth, counts, bufs, sizes, pos, med, best)
            else:
                forward(z, n, alpha, depth, counts, bufs, sizes, pos, med, best)
            backward_next = not backward_next

    return SimpleNamespace(
        reset=reset, forward=forward, backward=backward, advance_tau=advance_tau,
        sweep=sweep, median=ms_median,
    )


_KERNELS = {False: _build_kernels(False), True: _build_kernels(True)}


class EdmState:
    """Incremental EDM search state over a unit-scaled series.

    Exposes the individual sweep steps; :func:`edm_detect` drives them all
    inside a single compiled loop.
    """

    def __init__(
        self,
        z: np.ndarray,
        delta: int,
        alpha: float = 2.0,
        depth: int = 10,
        between_selection: str = "tail",
        median_source: str = "tree",
    ) -> None:
        if median_source not in ("tree", "exact"):
            raise InvalidConfig(f"median_source must be 'tree' or 'exact', got {median_source!r}")
        self.z = np.ascontiguousarray(z, dtype=np.float64)
        n = self.z.size
        if n < 2 * delta:
            raise SeriesTooShort(n, 2 * delta)
        self.delta = int(delta)
        self.alpha = float(alpha)
        self.depth = int(depth)
        self.tail = between_selection == "tail"
        self.exact = median_source == "exact"
        cap = max(delta * (delta - 1) // 2 + n, delta * delta)
        self.counts = np.zeros((3, 2 << self.depth), dtype=np.int64)
        self.bufs = np.zeros((3, cap if self.exact else 1))
        self.sizes = np.zeros(3, dtype=np.int64)
        self.pos = np.zeros(2, dtype=np.int64)
        self.med = np.zeros(3)
        self.best = np.array([-np.inf, -1.0, -1.0])
        self._k = _KERNELS[self.exact]
        self.reset(delta)

    @property
    def tau(self) -> int:
        return int(self.pos[0])

    @property
    def kappa(self) -> int:
        return int(self.pos[1])

    @property
    def n(self) -> int:
        return int(self.z.size)

    def reset(self, tau: int) -> None:
        if not self.delta <= tau <= self.n - self.delta:
            raise ValueError(f"tau={tau} outside [{self.delta}, {self.n - self.delta}]")
        self._k.reset(self.z, tau, self.delta, self.alpha, self.depth, self.tail,
                      self.counts, self.bufs, self.sizes, self.pos, self.med)

    def evaluate(self) -> float:
        _evaluate(self.pos, self.med, self.best)
        return self.statistic()

    def statistic(self) -> float:
        """Q~ at the current (tau, kappa) from the cached medians."""
        tau, m = self.tau, self.kappa - self.tau
        e = 2.0 * self.med[BETWEEN] - self.med[WITHIN_A] - self.med[WITHIN_B]
        return float(tau * m / (tau + m) * e)

    def forward_update(self, to_kappa: int) -> None:
        if not self.kappa <= to_kappa <= self.n:
            raise ValueError(f"cannot move kappa forward from {self.kappa} to {to_kappa}")
        self._k.forward(self.z, to_kappa, self.alpha, self.depth,
                        self.counts, self.bufs, self.sizes, self.pos, self.med, self.best)

    def backward_update(self, to_kappa: int) -> None:
        if not self.tau + self.delta <= to_kappa <= self.kappa:
            raise ValueError(f"cannot move kappa backward from {self.kappa} to {to_kappa}")
        self._k.backward(self.z, to_kappa, self.alpha, self.depth,
                         self.counts, self.bufs, self.sizes, self.pos, self.med, self.best)

    def advance_tau(self) -> None:
        if self.kappa < self.tau + self.delta + 1:
            raise ValueError("kappa must exceed tau + delta before tau can advance")
        self._k.advance_tau(self.z, self.delta, self.alpha, self.depth, self.tail,
                            self.counts, self.bufs, self.sizes, self.pos, self.med)

    def size(self, which: int) -> int:
        return int(self.sizes[which])

    def contents(self, which: int) -> np.ndarray:
        """Stored multiset: sorted distances (exact) or leaf counts (tree)."""
        if self.exact:
            return self.bufs[which, : self.sizes[which]].copy()
        return self.counts[which, 1 << self.depth :].copy()

    @property
    def best_detection(self) -> Detection | None:
        if self.best[1] < 0:
            return None
        return Detection(int(self.best[1]), int(self.best[2]), float(self.best[0]))


def _run_sweep(z: np.ndarray, delta: int, alpha: float, depth: int, tail: bool, exact: bool) -> Detection:
    n = z.size
    cap = max(delta * (delta - 1) // 2 + n, delta * delta) if exact else 1
    counts = np.zeros((3, 2 << depth), dtype=np.int64)
    bufs = np.zeros((3, cap))
    sizes = np.zeros(3, dtype=np.int64)
    pos = np.zeros(2, dtype=np.int64)
    med = np.zeros(3)
    best = np.array([-np.inf, -1.0, -1.0])
    _KERNELS[exact].sweep(z, delta, alpha, depth, tail, counts, bufs, sizes, pos, med, best)
    return Detection(int(best[1]), int(best[2]), float(best[0]))


def edm_detect(
    series: TimeSeries | np.ndarray,
    config: DetectionConfig = DetectionConfig(),
    median_source: str = "tree",
) -> Detection:
    """Locate the single most pronounced breakout with EDM.

    The series is rescaled to ``[0, 1]`` first, so the returned statistic is
    on that scale.
    """
    series = validate_series(series)
    delta = config.delta
    if series.n < 2 * delta:
        raise SeriesTooShort(series.n, 2 * delta)
    if median_source not in ("tree", "exact"):
        raise InvalidConfig(f"median_source must be 'tree' or 'exact', got {median_source!r}")
    scaled = scale_to_unit(series)
    if scaled.degenerate:
        return Detection(delta, 2 * delta, 0.0)
    z = np.ascontiguousarray(scaled.values)
    return _run_sweep(
        z, delta, float(config.alpha), config.tree_depth,
        config.between_selection == "tail", median_source == "exact",
    )
