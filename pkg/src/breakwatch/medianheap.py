"""Exact running median from a max-heap / min-heap pair.

The lower heap holds the smaller half of the observations and the upper
heap the larger half; the lower heap carries the extra element when the
count is odd.  With an even count the median is the mean of the two tops.

:class:`MedianHeapPair` is the public structure.  The ``pair_*`` kernels
below implement the same procedure on preallocated arrays for use inside
compiled detector loops.
"""

from __future__ import annotations

import heapq

import numba
import numpy as np

from .errors import EmptyHeap


class MedianHeapPair:
    """Add-only running median.

    >>> h = MedianHeapPair()
    >>> for x in (3, 1, 2):
    ...     h.add(x)
    >>> h.median()
    2.0
    """

    def __init__(self) -> None:
        self.lower: list[float] = []  # max-heap, stored negated
        self.upper: list[float] = []  # min-heap

    def __len__(self) -> int:
        return len(self.lower) + len(self.upper)

    def add(self, x: float) -> None:
        x = float(x)
        if not self.lower or x <= -self.lower[0]:
            heapq.heappush(self.lower, -x)
        else:
            heapq.heappush(self.upper, x)
        if len(self.lower) > len(self.upper) + 1:
            heapq.heappush(self.upper, -heapq.heappop(self.lower))
        elif len(self.upper) > len(self.lower):
            heapq.heappush(self.lower, -heapq.heappop(self.upper))

    def median(self) -> float:
        if not self.lower:
            raise EmptyHeap("median of an empty heap pair")
        if len(self.lower) > len(self.upper):
            return -self.lower[0]
        return (-self.lower[0] + self.upper[0]) / 2.0

    def audit(self) -> bool:
        """Check heap order in both halves, the split and the size balance."""
        for heap in (self.lower, self.upper):
            for i in range(1, len(heap)):
                if heap[(i - 1) // 2] > heap[i]:
                    return False
        if self.lower and self.upper and -self.lower[0] > self.upper[0]:
            return False
        return 0 <= len(self.lower) - len(self.upper) <= 1


# Array kernels.  ``lo`` is a max-heap and ``hi`` a min-heap; ``sizes`` holds
# their current lengths as [n_lo, n_hi].


@numba.njit(cache=True, nogil=True, inline="always")
def _push_max(heap, size, x):
    i = size
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] >= x:
            break
        heap[i] = heap[parent]
        i = parent
    heap[i] = x


@numba.njit(cache=True, nogil=True, inline="always")
def _push_min(heap, size, x):
    i = size
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] <= x:
            break
        heap[i] = heap[parent]
        i = parent
    heap[i] = x


@numba.njit(cache=True, nogil=True, inline="always")
def _replace_max(heap, size, x):
    # overwrite the root with x and restore order
    i = 0
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and heap[child + 1] > heap[child]:
            child += 1
        if heap[child] <= x:
            break
        heap[i] = heap[child]
        i = child
    heap[i] = x


@numba.njit(cache=True, nogil=True, inline="always")
def _replace_min(heap, size, x):
    i = 0
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and heap[child + 1] < heap[child]:
            child += 1
        if heap[child] >= x:
            break
        heap[i] = heap[child]
        i = child
    heap[i] = x


@numba.njit(cache=True, nogil=True)
def pair_add(lo, hi, sizes, x):
    """Insert ``x`` keeping ``n_hi <= n_lo <= n_hi + 1``."""
    n_lo = sizes[0]
    n_hi = sizes[1]
    if n_lo == 0:
        lo[0] = x
        sizes[0] = 1
    elif n_lo > n_hi:
        # hi must grow: it receives x or, if x belongs low, lo's top
        if x < lo[0]:
            _push_min(hi, n_hi, lo[0])
            _replace_max(lo, n_lo, x)
        else:
            _push_min(hi, n_hi, x)
        sizes[1] = n_hi + 1
    else:
        # lo must grow: it receives x or, if x belongs high, hi's top
        if n_hi > 0 and x > hi[0]:
            _push_max(lo, n_lo, hi[0])
            _replace_min(hi, n_hi, x)
        else:
            _push_max(lo, n_lo, x)
        sizes[0] = n_lo + 1


@numba.njit(cache=True, nogil=True)
def pair_median(lo, hi, sizes):
    if sizes[0] > sizes[1]:
        return lo[0]
    return (lo[0] + hi[0]) / 2.0


def new_pair_arrays(capacity: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return np.empty(capacity), np.empty(capacity), np.zeros(2, dtype=np.int64)
