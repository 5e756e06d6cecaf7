"""Counting tree over ``[0, 1]`` for O(D) approximate medians.

The tree is complete with ``2**D`` leaves; leaf ``i`` (1-based) covers
``[(i-1)/2**D, i/2**D)`` and the last leaf is closed at 1.  Nodes are stored
in a flat array with the root at index 1 and children of ``k`` at ``2k`` and
``2k + 1``, so a leaf for bin ``b`` (0-based) sits at ``2**D + b``.

The median query targets the ``K = ceil(total / 2)``-th smallest value.  It
walks down comparing the left child's count with ``K``: go left when the
count exceeds ``K``, otherwise subtract it and go right.  When the left
count equals ``K`` and the right sibling is non-empty the two middle order
statistics straddle the split, and the count-weighted average of the two
child midpoints is returned.  If the right sibling is empty the walk simply
continues left, which keeps leaf-terminated answers within one leaf width
of the true order statistic.
"""

from __future__ import annotations

import numba
import numpy as np

from .errors import EmptyTree, OutOfRange, Underflow


@numba.njit(cache=True, nogil=True, inline="always")
def leaf_node(x, depth):
    width = 1 << depth
    b = int(x * width)
    if b >= width:
        b = width - 1
    return width + b


# Kernels take a 2-D ``counts`` array and a row index so several trees can
# share one allocation.


@numba.njit(cache=True, nogil=True)
def tree_update(counts, row, depth, x, step):
    """Add ``step`` (+1 or -1) along the path to the leaf holding ``x``.

    Returns False, leaving the tree untouched, if a removal would underflow.
    """
    node = leaf_node(x, depth)
    if step < 0 and counts[row, node] < -step:
        return False
    while node >= 1:
        counts[row, node] += step
        node >>= 1
    return True


@numba.njit(cache=True, nogil=True)
def tree_median(counts, row, depth):
    k = (counts[row, 1] + 1) // 2
    node = 1
    lo = 0.0
    width = 1.0
    while node < (1 << depth):
        left = 2 * node
        a = counts[row, left]
        half = width * 0.5
        if a > k or (a == k and counts[row, left + 1] == 0):
            node = left
        elif a == k:
            b = counts[row, left + 1]
            x = lo + half * 0.5
            y = lo + half * 1.5
            return (a * x + b * y) / (a + b)
        else:
            k -= a
            node = left + 1
            lo += half
        width = half
    return lo + width * 0.5


class IntervalTree:
    """Counting binary tree supporting insert, remove and approximate median.

    >>> t = IntervalTree(2)
    >>> t.insert(0.3)
    >>> t.approximate_median()
    0.375
    """

    def __init__(self, depth: int = 10) -> None:
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        self.depth = int(depth)
        self._store = np.zeros((1, 2 << self.depth), dtype=np.int64)

    @property
    def counts(self) -> np.ndarray:
        """Node counts; index 0 is unused, the root is index 1."""
        return self._store[0]

    @property
    def total(self) -> int:
        return int(self._store[0, 1])

    @property
    def leaf_counts(self) -> np.ndarray:
        return self._store[0, 1 << self.depth :]

    def _check(self, x: float) -> float:
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise OutOfRange(f"{x!r} is outside [0, 1]")
        return x

    def insert(self, x: float) -> None:
        tree_update(self._store, 0, self.depth, self._check(x), 1)

    def remove(self, x: float) -> None:
        if not tree_update(self._store, 0, self.depth, self._check(x), -1):
            raise Underflow(f"no stored value in the leaf containing {x!r}")

    def approximate_median(self) -> float:
        if self.total == 0:
            raise EmptyTree("approximate median of an empty tree")
        return float(tree_median(self._store, 0, self.depth))

    def leaf_interval(self, x: float) -> tuple[float, float]:
        """Bounds of the leaf bin that ``x`` falls in."""
        b = leaf_node(self._check(x), self.depth) - (1 << self.depth)
        w = 1.0 / (1 << self.depth)
        return b * w, (b + 1) * w

    def audit(self) -> bool:
        """True when every internal count equals the sum of its children."""
        internal = np.arange(1, 1 << self.depth)
        return bool(
            np.all(self.counts[internal] == self.counts[2 * internal] + self.counts[2 * internal + 1])
            and np.all(self.counts[1:] >= 0)
        )
