"""Permutation test for a detected breakout.

The detector is run on the observed series and on ``R`` random shuffles of
its values.  The approximate p-value is the fraction of shuffled statistics
at least as large as the observed one, out of ``R + 1``::

    p = #{r : q_r >= q_obs} / (R + 1)

Replica ``r`` draws its shuffle from a generator keyed on ``(seed, r)``, so
replicas may run in any order, or concurrently, and the result is the same.
Set ``BREAKWATCH_THREADS`` to run replicas on a thread pool; the compiled
detector kernels release the GIL.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .baseline import edivisive_with_config
from .core import METHODS, BreakoutReport, DetectionConfig, TimeSeries, validate_series
from .edm import Detection, edm_detect
from .edmx import edmx_detect
from .errors import InvalidConfig

Detector = Callable[[TimeSeries, DetectionConfig], Detection]

DETECTORS: dict[str, Detector] = {
    "edm": edm_detect,
    "edmx": edmx_detect,
    "edivisive": edivisive_with_config,
}


@dataclass(frozen=True)
class PermutationResult:
    q_observed: float
    q_permuted: tuple[float, ...]
    p_value: float
    R: int
    seed: int
    detection: Detection | None = None

    @property
    def exceedances(self) -> int:
        return sum(q >= self.q_observed for q in self.q_permuted)


def p_value(q_observed: float, q_permuted, R: int) -> float:
    """``#{q >= q_observed} / (R + 1)``.

    >>> p_value(1.0, [2.0, 0.5, 1.0], 199)
    0.01
    """
    hits = sum(1 for q in q_permuted if q >= q_observed)
    return hits / (R + 1)


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    """Generator for one replica, independent of every other replica."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replica,))))


def shuffled(values: np.ndarray, seed: int, replica: int) -> np.ndarray:
    out = replica_rng(seed, replica).permutation(values)
    # a permutation must be a rearrangement of the original values
    if not np.array_equal(np.sort(out), np.sort(values)):
        raise AssertionError(f"replica {replica} is not a rearrangement of the series")
    return out


def worker_count() -> int:
    raw = os.environ.get("BREAKWATCH_THREADS", "").strip()
    if not raw:
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise InvalidConfig(f"BREAKWATCH_THREADS must be a positive integer, got {raw!r}") from None
    if count < 1:
        raise InvalidConfig(f"BREAKWATCH_THREADS must be a positive integer, got {raw!r}")
    return count


def _resolve(detector: str | Detector) -> tuple[str | None, Detector]:
    if callable(detector):
        return None, detector
    if detector not in DETECTORS:
        raise InvalidConfig(f"unknown method {detector!r}; choose from {', '.join(METHODS)}")
    return detector, DETECTORS[detector]


def permutation_test(
    series: TimeSeries | np.ndarray,
    detector: str | Detector,
    config: DetectionConfig = DetectionConfig(),
    early_stop: bool = False,
    workers: int | None = None,
) -> PermutationResult:
    """Run ``detector`` on the series and on ``config.permutations`` shuffles.

    ``early_stop`` is accepted only for the E-Divisive baseline.  Replicas
    are then evaluated in order and the loop ends once the exceedance count
    already puts ``p`` at or above the significance level; the statistics
    computed so far are returned and the decision is the same as a full run.
    """
    series = validate_series(series)
    name, run = _resolve(detector)
    if early_stop and name != "edivisive":
        raise InvalidConfig("early_stop is only available for the edivisive baseline")
    R = config.permutations
    seed = config.rng_seed
    observed = run(series, config)
    q_obs = observed.statistic
    values = series.values

    def replica(r: int) -> float:
        return run(series.with_values(shuffled(values, seed, r)), config).statistic

    if early_stop:
        limit = config.significance_level * (R + 1)
        q_perm: list[float] = []
        hits = 0
        for r in range(R):
            q = replica(r)
            q_perm.append(q)
            hits += q >= q_obs
            if hits >= limit:
                break
    else:
        workers = worker_count() if workers is None else workers
        if workers > 1 and R > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                q_perm = list(pool.map(replica, range(R)))
        else:
            q_perm = [replica(r) for r in range(R)]
    return PermutationResult(
        q_observed=q_obs,
        q_permuted=tuple(q_perm),
        p_value=p_value(q_obs, q_perm, R),
        R=R,
        seed=seed,
        detection=observed,
    )


def detect(
    series: TimeSeries | np.ndarray,
    config: DetectionConfig = DetectionConfig(),
    method: str = "edm",
    early_stop: bool = False,
) -> BreakoutReport:
    """Locate the breakout with ``method`` and attach its permutation p-value."""
    result = permutation_test(series, method, config, early_stop=early_stop)
    det = result.detection
    return BreakoutReport(
        tau_hat=det.tau,
        kappa_hat=det.kappa,
        statistic=det.statistic,
        p_value=result.p_value,
        significant=result.p_value < config.significance_level,
        method=method,
        significance_level=config.significance_level,
    )
