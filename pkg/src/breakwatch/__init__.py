"""Robust breakout detection for time series."""

__version__ = "0.1.0"

from .baseline import SmootherSpec, edivisive_detect, smooth
from .core import (
    BreakoutReport,
    DetectionConfig,
    TimeSeries,
    read_series_csv,
    scale_to_unit,
    validate_series,
    write_series_csv,
)
from .edm import Detection, edm_detect
from .edmx import edmx_detect
from .energy import e_hat, q_hat
from .errors import BreakwatchError
from .evalkit import EvalOutcome, SynthSpec, score, synthesize, ttd
from .intervaltree import IntervalTree
from .medianheap import MedianHeapPair
from .robuststat import RobustDivergenceSpec, e_tilde_exact, e_tilde_windowed, q_tilde
from .sigtest import PermutationResult, detect, permutation_test

__all__ = [
    "BreakoutReport", "BreakwatchError", "Detection", "DetectionConfig", "EvalOutcome",
    "IntervalTree", "MedianHeapPair", "PermutationResult", "RobustDivergenceSpec",
    "SmootherSpec", "SynthSpec", "TimeSeries", "detect", "e_hat", "e_tilde_exact",
    "e_tilde_windowed", "edivisive_detect", "edm_detect", "edmx_detect", "permutation_test",
    "q_hat", "q_tilde", "read_series_csv", "scale_to_unit", "score", "smooth", "synthesize",
    "ttd", "validate_series", "write_series_csv",
]
