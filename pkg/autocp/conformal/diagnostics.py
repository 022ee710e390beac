"""
Coverage and discrimination diagnostics for interval predictions.
"""

from typing import Optional

import numpy as np
import pandas as pd
from scipy import stats


def coverage(
    y: np.ndarray, lower: np.ndarray, upper: np.ndarray, empty: Optional[np.ndarray] = None
) -> float:
    """Fraction of labels inside their interval; empty intervals never cover."""
    y = np.asarray(y, dtype=float)
    covered = (lower <= y) & (y <= upper)
    if empty is not None:
        covered &= ~np.asarray(empty, dtype=bool)
    return float(np.mean(covered))


def interval_lengths(lower: np.ndarray, upper: np.ndarray, empty: Optional[np.ndarray] = None) -> np.ndarray:
    lengths = np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)
    if empty is not None:
        lengths = np.where(empty, 0.0, lengths)
    return lengths


def mean_length(lower: np.ndarray, upper: np.ndarray, empty: Optional[np.ndarray] = None) -> float:
    return float(np.mean(interval_lengths(lower, upper, empty)))


def length_correlation(lengths: np.ndarray, reference: np.ndarray) -> float:
    """
    Pearson correlation between interval lengths and a reference scale.

    Returns NaN when either input is constant (correlation undefined).
    """
    lengths = np.asarray(lengths, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if np.ptp(lengths) == 0 or np.ptp(reference) == 0:
        return float("nan")
    return float(stats.pearsonr(lengths, reference)[0])


def binned_coverage(
    y: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    by: np.ndarray,
    n_bins: int = 5,
    empty: Optional[np.ndarray] = None,
) -> pd.DataFrame:
    """
    Coverage and mean length within quantile bins of ``by``.

    Marginally valid intervals can still under-cover inside some bins; this
    table shows how far coverage drifts conditionally.

    Returns:
        DataFrame with columns bin, n, coverage, mean_length
    """
    y = np.asarray(y, dtype=float)
    empty = np.zeros(y.shape[0], dtype=bool) if empty is None else np.asarray(empty, dtype=bool)
    frame = pd.DataFrame({
        "covered": (lower <= y) & (y <= upper) & ~empty,
        "length": interval_lengths(lower, upper, empty),
        "bin": pd.qcut(np.asarray(by, dtype=float), q=n_bins, labels=False, duplicates="drop"),
    })
    table = frame.groupby("bin").agg(
        n=("covered", "size"), coverage=("covered", "mean"), mean_length=("length", "mean")
    )
    return table.reset_index()
