import math

import numpy as np

from autocp.conformal.diagnostics import binned_coverage, coverage, interval_lengths, length_correlation, mean_length


def test_empty_intervals_never_cover_and_have_zero_length():
    y = np.array([0.0, 1.0, 2.0, 3.0])
    lower = np.array([-1.0, 0.5, 2.0, 3.5])
    upper = np.array([1.0, 0.5, 2.5, 4.0])
    empty = np.array([False, False, True, False])
    assert coverage(y, lower, upper) == 0.5
    assert coverage(y, lower, upper, empty) == 0.25
    assert interval_lengths(lower, upper, empty).tolist() == [2.0, 0.0, 0.0, 0.5]
    assert mean_length(lower, upper, empty) == 0.625


def test_length_correlation_is_undefined_for_constant_lengths():
    assert math.isnan(length_correlation(np.ones(5), np.arange(5.0)))
    assert np.isclose(length_correlation(2 * np.arange(5.0) + 1, np.arange(5.0)), 1.0)


def test_binned_coverage_reports_each_quantile_bin():
    by = np.arange(100.0)
    y = np.zeros(100)
    lower = np.where(by < 50, -1.0, 1.0)
    upper = lower + 2.0
    table = binned_coverage(y, lower, upper, by, n_bins=4)
    assert table["bin"].tolist() == [0, 1, 2, 3]
    assert table["n"].tolist() == [25, 25, 25, 25]
    assert table["coverage"].tolist() == [1.0, 1.0, 0.0, 0.0]
    assert np.allclose(table["mean_length"], 2.0)
