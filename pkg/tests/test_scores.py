import math

import numpy as np
import pytest

from autocp.conformal.scores import (
    HeadValues,
    PredictionInterval,
    conformal_quantile,
    invert_score,
    resolve_crossings,
    score,
)
from autocp.models.pipeline import EstimatorChoice, EstimatorKind


@pytest.mark.parametrize(
    "alpha, expected",
    [(0.1, 9.0), (0.5, 5.0), (0.2, 8.0)],
)
def test_conformal_quantile_picks_kth_largest(alpha, expected):
    assert conformal_quantile(np.arange(1.0, 10.0), alpha) == expected


def test_conformal_quantile_is_infinite_with_too_few_scores():
    assert conformal_quantile(np.arange(5.0), 0.1) == math.inf


def test_conformal_quantile_ignores_order(rng):
    scores = rng.exponential(size=101)
    assert conformal_quantile(scores, 0.1) == conformal_quantile(rng.permutation(scores), 0.1)


def test_conformal_quantile_tolerates_exact_products():
    # (99 + 1) * 0.1 must floor to 10, not 9
    scores = np.arange(1.0, 100.0)
    assert conformal_quantile(scores, 0.1) == 90.0


def test_conformal_quantile_validates_inputs():
    with pytest.raises(ValueError):
        conformal_quantile(np.array([]), 0.1)
    with pytest.raises(ValueError):
        conformal_quantile(np.ones(3), 1.0)


def test_scores_of_each_estimator():
    heads = HeadValues(mean=2.0, mad=0.5, q_lo=1.0, q_hi=3.0)
    assert score(EstimatorKind.MEAN_RESIDUAL, heads, 3.5) == pytest.approx(1.5)
    assert score("locally_weighted", heads, 3.5) == pytest.approx(3.0)
    assert score(EstimatorChoice(kind=EstimatorKind.CQR), heads, 3.5) == pytest.approx(0.5)
    assert score(EstimatorKind.CQR, heads, 2.0) == pytest.approx(-1.0)


def test_invert_score_recovers_the_score_level_set():
    heads = HeadValues(mean=2.0, mad=0.5, q_lo=1.0, q_hi=3.0)
    assert invert_score(EstimatorKind.MEAN_RESIDUAL, heads, 1.0) == PredictionInterval(1.0, 3.0)
    assert invert_score(EstimatorKind.LOCALLY_WEIGHTED, heads, 2.0) == PredictionInterval(1.0, 3.0)
    assert invert_score(EstimatorKind.CQR, heads, 0.5) == PredictionInterval(0.5, 3.5)
    for kind in EstimatorKind:
        for y in (0.9, 1.75, 3.1):
            interval = invert_score(kind, heads, 0.6)
            assert interval.contains(y) == (score(kind, heads, y) <= 0.6 + 1e-12)


def test_negative_cqr_quantile_gives_an_empty_interval():
    interval = invert_score(EstimatorKind.CQR, HeadValues(q_lo=0.0, q_hi=1.0), -1.0)
    assert interval.empty
    assert interval.lower == interval.upper == 0.5
    assert interval.length == 0.0
    assert not interval.contains(0.5)


def test_infinite_quantile_gives_the_whole_line():
    interval = invert_score(EstimatorKind.MEAN_RESIDUAL, HeadValues(mean=0.0), math.inf)
    assert interval.infinite
    assert interval.contains(1e300)


def test_resolve_crossings_is_pointwise():
    lower, upper, empty = resolve_crossings(np.array([0.0, 2.0]), np.array([1.0, 1.0]))
    assert empty.tolist() == [False, True]
    assert lower.tolist() == [0.0, 1.5]
    assert upper.tolist() == [1.0, 1.5]
