import numpy as np
import pytest
from conftest import make_spec, stub_record

from autocp import AutoCP, BudgetConfig, SearchSpaceConfig
from autocp.exceptions import SearchError
from autocp.models.pipeline import CalibrationMethod, EstimatorKind, ModelId
from autocp.utils.callbacks import SearchCallbacks, SearchEvent
from autocp.utils.observers.search_summary_observer import SearchSummaryObserver

TINY_BUDGET = BudgetConfig(n_init=2, n_iter=2, n_candidates=32, n_local=4, hyper_restarts=1, hyper_steps=10, seed=1)
SPLIT_ONLY = SearchSpaceConfig(
    models=[ModelId.CONSTANT, ModelId.RIDGE],
    estimators=[EstimatorKind.MEAN_RESIDUAL],
    calibrations=[CalibrationMethod.SPLIT],
)


def test_unfitted_wrapper_refuses_to_predict(gaussian_xy):
    X, _ = gaussian_xy
    model = AutoCP()
    with pytest.raises(SearchError, match="not fitted"):
        model.predict_intervals(X)
    assert model.history == []
    with pytest.raises(ValueError):
        AutoCP(alpha=0.0)


def test_fit_pipeline_skips_the_search(gaussian_xy):
    X, y = gaussian_xy
    model = AutoCP(alpha=0.2).fit_pipeline(X[:300], y[:300], make_spec())
    assert model.best_spec == make_spec()
    assert model.history == []
    interval = model.predict_interval(X[300])
    assert interval.lower < model.predict_mean(X[300:301])[0] < interval.upper


def test_fit_searches_and_predicts(gaussian_xy):
    X, y = gaussian_xy
    model = AutoCP(alpha=0.1, budget=TINY_BUDGET, search=SPLIT_ONLY).fit(X[:300], y[:300])
    assert len(model.history) == 6
    assert model.best_spec.model_id == ModelId.RIDGE
    lower, upper, empty = model.predict_intervals(X[300:])
    assert lower.shape == (100,) and not empty.any()
    summary = model.observer.get_summary()
    assert summary["evaluations"] == 6
    assert summary["search_duration"] is not None


def test_user_callbacks_keep_firing_with_the_summary(gaussian_xy):
    X, y = gaussian_xy
    seen = []
    callbacks = SearchCallbacks()
    callbacks.register_callback(SearchEvent.EVALUATION, lambda data: seen.append(data["index"]))
    AutoCP(budget=TINY_BUDGET, search=SPLIT_ONLY, callbacks=callbacks).fit(X[:300], y[:300])
    assert seen == list(range(6))


def test_summary_observer_counts_flagged_records(ridge_spec, constant_spec):
    callbacks = SearchCallbacks()
    observer = SearchSummaryObserver()
    observer.attach(callbacks)
    callbacks.emit(SearchEvent.SEARCH_STARTED, {"models": ["ridge", "constant"], "budget": {}})
    records = [
        stub_record(ridge_spec, 2.0),
        stub_record(ridge_spec, 1.5),
        stub_record(constant_spec, 30.0, flagged=True),
        stub_record(constant_spec, 3.0),
    ]
    for index, record in enumerate(records):
        callbacks.emit(SearchEvent.EVALUATION, {"record": record, "index": index})
    callbacks.emit(SearchEvent.SEARCH_COMPLETED, {"best": records[1], "history": records})

    summary = observer.get_summary()
    assert summary["evaluations"] == 4
    assert summary["flagged"] == 1
    assert summary["best_length_per_model"] == {"ridge": 1.5, "constant": 3.0}
    assert summary["search_duration"] >= 0.0


def test_summary_observer_resets_on_a_new_search(ridge_spec):
    callbacks = SearchCallbacks()
    observer = SearchSummaryObserver()
    observer.attach(callbacks)
    callbacks.emit(SearchEvent.EVALUATION, {"record": stub_record(ridge_spec, 1.0), "index": 0})
    callbacks.emit(SearchEvent.SEARCH_STARTED, {"models": ["ridge"], "budget": {}})
    assert observer.get_summary()["evaluations"] == 0
    assert np.isinf(min(observer.get_summary()["best_length_per_model"].values(), default=np.inf))
