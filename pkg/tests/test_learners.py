import numpy as np
import pytest

from autocp.exceptions import BackendUnavailableError, HeadUnavailableError
from autocp.learners import EPS_SIGMA, Head, create_learner, fit_mad, fit_mean, fit_quantiles, predict
from autocp.learners.constant import ConstantLearner
from autocp.learners.forest import ForestLearner, weighted_quantiles
from autocp.models.pipeline import ConstantParams, ForestParams, MLPParams, ModelId, RidgeParams
from autocp.utils.backend_utils import OPTIONAL_BACKENDS, OptionalBackend, import_backend, missing_backends


def test_ridge_mean_head_recovers_linear_function():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 3))
    y = X @ np.array([2.0, -1.0, 0.5]) + 1.0
    model = fit_mean(RidgeParams(lam=1e-4), X, y)
    assert np.allclose(predict(model, Head.MEAN, X), y, atol=1e-3)


def test_predict_accepts_a_single_row(gaussian_xy):
    X, y = gaussian_xy
    model = fit_mean(RidgeParams(), X, y)
    single = predict(model, "mean", X[0])
    assert single.shape == (1,)
    assert single[0] == pytest.approx(predict(model, Head.MEAN, X[:1])[0])


def test_missing_head_names_the_available_heads(gaussian_xy):
    X, y = gaussian_xy
    model = fit_mean(RidgeParams(), X, y)
    with pytest.raises(HeadUnavailableError, match="available: mean"):
        predict(model, Head.QUANTILE, X)
    quantile_model = fit_quantiles(ConstantParams(), X, y, alpha=0.1)
    with pytest.raises(HeadUnavailableError, match="needs a model with a fitted mean head"):
        fit_mad(quantile_model, X, y)


def test_predict_validates_input(gaussian_xy):
    X, y = gaussian_xy
    model = fit_mean(RidgeParams(), X, y)
    with pytest.raises(ValueError, match="expects 3 features"):
        predict(model, Head.MEAN, X[:, :2])
    bad = X[:2].copy()
    bad[0, 0] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        predict(model, Head.MEAN, bad)


def test_mad_head_is_floored_on_constant_labels():
    X = np.arange(20.0)[:, None]
    y = np.full(20, 3.0)
    model = fit_mad(fit_mean(ConstantParams(), X, y), X, y)
    assert np.all(predict(model, Head.MAD, X) == EPS_SIGMA)


def test_constant_learner_heads():
    X = np.zeros((10, 2))
    y = np.arange(10.0)
    model = fit_mad(fit_mean(ConstantParams(), X, y), X, y)
    assert np.allclose(predict(model, Head.MEAN, X), 4.5)
    assert np.allclose(predict(model, Head.MAD, X), np.mean(np.abs(y - 4.5)))
    lower, upper = predict(fit_quantiles(ConstantParams(), X, y, alpha=0.25), Head.QUANTILE, X)
    assert np.all(lower == 1.0) and np.all(upper == 8.0)


def test_forest_is_reproducible_for_a_seed(gaussian_xy):
    X, y = gaussian_xy
    params = ForestParams(n_trees=20, max_depth=5, min_leaf=3, feature_frac=0.7)
    first = predict(fit_mean(params, X, y, seed=5), Head.MEAN, X[:10])
    second = predict(fit_mean(params, X, y, seed=5), Head.MEAN, X[:10])
    other = predict(fit_mean(params, X, y, seed=6), Head.MEAN, X[:10])
    assert np.array_equal(first, second)
    assert not np.array_equal(first, other)


def test_forest_quantiles_bracket_the_labels(hetero_data):
    X, y, _ = hetero_data
    params = ForestParams(n_trees=30, max_depth=6, min_leaf=10)
    lower, upper = predict(fit_quantiles(params, X, y, alpha=0.1, seed=1), Head.QUANTILE, X)
    assert np.all(lower <= upper)
    inside = np.mean((lower <= y) & (y <= upper))
    assert 0.8 < inside <= 1.0


def test_forest_leaf_weights_are_distributions(gaussian_xy):
    X, y = gaussian_xy
    learner = ForestLearner(n_trees=10, max_depth=4, min_leaf=5, seed=2)
    state = learner.fit_quantile_pair(X, y, (0.05, 0.95))
    weights = learner.leaf_weights(state, X[:7])
    assert weights.shape == (7, X.shape[0])
    assert np.allclose(weights.sum(axis=1), 1.0)
    assert np.all(weights >= 0)


def test_weighted_quantiles_with_uniform_weights():
    values = np.arange(1.0, 11.0)
    weights = np.full((1, 10), 0.1)
    assert weighted_quantiles(values, weights, 0.5)[0] == 5.0
    assert weighted_quantiles(values, weights, 0.95)[0] == 10.0
    assert weighted_quantiles(values, weights, 0.01)[0] == 1.0


def test_create_learner_maps_families():
    assert isinstance(create_learner(ConstantParams()), ConstantLearner)
    forest = create_learner(ForestParams(n_trees=12), seed=3)
    assert isinstance(forest, ForestLearner) and forest.n_trees == 12 and forest.seed == 3


def test_missing_backend_names_the_package_and_the_extra(monkeypatch):
    def no_torch(path):
        raise ModuleNotFoundError("No module named 'torch'", name="torch")

    monkeypatch.setattr("autocp.utils.backend_utils.import_module", no_torch)
    with pytest.raises(BackendUnavailableError, match=r"missing module 'torch'.*pip install autocp\[mlp\]") as excinfo:
        create_learner(MLPParams())
    assert isinstance(excinfo.value, ImportError)


def test_backend_without_the_learner_class_is_a_programming_error(monkeypatch):
    monkeypatch.setitem(
        OPTIONAL_BACKENDS, "mlp", OptionalBackend("numpy", "mlp", "autocp.learners.constant", "MLPLearner")
    )
    with pytest.raises(AttributeError, match="autocp.learners.constant does not define MLPLearner"):
        import_backend(ModelId.MLP)


def test_missing_backends_checks_only_optional_families(monkeypatch):
    monkeypatch.setattr("autocp.utils.backend_utils.find_spec", lambda name: None)
    assert missing_backends([ModelId.RIDGE, ModelId.MLP, "forest"]) == ["mlp"]


def test_mlp_learner_is_seeded(gaussian_xy):
    pytest.importorskip("torch")

    X, y = gaussian_xy
    params = MLPParams(hidden=16, layers=1, learning_rate=1e-2, epochs=50, weight_decay=1e-4)
    first = predict(fit_mean(params, X, y, seed=4), Head.MEAN, X[:5])
    second = predict(fit_mean(params, X, y, seed=4), Head.MEAN, X[:5])
    assert np.array_equal(first, second)
    lower, upper = predict(fit_quantiles(params, X, y, alpha=0.1, seed=4), Head.QUANTILE, X[:20])
    assert np.all(lower <= upper)


def _centred_normal_equations(X, y, lam):
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    return np.linalg.solve(Xc.T @ Xc + lam * np.eye(X.shape[1]), Xc.T @ yc), Xc, yc


def test_ridge_solves_the_penalised_normal_equations():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 4))
    y = X @ np.array([1.0, -2.0, 0.0, 0.5]) + rng.normal(scale=0.3, size=60) + 2.0
    state = fit_mean(RidgeParams(lam=0.7), X, y).mean_state

    expected, Xc, yc = _centred_normal_equations(X, y, 0.7)
    np.testing.assert_allclose(state.coef_, expected, rtol=0, atol=1e-8)
    assert state.intercept_ == pytest.approx(y.mean() - X.mean(axis=0) @ expected, abs=1e-8)
    gradient = -2 * Xc.T @ (yc - Xc @ state.coef_) + 2 * 0.7 * state.coef_
    assert np.linalg.norm(gradient) < 1e-8


def test_ridge_shrinks_as_the_penalty_grows(gaussian_xy):
    X, y = gaussian_xy
    norms = [np.linalg.norm(fit_mean(RidgeParams(lam=lam), X, y).mean_state.coef_) for lam in (1e-4, 1.0, 1e3)]
    assert norms[0] > norms[1] > norms[2]


def test_single_unbootstrapped_stump_reproduces_two_points():
    X = np.array([[0.0], [1.0]])
    y = np.array([0.0, 5.0])
    learner = ForestLearner(n_trees=1, max_depth=1, min_leaf=1, bootstrap=False, seed=0)
    assert predict(fit_mean(learner, X, y), Head.MEAN, X).tolist() == [0.0, 5.0]


def test_forest_predictions_stay_within_the_label_range(gaussian_xy, rng):
    X, y = gaussian_xy
    params = ForestParams(n_trees=25, max_depth=6, min_leaf=2, feature_frac=0.6)
    queries = rng.normal(scale=3.0, size=(200, X.shape[1]))
    mean = predict(fit_mean(params, X, y, seed=1), Head.MEAN, queries)
    lower, upper = predict(fit_quantiles(params, X, y, alpha=0.1, seed=1), Head.QUANTILE, queries)
    for values in (mean, lower, upper):
        assert np.all((y.min() <= values) & (values <= y.max()))


@pytest.mark.parametrize("params", [ConstantParams(), RidgeParams(lam=1e-4)], ids=["constant", "ridge"])
@pytest.mark.parametrize("alpha", [0.2, 0.5])
def test_featureless_quantile_head_minimises_the_pinball_loss(params, alpha):
    y = np.arange(1.0, 100.0)
    X = np.zeros((y.size, 1))

    def pinball(c, level):
        diff = y - c
        return np.sum(np.maximum(level * diff, (level - 1.0) * diff))

    oracle = [y[np.argmin([pinball(c, level) for c in y])] for level in (alpha / 2, 1 - alpha / 2)]
    lower, upper = predict(fit_quantiles(params, X, y, alpha=alpha), Head.QUANTILE, X[:1])
    assert abs(lower[0] - oracle[0]) <= 1.0
    assert abs(upper[0] - oracle[1]) <= 1.0


def test_mlp_backpropagation_matches_finite_differences(gaussian_xy):
    torch = pytest.importorskip("torch")
    from autocp.learners.mlp import MLPLearner, pinball_loss, squared_loss

    X, y = gaussian_xy
    inputs = torch.as_tensor(X[:40], dtype=torch.float64)
    learner = MLPLearner(hidden=8, layers=2, seed=9)
    rng = np.random.default_rng(0)
    for n_outputs, loss_fn in ((1, squared_loss), (2, pinball_loss((0.05, 0.95)))):
        network = learner.build_network(X.shape[1], n_outputs)
        targets = torch.as_tensor(np.repeat(y[:40, None], n_outputs, axis=1), dtype=torch.float64)
        network.zero_grad()
        loss_fn(network(inputs), targets).backward()

        parameters = list(network.parameters())
        h = 1e-6
        for _ in range(10):
            p = parameters[rng.integers(len(parameters))]
            i = int(rng.integers(p.numel()))
            flat = p.data.view(-1)
            with torch.no_grad():
                flat[i] += h
                upper = loss_fn(network(inputs), targets).item()
                flat[i] -= 2 * h
                lower = loss_fn(network(inputs), targets).item()
                flat[i] += h
            numeric = (upper - lower) / (2 * h)
            assert numeric == pytest.approx(p.grad.view(-1)[i].item(), rel=1e-4, abs=1e-7)
