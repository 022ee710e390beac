from dataclasses import replace

import numpy as np
import pytest
from conftest import make_spec
from scipy import stats

from autocp.exceptions import GPNumericalError
from autocp.gp import (
    AdditiveKernelParams,
    BlockParams,
    PipelineEncoding,
    decode,
    encode,
    gp_fit,
    gp_posterior,
    gp_predict_raw,
    joint_log_marginal,
    joint_log_marginal_and_grad,
    kernel_eval,
    optimize_hyperparams,
)
from autocp.gp.process import _factorize, refit_states
from autocp.models.pipeline import (
    CalibrationMethod,
    EstimatorKind,
    ForestParams,
    ModelId,
    RidgeParams,
)


def _ridge_specs():
    return [
        make_spec(RidgeParams(lam=1e-3)),
        make_spec(RidgeParams(lam=0.1), EstimatorKind.LOCALLY_WEIGHTED),
        make_spec(RidgeParams(lam=10.0), EstimatorKind.CQR, CalibrationMethod.KFOLD, 4),
        make_spec(RidgeParams(lam=300.0), method=CalibrationMethod.BOOTSTRAP, size=30),
        make_spec(RidgeParams(lam=2.0), EstimatorKind.CQR, CalibrationMethod.KFOLD, 9),
    ]


def _forest_specs():
    return [
        make_spec(ForestParams(n_trees=50, max_depth=4, min_leaf=2, feature_frac=0.5)),
        make_spec(ForestParams(n_trees=300, max_depth=12, min_leaf=10, feature_frac=0.9), EstimatorKind.CQR),
        make_spec(ForestParams(n_trees=120, max_depth=6, min_leaf=5), method=CalibrationMethod.KFOLD, size=3),
    ]


@pytest.fixture
def params():
    return AdditiveKernelParams(
        models={
            ModelId.RIDGE: BlockParams(1.3, (0.4,)),
            ModelId.FOREST: BlockParams(0.8, (0.3, 0.6, 0.9, 1.2)),
        },
        estimator_variance=0.4,
        calibration_variance=0.7,
        size_lengthscale=0.35,
        noise_variance=0.05,
    )


def test_kernel_examples(params):
    base = encode(make_spec(RidgeParams(lam=1.0)))
    assert kernel_eval(params, base, base) == pytest.approx(1.3 + 0.4 + 0.7)

    other_estimator = encode(make_spec(RidgeParams(lam=1.0), EstimatorKind.CQR))
    assert kernel_eval(params, base, other_estimator) == pytest.approx(1.3 + 0.7)

    other_method = encode(make_spec(RidgeParams(lam=1.0), method=CalibrationMethod.KFOLD, size=5))
    assert kernel_eval(params, base, other_method) == pytest.approx(1.3 + 0.4)

    folds_a = encode(make_spec(method=CalibrationMethod.KFOLD, size=2))
    folds_b = encode(make_spec(method=CalibrationMethod.KFOLD, size=10))
    assert kernel_eval(params, folds_a, folds_b) == pytest.approx(
        1.3 + 0.4 + 0.7 * np.exp(-0.5 * (1.0 / 0.35) ** 2)
    )


def test_kernel_rejects_mixed_families(params):
    with pytest.raises(ValueError, match="Cannot compare"):
        kernel_eval(params, encode(_ridge_specs()[0]), encode(_forest_specs()[0]))


def test_encoding_layout_and_decoding():
    spec = make_spec(
        ForestParams(n_trees=200, max_depth=7, min_leaf=3, feature_frac=0.55),
        EstimatorKind.LOCALLY_WEIGHTED,
        CalibrationMethod.BOOTSTRAP,
        25,
    )
    encoding = encode(spec)
    assert encoding.vector.shape == (4 + 7,)
    assert np.all((encoding.vector >= 0) & (encoding.vector <= 1))
    assert PipelineEncoding.from_vector(ModelId.FOREST, encoding.vector).model_id == ModelId.FOREST

    decoded = decode(encoding)
    assert decoded.estimator == spec.estimator
    assert decoded.calibration == spec.calibration
    assert decoded.model.n_trees == 200 and decoded.model.max_depth == 7 and decoded.model.min_leaf == 3
    assert decoded.model.feature_frac == pytest.approx(0.55)

    lam = decode(encode(make_spec(RidgeParams(lam=0.37)))).model.lam
    assert lam == pytest.approx(0.37)


def test_posterior_matches_dense_oracle(params):
    specs = _ridge_specs()
    encodings = [encode(s) for s in specs]
    targets = np.array([1.2, 0.7, 2.5, 1.9, 0.4])
    state = gp_fit(encodings, targets, params)

    K = np.array([[kernel_eval(params, a, b) for b in encodings] for a in encodings])
    K += params.noise_variance * np.eye(len(specs))
    standardized = (targets - targets.mean()) / targets.std()

    query = encode(make_spec(RidgeParams(lam=5.0), EstimatorKind.LOCALLY_WEIGHTED, CalibrationMethod.KFOLD, 6))
    k_star = np.array([kernel_eval(params, query, e) for e in encodings])
    expected_mean = k_star @ np.linalg.solve(K, standardized)
    expected_var = kernel_eval(params, query, query) - k_star @ np.linalg.solve(K, k_star)

    mean, variance = gp_posterior(state, query)
    assert mean == pytest.approx(expected_mean, rel=1e-8)
    assert variance == pytest.approx(expected_var, rel=1e-8)

    expected_loglik = stats.multivariate_normal(mean=np.zeros(len(specs)), cov=K).logpdf(standardized)
    assert state.log_marginal == pytest.approx(expected_loglik, rel=1e-8)

    raw_mean, raw_std = gp_predict_raw(state, query.vector[None, :])
    assert raw_mean[0] == pytest.approx(targets.mean() + targets.std() * expected_mean, rel=1e-8)
    assert raw_std[0] == pytest.approx(targets.std() * np.sqrt(expected_var), rel=1e-8)


def test_log_marginal_gradient_matches_finite_differences(params):
    model_ids = [ModelId.RIDGE, ModelId.FOREST]
    states = [
        gp_fit([encode(s) for s in _ridge_specs()], np.array([1.2, 0.7, 2.5, 1.9, 0.4]), params),
        gp_fit([encode(s) for s in _forest_specs()], np.array([0.3, 0.9, 0.5]), params),
    ]
    theta = params.to_log_vector(model_ids)
    value, grad = joint_log_marginal_and_grad(theta, states, model_ids)
    assert value == pytest.approx(joint_log_marginal(states), rel=1e-10)

    h = 1e-6
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = h
        upper = joint_log_marginal_and_grad(theta + step, states, model_ids)[0]
        lower = joint_log_marginal_and_grad(theta - step, states, model_ids)[0]
        numeric[i] = (upper - lower) / (2 * h)
    assert np.allclose(grad, numeric, rtol=1e-4, atol=1e-6)


def test_duplicate_inputs_still_fit(params):
    encoding = encode(_ridge_specs()[0])
    state = gp_fit([encoding] * 4, np.array([1.0, 1.1, 0.9, 1.0]), params.with_noise(1e-4))
    _, variance = gp_posterior(state, encoding)
    assert variance >= 0.0


def test_factorize_adds_jitter_then_gives_up():
    _, jitter = _factorize(np.ones((2, 2)))
    assert jitter == pytest.approx(1e-8)
    with pytest.raises(GPNumericalError, match="condition number"):
        _factorize(np.diag([1.0, -1.0]))


def test_gp_fit_validates_inputs(params):
    encodings = [encode(s) for s in _ridge_specs()[:2]]
    with pytest.raises(ValueError):
        gp_fit(encodings, np.array([1.0]), params)
    with pytest.raises(ValueError, match="share a model family"):
        gp_fit([encode(_ridge_specs()[0]), encode(_forest_specs()[0])], np.array([1.0, 2.0]), params)
    with pytest.raises(ValueError, match="noise_variance"):
        gp_fit(encodings, np.array([1.0, 2.0]), params.with_noise(1e-9))


def test_constant_targets_are_not_rescaled(params):
    state = gp_fit([encode(s) for s in _ridge_specs()[:3]], np.full(3, 2.0), params)
    assert state.target_std == 1.0
    assert np.allclose(state.targets, 0.0)


def test_optimizer_never_returns_a_worse_fit():
    incumbent = AdditiveKernelParams.default([ModelId.RIDGE, ModelId.FOREST])
    states = [
        gp_fit([encode(s) for s in _ridge_specs()], np.array([1.2, 0.7, 2.5, 1.9, 0.4]), incumbent),
        gp_fit([encode(s) for s in _forest_specs()], np.array([0.3, 0.9, 0.5]), incumbent),
    ]
    fitted = optimize_hyperparams(states, incumbent, restarts=3, steps=50, seed=1)
    assert joint_log_marginal(refit_states(states, fitted)) >= joint_log_marginal(states) - 1e-8

    again = optimize_hyperparams(states, incumbent, restarts=3, steps=50, seed=1)
    assert again == fitted


def test_optimizer_needs_two_observations():
    params = AdditiveKernelParams.default([ModelId.RIDGE])
    state = gp_fit([encode(_ridge_specs()[0])], np.array([1.0]), params)
    with pytest.raises(ValueError, match="at least 2 observations"):
        optimize_hyperparams([state], params)


def test_posterior_reverts_to_the_prior_far_from_the_data(params):
    sharp = replace(params, models={ModelId.RIDGE: BlockParams(1.3, (0.05,))})
    train = [encode(make_spec(RidgeParams(lam=lam))) for lam in (1e-4, 3e-4, 1e-3)]
    state = gp_fit(train, np.array([0.4, 1.1, 0.9]), sharp)
    far = encode(make_spec(RidgeParams(lam=1e3), EstimatorKind.CQR, CalibrationMethod.KFOLD, 5))
    assert all(kernel_eval(sharp, far, e) < 1e-12 for e in train)

    mean, variance = gp_posterior(state, far)
    assert mean == pytest.approx(0.0, abs=1e-10)
    assert variance == pytest.approx(sharp.total_variance(ModelId.RIDGE), abs=1e-10)


def test_nearly_noiseless_fit_interpolates_its_observations(params):
    quiet = params.with_noise(1e-8)
    single = encode(_ridge_specs()[0])
    state = gp_fit([single], np.array([1.7]), quiet)
    raw_mean, _ = gp_predict_raw(state, single.vector[None, :])
    assert raw_mean[0] == pytest.approx(1.7, abs=1e-8)
    assert gp_posterior(state, single)[1] <= 1e-8 * (1 + 1e-6)

    pair = [encode(s) for s in _ridge_specs()[:2]]
    state = gp_fit(pair, np.array([1.0, 3.0]), quiet)
    raw_mean, _ = gp_predict_raw(state, np.vstack([e.vector for e in pair]))
    assert np.allclose(raw_mean, [1.0, 3.0], atol=1e-6)


def test_single_observation_log_marginal_closed_form(params):
    encoding = encode(_ridge_specs()[0])
    state = gp_fit([encoding], np.array([4.2]), params)
    total = kernel_eval(params, encoding, encoding) + params.noise_variance
    # a single standardised target is 0, so only the log-determinant term remains
    assert state.log_marginal == pytest.approx(-0.5 * np.log(2 * np.pi * total), rel=1e-12)
    assert joint_log_marginal([state]) == state.log_marginal


def test_joint_log_marginal_adds_identical_models(params):
    specs = _ridge_specs()
    targets = np.array([1.2, 0.7, 2.5, 1.9, 0.4])
    first = gp_fit([encode(s) for s in specs], targets, params)
    second = gp_fit([encode(s) for s in specs], targets, params)
    assert joint_log_marginal([first, second]) == pytest.approx(2 * first.log_marginal, rel=1e-12)
