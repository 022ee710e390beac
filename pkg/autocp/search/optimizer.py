"""
The AutoCP search loop: one GP per model family with shared estimator and
calibration kernels, expected-improvement proposals and cross-validated
length evaluations.
"""

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
from loguru import logger

from autocp.conformal.calibration import fit_predictor
from autocp.conformal.predictor import IntervalPredictor
from autocp.exceptions import GPNumericalError, SearchError
from autocp.gp.encoding import encode
from autocp.gp.kernel import AdditiveKernelParams
from autocp.gp.process import GPState, gp_fit, optimize_hyperparams, refit_states
from autocp.models.pipeline import ModelId, PipelineSpec
from autocp.models.response_models import EvaluationRecord
from autocp.models.schemas import BudgetConfig, SearchSpaceConfig
from autocp.search.acquisition import acquisition
from autocp.search.evaluation import Evaluator, evaluate_pipeline
from autocp.search.space import SearchSpace
from autocp.utils.callbacks import SearchCallbacks, SearchEvent
from autocp.utils.seeding import derive_seed, make_rng

MIN_TRAIN_ROWS = 40
MIN_COST_SECONDS_OBSERVED = 1e-3


@dataclass
class SearchResult:
    best: EvaluationRecord
    history: List[EvaluationRecord]
    predictor: Optional[IntervalPredictor] = None
    kernel_params: Optional[AdditiveKernelParams] = None
    proposals: List[Tuple[ModelId, float]] = field(default_factory=list)

    @property
    def running_best(self) -> List[float]:
        """Best unflagged mean length after each evaluation (inf before the first)."""
        best, out = math.inf, []
        for record in self.history:
            if not record.flagged:
                best = min(best, record.mean_length)
            out.append(best)
        return out


def fit_surrogates(
    history: List[EvaluationRecord],
    params: AdditiveKernelParams,
    models: List[ModelId],
    cost: bool = False,
) -> Dict[ModelId, GPState]:
    """
    One GP per model family over its observed pipelines.

    Length GPs use unflagged records only; cost GPs model log wall-seconds
    of every record.
    """
    grouped: Dict[ModelId, Tuple[list, list]] = {}
    for record in history:
        if record.spec.model_id not in models:
            continue
        if cost:
            target = math.log(max(record.wall_seconds, MIN_COST_SECONDS_OBSERVED))
        elif record.flagged:
            continue
        else:
            target = record.mean_length
        inputs, targets = grouped.setdefault(record.spec.model_id, ([], []))
        inputs.append(encode(record.spec))
        targets.append(target)
    return {m: gp_fit(inputs, targets, params) for m, (inputs, targets) in grouped.items()}


def _best_for(best_observed: Union[float, Mapping[ModelId, float]], model_id: ModelId) -> float:
    if isinstance(best_observed, Mapping):
        return best_observed[model_id]
    return float(best_observed)


def propose(
    states: Mapping[ModelId, GPState],
    best_observed: Union[float, Mapping[ModelId, float]],
    space: SearchSpace,
    budget: BudgetConfig,
    seed: int,
    incumbents: Optional[Mapping[ModelId, PipelineSpec]] = None,
    cost_states: Optional[Mapping[ModelId, GPState]] = None,
) -> Tuple[ModelId, PipelineSpec]:
    """
    Pick the next pipeline to evaluate.

    Per model family, expected improvement is maximised over
    ``budget.n_candidates`` scrambled Sobol candidates plus ``budget.n_local``
    perturbations of that family's incumbent. The family whose best candidate
    has the largest (cost-adjusted) acquisition wins; ties go to the family
    listed first in the search space.
    """
    incumbents = incumbents or {}
    cost_states = cost_states or {}
    winner: Optional[Tuple[ModelId, PipelineSpec, float]] = None

    for index, model_id in enumerate(space.models):
        state = states.get(model_id)
        if state is None:
            continue
        candidates = space.sobol_candidates(model_id, budget.n_candidates, derive_seed(seed, index))
        if model_id in incumbents and budget.n_local:
            rng = make_rng(seed, 1000 + index)
            candidates += space.perturb(incumbents[model_id], budget.n_local, rng)

        encoded = np.vstack([encode(spec).vector for spec in candidates])
        values = acquisition(state, encoded, _best_for(best_observed, model_id), cost_states.get(model_id))
        best_index = int(np.argmax(values))
        value = float(values[best_index])
        logger.debug(f"Best acquisition for {model_id.value}: {value:.6g} at {candidates[best_index].label()}")
        if winner is None or value > winner[2]:
            winner = (model_id, candidates[best_index], value)

    if winner is None:
        raise SearchError("No model family has a fitted surrogate to propose from")
    model_id, spec, _ = winner
    if not space.contains(spec):
        raise SearchError(f"Proposed pipeline {spec.label()} lies outside the configured search space")
    return model_id, spec


def _best_unflagged(history: List[EvaluationRecord]) -> Optional[EvaluationRecord]:
    unflagged = [r for r in history if not r.flagged]
    return min(unflagged, key=lambda r: r.mean_length) if unflagged else None


def _incumbents(history: List[EvaluationRecord]) -> Dict[ModelId, PipelineSpec]:
    best: Dict[ModelId, EvaluationRecord] = {}
    for record in history:
        if record.flagged:
            continue
        current = best.get(record.spec.model_id)
        if current is None or record.mean_length < current.mean_length:
            best[record.spec.model_id] = record
    return {m: r.spec for m, r in best.items()}


def _refit_kernel(
    states: Dict[ModelId, GPState], params: AdditiveKernelParams, budget: BudgetConfig, seed: int
) -> Tuple[Dict[ModelId, GPState], AdditiveKernelParams]:
    if sum(s.n for s in states.values()) < 2:
        return states, params
    params = optimize_hyperparams(
        list(states.values()), params, restarts=budget.hyper_restarts, steps=budget.hyper_steps, seed=seed
    )
    return dict(zip(states.keys(), refit_states(list(states.values()), params))), params


def run_autocp(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float,
    budget: Optional[BudgetConfig] = None,
    space_config: Optional[SearchSpaceConfig] = None,
    evaluator: Optional[Evaluator] = None,
    callbacks: Optional[SearchCallbacks] = None,
    jobs: int = 1,
    refit: bool = True,
) -> SearchResult:
    """
    Search the pipeline space for the shortest cross-validated intervals.

    Starts from ``budget.n_init`` random pipelines per model family, then
    runs ``budget.n_iter`` rounds of: fit the per-model GPs and their shared
    hyperparameters, propose by expected improvement, evaluate. The winner
    (argmin mean length over unflagged records) is refitted on all of
    (X, y) when ``refit`` is set.

    Args:
        X: Training features
        y: Training labels
        alpha: Miscoverage rate
        budget: Search budget and seed
        space_config: Search space restrictions
        evaluator: Replacement for ``evaluate_pipeline`` with its signature
        callbacks: Search event callbacks
        jobs: Concurrent folds per evaluation

    Raises:
        SearchError: If there are fewer than 40 rows or every evaluation is flagged
    """
    budget = budget or BudgetConfig()
    space = SearchSpace(space_config)
    space.require_backends()
    callbacks = callbacks or SearchCallbacks()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] < MIN_TRAIN_ROWS:
        raise SearchError(f"The search needs at least {MIN_TRAIN_ROWS} training rows, got {X.shape[0]}")

    evaluator = evaluator or partial(evaluate_pipeline, jobs=jobs)
    eval_seed = derive_seed(budget.seed, 1)
    rng = make_rng(budget.seed, 0)
    history: List[EvaluationRecord] = []
    proposals: List[Tuple[ModelId, float]] = []

    def run(spec: PipelineSpec) -> EvaluationRecord:
        record = evaluator(X, y, spec, alpha, budget.j_folds, eval_seed)
        history.append(record)
        callbacks.emit(SearchEvent.EVALUATION, {"record": record, "index": len(history) - 1})
        return record

    callbacks.emit(
        SearchEvent.SEARCH_STARTED,
        {"models": [m.value for m in space.models], "budget": budget.model_dump(), "n_train": X.shape[0]},
    )
    logger.info(
        f"Searching {', '.join(m.value for m in space.models)} with {budget.n_init} initial pipelines each "
        f"and {budget.n_iter} iterations"
    )

    for model_id in space.models:
        for _ in range(budget.n_init):
            run(space.sample(model_id, rng))

    params = AdditiveKernelParams.default(space.models)
    cost_params = AdditiveKernelParams.default(space.models)
    for iteration in range(budget.n_iter):
        spec = None
        try:
            states = fit_surrogates(history, params, space.models)
            states, params = _refit_kernel(states, params, budget, derive_seed(budget.seed, 2 + iteration))
            cost_states = None
            if budget.cost_aware:
                cost_states = fit_surrogates(history, cost_params, space.models, cost=True)
                cost_states, cost_params = _refit_kernel(
                    cost_states, cost_params, budget, derive_seed(budget.seed, 5000 + iteration)
                )
            best = _best_unflagged(history)
            if states and best is not None:
                model_id, spec = propose(
                    states,
                    best.mean_length,
                    space,
                    budget,
                    derive_seed(budget.seed, 10_000 + iteration),
                    _incumbents(history),
                    cost_states,
                )
                proposals.append((model_id, best.mean_length))
        except GPNumericalError as e:
            logger.warning(f"Surrogate failed at iteration {iteration} ({e}); sampling a random pipeline")
        if spec is None:
            spec = space.sample(space.models[int(rng.integers(len(space.models)))], rng)

        record = run(spec)
        best = _best_unflagged(history)
        callbacks.emit(
            SearchEvent.ITERATION,
            {"iteration": iteration, "record": record, "best_length": best.mean_length if best else math.inf},
        )

    best = _best_unflagged(history)
    if best is None:
        logger.error(f"All {len(history)} evaluations were flagged")
        raise SearchError(
            f"All {len(history)} evaluated pipelines were flagged; use more training data or a larger alpha"
        )

    predictor = None
    if refit:
        predictor = fit_predictor(X, y, best.spec, alpha, derive_seed(budget.seed, 3))
    result = SearchResult(best=best, history=history, predictor=predictor, kernel_params=params, proposals=proposals)
    logger.info(f"Best pipeline {best.spec.label()}: length {best.mean_length:.4f}, coverage {best.mean_coverage:.3f}")
    callbacks.emit(SearchEvent.SEARCH_COMPLETED, {"best": best, "history": history})
    return result
