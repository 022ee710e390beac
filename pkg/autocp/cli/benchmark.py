"""
Benchmark protocols: repeated random splits, source-of-gain restrictions,
normalised-length plot data and the AutoCP-versus-baselines table.
"""

import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from loguru import logger

from autocp.cli.presets import PRESETS, algorithm_name, resolve_pipeline
from autocp.cli.reports import write_report
from autocp.conformal.calibration import fit_predictor
from autocp.conformal.diagnostics import coverage, mean_length
from autocp.data.dataset import Dataset, SplitPlan, load_csv, make_splits, normalize
from autocp.data.synthetic import BENCHMARK_REGIMES, make_gaussian, make_heteroscedastic, make_regime, make_two_arm
from autocp.exceptions import ConfigError, DatasetError
from autocp.models.pipeline import EstimatorKind, ModelId, PipelineSpec
from autocp.models.response_models import RunReport, SplitRecord
from autocp.models.schemas import RunConfig, SearchSpaceConfig
from autocp.search.optimizer import run_autocp
from autocp.utils.seeding import derive_seed

SYNTHETIC_GENERATORS: Dict[str, Callable[[int, int], Dataset]] = {
    "gaussian": lambda n, seed: make_gaussian(n, seed=seed),
    "heteroscedastic": lambda n, seed: make_heteroscedastic(n, seed=seed)[0],
    **{name: (lambda n, seed, name=name: make_regime(name, n, seed)) for name in BENCHMARK_REGIMES},
}


def load_dataset(config: RunConfig) -> Dataset:
    """
    The raw dataset a run is configured for: a CSV file, else a built-in generator.

    Raises:
        ConfigError: If neither a path nor a known generator is configured
    """
    data = config.data
    if data.path:
        drop = [c for c in (data.treatment, data.y0, data.y1) if c] + list(data.drop_columns)
        return load_csv(data.path, data.target, drop)
    if data.synthetic:
        generator = SYNTHETIC_GENERATORS.get(data.synthetic)
        if generator is None:
            raise ConfigError(
                f"Unknown synthetic dataset: {data.synthetic}. "
                f"Available: {', '.join(SYNTHETIC_GENERATORS.keys())}"
            )
        return generator(data.n_samples, config.seed)
    raise ConfigError("No dataset configured: give a CSV path (--data) or a synthetic generator (--synthetic)")


def load_cate_frame(config: RunConfig) -> pd.DataFrame:
    """Two-arm data for the cate protocol: a CSV file or the built-in two-arm generator."""
    data = config.data
    if data.path:
        try:
            return pd.read_csv(data.path)
        except FileNotFoundError as e:
            logger.error(f"Dataset file not found: {data.path}")
            raise DatasetError(f"Dataset file not found: {data.path}") from e
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
            logger.error(f"Cannot parse {data.path}: {e}")
            raise DatasetError(f"Cannot parse {data.path}: {e}") from e
    if data.synthetic in ("two_arm", "two_arm_zero"):
        effect = "zero" if data.synthetic == "two_arm_zero" else "heterogeneous"
        return make_two_arm(data.n_samples, effect=effect, seed=config.seed)
    raise ConfigError("cate needs a CSV path (--data) or --synthetic two_arm / two_arm_zero")


def run_split(
    dataset: Dataset,
    plan: SplitPlan,
    index: int,
    config: RunConfig,
    pipeline: Optional[PipelineSpec],
) -> SplitRecord:
    """Fit on one split's training rows (searching unless ``pipeline`` is fixed) and score its test rows."""
    start = time.perf_counter()
    normalized = normalize(dataset, plan.train_indices, config.data.label_scaling)
    X_train, y_train = normalized.features[plan.train_indices], normalized.labels[plan.train_indices]
    X_test, y_test = normalized.features[plan.test_indices], normalized.labels[plan.test_indices]

    n_evaluations = 0
    if pipeline is not None:
        predictor = fit_predictor(X_train, y_train, pipeline, config.alpha, derive_seed(plan.seed, 1))
    else:
        budget = config.budget.model_copy(update={"seed": derive_seed(plan.seed, 1)})
        result = run_autocp(X_train, y_train, config.alpha, budget, config.search)
        predictor = result.predictor
        n_evaluations = len(result.history)

    lower, upper, empty = predictor.predict_intervals(X_test)
    split_coverage = coverage(y_test, lower, upper, empty)
    split_length = mean_length(lower, upper, empty)
    if config.original_units:
        split_length = normalized.to_original_units(split_length)
    if not np.isfinite(split_length):
        logger.warning(f"Split {index}: {predictor.spec.label()} produced infinite intervals")

    record = SplitRecord(
        split_index=index,
        split_seed=plan.seed,
        n_train=plan.train_indices.size,
        n_test=plan.test_indices.size,
        coverage=split_coverage,
        mean_length=split_length,
        spec=predictor.spec,
        wall_seconds=round(time.perf_counter() - start, 3),
        n_evaluations=n_evaluations,
    )
    logger.info(f"Split {index}: coverage {split_coverage:.3f}, length {split_length:.4f} with {predictor.spec.label()}")
    return record


def run_benchmark(
    config: RunConfig,
    dataset: Optional[Dataset] = None,
    write: bool = True,
    algorithm: Optional[str] = None,
) -> RunReport:
    """
    Repeat fit-and-test over ``config.splits`` random train/test splits.

    Splits run concurrently up to ``config.jobs``; the report is assembled in
    split-index order, so it does not depend on completion order.
    """
    dataset = dataset if dataset is not None else load_dataset(config)
    pipeline = resolve_pipeline(config)
    algorithm = algorithm or algorithm_name(config)
    plans = make_splits(dataset.n, config.splits, config.train_frac, config.seed)
    logger.info(f"Running {algorithm} on {dataset.name}: {len(plans)} splits at alpha={config.alpha}")

    records = Parallel(n_jobs=config.jobs)(
        delayed(run_split)(dataset, plan, index, config, pipeline) for index, plan in enumerate(plans)
    )
    report = RunReport.from_splits(
        name=config.name,
        dataset=dataset.name,
        algorithm=algorithm,
        alpha=config.alpha,
        splits=records,
        length_units="original" if config.original_units else "normalized",
    )
    aggregate = report.aggregate
    logger.info(
        f"{algorithm} on {dataset.name}: coverage {aggregate.mean_coverage:.3f} ± {aggregate.std_coverage:.3f}, "
        f"length {aggregate.mean_length:.4f} ± {aggregate.std_length:.4f}"
    )
    if write:
        write_report(report, config.out_dir)
    return report


def _restricted(config: RunConfig, **update) -> RunConfig:
    search = SearchSpaceConfig.model_validate({**config.search.model_dump(), **update})
    return config.model_copy(update={"search": search, "preset": None, "pipeline": None})


def run_source_of_gain(
    config: RunConfig,
    dataset: Optional[Dataset] = None,
    fixed_model: ModelId = ModelId.MLP,
    write: bool = True,
) -> List[RunReport]:
    """
    Full search against two restricted searches on the same splits.

    "Model+Cal" fixes the estimator to CQR; "Estimator+Cal" fixes the model
    family to ``fixed_model`` (its hyperparameters are still searched).

    Returns:
        Reports in the order Model+Cal, Estimator+Cal, AutoCP
    """
    dataset = dataset if dataset is not None else load_dataset(config)
    variants = [
        ("Model+Cal", _restricted(config, estimators=[EstimatorKind.CQR])),
        ("Estimator+Cal", _restricted(config, models=[fixed_model])),
        ("AutoCP", _restricted(config)),
    ]
    return [run_benchmark(variant, dataset, write=write, algorithm=name) for name, variant in variants]


def gain_table(reports: Sequence[RunReport]) -> pd.DataFrame:
    """One row per dataset with a mean ± std length column per variant."""
    rows: Dict[str, Dict[str, str]] = {}
    for report in reports:
        aggregate = report.aggregate
        rows.setdefault(report.dataset, {"dataset": report.dataset})[report.algorithm] = (
            f"{aggregate.mean_length:.4f} ± {aggregate.std_length:.4f}"
        )
    return pd.DataFrame(list(rows.values()))


def emit_plot_data(reports: Sequence[RunReport]) -> pd.DataFrame:
    """
    Mean lengths divided by the worst (largest) mean length on each dataset.

    Raises:
        ValueError: If no reports are given, an algorithm appears twice on a
            dataset, the datasets cover different algorithms, or a dataset's
            worst length is not positive and finite
    """
    if not reports:
        raise ValueError("emit_plot_data needs at least one report")
    frame = pd.DataFrame(
        [{"dataset": r.dataset, "algorithm": r.algorithm, "mean_length": r.aggregate.mean_length} for r in reports]
    )
    if frame.duplicated(["dataset", "algorithm"]).any():
        raise ValueError("Each algorithm may appear only once per dataset")
    algorithms = {name: frozenset(group["algorithm"]) for name, group in frame.groupby("dataset", sort=False)}
    if len(set(algorithms.values())) > 1:
        detail = "; ".join(f"{d}: {', '.join(sorted(a))}" for d, a in algorithms.items())
        raise ValueError(f"Reports cover different algorithms across datasets ({detail})")

    worst = frame.groupby("dataset", sort=False)["mean_length"].transform("max")
    if not (np.all(np.isfinite(worst)) and np.all(worst > 0)):
        raise ValueError("Worst mean length per dataset must be positive and finite to normalise")
    frame["normalized_length"] = frame["mean_length"] / worst
    return frame


def emit_comparison_table(autocp: RunReport, baselines: Sequence[RunReport]) -> pd.DataFrame:
    """
    AutoCP next to the best and worst baseline by mean length, with the
    percentage length decrease of AutoCP against each.

    Raises:
        ValueError: If there are no baselines or they are on another dataset
    """
    if not baselines:
        raise ValueError("emit_comparison_table needs at least one baseline report")
    others = sorted({b.dataset for b in baselines} - {autocp.dataset})
    if others:
        raise ValueError(f"Baselines on {', '.join(others)} do not match AutoCP's dataset {autocp.dataset}")

    ranked = sorted(baselines, key=lambda r: r.aggregate.mean_length)
    rows = []
    for role, report in (("autocp", autocp), ("best_benchmark", ranked[0]), ("worst_benchmark", ranked[-1])):
        aggregate = report.aggregate
        decrease = None
        if role != "autocp":
            decrease = 100.0 * (1.0 - autocp.aggregate.mean_length / aggregate.mean_length)
        rows.append(
            {
                "dataset": autocp.dataset,
                "role": role,
                "algorithm": report.algorithm,
                **aggregate.model_dump(),
                "length_decrease_pct": decrease,
            }
        )
    return pd.DataFrame(rows)


def run_comparison(
    config: RunConfig,
    dataset: Optional[Dataset] = None,
    baselines: Sequence[str] = tuple(PRESETS),
    write: bool = True,
) -> Tuple[RunReport, List[RunReport], pd.DataFrame]:
    """AutoCP and each named preset on the same splits, plus the comparison table."""
    dataset = dataset if dataset is not None else load_dataset(config)
    for name in baselines:
        resolve_pipeline(config.model_copy(update={"preset": name, "pipeline": None}))
    autocp = run_benchmark(config.model_copy(update={"preset": None, "pipeline": None}), dataset, write=write)
    reports = [
        run_benchmark(config.model_copy(update={"preset": name, "pipeline": None}), dataset, write=write)
        for name in baselines
    ]
    return autocp, reports, emit_comparison_table(autocp, reports)
