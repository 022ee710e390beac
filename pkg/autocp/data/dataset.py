"""
Dataset ingestion, normalisation and reproducible splitting.
"""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from autocp.exceptions import DatasetError
from autocp.utils.seeding import derive_seed

LabelScaling = Literal["mean_abs", "std"]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Dataset:
    """
    Feature matrix, label vector and the normalisation state that produced them.

    ``label_scale`` and ``label_shift`` map normalised labels back to the
    original units: ``original = label * label_scale + label_shift``.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...]
    label_scale: float = 1.0
    label_shift: float = 0.0
    name: str = "dataset"
    target_name: str = "y"

    def __post_init__(self):
        features = _frozen(self.features)
        labels = _frozen(self.labels).ravel()
        if features.ndim != 2:
            raise DatasetError(f"Features must be a matrix, got shape {features.shape}")
        n, d = features.shape
        if n < 2 or d < 1:
            raise DatasetError(f"Dataset needs n >= 2 and d >= 1, got n={n}, d={d}")
        if labels.shape[0] != n:
            raise DatasetError(f"{n} feature rows but {labels.shape[0]} labels")
        if len(self.feature_names) != d:
            raise DatasetError(f"{d} feature columns but {len(self.feature_names)} names")
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(labels))):
            raise DatasetError("Dataset contains missing or non-finite values")
        if not self.label_scale > 0:
            raise DatasetError(f"label_scale must be positive, got {self.label_scale}")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @classmethod
    def from_arrays(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        feature_names: Optional[Sequence[str]] = None,
        name: str = "dataset",
    ) -> "Dataset":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        names = feature_names or [f"x{j}" for j in range(X.shape[1])]
        return cls(features=X, labels=np.asarray(y, dtype=float), feature_names=tuple(names), name=name)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """Rows ``indices`` of this dataset, normalisation state unchanged."""
        idx = np.asarray(indices, dtype=int)
        return replace(self, features=self.features[idx], labels=self.labels[idx])

    def to_original_units(self, lengths: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Rescale interval lengths (differences of labels) to original label units."""
        values = np.asarray(lengths, dtype=float) * self.label_scale
        return float(values) if values.ndim == 0 else values


def load_csv(
    path: Union[str, Path],
    target: Optional[str] = None,
    drop_columns: Optional[Sequence[str]] = None,
) -> Dataset:
    """
    Load a numeric CSV file into a raw (unnormalised) Dataset.

    Args:
        path: Path to a CSV file with a header row
        target: Name of the label column; defaults to the last column
        drop_columns: Columns to ignore (e.g. treatment or counterfactual columns)

    Returns:
        Dataset with rows in file order

    Raises:
        DatasetError: If the file is missing, a used cell is non-numeric, the
            target is missing on some row, or fewer than 2 complete rows remain
    """
    path = Path(path)
    if not path.exists():
        logger.error(f"Dataset file not found: {path}")
        raise DatasetError(f"Dataset file not found: {path}")

    try:
        frame = pd.read_csv(path, encoding="utf-8", dtype=str, keep_default_na=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        logger.error(f"Cannot parse {path}: {e}")
        raise DatasetError(f"Cannot parse {path}: {e}") from e
    if frame.shape[1] < 2:
        raise DatasetError(f"{path} needs a target column and at least one feature column")

    target = target or frame.columns[-1]
    if target not in frame.columns:
        raise DatasetError(f"Target column '{target}' not in {path}; columns: {', '.join(frame.columns)}")

    dropped = set(drop_columns or [])
    feature_cols = [c for c in frame.columns if c != target and c not in dropped]
    if not feature_cols:
        raise DatasetError(f"{path} has no feature columns besides '{target}'")

    numeric = {}
    for col in [*feature_cols, target]:
        numeric[col] = _parse_numeric_column(frame[col], col, path)
    values = pd.DataFrame(numeric)

    missing_target = values[target].isna().to_numpy()
    if missing_target.any():
        row = int(np.flatnonzero(missing_target)[0])
        raise DatasetError(
            f"{path}: missing value in target column '{target}' at row {row + 1} (line {row + 2})"
        )

    complete = ~values[feature_cols].isna().any(axis=1).to_numpy()
    n_dropped = int((~complete).sum())
    if n_dropped:
        logger.warning(f"Dropped {n_dropped} rows with missing feature values from {path}")
    values = values[complete]

    if len(values) < 2:
        raise DatasetError(f"{path} has {len(values)} complete rows; at least 2 are required")

    logger.info(f"Loaded {len(values)} rows x {len(feature_cols)} features from {path}")
    return Dataset(
        features=values[feature_cols].to_numpy(dtype=float),
        labels=values[target].to_numpy(dtype=float),
        feature_names=tuple(feature_cols),
        name=path.stem,
        target_name=target,
    )


def _parse_numeric_column(column: pd.Series, name: str, path: Path) -> pd.Series:
    stripped = column.str.strip()
    is_missing = stripped.isin(["", "NA", "NaN", "nan", "N/A", "null", "NULL"])
    parsed = pd.to_numeric(stripped.where(~is_missing), errors="coerce")
    bad = parsed.isna() & ~is_missing
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DatasetError(
            f"{path}: non-numeric value '{column.iloc[row]}' in column '{name}' "
            f"at row {row + 1} (line {row + 2})"
        )
    return parsed


def normalize(
    dataset: Dataset,
    fit_on: Sequence[int],
    label_scaling: LabelScaling = "mean_abs",
) -> Dataset:
    """
    Standardise features and rescale labels using statistics of ``fit_on`` rows only.

    Args:
        dataset: Dataset to normalise
        fit_on: Row indices the statistics are computed from (typically the training split)
        label_scaling: "mean_abs" divides labels by mean |y|; "std" centres and
            divides by the sample standard deviation

    Returns:
        A new Dataset; its label_scale/label_shift compose with the input's

    Raises:
        DatasetError: If fit_on is empty or the label scale is zero
    """
    idx = np.asarray(fit_on, dtype=int)
    if idx.size == 0:
        raise DatasetError("normalize needs a non-empty fit_on index list")

    X_fit = dataset.features[idx]
    means = X_fit.mean(axis=0)
    if idx.size > 1:
        scales = X_fit.std(axis=0, ddof=1)
    else:
        scales = np.zeros(dataset.d)
    # constant columns keep scale 1
    scales = np.where(scales > 1e-12, scales, 1.0)
    features = (dataset.features - means) / scales

    y_fit = dataset.labels[idx]
    if label_scaling == "mean_abs":
        shift = 0.0
        scale = float(np.mean(np.abs(y_fit)))
    elif label_scaling == "std":
        shift = float(np.mean(y_fit))
        scale = float(np.std(y_fit, ddof=1)) if idx.size > 1 else 0.0
    else:
        raise DatasetError(f"Unknown label scaling: {label_scaling}. Available: mean_abs, std")
    if not scale > 0:
        raise DatasetError(f"Label scale is zero on the fit rows ({label_scaling}); cannot normalise labels")

    labels = (dataset.labels - shift) / scale
    return replace(
        dataset,
        features=features,
        labels=labels,
        label_scale=dataset.label_scale * scale,
        label_shift=dataset.label_shift + dataset.label_scale * shift,
    )


@dataclass(frozen=True)
class SplitPlan:
    """One random train/test partition of ``0..n-1``."""

    seed: int
    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self):
        for name in ("train_indices", "test_indices"):
            array = np.array(getattr(self, name), dtype=int, copy=True)
            array.setflags(write=False)
            object.__setattr__(self, name, array)


def make_splits(n: int, n_splits: int, fraction: float, seed: int) -> List[SplitPlan]:
    """
    Build ``n_splits`` uniformly random train/test partitions.

    Each plan draws its own permutation from a seed derived from ``seed`` and
    the plan index, so plans are reproducible individually.

    Args:
        n: Number of rows
        n_splits: Number of plans
        fraction: Training fraction in (0, 1); |train| = round(fraction * n)
        seed: Master seed

    Returns:
        List of SplitPlan with sorted index arrays
    """
    if n < 5:
        raise DatasetError(f"make_splits needs n >= 5, got {n}")
    if not 0.0 < fraction < 1.0:
        raise DatasetError(f"Training fraction must be in (0, 1), got {fraction}")
    if n_splits < 1:
        raise DatasetError(f"n_splits must be positive, got {n_splits}")

    n_train = int(np.floor(fraction * n + 0.5))
    n_train = min(max(n_train, 1), n - 1)

    plans = []
    for i in range(n_splits):
        plan_seed = derive_seed(seed, i)
        perm = np.random.default_rng(plan_seed).permutation(n)
        plans.append(
            SplitPlan(
                seed=plan_seed,
                train_indices=np.sort(perm[:n_train]),
                test_indices=np.sort(perm[n_train:]),
            )
        )
    logger.debug(f"Built {n_splits} splits of {n} rows ({n_train} train each)")
    return plans
