"""
Report files: per-split JSON lines, a one-row CSV summary and a timings sidecar.

``records.jsonl`` and ``summary.csv`` hold only seed-determined values so
repeated runs produce identical bytes; wall-clock seconds go to
``timings.csv``.
"""

import json
import re
from pathlib import Path
from typing import List, Union

import pandas as pd
from loguru import logger

from autocp.exceptions import ConfigError
from autocp.models.response_models import SCHEMA_VERSION, RunReport, SplitRecord

RECORDS_FILE = "records.jsonl"
SUMMARY_FILE = "summary.csv"
TIMINGS_FILE = "timings.csv"

_HEADER_FIELDS = ("schema_version", "name", "dataset", "algorithm", "alpha", "length_units")


def report_dir(out_dir: Union[str, Path], report: RunReport) -> Path:
    slug = re.sub(r"[^A-Za-z0-9_.-]+", "_", report.algorithm).strip("_") or "run"
    return Path(out_dir) / report.dataset / slug


def _split_line(report: RunReport, split: SplitRecord) -> str:
    row = {field: getattr(report, field) for field in _HEADER_FIELDS}
    row.update(split.model_dump(mode="json", exclude={"wall_seconds"}))
    return json.dumps(row, sort_keys=True)


def summary_frame(reports: List[RunReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                **{field: getattr(report, field) for field in _HEADER_FIELDS},
                "n_splits": len(report.splits),
                **report.aggregate.model_dump(),
            }
            for report in reports
        ]
    )


def write_report(report: RunReport, out_dir: Union[str, Path]) -> Path:
    """
    Write a report's three files under ``out_dir/<dataset>/<algorithm>/``.

    Returns:
        The directory written to
    """
    directory = report_dir(out_dir, report)
    directory.mkdir(parents=True, exist_ok=True)

    lines = [_split_line(report, split) for split in sorted(report.splits, key=lambda s: s.split_index)]
    (directory / RECORDS_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")
    summary_frame([report]).to_csv(directory / SUMMARY_FILE, index=False, lineterminator="\n")
    pd.DataFrame(
        {"split_index": [s.split_index for s in report.splits], "wall_seconds": [s.wall_seconds for s in report.splits]}
    ).to_csv(directory / TIMINGS_FILE, index=False, lineterminator="\n")

    logger.info(f"Wrote {report.algorithm} report on {report.dataset} to {directory}")
    return directory


def read_report(directory: Union[str, Path]) -> RunReport:
    """
    Rebuild a RunReport from a directory written by ``write_report``.

    The aggregate is recomputed from the split rows; timings are merged back
    when the sidecar exists.

    Raises:
        ConfigError: If the records file is missing, empty or from another schema version
    """
    directory = Path(directory)
    path = directory / RECORDS_FILE
    if not path.exists():
        logger.error(f"Report records not found: {path}")
        raise ConfigError(f"Report records not found: {path}")

    rows = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not rows:
        raise ConfigError(f"Report records file is empty: {path}")
    version = rows[0].get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{path} has schema_version {version}; this version reads {SCHEMA_VERSION}")

    timings = {}
    if (directory / TIMINGS_FILE).exists():
        frame = pd.read_csv(directory / TIMINGS_FILE)
        timings = dict(zip(frame["split_index"].astype(int), frame["wall_seconds"].astype(float)))

    header = {field: rows[0][field] for field in _HEADER_FIELDS}
    splits = [
        SplitRecord(
            **{key: value for key, value in row.items() if key not in _HEADER_FIELDS},
            wall_seconds=timings.get(row["split_index"], 0.0),
        )
        for row in rows
    ]
    header.pop("schema_version")
    length_units = header.pop("length_units")
    return RunReport.from_splits(splits=splits, length_units=length_units, **header)


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path
