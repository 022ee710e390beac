"""
Command-line entry point: ``autocp-cli {bench,gain,cate,plotdata}``.
"""

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from loguru import logger

from autocp.cate.combine import cate_pipeline
from autocp.cli.benchmark import (
    emit_plot_data,
    gain_table,
    load_cate_frame,
    run_benchmark,
    run_comparison,
    run_source_of_gain,
)
from autocp.cli.presets import PRESETS, resolve_pipeline
from autocp.cli.reports import read_report, report_dir, summary_frame, write_table
from autocp.exceptions import ConfigError
from autocp.models.pipeline import ModelId
from autocp.models.schemas import RunConfig
from autocp.utils.config_loader import ConfigLoader


def configure_logging(level: Optional[str] = None) -> None:
    load_dotenv()
    level = (level or os.getenv("AUTOCP_LOG_LEVEL") or "INFO").upper()
    logger.remove()
    logger.add(sys.stderr, level=level)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run configuration; flags override its values")
    parser.add_argument("--data", help="CSV dataset path")
    parser.add_argument("--target", help="Label column (default: last column)")
    parser.add_argument("--synthetic", help="Built-in generator used when --data is not given")
    parser.add_argument("--n-samples", type=int, help="Rows drawn from the synthetic generator")
    parser.add_argument("--alpha", type=float, help="Miscoverage rate (default 0.1)")
    parser.add_argument("--splits", type=int, help="Random train/test splits (default 20)")
    parser.add_argument("--train-frac", type=float, help="Share of rows in each training split (default 0.8)")
    parser.add_argument("--seed", type=int, help="Master seed (default 0)")
    parser.add_argument("--budget", type=int, help="Search iterations after initialisation (default 60)")
    parser.add_argument("--jobs", type=int, help="Concurrent splits (default 1)")
    parser.add_argument("--preset", choices=list(PRESETS), help="Run a fixed baseline pipeline instead of searching")
    parser.add_argument("--out", help="Output directory (default runs)")
    parser.add_argument(
        "--original-units", action="store_true", default=None, help="Report lengths in original label units"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autocp-cli", description="Automated conformal prediction benchmarks")
    parser.add_argument("--log-level", help="Log level (default: AUTOCP_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="Search (or run a preset) over random splits")
    _add_run_flags(bench)
    bench.add_argument("--compare", action="store_true", help="Also run the baseline presets and write a comparison table")
    bench.add_argument("--baselines", nargs="+", choices=list(PRESETS), help="Presets used by --compare (default all)")

    gain = sub.add_parser("gain", help="Source-of-gain: full search against restricted searches")
    _add_run_flags(gain)
    gain.add_argument(
        "--fixed-model",
        choices=[m.value for m in ModelId if m != ModelId.CONSTANT],
        default=ModelId.MLP.value,
        help="Model family of the Estimator+Cal variant (default mlp)",
    )

    cate = sub.add_parser("cate", help="Per-arm intervals combined into treatment-effect intervals")
    _add_run_flags(cate)
    cate.add_argument("--treatment", help="Binary treatment column (default t)")
    cate.add_argument("--y0", help="Counterfactual control outcome column")
    cate.add_argument("--y1", help="Counterfactual treated outcome column")

    plot = sub.add_parser("plotdata", help="Normalised mean lengths from written reports")
    plot.add_argument("reports", nargs="+", help="Report directories written by bench")
    plot.add_argument("--out", default="runs", help="Output directory (default runs)")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    overrides: Dict[str, Any] = {
        "data.path": args.data,
        "data.target": args.target,
        "data.synthetic": args.synthetic,
        "data.n_samples": args.n_samples,
        "data.treatment": getattr(args, "treatment", None),
        "data.y0": getattr(args, "y0", None),
        "data.y1": getattr(args, "y1", None),
        "alpha": args.alpha,
        "splits": args.splits,
        "train_frac": args.train_frac,
        "seed": args.seed,
        "budget.n_iter": args.budget,
        "jobs": args.jobs,
        "preset": args.preset,
        "out_dir": args.out,
        "original_units": args.original_units,
    }
    return ConfigLoader.load_run_config(args.config, overrides)


def _emit(record: Dict[str, Any]) -> None:
    print(json.dumps(record, sort_keys=True, default=str))


def command_bench(args: argparse.Namespace) -> None:
    config = load_config(args)
    if args.compare:
        baselines = args.baselines or list(PRESETS)
        autocp, reports, table = run_comparison(config, baselines=baselines)
        path = write_table(table, Path(config.out_dir) / autocp.dataset / "comparison.csv")
        _emit({"report": str(report_dir(config.out_dir, autocp)), "comparison": str(path)})
        return
    report = run_benchmark(config)
    _emit({"report": str(report_dir(config.out_dir, report)), "aggregate": report.aggregate.model_dump()})


def command_gain(args: argparse.Namespace) -> None:
    config = load_config(args)
    reports = run_source_of_gain(config, fixed_model=ModelId(args.fixed_model))
    dataset = reports[0].dataset
    out = Path(config.out_dir) / dataset
    write_table(summary_frame(reports), out / "source_of_gain_summary.csv")
    path = write_table(gain_table(reports), out / "source_of_gain.csv")
    _emit({"table": str(path), "lengths": {r.algorithm: r.aggregate.mean_length for r in reports}})


def command_cate(args: argparse.Namespace) -> None:
    config = load_config(args)
    frame = load_cate_frame(config)
    result = cate_pipeline(
        frame,
        config.alpha,
        config,
        treatment=config.data.treatment or "t",
        target=config.data.target or "y",
        y0=config.data.y0,
        y1=config.data.y1,
        pipeline=resolve_pipeline(config),
    )
    out = Path(config.out_dir) / config.name
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "cate_report.json"
    report_path.write_text(result.report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote effect report to {report_path}")
    _emit({"report": str(report_path), "cate_coverage": result.report.cate_coverage, "mean_length": result.report.mean_length})


def command_plotdata(args: argparse.Namespace) -> None:
    reports = [read_report(directory) for directory in args.reports]
    path = write_table(emit_plot_data(reports), Path(args.out) / "plot_data.csv")
    _emit({"plot_data": str(path)})


COMMANDS = {
    "bench": command_bench,
    "gain": command_gain,
    "cate": command_cate,
    "plotdata": command_plotdata,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        _emit({"error": type(e).__name__, "message": str(e)})
        return 2
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        _emit({"error": type(e).__name__, "message": str(e)})
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
