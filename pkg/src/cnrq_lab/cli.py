import argparse
import sys

import pandas as pd
import yaml

from cnrq_lab.config.config import load_config
from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.config.presets import EnvironmentPreset
from cnrq_lab.errors import CnrqError, ConfigError, MismatchedConfigs, UnknownQuantity
from cnrq_lab.harness.compare import compare_runs, load_summaries
from cnrq_lab.harness.plot_series import emit_plot_series
from cnrq_lab.harness.runner import run_experiment
from cnrq_lab.harness.sweep import run_sweep
from cnrq_lab.oracle.report import oracle_report

logger = configure_logging(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _seed_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from exc


def _value_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cnrq-lab",
        description="Constrained no-regret Q-learning experiments on stochastic games",
    )
    verbs = parser.add_subparsers(dest="command", required=True)

    run = verbs.add_parser("run", help="Run a seeded experiment from a YAML config")
    run.add_argument("--config", required=True, help="Experiment config (YAML)")
    run.add_argument("--seed-override", type=_seed_list, help="Comma-separated seeds replacing run.seeds")
    run.add_argument("--iterations", type=int, help="Replace run.iterations")
    run.add_argument("--workers", type=int, help="Seeds run on a process pool of this size")
    run.add_argument("--out", help="Output directory (default: output.dir, $CNRQ_OUTPUT_DIR, or runs)")

    compare = verbs.add_parser("compare", help="Tabulate welfare and constraint violations of finished runs")
    compare.add_argument("summaries", nargs="+", help="summary.yaml files")
    compare.add_argument("--tolerance", type=float, default=0.0, help="Allowed tail cost excess over the bound")
    compare.add_argument("--out", help="Also write the table as CSV")

    plot = verbs.add_parser("plot-series", help="Emit an (iteration, value) series from a metrics file")
    plot.add_argument("--metrics", required=True, help="Metrics CSV of one seed")
    plot.add_argument("--quantity", required=True, help="Metrics column, e.g. social_welfare or cost_0")
    plot.add_argument("--window", type=int, default=1, help="Centered moving-average window")
    plot.add_argument("--out", help="Series CSV (default: next to the metrics file)")

    sweep = verbs.add_parser("sweep", help="Repeat an experiment over values of one environment parameter")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--param", required=True, help="Environment parameter, e.g. arrival_rate")
    sweep.add_argument("--values", required=True, type=_value_list, help="Comma-separated values")
    sweep.add_argument("--out", help="Output directory")
    sweep.add_argument("--tolerance", type=float, default=0.0)

    oracle = verbs.add_parser("oracle", help="Exact Q-values and selected CEs of a small preset")
    oracle.add_argument("--preset", required=True, help=f"One of {EnvironmentPreset.available()}")
    oracle.add_argument("--out", help="Report path (YAML); stdout when omitted")
    return parser


def cmd_run(args: argparse.Namespace) -> None:
    config = load_config(args.config).with_overrides(
        seeds=args.seed_override, iterations=args.iterations, out=args.out, workers=args.workers
    )
    result = run_experiment(config)
    print(f"Summary: {result.summary_path}")
    print(f"Mean tail social welfare: {result.summary['mean_tail_social_welfare']:.4f}")


def cmd_compare(args: argparse.Namespace) -> None:
    table = compare_runs(load_summaries(args.summaries), tolerance=args.tolerance)
    print("=" * 80)
    with pd.option_context("display.max_columns", None, "display.width", 200):
        print(table.to_string(index=False))
    print("=" * 80)
    if args.out:
        table.to_csv(args.out, index=False)
        logger.info(f"Comparison written to {args.out}")


def cmd_plot_series(args: argparse.Namespace) -> None:
    out = args.out or f"{args.metrics.removesuffix('.csv')}.{args.quantity}.csv"
    series = emit_plot_series(args.metrics, args.quantity, args.window, out)
    print(f"{len(series)} points written to {out}")


def cmd_sweep(args: argparse.Namespace) -> None:
    config = load_config(args.config)
    table = run_sweep(config, args.param, args.values, args.out, tolerance=args.tolerance)
    print("=" * 80)
    print(table.to_string(index=False))
    print("=" * 80)


def cmd_oracle(args: argparse.Namespace) -> None:
    game = EnvironmentPreset(args.preset).build()
    report = yaml.safe_dump(oracle_report(game), sort_keys=False)
    if args.out:
        with open(args.out, "w") as f:
            f.write(report)
        logger.info(f"Oracle report written to {args.out}")
    else:
        print(report)


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "plot-series": cmd_plot_series,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ConfigError, MismatchedConfigs, UnknownQuantity) as exc:
        logger.error(f"{args.command}: {exc}")
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CnrqError, OSError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
