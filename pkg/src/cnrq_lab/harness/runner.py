"""Seeded experiment runs: one metrics CSV per seed plus a YAML summary.

Rows are logged for every iteration up to metrics.full_until, then every
metrics.every-th iteration, plus the first tail iteration and the last one.
Tail means of utility and cost are exact: they come from the tracker's
running sums at the start of the tail window, so they can be recomputed
from the logged running means of those two rows.
"""
import pathlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import ceil

import numpy as np

from cnrq_lab.config.config import ExperimentConfig
from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.core.metrics import metrics_columns
from cnrq_lab.harness.io import SUMMARY_FILE, metrics_path, write_metrics, write_summary
from cnrq_lab.learning import ALGORITHMS
from cnrq_lab.utils.utils import Stopwatch, should_log

logger = configure_logging(__name__)

LYAPUNOV_BLOCKS = 5
EARLY_ITERATION = 1000
INITIAL_STATE = 0


@dataclass(frozen=True)
class ExperimentResult:
    summary: dict
    summary_path: pathlib.Path
    metrics_paths: tuple[pathlib.Path, ...]


def tail_start(iterations: int, tail_fraction: float) -> int:
    """Last iteration before the tail window; the tail is (start, iterations]."""
    return iterations - max(1, ceil(tail_fraction * iterations))


def _floats(values) -> list[float]:
    return [float(v) for v in values]


def _block_means(values: np.ndarray, blocks: int) -> list[float]:
    if not len(values):
        return []
    return [float(np.mean(block)) if len(block) else float("nan") for block in np.array_split(values, blocks)]


def run_seed(config: ExperimentConfig, seed: int, out_dir: pathlib.Path) -> dict:
    """Run one seed to completion, write its metrics file and return its summary."""
    game = config.build_game()
    algorithm = ALGORITHMS[config.algorithm.name](game, config.learner_settings())
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    total = config.run.iterations
    start = tail_start(total, config.metrics.tail_fraction)
    full_until, every = config.metrics.full_until, config.metrics.every

    tracker = algorithm.tracker
    utility_before_tail = np.zeros(game.num_agents)
    cost_before_tail = np.zeros(game.num_agents)
    rows = []
    tail_records = []
    early_regret = None
    early_iteration = min(EARLY_ITERATION, total)

    stopwatch = Stopwatch()
    state = INITIAL_STATE
    algorithm.reset(state, rng)
    for n in range(1, total + 1):
        log_row = should_log(n, total, full_until, every) or n == start or n == early_iteration
        state, record = algorithm.step(state, rng, record=log_row)
        if n == start:
            utility_before_tail = tracker.utility_sum.copy()
            cost_before_tail = tracker.cost_sum.copy()
        if record is None:
            continue
        rows.append(record.to_row())
        if n == early_iteration:
            early_regret = record.max_regret
        if n > start:
            tail_records.append(record)
        if n % max(every * 100, 1) == 0:
            logger.debug(f"seed {seed}: iteration {n}/{total}, mean welfare {record.mean_social_welfare:.4f}")

    path = write_metrics(rows, metrics_columns(game.space.action_counts), metrics_path(out_dir, seed))
    logger.info(f"seed {seed}: {stopwatch.summary(total)}")

    tail_length = total - start
    tail_utility = (tracker.utility_sum - utility_before_tail) / tail_length
    tail_cost = (tracker.cost_sum - cost_before_tail) / tail_length
    tail_lambda = np.mean([r.lam for r in tail_records], axis=0)
    lyapunov = np.array([r.lyapunov for r in tail_records])
    return {
        "seed": int(seed),
        "metrics": path.name,
        "tail_start": int(start),
        "tail_utility": _floats(tail_utility),
        "tail_cost": _floats(tail_cost),
        "tail_social_welfare": float(tail_utility.sum()),
        "tail_lambda": _floats(tail_lambda),
        "tail_max_regret": float(np.mean([r.max_regret for r in tail_records])),
        "early_iteration": int(early_iteration),
        "early_max_regret": float(early_regret),
        "lyapunov_blocks": _block_means(lyapunov, LYAPUNOV_BLOCKS),
        "tail_miscoordination": float(np.mean([r.miscoordination for r in tail_records])),
        "final_disc_utility": _floats(tracker.discounted_utility),
        "final_disc_cost": _floats(tracker.discounted_cost),
    }


def _seed_job(args: tuple[ExperimentConfig, int, pathlib.Path]) -> dict:
    return run_seed(*args)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every configured seed, then write the joint summary."""
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    game = config.build_game()
    seeds = list(config.run.seeds)
    logger.info("=" * 80)
    logger.info(
        f"Running {config.algorithm.name} on {game.name}: {config.run.iterations} iterations, seeds {seeds}"
    )
    logger.info("=" * 80)
    stopwatch = Stopwatch()

    jobs = [(config, seed, out_dir) for seed in seeds]
    workers = min(config.run.workers, len(seeds))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            seed_summaries = list(pool.map(_seed_job, jobs))
    else:
        seed_summaries = [_seed_job(job) for job in jobs]

    summary = {
        "algorithm": config.algorithm.name,
        "environment": game.name,
        "iterations": int(config.run.iterations),
        "discount": float(game.discount),
        "cost_bounds": _floats(game.cost_bounds),
        "mean_tail_social_welfare": float(np.mean([s["tail_social_welfare"] for s in seed_summaries])),
        "seeds": seed_summaries,
        "config": config.to_dict(),
    }
    summary_path = write_summary(summary, out_dir / SUMMARY_FILE)
    logger.info("=" * 80)
    logger.info(f"Experiment done: {stopwatch.summary(config.run.iterations * len(seeds))}")
    logger.info(f"Summary written to {summary_path}")
    logger.info("=" * 80)
    return ExperimentResult(
        summary=summary,
        summary_path=summary_path,
        metrics_paths=tuple(out_dir / s["metrics"] for s in seed_summaries),
    )
