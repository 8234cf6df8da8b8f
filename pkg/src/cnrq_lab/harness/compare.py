import pathlib

import pandas as pd

from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.errors import MismatchedConfigs
from cnrq_lab.harness.io import read_summary

logger = configure_logging(__name__)


def load_summaries(paths: list[str | pathlib.Path]) -> list[dict]:
    return [read_summary(p) for p in paths]


def compare_runs(summaries: list[dict], tolerance: float = 0.0) -> pd.DataFrame:
    """One row per (algorithm, seed): tail welfare, tail costs and constraint violation.

    A seed violates when any agent's tail cost exceeds its bound by more
    than tolerance. Rows are sorted by welfare (descending), then algorithm
    and seed, so the table does not depend on input order.
    """
    if not summaries:
        raise MismatchedConfigs("Nothing to compare: no summaries given")
    keys = {(s["environment"], s["iterations"]) for s in summaries}
    if len(keys) > 1:
        raise MismatchedConfigs(
            f"Summaries must share environment and iteration budget, got {sorted(keys)}"
        )

    rows = []
    for summary in summaries:
        bounds = summary["cost_bounds"]
        for seed in summary["seeds"]:
            excess = [cost - bound for cost, bound in zip(seed["tail_cost"], bounds)]
            row = {
                "algorithm": summary["algorithm"],
                "seed": seed["seed"],
                "social_welfare": seed["tail_social_welfare"],
                "max_regret": seed["tail_max_regret"],
            }
            for k, cost in enumerate(seed["tail_cost"]):
                row[f"tail_cost_{k}"] = cost
            row["max_excess"] = max(excess)
            row["violation"] = max(excess) > tolerance
            rows.append(row)
            if row["violation"]:
                logger.warning(
                    f"{summary['algorithm']} seed {seed['seed']} violates its cost bound by {max(excess):.4f}"
                )

    df = pd.DataFrame(rows)
    df = df.sort_values(["social_welfare", "algorithm", "seed"], ascending=[False, True, True], kind="mergesort")
    return df.reset_index(drop=True)
