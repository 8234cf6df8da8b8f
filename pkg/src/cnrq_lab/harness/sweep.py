import pathlib

import numpy as np
import pandas as pd

from cnrq_lab.config.config import ExperimentConfig
from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.config.presets import EnvironmentPreset
from cnrq_lab.errors import ConfigError
from cnrq_lab.harness.runner import run_experiment

logger = configure_logging(__name__)


def sweep_row(parameter: str, value: float, summary: dict, tolerance: float) -> dict:
    bounds = np.asarray(summary["cost_bounds"], dtype=float)
    costs = np.array([seed["tail_cost"] for seed in summary["seeds"]], dtype=float)
    return {
        parameter: value,
        "algorithm": summary["algorithm"],
        "social_welfare": summary["mean_tail_social_welfare"],
        "max_tail_cost": float(costs.max()),
        "cost_bound": float(bounds.min()),
        "violation": bool(np.any(costs - bounds > tolerance)),
    }


def run_sweep(
    config: ExperimentConfig,
    parameter: str,
    values: list[float],
    out_dir: str | pathlib.Path | None = None,
    tolerance: float = 0.0,
) -> pd.DataFrame:
    """Repeat the experiment once per value of one environment parameter."""
    preset = EnvironmentPreset(config.environment.preset)
    if parameter not in preset.parameter_names:
        raise ConfigError(
            f"sweep.param: '{parameter}' is not a parameter of '{preset.alias}'. Available: {preset.parameter_names}"
        )
    out_dir = pathlib.Path(out_dir) if out_dir is not None else config.output_dir
    rows = []
    for value in values:
        run_config = config.with_overrides(out=out_dir / f"{parameter}={value}", environment_overrides={parameter: value})
        logger.info(f"Sweep {parameter}={value}")
        result = run_experiment(run_config)
        rows.append(sweep_row(parameter, value, result.summary, tolerance))

    table = pd.DataFrame(rows)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"sweep_{parameter}.csv"
    table.to_csv(path, index=False)
    logger.info(f"Sweep table written to {path}")
    return table
