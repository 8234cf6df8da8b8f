import pathlib

import pandas as pd
import yaml

from cnrq_lab.config.logging_config import configure_logging

logger = configure_logging(__name__)

SUMMARY_FILE = "summary.yaml"


def metrics_path(out_dir: pathlib.Path, seed: int) -> pathlib.Path:
    return pathlib.Path(out_dir) / f"metrics_seed{seed}.csv"


def write_metrics(rows: list[dict], columns: list[str], path: str | pathlib.Path) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame.from_records(rows, columns=columns)
    df.to_csv(path, index=False)
    logger.debug(f"Wrote {len(df)} metrics rows to {path}")
    return path


def read_metrics(path: str | pathlib.Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_summary(summary: dict, path: str | pathlib.Path) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(summary, f, sort_keys=False)
    return path


def read_summary(path: str | pathlib.Path) -> dict:
    with open(path) as f:
        return yaml.safe_load(f)
