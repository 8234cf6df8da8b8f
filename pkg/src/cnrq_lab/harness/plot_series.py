import pathlib

import pandas as pd

from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.errors import ConfigError, UnknownQuantity
from cnrq_lab.harness.io import read_metrics

logger = configure_logging(__name__)


def smooth(values: pd.Series, window: int) -> pd.Series:
    """Centered moving average; positions without a full window are dropped."""
    if window == 1:
        return values
    return values.rolling(window, center=True).mean().dropna()


def emit_plot_series(
    metrics: str | pathlib.Path | pd.DataFrame,
    quantity: str,
    window: int = 1,
    out_path: str | pathlib.Path | None = None,
) -> pd.DataFrame:
    """(iteration, value) pairs of one metrics column, optionally smoothed and written as CSV."""
    if window < 1:
        raise ConfigError(f"window: must be at least 1, got {window}")
    df = metrics if isinstance(metrics, pd.DataFrame) else read_metrics(metrics)
    available = [c for c in df.columns if c != "iteration"]
    if quantity not in available:
        raise UnknownQuantity(f"Unknown quantity '{quantity}'. Available: {available}")

    values = smooth(df.set_index("iteration")[quantity], window)
    series = pd.DataFrame({"iteration": values.index, "value": values.to_numpy()})
    if out_path is not None:
        out_path = pathlib.Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        series.to_csv(out_path, index=False)
        logger.info(f"Wrote {len(series)} points of {quantity} (window {window}) to {out_path}")
    return series
