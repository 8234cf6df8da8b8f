import time

from millify import millify


def should_log(iteration: int, total: int, full_until: int = 1000, every: int = 100) -> bool:
    """Every row up to full_until, then every `every`-th, and always the last."""
    return iteration <= full_until or iteration % every == 0 or iteration == total


def format_elapsed(seconds: float) -> str:
    return f"{millify(seconds, precision=2)}s"


def format_rate(count: float, seconds: float, unit: str = "it") -> str:
    if seconds <= 0:
        return f"inf {unit}/s"
    return f"{millify(count / seconds, precision=2)} {unit}/s"


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def summary(self, count: int, unit: str = "it") -> str:
        elapsed = self.elapsed
        return f"{count} {unit} in {format_elapsed(elapsed)} | {format_rate(count, elapsed, unit)}"
