import os
import pathlib
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional

import yaml
from dotenv import load_dotenv

from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.config.presets import EnvironmentPreset
from cnrq_lab.core.game import GameSpec
from cnrq_lab.errors import ConfigError
from cnrq_lab.learning import ALGORITHMS
from cnrq_lab.learning.base import LearnerSettings
from cnrq_lab.learning.schedules import StepSchedules

load_dotenv()

logger = configure_logging(__name__)

DEFAULT_OUTPUT_DIR = "runs"


@dataclass(frozen=True)
class EnvironmentSection:
    preset: str = "uplink-paper"
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AlgorithmSection:
    name: str = "cnrq"
    epsilon: float = 0.05
    delta: float = 1e-3
    mu: Any = "auto"  # "auto" or a positive number
    max_lambda: float = 100.0
    balance_tremble: float = 1e-6
    inner_iterations: int = 200
    observation_noise: float = 0.0
    marginal_sampling: bool = False
    rm_epsilon: float = 0.01
    rm_delta: float = 1e-4


@dataclass(frozen=True)
class SchedulesSection:
    gamma: float = 0.52
    alpha: float = 0.70
    beta: float = 0.88


@dataclass(frozen=True)
class RunSection:
    iterations: int = 10_000
    seeds: tuple[int, ...] = (0,)
    discount: float = 0.9
    workers: int = 1


@dataclass(frozen=True)
class MetricsSection:
    full_until: int = 1000
    every: int = 100
    tail_fraction: float = 0.1
    frequency_state: Optional[int] = None


@dataclass(frozen=True)
class OutputSection:
    dir: Optional[str] = None


_SECTIONS = {
    "environment": EnvironmentSection,
    "algorithm": AlgorithmSection,
    "schedules": SchedulesSection,
    "run": RunSection,
    "metrics": MetricsSection,
    "output": OutputSection,
}

_FLOAT_FIELDS = {
    "epsilon", "delta", "max_lambda", "balance_tremble", "observation_noise", "rm_epsilon", "rm_delta",
    "gamma", "alpha", "beta", "discount", "tail_fraction",
}
_INT_FIELDS = {"inner_iterations", "iterations", "workers", "full_until", "every"}


@dataclass(frozen=True)
class ExperimentConfig:
    environment: EnvironmentSection = field(default_factory=EnvironmentSection)
    algorithm: AlgorithmSection = field(default_factory=AlgorithmSection)
    schedules: SchedulesSection = field(default_factory=SchedulesSection)
    run: RunSection = field(default_factory=RunSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    output: OutputSection = field(default_factory=OutputSection)

    @property
    def output_dir(self) -> pathlib.Path:
        return pathlib.Path(self.output.dir or os.getenv("CNRQ_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR)

    def step_schedules(self) -> StepSchedules:
        return StepSchedules(self.schedules.gamma, self.schedules.alpha, self.schedules.beta)

    def learner_settings(self) -> LearnerSettings:
        algo = self.algorithm
        return LearnerSettings(
            schedules=self.step_schedules(),
            epsilon=algo.epsilon,
            delta=algo.delta,
            mu=None if algo.mu == "auto" else float(algo.mu),
            max_lambda=algo.max_lambda,
            balance_tremble=algo.balance_tremble,
            inner_iterations=algo.inner_iterations,
            observation_noise=algo.observation_noise,
            marginal_sampling=algo.marginal_sampling,
            rm_epsilon=algo.rm_epsilon,
            rm_delta=algo.rm_delta,
            frequency_state=self.metrics.frequency_state,
        )

    def build_game(self) -> GameSpec:
        preset = EnvironmentPreset(self.environment.preset)
        return preset.build(self.environment.overrides, discount=self.run.discount)

    def with_overrides(
        self,
        seeds: Optional[list[int]] = None,
        iterations: Optional[int] = None,
        out: Optional[str] = None,
        workers: Optional[int] = None,
        environment_overrides: Optional[dict] = None,
    ) -> "ExperimentConfig":
        """Copy with command-line overrides applied; the result is validated again."""
        data = self.to_dict()
        if seeds is not None:
            data["run"]["seeds"] = list(seeds)
        if iterations is not None:
            data["run"]["iterations"] = iterations
        if workers is not None:
            data["run"]["workers"] = workers
        if out is not None:
            data["output"]["dir"] = str(out)
        if environment_overrides:
            data["environment"]["overrides"] = {**data["environment"]["overrides"], **environment_overrides}
        return config_from_dict(data)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["run"]["seeds"] = list(data["run"]["seeds"])
        data["environment"]["overrides"] = dict(data["environment"]["overrides"])
        return data


def _check_type(path: str, name: str, value: Any, problems: list[str]) -> Any:
    if name in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"{path}: expected a number, got {value!r}")
            return None
        return float(value)
    if name in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            problems.append(f"{path}: expected an integer, got {value!r}")
            return None
        return value
    if name == "seeds":
        if isinstance(value, int) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, (list, tuple)) or not value or not all(
            isinstance(s, int) and not isinstance(s, bool) for s in value
        ):
            problems.append(f"{path}: expected a non-empty list of integers, got {value!r}")
            return None
        return tuple(value)
    if name == "mu":
        if value == "auto":
            return value
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            problems.append(f"{path}: expected 'auto' or a positive number, got {value!r}")
            return None
        return float(value)
    if name == "marginal_sampling":
        if not isinstance(value, bool):
            problems.append(f"{path}: expected true or false, got {value!r}")
            return None
        return value
    if name == "frequency_state":
        if value is not None and (isinstance(value, bool) or not isinstance(value, int) or value < 0):
            problems.append(f"{path}: expected a nonnegative state index or null, got {value!r}")
            return None
        return value
    if name == "overrides":
        if value is None:
            return {}
        if not isinstance(value, dict):
            problems.append(f"{path}: expected a mapping, got {value!r}")
            return None
        return dict(value)
    if name in ("preset", "name", "dir"):
        if value is None and name == "dir":
            return None
        if not isinstance(value, (str, pathlib.Path)):
            problems.append(f"{path}: expected a string, got {value!r}")
            return None
        return str(value)
    return value


def _check_ranges(config: ExperimentConfig, problems: list[str]) -> None:
    algo, run, metrics = config.algorithm, config.run, config.metrics
    checks = [
        ("algorithm.epsilon", 0.0 <= algo.epsilon <= 1.0, "must lie in [0, 1]"),
        ("algorithm.delta", algo.delta > 0.0, "must be positive"),
        ("algorithm.max_lambda", algo.max_lambda >= 0.0, "must be nonnegative"),
        ("algorithm.balance_tremble", 0.0 < algo.balance_tremble <= 1.0, "must lie in (0, 1]"),
        ("algorithm.inner_iterations", algo.inner_iterations >= 1, "must be at least 1"),
        ("algorithm.observation_noise", algo.observation_noise >= 0.0, "must be nonnegative"),
        ("algorithm.rm_epsilon", 0.0 <= algo.rm_epsilon <= 1.0, "must lie in [0, 1]"),
        ("algorithm.rm_delta", algo.rm_delta > 0.0, "must be positive"),
        ("run.iterations", run.iterations >= 1, "must be at least 1"),
        ("run.discount", 0.0 <= run.discount < 1.0, "must lie in [0, 1)"),
        ("run.workers", run.workers >= 1, "must be at least 1"),
        ("metrics.full_until", metrics.full_until >= 0, "must be nonnegative"),
        ("metrics.every", metrics.every >= 1, "must be at least 1"),
        ("metrics.tail_fraction", 0.0 < metrics.tail_fraction <= 1.0, "must lie in (0, 1]"),
    ]
    for path, ok, reason in checks:
        if not ok:
            problems.append(f"{path}: {reason}, got {_lookup(config, path)!r}")
    if algo.name not in ALGORITHMS:
        problems.append(f"algorithm.name: unknown algorithm '{algo.name}'. Available: {list(ALGORITHMS)}")
    try:
        config.step_schedules()
    except ValueError as exc:
        problems.append(f"schedules: {exc}")
    try:
        game = EnvironmentPreset(config.environment.preset).build(config.environment.overrides, run.discount)
    except ConfigError as exc:
        problems.extend(exc.problems)
    else:
        if metrics.frequency_state is not None and metrics.frequency_state >= game.num_states:
            problems.append(
                f"metrics.frequency_state: state {metrics.frequency_state} out of range for {game.num_states} states"
            )


def _lookup(config: ExperimentConfig, path: str) -> Any:
    section, name = path.split(".")
    return getattr(getattr(config, section), name)


def config_from_dict(data: dict | None) -> ExperimentConfig:
    """Validate a raw mapping into an ExperimentConfig; all problems are reported together."""
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"config: expected a mapping at the top level, got {type(data).__name__}")
    problems: list[str] = []
    sections = {}
    for section, raw in data.items():
        if section not in _SECTIONS:
            problems.append(f"{section}: unknown section. Available: {list(_SECTIONS)}")
            continue
        raw = raw or {}
        if not isinstance(raw, dict):
            problems.append(f"{section}: expected a mapping, got {raw!r}")
            continue
        known = {f.name for f in fields(_SECTIONS[section])}
        values = {}
        for name, value in raw.items():
            if name not in known:
                problems.append(f"{section}.{name}: unknown key. Available: {sorted(known)}")
                continue
            checked = _check_type(f"{section}.{name}", name, value, problems)
            if checked is not None or (name in ("dir", "frequency_state") and value is None):
                values[name] = checked
        sections[section] = _SECTIONS[section](**values)
    if problems:
        raise ConfigError(problems)

    config = ExperimentConfig(**sections)
    _check_ranges(config, problems)
    if problems:
        raise ConfigError(problems)
    return config


def load_config(path: str | pathlib.Path) -> ExperimentConfig:
    path = pathlib.Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    config = config_from_dict(data)
    logger.info(f"Loaded config {path}: {config.algorithm.name} on {config.environment.preset}")
    return config


def config_with(**sections: dict) -> ExperimentConfig:
    """Default config with the given sections replaced; handy for tests and sweeps."""
    return config_from_dict(sections)


