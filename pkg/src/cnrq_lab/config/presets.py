from dataclasses import fields, replace
from typing import Any, Callable

from cnrq_lab.config.logging_config import configure_logging
from cnrq_lab.core.game import GameSpec
from cnrq_lab.envs.downlink import DownlinkParams, make_downlink_game
from cnrq_lab.envs.synthetic import chicken, matching_pennies, prisoners_dilemma, single_agent_mdp, two_agent_game
from cnrq_lab.envs.uplink import UplinkParams, make_uplink_game
from cnrq_lab.errors import ConfigError, MalformedTables

logger = configure_logging(__name__)


def _as_tuple(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return tuple(_as_tuple(v) for v in value)
    return value


class EnvironmentPreset:
    """Named environments: the two HetNet scenarios and the small synthetic fixtures."""

    _valid_aliases = [
        "uplink-paper",
        "downlink-paper",
        "single-agent-mdp",
        "two-agent-game",
        "prisoners-dilemma",
        "matching-pennies",
        "chicken",
    ]
    _shortcut_aliases = {"uplink": "uplink-paper", "downlink": "downlink-paper", "pd": "prisoners-dilemma"}
    _params = {"uplink-paper": UplinkParams, "downlink-paper": DownlinkParams}
    _param_builders: dict[str, Callable[..., GameSpec]] = {
        "uplink-paper": make_uplink_game,
        "downlink-paper": make_downlink_game,
    }
    _fixtures: dict[str, Callable[..., GameSpec]] = {
        "single-agent-mdp": single_agent_mdp,
        "two-agent-game": two_agent_game,
        "prisoners-dilemma": prisoners_dilemma,
        "matching-pennies": matching_pennies,
        "chicken": chicken,
    }

    def __init__(self, alias: str):
        alias = alias.lower()
        if alias not in self._valid_aliases and alias not in self._shortcut_aliases:
            raise ConfigError(
                f"environment.preset: unknown preset '{alias}'. Available: {self._valid_aliases} "
                f"or {list(self._shortcut_aliases.keys())}"
            )
        self.alias = self._shortcut_aliases.get(alias, alias)

    @classmethod
    def available(cls) -> list[str]:
        return list(cls._valid_aliases)

    @property
    def params_type(self) -> type | None:
        return self._params.get(self.alias)

    @property
    def parameter_names(self) -> list[str]:
        if self.params_type is None:
            return []
        return [f.name for f in fields(self.params_type)]

    def params(self, overrides: dict | None = None):
        """Parameter dataclass with overrides applied field by field."""
        overrides = overrides or {}
        unknown = [k for k in overrides if k not in self.parameter_names]
        if unknown:
            raise ConfigError(
                [f"environment.overrides.{k}: not a parameter of '{self.alias}'. Available: {self.parameter_names}" for k in unknown]
            )
        if self.params_type is None:
            return None
        try:
            return replace(self.params_type(), **{k: _as_tuple(v) for k, v in overrides.items()})
        except (MalformedTables, TypeError) as exc:
            raise ConfigError(f"environment.overrides: {exc}") from exc

    def build(self, overrides: dict | None = None, discount: float = 0.9) -> GameSpec:
        params = self.params(overrides)
        if params is None:
            game = self._fixtures[self.alias](discount=discount)
        else:
            game = self._param_builders[self.alias](params, discount=discount, name=self.alias)
        logger.debug(
            f"Built {game.name}: {game.num_agents} agents, {game.num_states} states, {game.num_joint} joint actions"
        )
        return game
