import pathlib

import pytest

from cnrq_lab.config.config import ExperimentConfig, config_from_dict, config_with, load_config
from cnrq_lab.config.presets import EnvironmentPreset
from cnrq_lab.errors import ConfigError
from tests.conftest import CONFIG_DIR


@pytest.mark.parametrize("name", ["uplink-paper.yaml", "downlink-paper.yaml"])
def test_shipped_configs_load(name):
    config = load_config(CONFIG_DIR / name)
    assert config.algorithm.name == "cnrq"
    assert config.run.seeds == (0, 1, 2, 3)
    assert config.run.iterations == 500_000
    game = config.build_game()
    assert game.num_agents == 4


def test_defaults():
    config = ExperimentConfig()
    settings = config.learner_settings()
    assert settings.mu is None
    assert settings.schedules.alpha_exponent == 0.70
    assert config.run.discount == 0.9


def test_numeric_mu():
    config = config_with(algorithm={"mu": 40})
    assert config.learner_settings().mu == 40.0


def test_regret_matching_knobs_reach_settings():
    config = config_with(algorithm={"name": "regret-matching", "rm_delta": 0.02, "rm_epsilon": 0.1})
    settings = config.learner_settings()
    assert settings.rm_delta == 0.02
    assert settings.rm_epsilon == 0.1
    assert ExperimentConfig().learner_settings().rm_delta == 1e-4
    with pytest.raises(ConfigError) as exc:
        config_with(algorithm={"rm_delta": 0.0})
    assert any("algorithm.rm_delta" in p for p in exc.value.problems)


def test_problems_are_collected():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({
            "algorithm": {"epsilon": 1.5, "name": "sarsa"},
            "run": {"iterations": 0},
        })
    problems = exc.value.problems
    assert any(p.startswith("algorithm.epsilon") for p in problems)
    assert any(p.startswith("algorithm.name") for p in problems)
    assert any(p.startswith("run.iterations") for p in problems)


def test_type_errors_are_collected():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"run": {"seeds": "zero", "workers": 1.5}, "bogus": {}})
    assert len(exc.value.problems) == 3


def test_bad_schedules_rejected():
    with pytest.raises(ConfigError) as exc:
        config_with(schedules={"gamma": 0.8, "alpha": 0.7, "beta": 0.9})
    assert any(p.startswith("schedules") for p in exc.value.problems)


def test_unknown_environment_override():
    with pytest.raises(ConfigError) as exc:
        config_with(environment={"preset": "uplink", "overrides": {"arrival_rate": 3.0}})
    assert "arrival_rate" in str(exc.value)


def test_override_lists_become_tuples():
    params = EnvironmentPreset("downlink").params({"fbs_power_levels": [0.0, 50.0]})
    assert params.fbs_power_levels == (0.0, 50.0)


def test_preset_aliases():
    assert EnvironmentPreset("pd").alias == "prisoners-dilemma"
    assert EnvironmentPreset("PD").build().name == "prisoners-dilemma"
    with pytest.raises(ConfigError):
        EnvironmentPreset("sidelink")


def test_frequency_state_range_checked():
    with pytest.raises(ConfigError):
        config_with(environment={"preset": "uplink"}, metrics={"frequency_state": 2})


def test_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("CNRQ_OUTPUT_DIR", str(tmp_path))
    assert ExperimentConfig().output_dir == tmp_path
    assert config_with(output={"dir": "elsewhere"}).output_dir == pathlib.Path("elsewhere")
    monkeypatch.delenv("CNRQ_OUTPUT_DIR")
    assert ExperimentConfig().output_dir == pathlib.Path("runs")


def test_with_overrides_revalidates():
    config = config_with(environment={"preset": "pd"})
    changed = config.with_overrides(seeds=[5, 6], iterations=20, out="x", workers=2)
    assert changed.run.seeds == (5, 6)
    assert changed.run.iterations == 20
    assert changed.output_dir == pathlib.Path("x")
    with pytest.raises(ConfigError):
        config.with_overrides(iterations=0)


def test_invalid_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("run: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(path)
