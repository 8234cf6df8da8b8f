import pandas as pd
import pytest
import yaml

from cnrq_lab.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, build_parser, main


def write_config(path, **sections):
    data = {
        "environment": {"preset": "pd"},
        "run": {"iterations": 30, "seeds": [0]},
        "metrics": {"full_until": 10, "every": 5},
    }
    data.update(sections)
    path.write_text(yaml.safe_dump(data))
    return path


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_run_and_follow_up_commands(tmp_path, capsys):
    config = write_config(tmp_path / "pd.yaml")
    out = tmp_path / "runs"
    assert main(["run", "--config", str(config), "--out", str(out), "--seed-override", "1,2", "--iterations", "20"]) == EXIT_OK
    summary = yaml.safe_load((out / "summary.yaml").read_text())
    assert [s["seed"] for s in summary["seeds"]] == [1, 2]
    assert summary["iterations"] == 20
    assert "Mean tail social welfare" in capsys.readouterr().out

    table = tmp_path / "compare.csv"
    assert main(["compare", str(out / "summary.yaml"), "--out", str(table)]) == EXIT_OK
    assert len(pd.read_csv(table)) == 2

    series = tmp_path / "series.csv"
    metrics = out / "metrics_seed1.csv"
    assert main(["plot-series", "--metrics", str(metrics), "--quantity", "social_welfare", "--window", "3", "--out", str(series)]) == EXIT_OK
    assert len(pd.read_csv(series)) == len(pd.read_csv(metrics)) - 2


def test_invalid_config_exits_with_config_code(tmp_path, capsys):
    config = write_config(tmp_path / "bad.yaml", run={"iterations": -5})
    assert main(["run", "--config", str(config)]) == EXIT_CONFIG
    assert "run.iterations" in capsys.readouterr().err


def test_unknown_quantity_exits_with_config_code(tmp_path):
    metrics = tmp_path / "metrics.csv"
    pd.DataFrame({"iteration": [1], "social_welfare": [0.0]}).to_csv(metrics, index=False)
    assert main(["plot-series", "--metrics", str(metrics), "--quantity", "nope"]) == EXIT_CONFIG


def test_mismatched_summaries_exit_with_config_code(tmp_path):
    for name, iterations in (("a", 10), ("b", 12)):
        config = write_config(tmp_path / f"{name}.yaml")
        assert main(["run", "--config", str(config), "--out", str(tmp_path / name), "--iterations", str(iterations)]) == EXIT_OK
    assert main(["compare", str(tmp_path / "a" / "summary.yaml"), str(tmp_path / "b" / "summary.yaml")]) == EXIT_CONFIG


def test_missing_file_exits_with_runtime_code(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == EXIT_RUNTIME
    assert main(["compare", str(tmp_path / "missing.yaml")]) == EXIT_RUNTIME


def test_oracle_report(tmp_path, capsys):
    assert main(["oracle", "--preset", "pd"]) == EXIT_OK
    report = yaml.safe_load(capsys.readouterr().out)
    assert report["states"][0]["utilitarian_ce"] == [0.0, 0.0, 0.0, 1.0]

    out = tmp_path / "oracle.yaml"
    assert main(["oracle", "--preset", "two-agent-game", "--out", str(out)]) == EXIT_OK
    assert len(yaml.safe_load(out.read_text())["states"]) == 2


def test_oracle_unknown_preset():
    assert main(["oracle", "--preset", "sidelink"]) == EXIT_CONFIG


def test_sweep_command(tmp_path):
    config = write_config(tmp_path / "uplink.yaml", environment={"preset": "uplink"}, run={"iterations": 15, "seeds": [0]})
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config), "--param", "power_constraint", "--values", "0.5,1", "--out", str(out)]) == EXIT_OK
    assert len(pd.read_csv(out / "sweep_power_constraint.csv")) == 2
