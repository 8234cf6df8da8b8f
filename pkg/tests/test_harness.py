import numpy as np
import pandas as pd
import pytest
import yaml

from cnrq_lab.config.config import config_with
from cnrq_lab.core.metrics import MetricsRecord, metrics_columns
from cnrq_lab.errors import ConfigError, MismatchedConfigs, UnknownQuantity
from cnrq_lab.harness.compare import compare_runs, load_summaries
from cnrq_lab.harness.io import read_metrics, write_metrics
from cnrq_lab.harness.plot_series import emit_plot_series
from cnrq_lab.harness.runner import run_experiment, tail_start
from cnrq_lab.harness.sweep import run_sweep


def small_config(out_dir, algorithm="cnrq", iterations=300, seeds=(0,), preset="two-agent-game"):
    return config_with(
        environment={"preset": preset},
        algorithm={"name": algorithm},
        run={"iterations": iterations, "seeds": list(seeds)},
        metrics={"full_until": 50, "every": 25, "tail_fraction": 0.2},
        output={"dir": str(out_dir)},
    )


def same_seeds(first, second):
    # NaN entries (no Lyapunov for baselines) only compare equal as text.
    return yaml.safe_dump(first.summary["seeds"]) == yaml.safe_dump(second.summary["seeds"])


def test_tail_start():
    assert tail_start(1000, 0.1) == 900
    assert tail_start(1, 0.1) == 0
    assert tail_start(10, 1.0) == 0


def test_metrics_file_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    action_counts = (2, 3)

    def values():
        return tuple(float(v) for v in rng.normal(scale=1e3, size=2))

    rows = [
        MetricsRecord(
            iteration=n,
            state=int(rng.integers(3)),
            joint_action=int(rng.integers(6)),
            utility=values(),
            cost=values(),
            lam=values(),
            mean_utility=values(),
            mean_cost=values(),
            discounted_utility=values(),
            discounted_cost=values(),
            frequencies=(tuple(rng.dirichlet(np.ones(2))), tuple(rng.dirichlet(np.ones(3)))),
            max_regret=float(rng.random()) / 3.0,
            lyapunov=float("nan"),
            miscoordination=bool(n % 2),
        ).to_row()
        for n in range(1, 41)
    ]
    columns = metrics_columns(action_counts)
    path = write_metrics(rows, columns, tmp_path / "metrics.csv")
    expected = pd.DataFrame.from_records(rows, columns=columns)
    back = read_metrics(path)
    assert back["lyapunov"].isna().all()
    pd.testing.assert_frame_equal(back, expected, check_exact=True)


def test_single_iteration_run(tmp_path):
    result = run_experiment(small_config(tmp_path, iterations=1))
    df = read_metrics(result.metrics_paths[0])
    assert len(df) == 1
    seed = result.summary["seeds"][0]
    assert seed["tail_start"] == 0
    assert seed["early_iteration"] == 1


def test_metrics_are_thinned(tmp_path):
    result = run_experiment(small_config(tmp_path))
    iterations = read_metrics(result.metrics_paths[0])["iteration"].tolist()
    assert iterations[:50] == list(range(1, 51))
    assert 240 in iterations and 300 == iterations[-1]
    assert 51 not in iterations


@pytest.mark.parametrize("algorithm", ["cnrq", "ceq-central", "ceq-semi", "qnr", "regret-matching"])
def test_runs_are_reproducible(tmp_path, algorithm):
    first = run_experiment(small_config(tmp_path / "a", algorithm, iterations=120))
    second = run_experiment(small_config(tmp_path / "b", algorithm, iterations=120))
    assert first.metrics_paths[0].read_bytes() == second.metrics_paths[0].read_bytes()
    assert same_seeds(first, second)


def test_seeds_differ(tmp_path):
    result = run_experiment(small_config(tmp_path, seeds=(0, 1)))
    paths = result.metrics_paths
    assert paths[0].read_bytes() != paths[1].read_bytes()
    assert len(result.summary["seeds"]) == 2
    assert (tmp_path / "summary.yaml").exists()


def test_tail_means_recomputed_from_logged_rows(tmp_path):
    result = run_experiment(small_config(tmp_path, iterations=400))
    seed = result.summary["seeds"][0]
    df = read_metrics(result.metrics_paths[0]).set_index("iteration")
    start, total = seed["tail_start"], 400
    for k in range(2):
        for name in ("utility", "cost"):
            column = df[f"mean_{name}_{k}"]
            tail = (column[total] * total - column[start] * start) / (total - start)
            assert tail == pytest.approx(seed[f"tail_{name}"][k], abs=1e-9)
    assert seed["tail_social_welfare"] == pytest.approx(sum(seed["tail_utility"]))
    assert len(seed["lyapunov_blocks"]) == 5


def test_parallel_workers_match_serial(tmp_path):
    serial = run_experiment(small_config(tmp_path / "serial", iterations=80, seeds=(3, 4)))
    parallel = run_experiment(
        small_config(tmp_path / "parallel", iterations=80, seeds=(3, 4)).with_overrides(workers=2)
    )
    assert same_seeds(serial, parallel)


def _summary(algorithm, welfare, costs, environment="uplink-paper", iterations=100):
    return {
        "algorithm": algorithm,
        "environment": environment,
        "iterations": iterations,
        "cost_bounds": [0.75, 0.75],
        "seeds": [
            {"seed": i, "tail_social_welfare": w, "tail_max_regret": 0.0, "tail_cost": c}
            for i, (w, c) in enumerate(zip(welfare, costs))
        ],
    }


def test_compare_single_summary():
    table = compare_runs([_summary("cnrq", [1.0], [[0.5, 0.7]])])
    assert len(table) == 1
    assert table.loc[0, "max_excess"] == pytest.approx(-0.05)
    assert not table.loc[0, "violation"]


def test_compare_orders_and_flags(caplog):
    table = compare_runs([
        _summary("cnrq", [2.0, 3.0], [[0.5, 0.5], [0.5, 0.8]]),
        _summary("ceq-semi", [3.0], [[0.9, 0.1]]),
    ])
    assert table["algorithm"].tolist() == ["ceq-semi", "cnrq", "cnrq"]
    assert table["seed"].tolist() == [0, 1, 0]
    assert table["violation"].tolist() == [True, True, False]
    assert "violates its cost bound" in caplog.text


def test_compare_is_order_independent():
    a = _summary("cnrq", [1.0, 2.0], [[0.1, 0.1], [0.2, 0.2]])
    b = _summary("qnr", [1.5], [[0.3, 0.3]])
    pd.testing.assert_frame_equal(compare_runs([a, b]), compare_runs([b, a]))


def test_compare_tolerance():
    table = compare_runs([_summary("cnrq", [1.0], [[0.8, 0.7]])], tolerance=0.1)
    assert not table.loc[0, "violation"]


def test_compare_rejects_mismatched_runs():
    with pytest.raises(MismatchedConfigs):
        compare_runs([_summary("cnrq", [1.0], [[0.0, 0.0]]), _summary("qnr", [1.0], [[0.0, 0.0]], iterations=5)])
    with pytest.raises(MismatchedConfigs):
        compare_runs([])


def test_compare_reads_written_summaries(tmp_path):
    cnrq = run_experiment(small_config(tmp_path / "cnrq", iterations=60))
    ceq = run_experiment(small_config(tmp_path / "ceq", "ceq-central", iterations=60))
    table = compare_runs(load_summaries([cnrq.summary_path, ceq.summary_path]))
    assert set(table["algorithm"]) == {"cnrq", "ceq-central"}


def test_plot_series_smoothing():
    df = pd.DataFrame({"iteration": [1, 2, 3, 4], "social_welfare": [1.0, 2.0, 3.0, 4.0]})
    series = emit_plot_series(df, "social_welfare", window=3)
    assert series["iteration"].tolist() == [2, 3]
    np.testing.assert_allclose(series["value"], [2.0, 3.0])
    identity = emit_plot_series(df, "social_welfare")
    np.testing.assert_allclose(identity["value"], [1.0, 2.0, 3.0, 4.0])


def test_plot_series_constant_is_unchanged():
    df = pd.DataFrame({"iteration": range(1, 11), "cost_0": [0.5] * 10})
    np.testing.assert_allclose(emit_plot_series(df, "cost_0", window=5)["value"], 0.5)


def test_plot_series_errors():
    df = pd.DataFrame({"iteration": [1], "social_welfare": [1.0]})
    with pytest.raises(UnknownQuantity):
        emit_plot_series(df, "happiness")
    with pytest.raises(ConfigError):
        emit_plot_series(df, "social_welfare", window=0)


def test_plot_series_from_metrics_file(tmp_path):
    result = run_experiment(small_config(tmp_path, iterations=20))
    out = tmp_path / "welfare.csv"
    series = emit_plot_series(result.metrics_paths[0], "mean_social_welfare", out_path=out)
    assert len(series) == 20
    assert pd.read_csv(out).shape == (20, 2)


def test_sweep_over_power_constraint(tmp_path):
    config = small_config(tmp_path, iterations=40, preset="uplink")
    table = run_sweep(config, "power_constraint", [0.5, 1.0], tmp_path)
    assert table["power_constraint"].tolist() == [0.5, 1.0]
    assert table["cost_bound"].tolist() == [0.5, 1.0]
    assert (tmp_path / "sweep_power_constraint.csv").exists()
    assert (tmp_path / "power_constraint=0.5" / "summary.yaml").exists()


def test_sweep_rejects_unknown_parameter(tmp_path):
    with pytest.raises(ConfigError):
        run_sweep(small_config(tmp_path, preset="uplink"), "arrival_rate", [1.0], tmp_path)
