import csv
import json
import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from splitmax.cli import main
from splitmax.data import ConfigError
from splitmax.harness import (
    RESULT_HEADER,
    ExperimentConfig,
    ResultRow,
    SyntheticSpec,
    config_from_dict,
    emit_plot_data,
    load_config,
    read_results,
    results_csv,
    run_experiment,
    write_results,
)

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "influence_vs_budget.csv")
SMALL = SyntheticSpec(12, 3, 16, 5, 500.0)


def small_config(**kw):
    base = dict(budgets=(500, 1000), algorithms=("rg", "tpg"), synthetic=SMALL, exact=True)
    base.update(kw)
    return ExperimentConfig(**base)


def strip_time(text):
    rows = list(csv.reader(text.splitlines()))
    col = rows[0].index("wall_time_ms")
    return [r[:col] + r[col + 1 :] for r in rows]


# ---------------------------------------------------------------- config


def test_defaults():
    cfg = ExperimentConfig()
    assert (cfg.epsilon, cfg.lam, cfg.R) == (0.01, 100.0, 1000)


@pytest.mark.parametrize(
    "kw",
    [dict(budgets=()), dict(budgets=(-1,)), dict(algorithms=("nope",)), dict(epsilon=1.5), dict(R=0), dict(merge="zip")],
)
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kw)


def test_toml_config_and_overrides(tmp_path):
    p = tmp_path / "exp.toml"
    p.write_text(
        'budgets = [100, 200]\nalgorithms = ["tpg"]\nexact = true\nlambda = 80\n\n'
        "[synthetic]\nusers = 8\nbillboards = 2\nedges = 10\nseed = 4\n"
    )
    cfg = load_config(p)
    assert cfg.budgets == (100.0, 200.0) and cfg.algorithms == ("tpg",) and cfg.lam == 80.0
    assert cfg.synthetic == SyntheticSpec(8, 2, 10, 4)
    cfg2 = cfg.with_overrides(budgets=[300], algorithms=None)
    assert cfg2.budgets == (300.0,) and cfg2.algorithms == ("tpg",)


def test_config_unknown_key():
    with pytest.raises(ConfigError):
        config_from_dict({"budgetz": [1]})


def test_config_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("budgets = [1,\n")
    with pytest.raises(ConfigError):
        load_config(p)


# ---------------------------------------------------------------- runs


def test_zero_budget_row_is_all_zero():
    rows = run_experiment(small_config(budgets=(0,), algorithms=("random",)))
    r = rows[0]
    assert (r.phi_total, r.phi_billboard, r.phi_social, r.phi_interaction) == (0.0, 0.0, 0.0, 0.0)
    assert (r.split_pct_billboard, r.split_pct_social) == (0.0, 0.0)


def test_one_algorithm_two_budgets_two_rows():
    rows = run_experiment(small_config(algorithms=("topk",)))
    assert [(r.algorithm, r.budget) for r in rows] == [("topk", 500.0), ("topk", 1000.0)]


def test_rows_sorted_and_consistent():
    rows = run_experiment(small_config(algorithms=("tpg", "hdh", "rg"), budgets=(1000, 500)))
    assert [(r.algorithm, r.budget) for r in rows] == sorted((r.algorithm, r.budget) for r in rows)
    for r in rows:
        assert r.phi_total == pytest.approx(r.phi_billboard + r.phi_social + r.phi_interaction, abs=1e-12)
        if r.split_pct_billboard + r.split_pct_social > 0:
            assert r.split_pct_billboard + r.split_pct_social == pytest.approx(1.0)
        assert r.wall_time_ms > 0


def test_greedy_sweep_non_decreasing_in_budget():
    rows = run_experiment(small_config(budgets=(500, 1000, 1500, 2000)))
    for algo in ("rg", "tpg"):
        vals = [r.phi_total for r in rows if r.algorithm == algo]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


def test_rerun_identical_except_wall_time(tmp_path):
    cfg = small_config(algorithms=("rg", "random"), exact=False, R=50, rng_seed=3)
    a = results_csv(run_experiment(cfg))
    b = results_csv(run_experiment(cfg))
    assert strip_time(a) == strip_time(b)


def test_output_and_trace_files(tmp_path):
    out, trace = tmp_path / "r.csv", tmp_path / "t.jsonl"
    rows = run_experiment(small_config(output=str(out), trace=str(trace)))
    assert read_results(out) == rows
    lines = [json.loads(x) for x in trace.read_text().splitlines()]
    assert lines and {"algorithm", "budget", "kind", "id", "gain", "remaining"} <= set(lines[0])


# ---------------------------------------------------------------- CSV


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.lists(st.builds(ResultRow, st.sampled_from(["rg", "tpg", "random"]), finite, finite, finite, finite, finite, finite, finite, finite, st.integers(0, 2**31)), max_size=5))
def test_results_csv_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "r.csv"
    write_results(rows, path)
    assert read_results(path) == rows


def test_results_header_exact(tmp_path):
    write_results([], tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == ",".join(RESULT_HEADER)


# ---------------------------------------------------------------- plot data


def test_single_row_single_line(tmp_path):
    row = ResultRow("rg", 10.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 2.5, 0)
    emit_plot_data([row], "time_vs_budget", tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines == ["algorithm,budget,wall_time_ms", "rg,10.0,2.5"]


def test_split_shares_sum_to_hundred(tmp_path):
    rows = run_experiment(small_config(algorithms=("rg", "tpg", "hdh")))
    emit_plot_data(rows, "split_vs_algo", tmp_path / "p.csv")
    totals = {}
    with open(tmp_path / "p.csv") as fh:
        for rec in csv.DictReader(fh):
            key = (rec["algorithm"], rec["budget"])
            totals[key] = totals.get(key, 0.0) + float(rec["share_pct"])
    assert totals and all(v == pytest.approx(100.0) for v in totals.values())


def test_influence_plot_matches_golden(tmp_path):
    cfg = small_config(algorithms=("rg", "tpg", "random"), budgets=(500, 1000, 1500, 2000))
    emit_plot_data(run_experiment(cfg), "influence_vs_budget", tmp_path / "p.csv")
    with open(tmp_path / "p.csv") as a, open(GOLDEN) as b:
        got, want = list(csv.reader(a)), list(csv.reader(b))
    assert len(got) == len(want) and got[0] == want[0]
    for g, w in zip(got[1:], want[1:]):
        assert g[:3] == w[:3]
        assert float(g[3]) == pytest.approx(float(w[3]), abs=1e-9)


def test_plot_rejects_empty_and_unknown(tmp_path):
    with pytest.raises(ConfigError):
        emit_plot_data([], "time_vs_budget", tmp_path / "p.csv")
    with pytest.raises(ConfigError):
        emit_plot_data([ResultRow("rg", 1, 0, 0, 0, 0, 0, 0, 1, 0)], "pie", tmp_path / "p.csv")


# ---------------------------------------------------------------- CLI


def test_cli_gen_run_diagnose_plot(tmp_path, capsys):
    inst = tmp_path / "inst"
    assert main(["gen", "--users", "8", "--billboards", "2", "--edges", "10", "--seed", "3", "--out", str(inst), "--budget", "1500"]) == 0
    assert sorted(os.listdir(inst)) == ["billboards.csv", "graph.csv", "instance.json", "slots.csv", "trajectories.csv"]

    out = tmp_path / "r.csv"
    code = main(["run", "--instance", str(inst), "--algo", "rg", "tpg", "--budget", "500", "1500", "--exact", "--out", str(out)])
    assert code == 0
    rows = read_results(out)
    assert len(rows) == 4

    capsys.readouterr()
    assert main(["diagnose", "--instance", str(inst), "--max-elems", "4", "--optimum"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert 0 < rep["gamma"] <= 1 and 0 <= rep["alpha"] <= 1 and "optimum" in rep

    assert main(["plot", "--results", str(out), "--kind", "influence_vs_budget", "--out", str(tmp_path / "p.csv")]) == 0
    assert (tmp_path / "p.csv").read_text().startswith("algorithm,budget,component,value\n")


def test_cli_run_to_stdout(capsys):
    assert main(["run", "--algo", "topk", "--budget", "100", "--sims", "20"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == ",".join(RESULT_HEADER)


def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('algorithms = ["nope"]\n')
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2


def test_cli_argument_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--algo", "nope"])
    assert exc.value.code == 2


def test_cli_data_error_exit_code(tmp_path):
    assert main(["run", "--instance", str(tmp_path / "nowhere"), "--budget", "1"]) == 3
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "trajectories.csv").write_text("user_id,lat,lon,t_start,t_end\n1,x,2,3,4\n")
    assert main(["diagnose", "--instance", str(broken)]) == 3


def test_cli_diagnose_large_graph_is_config_error(tmp_path):
    inst = tmp_path / "big"
    main(["gen", "--users", "10", "--billboards", "1", "--edges", "40", "--out", str(inst)])
    assert main(["diagnose", "--instance", str(inst)]) == 2
