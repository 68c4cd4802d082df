"""Command-line front end, driven in-process through main(argv)."""

import io
import json

import pytest

from didlab.cli import main
from didlab.corpus import shipped_names, shipped_text
from didlab.estimators import did_switchers, mts_bounds
from didlab.harness import read_panel_csv


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- scenarios ---------------------------------------------------------------------


def test_scenarios_catalog(capsys):
    code, out, _ = run(capsys, "scenarios")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 7
    tags = {l.split()[0] for l in lines}
    assert tags == {
        "past_outcome_selection",
        "no_learning",
        "treated_arm_learning",
        "control_arm_learning",
        "roy_repeated",
        "roy_irreversible",
        "optimal_stopping",
    }
    roy_line = next(l for l in lines if l.startswith("roy_repeated"))
    assert "roy_repeated" in roy_line.split("shipped:")[1]


def test_every_shipped_name_appears(capsys):
    _, out, _ = run(capsys, "scenarios")
    for name in shipped_names():
        assert name in out


# --- validate ----------------------------------------------------------------------


def test_validate_shipped_ok(capsys):
    code, out, _ = run(capsys, "validate", "roy_repeated")
    assert code == 0
    report = json.loads(out)
    assert report["ok"] is True and report["violations"] == []


def test_validate_bad_scenario_exits_1(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"scenario": "roy_repeated", "pmf": [[0, 0, 0, 0, 0.5]]}')
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 1
    report = json.loads(out)
    assert report["ok"] is False
    assert any(v["rule"] == "pmf-sum" for v in report["violations"])


def test_validate_malformed_json_exits_2(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{oops")
    code, out, err = run(capsys, "validate", str(path))
    assert code == 2
    assert out == ""
    assert "[parse-error]" in err


def test_missing_config_file_exits_2(capsys):
    code, _, err = run(capsys, "validate", "no_such_file.json")
    assert code == 2
    assert "[io-error]" in err


def test_stdin_config(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(shipped_text("known_means")))
    code, out, _ = run(capsys, "validate", "-")
    assert code == 0
    assert json.loads(out)["ok"] is True


# --- truth -------------------------------------------------------------------------


def test_truth_exact_block(capsys):
    code, out, _ = run(capsys, "truth", "control_arm_learning")
    assert code == 0
    block = json.loads(out)
    assert block["scenario_id"] == "control_arm_learning"
    assert block["pt_deviation"] == pytest.approx(0.64, abs=1e-12)
    assert block["true_att_switchers"] == pytest.approx(0.18, abs=1e-12)
    assert block["plugin"]["att_stationary"] == pytest.approx(0.18, abs=1e-12)


def test_truth_on_invalid_scenario_exits_1(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"scenario": "roy_repeated", "pmf": [[0, 0, 0, 0, 0.5]]}')
    code, out, err = run(capsys, "truth", str(path))
    assert code == 1
    assert out == ""
    assert "invalid scenario: [pmf-sum]" in err


# --- simulate ----------------------------------------------------------------------


def test_simulate_stdout_deterministic(capsys):
    code, out1, _ = run(capsys, "simulate", "roy_repeated", "--n", "40", "--seed", "5")
    assert code == 0
    lines = out1.splitlines()
    assert lines[0] == "unit,d0,d1,y0,y1"
    assert len(lines) == 41
    _, out2, _ = run(capsys, "simulate", "roy_repeated", "--n", "40", "--seed", "5")
    assert out2 == out1
    _, out3, _ = run(capsys, "simulate", "roy_repeated", "--n", "40", "--seed", "6")
    assert out3 != out1


def test_simulate_latent_columns(capsys):
    code, out, _ = run(
        capsys, "simulate", "roy_repeated", "--n", "10", "--seed", "5", "--emit-latent"
    )
    assert code == 0
    assert out.splitlines()[0] == "unit,d0,d1,y0,y1,y00,y01,y10,y11"


def test_simulate_to_directory(capsys, tmp_path):
    out_dir = tmp_path / "sim"
    code, out, err = run(
        capsys, "simulate", "known_means", "--n", "25", "--out", str(out_dir)
    )
    assert code == 0
    assert out == ""
    assert f"wrote {out_dir / 'panel.csv'}" in err
    panel = read_panel_csv(out_dir / "panel.csv")
    assert panel.n == 25


def test_simulate_to_csv_file(capsys, tmp_path):
    target = tmp_path / "mine.csv"
    code, _, err = run(capsys, "simulate", "known_means", "--n", "8", "--out", str(target))
    assert code == 0
    assert target.exists() and "mine.csv" in err


def test_simulate_bad_seed_exits_2(capsys):
    code, _, err = run(capsys, "simulate", "known_means", "--seed", "-3")
    assert code == 2
    assert "[schema-error]" in err


# --- estimate ----------------------------------------------------------------------


def test_estimate_matches_direct_calls(capsys, tmp_path):
    panel_path = tmp_path / "panel.csv"
    run(capsys, "simulate", "roy_repeated", "--n", "300", "--seed", "2", "--out", str(panel_path))
    code, out, err = run(capsys, "estimate", "roy_repeated", "--panel", str(panel_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "estimator_id,value,lower,upper"
    # sharp-only estimators are skipped on this fuzzy design, with a note
    assert "skipping did_sharp" in err and "not-sharp-design" in err
    table = {l.split(",")[0]: l.split(",") for l in lines[1:]}
    assert set(table) == {"did_switchers", "att_forward_stationary", "mts_bounds"}

    panel = read_panel_csv(panel_path)
    want = did_switchers(panel).value
    assert float(table["did_switchers"][1]) == pytest.approx(want, abs=1e-12)
    assert table["did_switchers"][2] == "" and table["did_switchers"][3] == ""
    bounds = mts_bounds(panel).value
    assert table["mts_bounds"][1] == ""
    assert float(table["mts_bounds"][2]) == pytest.approx(bounds.lower, abs=1e-12)
    assert float(table["mts_bounds"][3]) == pytest.approx(bounds.upper, abs=1e-12)


def test_estimate_missing_panel_exits_2(capsys):
    code, _, err = run(capsys, "estimate", "roy_repeated", "--panel", "nope.csv")
    assert code == 2
    assert "[io-error]" in err


# --- experiment --------------------------------------------------------------------


def test_experiment_writes_all_outputs(capsys, tmp_path):
    out_dir = tmp_path / "exp"
    code, out, err = run(
        capsys,
        "experiment",
        "stationary_scale",
        "--n",
        "200",
        "--reps",
        "3",
        "--seed",
        "11",
        "--out",
        str(out_dir),
    )
    assert code == 0
    for name in ("summary.json", "estimates.csv", "oracle.csv", "panel.csv"):
        assert (out_dir / name).exists()
        assert f"wrote {out_dir / name}" in err
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["replications"] == 3 and summary["n"] == 200
    assert summary["oracle"]["plugin"]["did_sharp"] == pytest.approx(3.0, abs=1e-12)


def test_experiment_reruns_byte_identical(capsys, tmp_path):
    argv = ["experiment", "known_means", "--n", "150", "--reps", "2", "--seed", "4"]
    run(capsys, *argv, "--out", str(tmp_path / "a"))
    run(capsys, *argv, "--out", str(tmp_path / "b"))
    for name in ("summary.json", "estimates.csv", "oracle.csv", "panel.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_experiment_requires_output_dir(capsys):
    code, _, err = run(capsys, "experiment", "known_means")
    assert code == 2
    assert "needs an output directory" in err


def test_experiment_rejects_invalid_scenario(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"scenario": "roy_repeated", "pmf": [[0, 0, 0, 0, 0.5]]}')
    code, _, err = run(capsys, "experiment", str(path), "--out", str(tmp_path / "o"))
    assert code == 1
    assert "invalid scenario" in err
    assert not (tmp_path / "o").exists()


# --- parser ------------------------------------------------------------------------


def test_no_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit):
        main([])


def test_unknown_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit):
        main(["frobnicate"])
