"""Command-line behavior: formats, exit codes, config defaults, parallel runs."""

import json
import subprocess
import sys

import pytest

from omska import cli

BSC = ["--bsc", "0.02,0.15"]


def _run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out


def test_bounds_csv_shape(capsys):
    code, out = _run(capsys, ["bounds", *BSC, "--n-range", "1000:3000:1000",
                              "--format", "csv"])
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "bound_name,n,eps,sigma,value_bits,rate"
    assert len(lines) == 1 + 1 + 5 * 3  # header, capacity, five bounds x three n
    cap = lines[1].split(",")
    assert cap[0] == "capacity" and cap[4] == ""
    assert float(cap[5]) == pytest.approx(0.502353, abs=1e-6)
    assert lines[2].startswith("theorem_main,1000,")
    assert lines[-1].startswith("hr_concat,3000,")


def test_bounds_json_values(capsys):
    code, out = _run(capsys, ["bounds", *BSC, "--n", "2000"])
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 6
    by_name = {r["bound_name"]: r for r in rows}
    assert by_name["capacity"]["value_bits"] is None
    assert by_name["theorem_main"]["value_bits"] == pytest.approx(316.7244, abs=1e-3)
    assert by_name["berry_esseen"]["rate"] == pytest.approx(854.1705 / 2000, abs=1e-6)
    assert by_name["hr_linear"]["value_bits"] == 0.0


def test_plan_feasible_exit_codes(capsys):
    code, out = _run(capsys, ["plan", *BSC, "--n", "1000"])
    assert code == 0
    plan = json.loads(out)
    assert plan["mode"] == "theorem_main"
    assert plan["key_bits"] == 5 and plan["feasible"] is True
    code, out = _run(capsys, ["plan", *BSC, "--n", "900"])
    assert code == 1
    assert json.loads(out)["feasible"] is False


def test_plan_desk_mode(capsys):
    code, out = _run(capsys, ["plan", *BSC, "--n", "32", "--mode", "desk_exact"])
    assert code == 1  # desk scale never clears 1 key bit at these targets
    plan = json.loads(out)
    assert plan["ball_radius"] == 3 and plan["list_size"] == 5489
    assert plan["recon_bits"] == 18


def test_run_reports_and_exit_matches_meets(capsys):
    argv = ["run", *BSC, "--n", "16", "--mode", "desk_exact", "--trials", "300",
            "--seed", "3"]
    code, out = _run(capsys, argv)
    est = json.loads(out)
    assert est["trials"] == 300
    assert sum(est["outcome_counts"].values()) == 300
    assert est["plan"]["n"] == 16
    assert code == (0 if est["meets_target"] else 1)
    assert est["wilson_lower"] <= est["failure_rate"] <= est["wilson_upper"]


def test_run_jobs_do_not_change_counts(capsys):
    argv = ["run", *BSC, "--n", "16", "--mode", "desk_exact", "--trials", "120",
            "--seed", "9"]
    _, out1 = _run(capsys, argv)
    _, out2 = _run(capsys, argv + ["--jobs", "2"])
    a, b = json.loads(out1), json.loads(out2)
    assert a["outcome_counts"] == b["outcome_counts"]
    assert a["failure_rate"] == b["failure_rate"]


def test_verify_uniform_block(capsys):
    code, out = _run(capsys, ["verify", "--bsc", "0.5,0.5", "--n", "4",
                              "--eps", "0.5", "--sigma", "0.5"])
    assert code == 0
    rep = json.loads(out)
    assert rep["exact"] is True
    assert rep["key_bits"] == 0 and rep["sd"] == 0.0
    assert rep["avg_min_entropy"] == pytest.approx(4.0)
    assert rep["plan"]["mode"] == "desk_exact"


def test_verify_sampled_pairs(capsys):
    code, out = _run(capsys, ["verify", *BSC, "--n", "9", "--seed-pairs", "50",
                              "--seed", "7"])
    rep = json.loads(out)
    assert rep["exact"] is False and rep["seed_pairs"] == 50
    assert rep["std_error"] is not None
    assert code == (0 if rep["meets_target"] else 1)


def test_verify_sampled_recon_seeds(capsys):
    code, out = _run(capsys, ["verify", *BSC, "--n", "9", "--recon-seeds", "8",
                              "--seed", "7"])
    rep = json.loads(out)
    assert rep["exact"] is False and rep["seed_pairs"] == 8 * 512
    assert rep["std_error"] is not None
    assert code == (0 if rep["meets_target"] else 1)


def test_threshold_single_bound(capsys):
    code, out = _run(capsys, ["threshold", *BSC, "--mode", "berry_esseen"])
    assert code == 0
    assert json.loads(out) == {"berry_esseen": 67}
    code, out = _run(capsys, ["threshold", *BSC, "--mode", "hr_linear"])
    assert code == 0
    assert json.loads(out) == {"hr_linear": 2219549}


def test_threshold_all_with_ceiling(capsys):
    code, out = _run(capsys, ["threshold", *BSC, "--mode", "hr_linear",
                              "--ceiling", "1000000"])
    assert code == 1
    assert json.loads(out) == {"hr_linear": None}
    code, out = _run(capsys, ["threshold", *BSC])
    assert code == 0
    result = json.loads(out)
    assert set(result) == {"theorem_main", "remark", "berry_esseen", "hr_linear",
                           "hr_concat"}
    assert result["hr_concat"] == 1143045317
    assert 900 < result["theorem_main"] <= 1000


def test_usage_errors_exit_2(capsys):
    bad_calls = [
        ["bounds", "--n", "100"],                       # no source
        ["bounds", *BSC],                              # no n
        ["bounds", "--bsc", "0.02", "--n", "100"],     # malformed pair
        ["bounds", *BSC, "--source", "x.json", "--n", "100"],  # both sources
        ["plan", *BSC, "--n", "100", "--format", "csv"],  # csv not row output
        ["bounds", *BSC, "--n-range", "10:5:1"],       # empty range
        ["bounds", *BSC, "--n-range", "10:20"],        # wrong arity
        ["threshold", *BSC, "--mode", "nope"],
        ["plan", *BSC, "--n", "100", "--eps", "2.0"],  # library domain error
        ["verify", *BSC, "--n", "13"],                 # over the exact-n cap
        ["bounds", "--source", "/no/such/file.json", "--n", "10"],
    ]
    for argv in bad_calls:
        code = cli.main(argv)
        capsys.readouterr()
        assert code == 2, argv


def test_inline_source_json(capsys):
    desc = json.dumps({"generator": "bsc_chain", "p": 0.02, "q": 0.15})
    code, out = _run(capsys, ["plan", "--source", desc, "--n", "1000"])
    assert code == 0
    assert json.loads(out)["key_bits"] == 5


def test_budget_exit_3(capsys, monkeypatch):
    monkeypatch.setenv("OMSKA_BUDGET", "10")
    code = cli.main(["run", *BSC, "--n", "32", "--mode", "desk_exact",
                     "--trials", "1"])
    capsys.readouterr()
    assert code == 3


def test_config_defaults_and_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bsc": "0.02,0.15", "n": 1000}))
    code, out = _run(capsys, ["plan", "--config", str(cfg)])
    assert code == 0
    assert json.loads(out)["n"] == 1000
    # explicit flag beats the config value
    code, out = _run(capsys, ["plan", "--config", str(cfg), "--n", "2000"])
    assert code == 0
    assert json.loads(out)["n"] == 2000


def test_config_errors(capsys, tmp_path):
    assert cli.main(["plan", "--config"]) == 2
    capsys.readouterr()
    missing = tmp_path / "absent.json"
    assert cli.main(["plan", "--config", str(missing)]) == 2
    capsys.readouterr()
    bad = tmp_path / "list.json"
    bad.write_text("[1, 2]")
    assert cli.main(["plan", "--config", str(bad)]) == 2
    capsys.readouterr()


def test_out_writes_file(capsys, tmp_path):
    target = tmp_path / "rows.json"
    code, out = _run(capsys, ["bounds", *BSC, "--n", "1000", "--out", str(target)])
    assert code == 0
    assert out == ""
    rows = json.loads(target.read_text())
    assert len(rows) == 6


def test_source_file_argument(capsys, tmp_path):
    src_file = tmp_path / "src.json"
    src_file.write_text(json.dumps({"generator": "bsc_chain", "p": 0.02,
                                    "q": 0.15}))
    code, out = _run(capsys, ["plan", "--source", str(src_file), "--n", "1000"])
    assert code == 0
    assert json.loads(out)["feasible"] is True


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-c",
                           "import omska.cli, sys; "
                           "sys.exit(omska.cli.main(['bounds', '--bsc', '0.02,0.15', "
                           "'--n', '1000']))"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)[0]["bound_name"] == "capacity"
