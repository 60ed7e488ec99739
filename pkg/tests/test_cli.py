import json
import subprocess
import sys

import pytest

from protectability.cli import EXIT_DATA, EXIT_USAGE, main

SCHEMA = "task=ya,private=ypri"


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    paths = {}
    for name, args in {
        "ov": ["--family", "overlap", "--seed", "7"],
        "ov4": ["--family", "overlap", "--seed", "7", "--n-task", "2", "--n-private", "1", "--n-noise", "1"],
        "xor": ["--family", "xor", "--n-samples", "4000", "--seed", "1"],
    }.items():
        paths[name] = d / f"{name}.csv"
        assert main(["gen", *args, "--out", str(paths[name])]) == 0
    return paths


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_gen_xor_truth_table(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["gen", "--family", "xor", "--n-samples", "4", "--out", str(out)]) == 0
    assert out.read_text().splitlines() == ["z1,z2,ya,ypri", "0,0,0,0", "0,1,1,0", "1,0,1,0", "1,1,0,0"]
    assert (tmp_path / "x.json").exists()


def test_ppe_xor_independent_private(capsys, data):
    report = run_json(capsys, ["ppe", "--data", str(data["xor"]), "--schema", SCHEMA])
    assert report["score"] == 1.0 and report["degenerate"] is False


def test_report_key_order(capsys, data):
    report = run_json(capsys, ["ppe", "--data", str(data["ov4"]), "--schema", SCHEMA])
    assert list(report) == ["kind", "score", "degenerate", "selected_features", "contributions", "config",
                            "provenance"]
    assert set(report["contributions"]) >= {"task", "private"}
    assert {"epsilon", "m_samples", "bins", "estimator", "sampler", "degenerate_tolerance",
            "protectability_threshold", "seed", "scheme"} <= set(report["config"])
    assert report["provenance"]["tool_version"]


def test_exact_versus_large_sample(capsys, data):
    exact = run_json(capsys, ["ppe", "--data", str(data["ov"]), "--schema", SCHEMA, "--sampler", "exact"])
    mc = run_json(capsys, ["ppe", "--data", str(data["ov"]), "--schema", SCHEMA, "--sampler", "unbiased",
                           "--samples", "5000", "--seed", "1"])
    assert abs(exact["score"] - mc["score"]) < 0.02


def test_missing_schema_is_usage_error(data):
    with pytest.raises(SystemExit) as exc:
        main(["ppe", "--data", str(data["ov"])])
    assert exc.value.code == EXIT_USAGE


def test_bad_data_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("z1,ya,ypri\n0.5,0\n")
    assert main(["ppe", "--data", str(bad), "--schema", SCHEMA]) == EXIT_DATA
    assert "row 2" in capsys.readouterr().err


def test_lp_zero_sigma_matches_ppe(capsys, data):
    p = run_json(capsys, ["ppe", "--data", str(data["ov"]), "--schema", SCHEMA, "--seed", "3"])
    lp = run_json(capsys, ["lp", "--data", str(data["ov"]), "--schema", SCHEMA, "--seed", "3",
                           "--scheme", "gaussian:sigma=0"])
    assert lp["kind"] == "LPScore" and lp["config"]["scheme"] == "gaussian:sigma=0.0"
    assert (lp["score"], lp["selected_features"]) == (p["score"], p["selected_features"])


def test_lp_prune_unprotectable(capsys, data):
    lp = run_json(capsys, ["lp", "--data", str(data["ov4"]), "--schema", SCHEMA, "--scheme", "prune:features=z3,z4"])
    assert lp["score"] == 1.0


def test_lp_prune_all_is_degenerate_but_exits_zero(capsys, data):
    lp = run_json(capsys, ["lp", "--data", str(data["ov4"]), "--schema", SCHEMA,
                           "--scheme", "prune:features=z1,z2,z3,z4"])
    assert lp["degenerate"] is True and lp["score"] == 0.0


@pytest.mark.parametrize("desc", ["gaussian", "prune:features=nope", "gaussian:sigma=abc"])
def test_malformed_scheme_is_usage_error(data, desc):
    with pytest.raises(SystemExit) as exc:
        main(["lp", "--data", str(data["ov"]), "--schema", SCHEMA, "--scheme", desc])
    assert exc.value.code == EXIT_USAGE


def test_ep(capsys, data):
    ev = run_json(capsys, ["ep", "--data", str(data["ov"]), "--schema", SCHEMA,
                           "--scheme", "gaussian:sigma=0.5", "--scheme", "prune:features=z5,z6,z7,z8"])
    assert ev["kind"] == "EP" and ev["score"] == max(s["ep"] for s in ev["schemes"])
    assert ev["best_scheme"] == "prune:features=z5,z6,z7,z8"


def test_ep_without_schemes_is_usage_error(data):
    with pytest.raises(SystemExit) as exc:
        main(["ep", "--data", str(data["ov"]), "--schema", SCHEMA])
    assert exc.value.code == EXIT_USAGE


def test_bench_counts(capsys, data):
    assert main(["bench", "--data", str(data["ov"]), "--schema", SCHEMA, "--m-list", "50,200",
                 "--repeats", "1", "--no-time"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "pipeline,m_samples,game_evaluations,distinct_subsets"
    rows = [line.split(",") for line in lines[1:]]
    assert [r[0] for r in rows] == ["mc", "mc", "exact"]
    assert int(rows[1][2]) == 4 * int(rows[0][2]) == 4 * 2 * 8 * 50 * 2


def test_out_flag(tmp_path, data):
    out = tmp_path / "r.json"
    assert main(["ppe", "--data", str(data["ov4"]), "--schema", SCHEMA, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["kind"] == "PScore"


@pytest.mark.parametrize("cmd", ["ppe", "lp", "ep", "bench"])
def test_help_lists_shared_flags(cmd, capsys):
    with pytest.raises(SystemExit):
        main([cmd, "--help"])
    text = capsys.readouterr().out
    for flag in ["--data", "--schema", "--epsilon", "--samples", "--seed", "--bins", "--estimator", "--sampler",
                 "--threads", "--out"]:
        assert flag in text
    if cmd in ("lp", "ep"):
        assert "--scheme" in text


def test_stamp_sets_timestamp(capsys, data):
    r = run_json(capsys, ["ppe", "--data", str(data["ov4"]), "--schema", SCHEMA, "--stamp"])
    assert r["provenance"]["timestamp"]


def test_module_entry_point(data):
    proc = subprocess.run([sys.executable, "-m", "protectability", "ppe", "--data", str(data["xor"]),
                           "--schema", SCHEMA, "--samples", "20"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["score"] == 1.0
