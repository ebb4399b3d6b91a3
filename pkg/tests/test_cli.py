import json
import os

import pandas as pd
import pytest

from symuniv.cli import RunConfig, build_parser, run_command
from symuniv.errors import ConfigError


@pytest.fixture(autouse=True)
def cache_env(tmp_path, monkeypatch):
    cache = tmp_path / "cache"
    monkeypatch.setenv("SYMUNIV_CACHE", str(cache))
    return cache


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_coeffs_csv(tmp_path, cache_env, capsys):
    out = tmp_path / "delta.csv"
    assert run_command(["coeffs", "--n", "50", "--out", str(out), "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["rows"] == 50
    df = pd.read_csv(out, dtype={"c_exact": str})
    assert list(df.columns) == ["n", "c_exact", "lambda_norm"]
    assert df.loc[df["n"] == 2, "c_exact"].item() == "-24"
    sidecar = json.loads((tmp_path / "delta.csv.json").read_text())
    assert sidecar["weight"] == 12
    assert sidecar["N"] == 50
    assert sidecar["software"] == "symuniv"
    assert "version" in sidecar and "seed" in sidecar
    assert os.listdir(cache_env)


def test_coeffs_with_kind(tmp_path, capsys):
    out = tmp_path / "delta.csv"
    kind_out = tmp_path / "sym2.csv"
    assert run_command(["coeffs", "--n", "100", "--out", str(out), "--kind", "sym2",
                        "--kind-out", str(kind_out)]) == 0
    assert "kind_csv" in capsys.readouterr().out
    assert list(pd.read_csv(kind_out).columns) == ["n", "lambda_F"]


def test_lvalue_json_is_deterministic(capsys):
    argv = ["lvalue", "--kind", "sym2", "--sigma", "0.9", "--t", "5", "--json"]
    assert run_command(argv) == 0
    first = capsys.readouterr().out
    assert run_command(argv) == 0
    assert capsys.readouterr().out == first
    payload = json.loads(first)
    assert payload["provenance"]["kind"] == "sym2"
    assert payload["provenance"]["weight"] == 12
    assert payload["s"] == {"re": 0.9, "im": 5.0}
    assert payload["mode"] == "smoothed"


def test_lvalue_out_file(tmp_path, capsys):
    out = tmp_path / "artifacts" / "value.json"
    assert run_command(["lvalue", "--kind", "sym1", "--sigma", "2", "--out", str(out)]) == 0
    assert "value:" in capsys.readouterr().out
    assert json.loads(out.read_text())["provenance"]["kind"] == "sym1"


def test_config_errors_are_aggregated(capsys):
    code = run_command(["lvalue", "--kind", "sym9", "--weight", "14", "--sigma", "0.9"])
    assert code == 1
    error = json.loads(capsys.readouterr().err)
    assert error["error"] == "config"
    assert len(error["problems"]) == 2


def test_run_config_validate():
    with pytest.raises(ConfigError) as info:
        RunConfig("random-model", params={"n_shift": 10, "n_model": 10, "T": -1}).validate()
    assert len(info.value.problems) == 3
    RunConfig("lvalue", kind="rs2").validate()
    assert RunConfig("pnt", params={"m": 3}).lkind.label == "sym3"


@pytest.mark.parametrize("argv", [[], ["bogus"], ["lvalue"], ["verify", "--level", "slow"]])
def test_usage_errors(argv):
    assert run_command(argv) == 2


def test_euler_mode_out_of_region(capsys):
    code = run_command(["lvalue", "--kind", "sym2", "--sigma", "0.9", "--mode", "euler",
                        "--n-coeffs", "2000"])
    assert code == 1
    assert json.loads(capsys.readouterr().err)["error"] == "out-of-region"


def test_pnt_json(capsys):
    assert run_command(["pnt", "--m", "2", "--x", "10000", "--delta", "0.5", "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["report"]["m"] == 2
    assert payload["pi_delta"]["delta"] == 0.5
    assert payload["provenance"]["N"] == 10_000


def test_universality_constant_target(tmp_path, capsys):
    table = tmp_path / "table.csv"
    assert run_command(["universality", "--kind", "sym1", "--T", "5", "--dt", "0.1",
                        "--target", "const:1.2", "--table-out", str(table), "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["grid"]["T"] == 5.0
    assert len(pd.read_csv(table)) == 51


def test_universality_jets(capsys):
    assert run_command(["universality", "--kind", "sym2", "--T", "5", "--dt", "0.1",
                        "--jets", "2", "--target", "const:1.0", "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["J"] == 2
    assert payload["target_jets"][0] == {"re": pytest.approx(1.0), "im": pytest.approx(0.0)}


@pytest.mark.parametrize("passed, expected", [(True, 0), (False, 1)])
def test_verify_exit_code(monkeypatch, capsys, passed, expected):
    calls = {}

    def fake_suite(level, cache_dir=None, weight=12, n_jobs=1):
        calls.update(level=level, cache_dir=cache_dir)
        return pd.DataFrame({"name": ["hecke"], "measured": [0.0], "tolerance": [0.0],
                             "passed": [passed], "detail": [""]})

    monkeypatch.setattr("symuniv.verify.verify_suite", fake_suite)
    assert run_command(["verify", "--json"]) == expected
    payload = _json_out(capsys)
    assert payload["passed"] is passed
    assert payload["failing"] == ([] if passed else ["hecke"])
    assert calls["level"] == "quick"
    assert calls["cache_dir"] == os.environ["SYMUNIV_CACHE"]


def test_cache_flag_overrides_env(tmp_path, cache_env):
    other = tmp_path / "other"
    assert run_command(["coeffs", "--n", "20", "--cache", str(other),
                        "--out", str(tmp_path / "c.csv")]) == 0
    assert os.listdir(other)
    assert not cache_env.exists()


def test_parser_modes():
    args = build_parser().parse_args(["lvalue", "--sigma", "1.5", "--mode", "euler"])
    assert args.mode == "euler"
    assert args.kind == "sym2"


def test_missing_target_file(tmp_path, capsys):
    missing = tmp_path / "missing.csv"
    code = run_command(["universality", "--kind", "sym1", "--T", "5", "--dt", "0.1",
                        "--target", f"file:{missing}"])
    assert code == 1
    error = json.loads(capsys.readouterr().err)
    assert error["error"] == "io"
    assert "missing.csv" in error["message"]


def test_empty_target_file(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code = run_command(["universality", "--kind", "sym1", "--T", "5", "--dt", "0.1",
                        "--target", f"file:{empty}"])
    assert code == 1
    assert json.loads(capsys.readouterr().err)["error"] == "io"
