import csv
import io
import json
import subprocess
import sys

import pytest

from heisenberg_wave.cli import (EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VERDICT, RunConfig, UsageError,
                                 known_claim, main)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def payload(text):
    data = json.loads(text)
    assert set(data) == {"tool_version", "config_hash", "results"}
    return data["results"][0]


def write_config(tmp_path, body):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(body))
    return str(path)


# --- usage -----------------------------------------------------------------------

def test_no_arguments_is_usage_error(capsys):
    code, _, err = run(capsys)
    assert code == EXIT_USAGE
    assert "usage" in err


def test_unknown_subcommand(capsys):
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE


def test_installed_entry_point():
    proc = subprocess.run([sys.executable, "-m", "heisenberg_wave.cli", "admissible", "--p", "6", "--r", "6",
                           "--which", "Cor1.3"], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["results"][0]["admissible"] is True


@pytest.mark.parametrize("bad", ["4.5", "1e2", "0.25"])
def test_float_exponents_are_refused(capsys, bad):
    assert run(capsys, "admissible", "--p", bad, "--r", "2")[0] == EXIT_USAGE


def test_admissible_energy_pair(capsys):
    code, out, _ = run(capsys, "admissible", "--p", "inf", "--r", "2")
    assert code == EXIT_OK
    res = payload(out)
    assert (res["rho_min"], res["rho_max"], res["admissible"]) == ("1", "1", True)


def test_admissible_respects_dimension(capsys):
    _, out, _ = run(capsys, "admissible", "--p", "7", "--r", "14/3", "--which", "Thm1.2-c", "--N", "4")
    assert payload(out)["rho_min"] == "-1"
    assert run(capsys, "admissible", "--p", "7", "--r", "14/3", "--N", "5")[0] == EXIT_USAGE


# --- configuration ---------------------------------------------------------------

def test_known_claims():
    assert known_claim("sharpness.j_exponent[j>=0]")
    assert known_claim("dispersive.t_slope[j=-2].r_squared")
    assert not known_claim("sharpness.everything")


@pytest.mark.parametrize("body", [
    {"colour": "blue"},
    {"tolerances": {"no.such.claim": [0, 1]}},
    {"tolerances": {"counterexample.window_gap": [1]}},
    {"grids": {"j_list": [0, 9]}},
    {"grids": {"t_window": [10, 1]}},
    {"output": {"format": "xml"}},
    {"n": 0},
])
def test_bad_configs_are_rejected(capsys, tmp_path, body):
    assert run(capsys, "admissible", "--p", "inf", "--r", "2", "--config", write_config(tmp_path, body))[0] == EXIT_USAGE


def test_config_digest_depends_on_seed():
    cfg = RunConfig()
    assert cfg.digest(0) == RunConfig().digest(0)
    assert cfg.digest(0) != cfg.digest(1)
    with pytest.raises(UsageError):
        RunConfig(output_format="yaml")


# --- evaluation subcommands ----------------------------------------------------------

def test_propagate_output_is_byte_identical(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        code, _, _ = run(capsys, "propagate", "--j", "0", "--t", "5", "--r", "0.3", "--sigma", "-1.2", "0.5",
                         "--output", str(p))
        assert code == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    res = payload(paths[0].read_text())
    assert res["grid"] == [[0.3, -1.2], [0.3, 0.5]]
    assert "runtime" not in json.dumps(res)


def test_propagate_routes_agree(capsys):
    values = {}
    for route in ("grid", "mode"):
        code, out, _ = run(capsys, "propagate", "--j", "0", "--t", "5", "--r", "0.3", "--sigma", "-1.2",
                           "--route", route, "--tol", "1e-9")
        assert code == EXIT_OK
        values[route] = complex(*payload(out)["values"][0])
    assert abs(values["grid"] - values["mode"]) <= 1e-7


def test_propagate_csv(capsys):
    code, out, _ = run(capsys, "propagate", "--j", "1", "--t", "2", "--sigma", "0", "1", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["r", "sigma", "re", "im"]
    assert len(rows) == 3


def test_mode_route_has_no_cosine(capsys):
    assert run(capsys, "propagate", "--j", "0", "--t", "1", "--kind", "cos", "--route", "mode")[0] == EXIT_USAGE


def test_kernel_then_besov(capsys, tmp_path):
    store = str(tmp_path / "k.npz")
    code, out, _ = run(capsys, "kernel", "--tag", "full", "--j", "0", "--store", store)
    assert code == EXIT_OK
    k = payload(out)
    assert k["l2_norm"] > 0 and k["sup"] >= k["l2_norm"] / 1e6
    code, out, _ = run(capsys, "besov", "--store", store, "--rho", "0", "--q", "2", "--r", "2", "--window", "-4", "4")
    assert code == EXIT_OK
    assert 0.5 <= payload(out)["ratio_to_l2"] <= 2.0


def test_besov_without_store(capsys, tmp_path):
    code, _, err = run(capsys, "besov", "--store", str(tmp_path / "missing.npz"), "--rho", "0", "--q", "2", "--r", "2")
    assert code == EXIT_USAGE
    assert "kernel subcommand" in err


def test_budget_overrun_is_numerical_failure(capsys):
    code, _, err = run(capsys, "sharpness", "--j-list", "0,1,2", "--t-min", "10", "--t-max", "100",
                       "--per-decade", "4", "--budget", "1e-9")
    assert code == EXIT_NUMERICAL
    assert "numerical failure" in err


def test_small_sharpness_run(capsys):
    code, out, err = run(capsys, "sharpness", "--j-list", "0,1,2", "--t-min", "10", "--t-max", "100",
                         "--per-decade", "4")
    res = payload(out)
    by_id = {v["claim_id"]: v for v in res["verdicts"]}
    assert by_id["sharpness.t_slope[v_0]"]["passed"]
    assert by_id["consistency.lower_le_upper"]["passed"]
    # the j >= 0 window (4..7) was not scanned, so no exponent verdict exists
    assert "sharpness.j_exponent[j>=0]" not in by_id
    assert code == (EXIT_OK if all(v["passed"] for v in by_id.values()) else EXIT_VERDICT)
    assert "claim" in err


# --- report and tolerance overrides -----------------------------------------------------

def _fake_run(tmp_path, observed):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"results": [{"verdicts": [
        {"claim_id": "counterexample.window_gap", "expected": [1.0, "inf"], "observed": observed}]}]}))
    return str(path)


def test_report_passes_and_fails(capsys, tmp_path):
    assert run(capsys, "report", _fake_run(tmp_path, 1.4))[0] == EXIT_OK
    code, out, _ = run(capsys, "report", _fake_run(tmp_path, 0.3))
    assert code == EXIT_VERDICT
    assert payload(out)["failed"] == 1


def test_tolerance_override(capsys, tmp_path):
    cfg = write_config(tmp_path, {"tolerances": {"counterexample.window_gap": [0.2, 5]}})
    assert run(capsys, "report", _fake_run(tmp_path, 0.3), "--config", cfg)[0] == EXIT_OK


def test_report_on_unreadable_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "report", str(bad))[0] == EXIT_USAGE
