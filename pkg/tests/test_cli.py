import json

import pytest

from pdklab.cli import main


def write_spec(tmp_path, name, payload):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(payload))
    return str(path)


@pytest.fixture()
def specs(tmp_path):
    out = {}
    for name in ("gaussian", "poly_neg", "sine_asym", "szego", "re_product",
                 "cosine"):
        out[name] = write_spec(tmp_path, name, {"kind": "builtin", "name": name})
    out["exp_lift"] = write_spec(tmp_path, "exp_lift",
                                 {"kind": "lift", "function": "exp",
                                  "star": "identity"})
    return out


def run_cli(cmd, spec, out, *extra):
    return main([cmd, "--kernel", spec, "--out", str(out), "--trials", "150",
                 "--seed", "42", *extra])


def test_psd_check_gaussian_exit_zero(specs, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run_cli("psd-check", specs["gaussian"], out) == 0
    report = json.loads(out.read_text())
    assert report["schema"] == "pdklab-report-v1"
    assert report["sections"]["psd"]["status"] == "pass"
    assert report["sections"]["psd"]["report"]["pass_count"] == 150


def test_psd_check_poly_neg_exit_one(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("psd-check", specs["poly_neg"], out) == 1
    report = json.loads(out.read_text())
    sec = report["sections"]["psd"]["report"]
    assert sec["fail_count"] >= 1
    assert sec["first_failure"]["points"]


def test_malformed_spec_exit_two(tmp_path, capsys):
    bad = write_spec(tmp_path, "bad", {"kind": "builtin", "name": "nope"})
    assert main(["psd-check", "--kernel", bad, "--out", str(tmp_path / "r.json")]) == 2
    err = capsys.readouterr().err
    assert "name" in err


def test_missing_file_exit_two(tmp_path):
    assert main(["props", "--kernel", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "r.json")]) == 2


def test_props_command(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("props", specs["gaussian"], out) == 0
    report = json.loads(out.read_text())
    assert report["sections"]["properties"]["violated"] == []


def test_ineq_command_witness_terms(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("ineq", specs["gaussian"], out) == 0
    report = json.loads(out.read_text())
    suites = report["sections"]["ineq"]["suites"]
    assert set(suites) == {"three_point", "four_point", "four_point_shifted",
                           "five_point", "block"}
    worst = suites["four_point"]["worst"]
    assert "β0" in worst["terms"] and "γ" in worst["terms"]


def test_findiff_command(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("findiff", specs["gaussian"], out) == 0
    report = json.loads(out.read_text())
    suites = report["sections"]["findiff"]["suites"]
    assert suites["identity_plain"]["failures"] == 0
    assert suites["identity_shifted"]["failures"] == 0
    assert suites["beta_decay"]["non_decaying"] == 0


def test_holo_command_szego(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("holo", specs["szego"], out) == 0
    report = json.loads(out.read_text())
    assert report["sections"]["holo"]["status"] == "pass"


def test_lift_command(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("lift", specs["exp_lift"], out) == 0
    report = json.loads(out.read_text())
    suites = report["sections"]["lift"]["suites"]
    assert suites["pd_check"]["fail_count"] == 0
    assert suites["codiff"]["S"]


def test_lift_command_rejects_builtin_spec(specs, tmp_path):
    assert run_cli("lift", specs["gaussian"], tmp_path / "r.json") == 2


def test_report_all_gaussian_sections(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("report-all", specs["gaussian"], out) == 0
    report = json.loads(out.read_text())
    secs = report["sections"]
    for name in ("properties", "psd", "ineq", "findiff"):
        assert secs[name]["status"] == "pass", name
    assert secs["holo"]["status"] == "skipped"
    assert report["claims"]["psd"]


def test_report_all_sine_asym_p2_gate(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("report-all", specs["sine_asym"], out) == 1
    report = json.loads(out.read_text())
    secs = report["sections"]
    assert secs["properties"]["status"] == "violation"
    assert "p2" in secs["properties"]["violated"]
    for name in ("psd", "ineq", "findiff", "holo"):
        assert secs[name]["status"] == "skipped", name


def test_report_all_re_product_hypothesis_only(specs, tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("report-all", specs["re_product"], out) == 0
    report = json.loads(out.read_text())
    secs = report["sections"]
    assert secs["holo"]["status"] == "hypothesis_not_met"
    for name in ("properties", "psd", "ineq", "findiff"):
        assert secs[name]["status"] == "pass", name


def test_reports_byte_identical(specs, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert run_cli("report-all", specs["cosine"], a) == 0
    assert run_cli("report-all", specs["cosine"], b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_different_seed_changes_draws(specs, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    run_cli("psd-check", specs["gaussian"], a)
    main(["psd-check", "--kernel", specs["gaussian"], "--out", str(b),
          "--trials", "150", "--seed", "43"])
    ra = json.loads(a.read_text())["sections"]["psd"]["report"]
    rb = json.loads(b.read_text())["sections"]["psd"]["report"]
    assert ra["worst_points"] != rb["worst_points"]
