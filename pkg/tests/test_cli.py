import json

from combsplit import __version__
from combsplit.cli import main


def run(*argv):
    return main(list(argv))


def test_generate_row_count_and_determinism(tmp_path):
    out1 = tmp_path / "fib1.csv"
    out2 = tmp_path / "fib2.csv"
    assert run("generate", "--system", "fibonacci", "--R", "1e4",
               "--out", str(out1)) == 0
    assert run("generate", "--system", "fibonacci", "--R", "1e4",
               "--out", str(out2)) == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2
    rows = b1.decode().strip().splitlines()
    assert rows[0].startswith(f"# combsplit {__version__} config_hash=")
    assert rows[1] == "type,m,n,value"
    n_points = len(rows) - 2
    assert abs(n_points - 7236) <= 10


def test_verify_bernoulli_reports_byte_identical(tmp_path):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    assert run("verify", "--suite", "bernoulli", "--seed", "42",
               "--out", str(out1)) == 0
    assert run("verify", "--suite", "bernoulli", "--seed", "42",
               "--out", str(out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()
    doc = json.loads(out1.read_text())
    assert doc["passed"] is True
    assert doc["_meta"]["version"] == __version__


def test_diffract_eta_table(tmp_path):
    out = tmp_path / "eta.csv"
    assert run("diffract", "--system", "thue_morse", "--eta", "32",
               "--out", str(out)) == 0
    rows = out.read_text().strip().splitlines()
    assert rows[1] == "m,eta_numerator,eta_denominator,eta_float"
    assert rows[2] == "0,1,1,1.0"
    assert len(rows) == 2 + 33


def test_verify_unknown_suite_errors(tmp_path, capsys):
    assert run("verify", "--suite", "nope") == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "KeyError"
    assert "nope" in err["message"]


def test_config_merge_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"system": "fibonacci", "R": 100.0}))
    out = tmp_path / "gen.csv"
    assert run("--config", str(cfg), "generate", "--R", "50",
               "--out", str(out)) == 0
    rows = out.read_text().strip().splitlines()
    values = [float(r.split(",")[-1]) for r in rows[2:]]
    assert max(values) <= 50.0


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"system": "fibonacci", "bogus": 1}))
    assert run("--config", str(cfg), "generate", "--R", "10",
               "--out", str(tmp_path / "x.csv")) == 1
    err = json.loads(capsys.readouterr().err)
    assert "bogus" in err["message"]


def test_missing_required_flag_errors(tmp_path, capsys):
    assert run("generate", "--system", "fibonacci",
               "--out", str(tmp_path / "x.csv")) == 1
    err = json.loads(capsys.readouterr().err)
    assert "--R" in err["message"] or "R" in err["message"]


def test_sample_random_fibonacci_points(tmp_path):
    out = tmp_path / "rf.csv"
    assert run("sample", "--system", "random_fibonacci", "--p", "0.5",
               "--R", "500", "--seed", "7", "--out", str(out)) == 0
    rows = out.read_text().strip().splitlines()
    assert rows[1] == "type,m,n,value"
    assert len(rows) > 300


def test_sample_bernoulli_report(tmp_path):
    out = tmp_path / "bern.json"
    pts = tmp_path / "bern_points.csv"
    assert run("sample", "--system", "bernoulli", "--p", "0.6", "--N", "20000",
               "--seed", "42", "--out", str(out),
               "--points-out", str(pts)) == 0
    doc = json.loads(out.read_text())
    assert doc["params"] == {"model": "bernoulli", "p": 0.6, "N": 20000}
    assert set(doc["predictions"]) == {"gamma_0", "gamma_off", "nu_corr_0"}
    assert pts.exists()


def test_split_outputs(tmp_path):
    out_dir = tmp_path / "split"
    assert run("split", "--system", "thue_morse", "--R", "512",
               "--out", str(out_dir)) == 0
    files = sorted(p.name for p in out_dir.iterdir())
    assert files == ["nu_a.csv", "nu_b.csv", "omega_a.csv", "omega_b.csv",
                     "splitting.json"]
    doc = json.loads((out_dir / "splitting.json").read_text())
    assert doc["alphas"] == {"a": 0.5, "b": 0.5}


def test_fb_scan_csv(tmp_path):
    out = tmp_path / "fb.csv"
    assert run("fb", "--system", "fibonacci", "--R-grid", "100,400",
               "--k-preset", "module", "--out", str(out)) == 0
    rows = out.read_text().strip().splitlines()
    assert rows[1] == "k_a,k_b,k_value,R,re,im,abs,cauchy_diff"
    # first row of each k has an empty cauchy field
    first = rows[2].split(",")
    assert first[-1] == ""


def test_project_json_format(tmp_path):
    out = tmp_path / "proj.json"
    assert run("project", "--window-preset", "fibonacci", "--type", "b",
               "--R", "30", "--format", "json", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["type"] == "b"
    assert all(set(p) == {"m", "n", "value"} for p in doc["points"])


def test_project_with_windows_file(tmp_path):
    wf = tmp_path / "win.json"
    wf.write_text(json.dumps({
        "a": [{"lo": {"m": -2, "n": 1}, "hi": {"m": -1, "n": 1},
               "lo_closed": True, "hi_closed": False}],
    }))
    out = tmp_path / "proj.csv"
    assert run("project", "--windows-file", str(wf), "--type", "a",
               "--R", "100", "--out", str(out)) == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) > 40  # about 100/sqrt(5) points


def test_run_suite_all_aggregates(monkeypatch):
    from combsplit import suites
    from combsplit.stochastic import Check

    def fake(name, ok):
        def suite(seed=None):
            return suites.SuiteReport(
                name, (Check("c", 0.0, 1.0, ok),), {}
            )
        return suite

    monkeypatch.setattr(
        suites, "_SUITES", {"x": fake("x", True), "y": fake("y", True)}
    )
    reports = suites.run_suite("all")
    assert [r.suite for r in reports] == ["x", "y"]
    assert all(r.passed for r in reports)

    monkeypatch.setattr(
        suites, "_SUITES", {"x": fake("x", True), "y": fake("y", False)}
    )
    assert [r.passed for r in suites.run_suite("all")] == [True, False]
