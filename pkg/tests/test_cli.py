import json


from affgeo import cli


def run(args):
    return cli.main(args)


def test_list_has_enough_scenarios(capsys):
    assert run(["list"]) == 0
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.strip()]
    assert len(lines) >= 8


def test_list_json_and_kind_filter(capsys):
    assert run(["list", "--json", "--kind", "newton"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert rows and all(r["kind"] == "newton" for r in rows)


def test_missing_scenario_exits_2(tmp_path, capsys):
    assert run(["run", str(tmp_path / "nope.ini")]) == 2


def test_malformed_scenario_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[scenario]\nkind = timedep\nname = bad\n")
    assert run(["run", str(bad), "--out", str(tmp_path)]) == 2


def test_unparseable_expression_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(
        "[scenario]\nkind = timedep\nname = bad\n"
        "[system]\ndim = 1\nhamiltonian = \"sin(q1)*\"\n"
        "[integration]\nstep = 0.1\nduration = 1\ninitial = 0, 0\n")
    assert run(["run", str(bad), "--out", str(tmp_path)]) == 2


def test_passing_scenario_exits_0(tmp_path, capsys):
    assert run(["run", "so3_affgebra", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "so3_affgebra_report.json").read_text())
    assert report["pass"] is True
    assert report["seed"] == 0


def test_failing_scenario_exits_1_with_witness(tmp_path, capsys):
    assert run(["run", "cross_product_affgebra_bad", "--out", str(tmp_path)]) == 1
    report = json.loads(
        (tmp_path / "cross_product_affgebra_bad_report.json").read_text())
    jacobi = [c for c in report["checks"] if c["check_name"] == "jacobi"][0]
    assert jacobi["pass"] is False
    assert "witness" in jacobi and "triple" in jacobi["witness"]


def test_flipped_reduction_scenario_fails(tmp_path, capsys):
    assert run(["run", "reduction_flipped", "--out", str(tmp_path)]) == 1


def test_domain_error_exits_3(tmp_path, capsys):
    bad = tmp_path / "blowup.ini"
    bad.write_text(
        "[scenario]\nkind = timedep\nname = blowup\nseed = 0\n"
        "[system]\ndim = 1\nhamiltonian = \"q1^2*p1^2\"\n"
        "[integration]\nstep = 0.5\nduration = 400\ninitial = 1.0, 1.0\n")
    assert run(["run", str(bad), "--out", str(tmp_path)]) == 3


def test_env_var_sets_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("AFFGEO_OUT", str(tmp_path))
    assert run(["run", "abelian_affgebra"]) == 0
    assert (tmp_path / "abelian_affgebra_report.json").exists()


def test_json_flag_prints_report(tmp_path, capsys):
    assert run(["run", "duality_suite", "--out", str(tmp_path), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["scenario"] == "duality_suite"
    assert payload["pass"] is True


def test_seed_recorded_in_report(tmp_path, capsys):
    assert run(["run", "abelian_affgebra", "--seed", "7",
                "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "abelian_affgebra_report.json").read_text())
    assert report["seed"] == 7


def test_bundled_oscillator_writes_expected_rows(tmp_path, capsys):
    assert run(["run", "oscillator_timedep", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "oscillator_timedep.csv").read_bytes().split(b"\r\n")
    rows = [ln for ln in lines if ln]
    assert len(rows) == 10002  # header plus duration/step + 1 states
    assert rows[0].startswith(b"step,time,q1,p1,t")
