"""End-to-end CLI behaviour: exit codes, CSV schemas, determinism."""

import pytest

from mppa.cli import main

HEADERS = {
    "trace.csv": "n,znorm_dist_s,dz,res_Jn,res_J,dist_target",
    "metastability.csv": "k,f_spec,empirical,bound,verdict",
    "asymptotic.csv": "quantity,k,f_spec,empirical,bound,verdict",
    "checks.csv": "check,detail,status",
}


def first_line(path):
    return path.read_text(encoding="utf-8").splitlines()[0]


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# --- run -----------------------------------------------------------------------


def test_run_experiment_b(tmp_path, capsys, config_b_text):
    cfg = write_cfg(tmp_path, config_b_text)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    for name, header in HEADERS.items():
        assert first_line(out / name) == header

    lines = (out / "trace.csv").read_text().splitlines()
    assert len(lines) == 2002  # header + horizon 2000 inclusive
    meta = (out / "metastability.csv").read_text().splitlines()
    assert len(meta) == 1 + 4 * 2  # ks 0..3 x two counting functions
    asym = (out / "asymptotic.csv").read_text().splitlines()
    assert len(asym) == 1 + 3 * 4 * 2
    checks = (out / "checks.csv").read_text().splitlines()[1:]
    assert all(row.rsplit(",", 1)[1] == "PASS" for row in checks)
    assert capsys.readouterr().err == ""


def test_run_experiment_a(tmp_path, config_a_text):
    cfg = write_cfg(tmp_path, config_a_text)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    meta = (out / "metastability.csv").read_text().splitlines()
    assert len(meta) == 1 + 10 * 3
    checks = (out / "checks.csv").read_text().splitlines()[1:]
    assert sorted(row.split(",", 1)[0] for row in checks) == sorted(
        ("anchors", "boundedness", "wbound", "recurrence", "resolvent_drift",
         "resolvent_identity", "gap_decrease"))
    assert all(row.rsplit(",", 1)[1] == "PASS" for row in checks)


def test_run_is_deterministic(tmp_path, config_b_text):
    cfg = write_cfg(tmp_path, config_b_text)
    for out in ("one", "two"):
        assert main(["run", str(cfg), "--out", str(tmp_path / out)]) == 0
    for name in HEADERS:
        a = (tmp_path / "one" / name).read_bytes()
        b = (tmp_path / "two" / name).read_bytes()
        assert a == b, name


def test_run_default_output_dir(tmp_path, config_b_text):
    cfg = write_cfg(tmp_path, config_b_text, name="myexp.cfg")
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "myexp_out" / "trace.csv").is_file()


def test_run_far_start_fails_checks(tmp_path, capsys, config_a_text):
    text = (config_a_text
            .replace("z0 = 0,0", "z0 = 4,4")
            .replace("N3 = 4", "N3 = 1")
            .replace("horizon = 10000", "horizon = 60")
            .replace("ks = 0,1,2,3,4,5,6,7,8,9", "ks = 0")
            .replace("fs = const 0; const 10; id", "fs = const 0"))
    cfg = write_cfg(tmp_path, text)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "check failed: anchors" in err
    assert "check failed: boundedness" in err
    rows = (out / "checks.csv").read_text().splitlines()[1:]
    status = {row.split(",", 1)[0]: row.rsplit(",", 1)[1] for row in rows}
    assert status["anchors"] == "FAIL"
    assert status["boundedness"] == "FAIL"


def test_run_rejects_broken_moduli(tmp_path, capsys, config_a_text):
    cfg = write_cfg(tmp_path, config_a_text.replace("ell = id",
                                                    "ell = const 0"))
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 2
    assert "moduli violation" in capsys.readouterr().err


def test_run_horizon_zero(tmp_path, capsys, config_b_text):
    cfg = write_cfg(tmp_path,
                    config_b_text.replace("horizon = 2000", "horizon = 0"))
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    assert "header-only" in capsys.readouterr().err
    assert (out / "metastability.csv").read_text().splitlines() == [
        HEADERS["metastability.csv"]]
    assert (out / "asymptotic.csv").read_text().splitlines() == [
        HEADERS["asymptotic.csv"]]
    rows = (out / "checks.csv").read_text().splitlines()[1:]
    assert all(row.rsplit(",", 1)[1] == "PASS" for row in rows)
    assert any("vacuous" in row for row in rows)


def test_run_missing_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.cfg")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_run_bad_config_reports_each_error(tmp_path, capsys, config_b_text):
    text = config_b_text.replace("a = 2", "a = x") + "bogus = 1\n"
    cfg = write_cfg(tmp_path, text)
    assert main(["run", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert err.count("config error:") >= 2


# --- bound ---------------------------------------------------------------------


@pytest.mark.parametrize("argv, row", [
    (["bound", "{a}", "zeta", "--k", "0", "--n", "0"], "zeta,0,,0"),
    (["bound", "{a}", "theta", "--k", "0", "--n", "0", "--t", "1",
      "--fspec", "id"], "theta,0,id,2055"),
    (["bound", "{a}", "phi", "--k", "0", "--fspec", "const 0"],
     "phi,0,const 0,BUDGET_EXCEEDED(R)"),
    (["bound", "{a}", "R", "--k", "3", "--t", "2"], "R,3,,160"),
    (["bound", "{a}", "nu", "--k", "1"], "nu,1,,416"),
    (["bound", "{a}", "mu", "--k", "0"], "mu,0,,72"),
])
def test_bound_rows(tmp_path, capsys, config_a_text, argv, row):
    cfg = write_cfg(tmp_path, config_a_text)
    argv = [a.replace("{a}", str(cfg)) for a in argv]
    assert main(argv) == 0
    assert capsys.readouterr().out == f"name,k,f_spec,value\n{row}\n"


def test_bound_sigma_with_override(tmp_path, capsys, config_a_text):
    # the derived D = 4N^2 is never 1, so window width 1 takes --d
    cfg = write_cfg(tmp_path, config_a_text.replace("L = expceil 4",
                                                    "L = id"))
    assert main(["bound", str(cfg), "sigma", "--k", "0", "--n", "0",
                 "--d", "1"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "sigma,0,,3"


def test_bound_needs_fspec(tmp_path, capsys, config_a_text):
    cfg = write_cfg(tmp_path, config_a_text)
    assert main(["bound", str(cfg), "theta"]) == 2
    assert "needs --fspec" in capsys.readouterr().err


def test_bound_unknown_name(tmp_path, capsys, config_a_text):
    cfg = write_cfg(tmp_path, config_a_text)
    assert main(["bound", str(cfg), "omega"]) == 2
    assert "unknown bound name" in capsys.readouterr().err


def test_bound_bad_fspec(tmp_path, capsys, config_a_text):
    cfg = write_cfg(tmp_path, config_a_text)
    assert main(["bound", str(cfg), "theta", "--fspec", "wat 3"]) == 2
    assert "bad fspec" in capsys.readouterr().err


def test_bound_domain_error(tmp_path, capsys, config_a_text):
    cfg = write_cfg(tmp_path, config_a_text)
    assert main(["bound", str(cfg), "sigma", "--d", "0"]) == 2
    assert "bound error" in capsys.readouterr().err


# --- oracle ----------------------------------------------------------------------


def test_oracle_single_lemma(capsys):
    assert main(["oracle", "--lemma", "ratap", "--trials", "5"]) == 0
    assert capsys.readouterr().out == \
        "lemma,trials,passes,status\nratap,5,5,PASS\n"


def test_oracle_zero_trials(capsys):
    assert main(["oracle", "--lemma", "xu", "--trials", "0"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[1] == "xu,0,0,PASS"
    assert "vacuous" in captured.err


def test_oracle_all_lemmas(capsys):
    assert main(["oracle", "--trials", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "lemma,trials,passes,status"
    assert sorted(line.split(",")[0] for line in lines[1:]) == sorted(
        ("ratap", "limsup2", "xu", "suzuki1", "suzuki2"))
    assert all(line.endswith(",1,1,PASS") for line in lines[1:])


def test_oracle_unknown_lemma():
    assert main(["oracle", "--lemma", "flurble"]) == 2


def test_oracle_negative_trials(capsys):
    assert main(["oracle", "--lemma", "ratap", "--trials", "-1"]) == 2
    assert "error" in capsys.readouterr().err


# --- verify / entry ----------------------------------------------------------------


def test_verify_missing_config(tmp_path, capsys):
    assert main(["verify", str(tmp_path / "nope.cfg")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_no_arguments_is_usage_error():
    assert main([]) == 2


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "usage" in capsys.readouterr().out
