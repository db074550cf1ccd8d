import json

from cmsunit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out.strip(), out.err.strip()


def test_hcp(capsys):
    code, out, _ = run(capsys, "hcp", "--disc", "-11")
    assert code == 0 and out == "x + 32768"
    code, out, _ = run(capsys, "hcp", "--disc", "-3")
    assert code == 0 and out == "x"
    code, _, err = run(capsys, "hcp", "--disc", "-5")
    assert code == 2 and "not an imaginary quadratic discriminant" in err


def test_hcp_json(capsys):
    code, out, _ = run(capsys, "hcp", "--disc", "-23", "--json")
    assert code == 0
    d = json.loads(out)
    assert d["degree"] == 3
    assert d["coefficients"] == ["12771880859375", "-5151296875", "3491750", "1"]


def test_norm(capsys):
    code, out, _ = run(capsys, "norm", "--disc", "-11", "--jzero", "0")
    assert code == 0 and out == "-2^15"
    code, out, _ = run(capsys, "norm", "--disc", "-175", "--jzero", "0")
    assert code == 0
    assert any(part.startswith("5^") for part in out.lstrip("-").split("*"))
    code, out, _ = run(capsys, "norm", "--disc", "-4", "--jzero", "1728")
    assert code == 0 and out == "0"
    code, out, _ = run(capsys, "norm", "--disc", "-175", "--jzero", "0", "--json")
    d = json.loads(out)
    assert dict(d["factors"])["5"] >= 3
    assert d["complete"] is True
    assert int(d["norm"]) == d["sign"] * eval(
        "*".join(f"{p}**{e}" for p, e in d["factors"]) or "1"
    ) * int(d["cofactor"])


def test_survey_cmd(capsys, tmp_path):
    out_dir = tmp_path / "out"
    code, out, _ = run(
        capsys, "survey", "--jzero", "0", "--max", "100", "--smax", "7",
        "--out", str(out_dir), "--format", "both",
    )
    assert code == 0
    assert (out_dir / "records.csv").exists()
    assert (out_dir / "records.json").exists()
    assert (out_dir / "table.csv").exists()
    assert (out_dir / "table.json").exists()
    # determinism: a second run writes byte-identical files
    first = (out_dir / "records.csv").read_bytes()
    code, _, _ = run(
        capsys, "survey", "--jzero", "0", "--max", "100", "--smax", "7",
        "--out", str(out_dir), "--format", "both",
    )
    assert code == 0 and (out_dir / "records.csv").read_bytes() == first
    table = json.loads((out_dir / "table.json").read_text())
    row1 = table["rows"][0]
    assert row1["count"] == 1 and row1["delta_max"] == -11 and row1["primes"] == [2]


def test_survey_rejects_non_singular_j0(capsys, tmp_path):
    code, _, err = run(
        capsys, "survey", "--jzero", "5", "--max", "50", "--smax", "2",
        "--out", str(tmp_path / "x"),
    )
    assert code == 2 and "singular" in err


def test_bound_generic(capsys):
    code, out, _ = run(
        capsys, "bound", "--delta0", "-7", "--jzero", "-3375", "--primes", "13,17",
        "--json",
    )
    assert code == 0
    d = json.loads(out)
    assert d["variant"] == "generic"
    assert 75 <= d["log10_threshold"] <= 85
    assert d["breakdown"]["total"] <= 1


def test_bound_nice_pair_failure(capsys):
    code, _, err = run(
        capsys, "bound", "--delta0", "-7", "--jzero", "-3375", "--primes", "7,13",
    )
    assert code == 5 and "delta0" in err


def test_bound_usage_errors(capsys):
    code, _, err = run(capsys, "bound", "--delta0", "-7", "--jzero", "-3375")
    assert code == 2
    code, _, err = run(
        capsys, "bound", "--delta0", "-7", "--jzero", "-1000", "--primes", "13,17"
    )
    assert code == 2 and "-3375" in err


def test_bound_variants(capsys):
    code, out, _ = run(capsys, "bound", "--variant", "j0", "--ell", "5", "--k", "1.0",
                       "--json")
    assert code == 0
    d = json.loads(out)
    assert d["variant"] == "j0" and d["log10_threshold"] > 1e40
    code, out, _ = run(capsys, "bound", "--variant", "1728", "--ell", "7", "--json")
    d = json.loads(out)
    assert code == 0 and 100 < d["log10_threshold"] < 130
    code, _, err = run(capsys, "bound", "--variant", "j0", "--ell", "4")
    assert code == 2


def test_witness(capsys):
    code, out, _ = run(capsys, "witness", "--ell", "5", "--n", "0")
    assert code == 0 and "D = -23" in out and out.endswith("PASS")
    code, out, _ = run(capsys, "witness", "--ell", "11", "--n", "0", "--json")
    d = json.loads(out)
    assert d["discriminant"] == -47 and d["pass"] is True and d["observed"] >= 3
    code, _, err = run(capsys, "witness", "--ell", "7", "--n", "0")
    assert code == 2


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("grid_ceiling = 1e20\n")
    code, _, err = run(
        capsys, "--config", str(cfg), "bound", "--delta0", "-7", "--jzero", "-3375",
        "--primes", "13,17",
    )
    assert code == 4 and "1e20" in err


def test_config_env(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("grid_ceiling = 1e20\n")
    monkeypatch.setenv("CM_SUNIT_CONFIG", str(cfg))
    code, _, err = run(
        capsys, "bound", "--delta0", "-7", "--jzero", "-3375", "--primes", "13,17",
    )
    assert code == 4
